"""Accumulate bandwidth vs data size: spill policy against Memory mode."""
import argparse
import csv
import sys

import numpy as np

from hetmem import GB, default_paper_config, preset
from hetmem.engine import Scenario, capacity_limit, evaluate
from hetmem.placement import OutOfMemory


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=18)
    ap.add_argument("--out", help="CSV path (stdout if omitted)")
    args = ap.parse_args()

    config = default_paper_config()
    top = capacity_limit("policy_spill", config)
    sizes = np.unique(np.geomspace(16 * GB, top, args.points).astype(np.int64))
    rows = []
    for size in sizes:
        row = {"data_size_gb": f"{size / GB:.6g}"}
        for mode in ("policy_spill", "memory_mode_two_socket"):
            try:
                r = evaluate(Scenario(mode, mode, preset("accumulate").replace(data_size=int(size))), config)
                row[mode] = f"{r.bandwidth:.6g}"
            except OutOfMemory:
                row[mode] = ""
        rows.append(row)

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.DictWriter(fh, ["data_size_gb", "policy_spill", "memory_mode_two_socket"], lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


if __name__ == "__main__":
    main()
