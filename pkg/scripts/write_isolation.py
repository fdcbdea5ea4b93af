"""STREAM copy and triad at the largest size write isolation holds, against
Memory mode and all-PMM placement."""
import argparse

from hetmem import default_paper_config, preset
from hetmem.engine import Scenario, compare


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", choices=("csv", "json"), default="csv")
    args = ap.parse_args()

    config = default_paper_config()
    for name in ("stream_copy", "stream_triad"):
        spec = preset(name)
        # the write stream has to fit in usable DRAM
        size = int(config.usable_dram / spec.write_fraction)
        spec = spec.replace(data_size=size)
        table = compare(
            [Scenario(f"{name}/{m}", m, spec) for m in ("memory_mode_two_socket", "policy_write_isolation",
                                                        "pmm_two_socket")],
            config,
        )
        print(table.to_csv() if args.out == "csv" else table.to_json())


if __name__ == "__main__":
    main()
