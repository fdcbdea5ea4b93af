"""Roofline, power-line and arch-line sweeps written as CSV and SVG."""
import argparse
from pathlib import Path

from hetmem import default_paper_config
from hetmem.sweeps import SWEEPS, SweepGrid, write_svg


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--no-svg", action="store_true")
    args = ap.parse_args()

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    config = default_paper_config()
    for kind, fn in SWEEPS.items():
        result = fn(config, SweepGrid())
        (out / f"{kind}.csv").write_text(result.to_csv())
        if not args.no_svg:
            write_svg(result, out / f"{kind}.svg")
        peaks = {f"{d:.0%}": result.power_peak(d) for d in result.ridge}
        print(f"{kind}: ridge(0% PMM) = {result.ridge[0.0]:.4g} flop/B; power peaks at AI {peaks}")


if __name__ == "__main__":
    main()
