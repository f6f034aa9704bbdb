"""Export the two comparison figures as CSV and, with --plot, as PNG.

    python3 scripts/figure_curves.py --out out [--plot]

Plotting needs matplotlib, which is not a package dependency.
"""
import argparse
import csv
from collections import defaultdict
from pathlib import Path

from arqddf import cli


def read_curves(path):
    lines = Path(path).read_text().splitlines()[1:]
    series = defaultdict(lambda: ([], []))
    for row in csv.DictReader(lines):
        xs, ys = series[f"{row['curve_id']} (L={row['L']})"]
        xs.append(float(row["r"]))
        ys.append(float(row["d"]))
    return series


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out")
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()
    for preset in ("fig-mar-ddf", "fig-cvma-ddf"):
        if cli.main(["curves", "--preset", preset, "--out", args.out]) != 0:
            raise SystemExit(f"{preset} failed")
        if not args.plot:
            continue
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5, 3.5))
        for label, (xs, ys) in read_curves(Path(args.out) / f"{preset}_curves.csv").items():
            ax.plot(xs, ys, label=label)
        ax.set_xlabel("multiplexing gain r")
        ax.set_ylabel("diversity d(r)")
        ax.grid(alpha=0.3)
        ax.legend()
        fig.tight_layout()
        fig.savefig(Path(args.out) / f"{preset}.png", dpi=150)
        print(f"wrote {Path(args.out) / f'{preset}.png'}")


if __name__ == "__main__":
    main()
