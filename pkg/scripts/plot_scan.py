#!/usr/bin/env python3
"""Plot scan CSVs: a ratio histogram and the polar region boundary.

Consumes the files written by run_direction_scan.py; purely cosmetic, the
CSVs are the deliverable.
"""

import argparse
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return list(reader)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scan-csv", default="scan_results/scan.csv")
    ap.add_argument("--rotate-csv", default="scan_results/rotate.csv")
    ap.add_argument("--out", default="scan_results/scan.png")
    args = ap.parse_args()

    fig, axes = plt.subplots(1, 3, figsize=(14, 4))

    rows = read_csv(args.scan_csv)
    ratios = np.array([float(r["ratio_prior"]) for r in rows if r["ratio_prior"]])
    axes[0].hist(ratios, bins=40, color="tab:blue")
    axes[0].set_xlabel("certified / prior boundary distance")
    axes[0].set_ylabel("directions")
    axes[0].set_title("improvement over prior bound")

    relax = np.array(
        [float(r["ratio_relax"]) for r in rows if r["ratio_relax"]]
    )
    if relax.size:
        axes[1].hist(relax, bins=40, color="tab:orange")
        axes[1].set_xlabel("certified / relaxation boundary distance")
        axes[1].set_title("gap to the outer bound")
    else:
        axes[1].set_axis_off()
        axes[1].set_title("no relaxation data")

    rot = read_csv(args.rotate_csv)
    theta = np.array([float(r["theta"]) for r in rot])
    for key, color in (("t_cert", "tab:blue"), ("t_prior", "tab:green")):
        vals = np.array([float(r[key]) for r in rot])
        axes[2].plot(vals * np.cos(theta), vals * np.sin(theta), color=color, label=key)
    axes[2].set_aspect("equal")
    axes[2].legend()
    axes[2].set_title("region boundary, rotated direction")

    fig.tight_layout()
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
