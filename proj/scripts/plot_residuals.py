#!/usr/bin/env python3
"""Histograms of latent residuals from `lppi diagnose` for a few submodel sizes."""
import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("run", type=Path, help="diagnose output directory")
    ap.add_argument("--sizes", nargs="*", type=int, help="sizes to show (three spread over the path by default)")
    ap.add_argument("--bins", type=int, default=40)
    ap.add_argument("-o", "--output", type=Path, default=Path("residuals.png"))
    args = ap.parse_args()

    raw = pd.read_csv(args.run / "residuals_raw.csv")
    available = sorted(raw["size"].unique())
    sizes = args.sizes or [available[int(round(q * (len(available) - 1)))] for q in (0.0, 0.5, 0.9)]

    fig, axes = plt.subplots(1, len(sizes), figsize=(4 * len(sizes), 3.5), squeeze=False)
    for ax, size in zip(axes[0], sizes):
        part = raw[raw["size"] == size]
        w = part["weight"].to_numpy()
        r = part["residual"].to_numpy()
        ax.hist(r, bins=args.bins, weights=w / w.sum(), density=True, alpha=0.7)
        mean = np.average(r, weights=w)
        sd = np.sqrt(np.average((r - mean) ** 2, weights=w))
        if sd > 0:
            grid = np.linspace(r.min(), r.max(), 200)
            ax.plot(grid, np.exp(-0.5 * ((grid - mean) / sd) ** 2) / (sd * np.sqrt(2 * np.pi)), "k", lw=1)
        ax.set(title=f"size {size}, sd {sd:.3g}", xlabel="latent residual")
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
