#!/usr/bin/env python3
"""KL and ELPD difference against submodel size for one or more `lppi select` runs."""
import argparse
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("runs", nargs="+", type=Path, help="select/evaluate output directories")
    ap.add_argument("--labels", nargs="*", help="legend labels (directory names by default)")
    ap.add_argument("-o", "--output", type=Path, default=Path("path.png"))
    args = ap.parse_args()
    labels = args.labels or [r.name for r in args.runs]

    fig, (ax_kl, ax_elpd) = plt.subplots(1, 2, figsize=(10, 4))
    for run, label in zip(args.runs, labels):
        metrics = json.loads((run / "metrics.json").read_text())
        sizes = [s["size"] for s in metrics["sizes"]]
        ax_kl.plot(sizes, [s["kl"] for s in metrics["sizes"]], marker="o", ms=3, label=label)
        diff = [s["elpd_diff"] for s in metrics["sizes"]]
        se = [s["elpd_diff_se"] for s in metrics["sizes"]]
        ax_elpd.errorbar(sizes, diff, yerr=se, marker="o", ms=3, capsize=2, label=label)
        suggested = metrics.get("suggested_size")
        if suggested is not None:
            ax_elpd.axvline(suggested, ls=":", lw=1, color=ax_elpd.lines[-1].get_color())
    ax_kl.set(xlabel="submodel size", ylabel="weighted KL")
    ax_elpd.axhline(0.0, color="k", lw=0.8)
    ax_elpd.set(xlabel="submodel size", ylabel="ELPD difference to reference")
    ax_elpd.legend()
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
