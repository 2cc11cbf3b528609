#!/usr/bin/env python3
"""Bootstrap inclusion frequencies from one or more `lppi bootstrap` runs."""
import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("runs", nargs="+", type=Path, help="bootstrap output directories")
    ap.add_argument("--labels", nargs="*")
    ap.add_argument("--top", type=int, default=25, help="variables shown, by highest frequency in the first run")
    ap.add_argument("-o", "--output", type=Path, default=Path("inclusion.png"))
    args = ap.parse_args()
    labels = args.labels or [r.name for r in args.runs]

    tables = [pd.read_csv(r / "inclusion.csv").set_index("variable")["frequency"] for r in args.runs]
    order = tables[0].sort_values(ascending=False).index[: args.top]
    x = np.arange(len(order))
    width = 0.8 / len(tables)
    fig, ax = plt.subplots(figsize=(max(6, 0.35 * len(order)), 3.5))
    for k, (table, label) in enumerate(zip(tables, labels)):
        ax.bar(x + k * width, table.reindex(order).fillna(0.0), width, label=label)
    ax.set_xticks(x + 0.4 - width / 2, order, rotation=90)
    ax.set(ylabel="inclusion frequency", ylim=(0, 1))
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
