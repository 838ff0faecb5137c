"""Pivot a metrics_long.csv into level x group grids for surface plots.

    python scripts/surface_grid.py runs/sweep/metrics_long.csv

Prints two grids (detection by height, localization by wheel) and writes
them next to the input as detection_grid.csv and localization_grid.csv.
Optional ``--plot`` draws both surfaces with matplotlib.
"""

import argparse
import csv
from collections import defaultdict
from pathlib import Path

import numpy as np


def read_long(path):
    grids = defaultdict(dict)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            grids[row["table"]][(int(row["level"]), row["group"])] = float(row["accuracy"])
    return grids


def to_grid(cells):
    levels = sorted({j for j, _ in cells})
    groups = list(dict.fromkeys(g for _, g in cells))
    grid = np.array([[cells[(j, g)] for j in levels] for g in groups])
    return levels, groups, grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("metrics_long")
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()

    src = Path(args.metrics_long)
    grids = {name: to_grid(cells) for name, cells in read_long(src).items()}
    for name, (levels, groups, grid) in grids.items():
        with open(src.with_name(f"{name}_grid.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["group"] + [f"L{j}" for j in levels])
            for g, row in zip(groups, grid):
                w.writerow([g] + [f"{v:.4f}" for v in row])
        print(name)
        print("  " + " ".join(f"{'L%d' % j:>6}" for j in levels))
        for g, row in zip(groups, grid):
            print("  " + " ".join(f"{v:6.3f}" for v in row) + f"  {g}")

    if args.plot:
        import matplotlib.pyplot as plt

        fig = plt.figure(figsize=(10, 4))
        for k, (name, (levels, groups, grid)) in enumerate(grids.items()):
            ax = fig.add_subplot(1, len(grids), k + 1, projection="3d")
            xx, yy = np.meshgrid(levels, np.arange(len(groups)))
            ax.plot_surface(xx, yy, grid, cmap="viridis")
            ax.set_yticks(range(len(groups)), groups, fontsize=7)
            ax.set_xlabel("WPD level")
            ax.set_title(name)
        fig.savefig(src.with_name("surfaces.png"), dpi=120, bbox_inches="tight")


if __name__ == "__main__":
    main()
