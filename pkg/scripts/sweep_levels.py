"""Level sweep over several seeds, to see how stable the level trend is.

    python scripts/sweep_levels.py --seeds 0 1 2 --out runs/seeds

Writes one metrics.csv per seed plus summary.csv with the localization and
detection averages per (seed, level).
"""

import argparse
import csv
import logging
from dataclasses import replace
from pathlib import Path

import numpy as np

from wheelflat.config import RunConfig, load
from wheelflat.pipeline import simulate_all, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--levels", type=int, nargs="+")
    ap.add_argument("--max-iter", type=int)
    ap.add_argument("--config")
    ap.add_argument("--out", default="runs/seeds")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    base = load(args.config) if args.config else RunConfig()
    if args.levels:
        base = replace(base, levels=tuple(args.levels))
    if args.max_iter is not None:
        base = replace(base, train=replace(base.train, max_iter=args.max_iter))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for seed in args.seeds:
        cfg = base.with_seed(seed)
        table = sweep(simulate_all(cfg.sim, [h * 1e-3 for h in cfg.heights_mm]), cfg)
        table.to_csv(out / f"metrics_seed{seed}.csv")
        for j, det, loc in zip(table.levels, table.detection_average, table.localization_average):
            rows.append((seed, j, det, loc))

    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "level", "detection_avg", "localization_avg"])
        w.writerows(rows)

    levels = sorted({r[1] for r in rows})
    print(f"{'level':>5} {'loc mean':>9} {'loc min':>8} {'det mean':>9}")
    for j in levels:
        loc = np.array([r[3] for r in rows if r[1] == j])
        det = np.array([r[2] for r in rows if r[1] == j])
        print(f"{j:>5} {loc.mean():9.3f} {loc.min():8.3f} {det.mean():9.3f}")


if __name__ == "__main__":
    main()
