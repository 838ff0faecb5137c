"""Peak acceleration and per-channel RMS of the surrogate for every height.

    python scripts/signal_summary.py --position fl --seed 0

Handy for checking the peak calibration and how much of the defect energy
leaks into the other three channels.
"""

import argparse

import numpy as np

from wheelflat.flatgen import CHANNELS, G, POSITIONS, SimConfig, flat_geometry, height_ladder, make_flat, synthesize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--position", choices=CHANNELS, default="fl")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = SimConfig(rng_seed=args.seed)
    pos = POSITIONS[CHANNELS.index(args.position)]
    print(f"{'h [m]':>8} {'l [mm]':>8} {'peak [g]':>9} " + " ".join(f"{'rms ' + c:>9}" for c in CHANNELS))
    for h in height_ladder():
        rec = synthesize(make_flat(h, pos), cfg)
        _, length = flat_geometry(h, cfg.wheel_radius_m)
        peak = np.max(np.abs(rec.channels[pos.channel])) / G
        rms = np.sqrt(np.mean(rec.channels**2, axis=1)) / G
        print(f"{h:8.0e} {length * 1e3:8.3f} {peak:9.2f} " + " ".join(f"{v:9.4f}" for v in rms))


if __name__ == "__main__":
    main()
