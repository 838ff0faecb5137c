"""Feature-space augmentation between adjacent flat heights.

For every defect position and every gap between neighbouring ladder
heights, each of the 25 lower-height vectors is paired with each of the 25
higher-height vectors (625 pairs) and mixed at six weights
``alpha = 0, 0.2, ..., 1``.  ``alpha`` runs from the lower height (0) to the
higher one (1); labels are mixed on the encoded log scale, so a gap between
1e-1 and 1e-0 mm at alpha = 0.4 carries the label of 1e-0.6 mm.
"""

from __future__ import annotations

import numpy as np

from .dataset import Dataset

N_INTERIOR = 4


def interpolation_points(n_interior: int = N_INTERIOR) -> np.ndarray:
    """Both end points plus ``n_interior`` evenly spaced mixing weights."""
    return np.linspace(0.0, 1.0, n_interior + 2)


def augment_gap(
    set_a: np.ndarray,
    set_b: np.ndarray,
    label_a: np.ndarray,
    label_b: np.ndarray,
    alpha: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Mix every ordered pair of ``set_a x set_b`` at weight ``alpha``.

    Row ``i * len(set_b) + k`` mixes ``set_a[i]`` with ``set_b[k]``.
    """
    set_a = np.asarray(set_a, dtype=float)
    set_b = np.asarray(set_b, dtype=float)
    if set_a.ndim != 2 or set_a.shape != set_b.shape:
        raise ValueError(f"mismatched sets: {set_a.shape} vs {set_b.shape}")
    label_a = np.asarray(label_a, dtype=float)
    label_b = np.asarray(label_b, dtype=float)
    if np.flatnonzero(label_a).tolist() != np.flatnonzero(label_b).tolist():
        raise ValueError("sets come from different defect positions")
    n_a, n_b = set_a.shape[0], set_b.shape[0]
    feats = (1.0 - alpha) * np.repeat(set_a, n_b, axis=0) + alpha * np.tile(set_b, (n_a, 1))
    label = (1.0 - alpha) * label_a + alpha * label_b
    return feats, np.tile(label, (n_a * n_b, 1))


def augment_all(original: Dataset, n_interior: int = N_INTERIOR) -> Dataset:
    """Augment an original dataset over all gaps and defect positions.

    Output rows are ordered by (gap, alpha, pair index, position).  Rows at
    ``alpha`` 0 or 1 reproduce original vectors and are flagged as original.
    """
    positions = original.positions
    bins = original.height_bins
    if np.any(positions < 0):
        raise ValueError("original dataset contains defect-free rows")
    groups = {}
    for p in range(4):
        for b in range(5):
            rows = np.flatnonzero((positions == p) & (bins == b))
            if rows.size == 0:
                raise ValueError(f"no rows for position {p}, height bin {b}")
            groups[p, b] = rows
    sizes = {rows.size for rows in groups.values()}
    if len(sizes) != 1:
        raise ValueError(f"unequal set sizes across heights/positions: {sorted(sizes)}")

    alphas = interpolation_points(n_interior)
    feats, labels, flags = [], [], []
    for gap in range(4):
        for alpha in alphas:
            block_f, block_l = [], []
            for p in range(4):
                lo, hi = groups[p, gap], groups[p, gap + 1]
                f, y = augment_gap(
                    original.features[lo],
                    original.features[hi],
                    original.labels[lo[0]],
                    original.labels[hi[0]],
                    alpha,
                )
                block_f.append(f)
                block_l.append(y)
            # interleave so position varies fastest within each pair index
            feats.append(np.stack(block_f, axis=1).reshape(-1, original.features.shape[1]))
            labels.append(np.stack(block_l, axis=1).reshape(-1, 4))
            endpoint = alpha == 0.0 or alpha == 1.0
            flags.append(np.full(labels[-1].shape[0], not endpoint))
    return Dataset(np.vstack(feats), np.vstack(labels), original.level, np.concatenate(flags))
