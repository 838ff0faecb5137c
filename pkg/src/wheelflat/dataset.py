"""Feature/label dataset container and its CSV layout.

Rows are samples.  CSV columns are ``s0 .. s{D-1}`` followed by the label
columns ``FL, FR, RL, RR`` and, when provenance is tracked, a ``source``
column holding ``original`` or ``augmented``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

LABEL_COLUMNS = ("FL", "FR", "RL", "RR")
LEVEL_WIDTHS = {4 * 2**j: j for j in range(7)}


def encode_height(height_m: float) -> float:
    """Map a flat height to the label scale: 1e-4 mm -> 0.2, 1e-0 mm -> 1.0, 0 -> 0."""
    if height_m == 0:
        return 0.0
    if not 1e-7 * (1 - 1e-9) <= height_m <= 1e-3 * (1 + 1e-9):
        raise ValueError(f"flat height {height_m} m outside [1e-7, 1e-3] m")
    return (math.log10(height_m * 1e3) + 5.0) / 5.0


def decode_height(value: float) -> float:
    """Inverse of :func:`encode_height` (metres); 0 maps back to 0."""
    if value <= 0:
        return 0.0
    return 10.0 ** (5.0 * value - 5.0) * 1e-3


def encode_label(flat) -> np.ndarray:
    """Four-entry label: encoded height at the defect position, 0 elsewhere."""
    y = np.zeros(4)
    y[flat.location.channel] = encode_height(flat.height_m)
    return y


@dataclass
class Dataset:
    features: np.ndarray  # (n_samples, 4 * 2**level)
    labels: np.ndarray  # (n_samples, 4)
    level: int
    augmented: np.ndarray | None = None  # bool per row

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=float)
        if self.features.ndim != 2 or self.labels.ndim != 2 or self.labels.shape[1] != 4:
            raise ValueError(
                f"bad dataset shapes: features {self.features.shape}, labels {self.labels.shape}"
            )
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("feature and label row counts differ")
        if self.features.shape[1] != 4 * 2**self.level:
            raise ValueError(
                f"feature width {self.features.shape[1]} does not match level {self.level}"
            )
        if self.augmented is None:
            self.augmented = np.zeros(len(self), dtype=bool)
        self.augmented = np.asarray(self.augmented, dtype=bool)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def positions(self) -> np.ndarray:
        """True defect channel per row (-1 for defect-free rows)."""
        pos = np.argmax(self.labels, axis=1)
        pos[self.labels.max(axis=1) <= 0] = -1
        return pos

    @property
    def height_bins(self) -> np.ndarray:
        """Ladder index 0..4 (1e-4 .. 1e-0 mm) of the nearest ladder height per row."""
        y = self.labels.max(axis=1)
        exponent = 5.0 * y - 5.0
        # labels sit on a 0.2-spaced exponent grid, never on a .5 boundary
        return np.clip(np.rint(exponent).astype(int) + 4, 0, 4)

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(self.features[rows], self.labels[rows], self.level, self.augmented[rows])

    def to_csv(self, path, provenance: bool = False) -> None:
        width = self.features.shape[1]
        header = [f"s{i}" for i in range(width)] + list(LABEL_COLUMNS)
        if provenance:
            header.append("source")
        with open(Path(path), "w", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for i in range(len(self)):
                vals = [repr(float(v)) for v in self.features[i]]
                vals += [repr(float(v)) for v in self.labels[i]]
                if provenance:
                    vals.append("augmented" if self.augmented[i] else "original")
                fh.write(",".join(vals) + "\n")

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        path = Path(path)
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            provenance = header[-1] == "source"
            names = header[:-1] if provenance else header
            width = len(names) - 4
            if (
                tuple(names[-4:]) != LABEL_COLUMNS
                or width not in LEVEL_WIDTHS
                or names[:width] != [f"s{i}" for i in range(width)]
            ):
                raise ValueError(f"{path}:1: unexpected header")
            rows, flags = [], []
            for lineno, line in enumerate(fh, start=2):
                parts = line.rstrip("\n").split(",")
                if len(parts) != len(header):
                    raise ValueError(
                        f"{path}:{lineno}: expected {len(header)} fields, got {len(parts)}"
                    )
                if provenance:
                    tag = parts.pop()
                    if tag not in ("original", "augmented"):
                        raise ValueError(f"{path}:{lineno}: bad source tag {tag!r}")
                    flags.append(tag == "augmented")
                try:
                    vals = [float(p) for p in parts]
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
                if not all(math.isfinite(v) for v in vals):
                    raise ValueError(f"{path}:{lineno}: non-finite value")
                rows.append(vals)
        if not rows:
            raise ValueError(f"{path}: no rows")
        data = np.array(rows)
        return cls(
            data[:, :width],
            data[:, width:],
            LEVEL_WIDTHS[width],
            np.array(flags, dtype=bool) if provenance else None,
        )
