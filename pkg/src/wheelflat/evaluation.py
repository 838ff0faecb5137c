"""Detection and localization accuracy, and the per-level metrics table."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .flatgen import POSITIONS, WheelPosition

HEIGHT_NAMES = ("1e-4", "1e-3", "1e-2", "1e-1", "1e-0")
POSITION_NAMES = ("Front-Left", "Front-Right", "Rear-Left", "Rear-Right")


def localize(prediction) -> WheelPosition:
    """Wheel with the largest predicted height; ties go to the earlier channel."""
    pred = np.asarray(prediction, dtype=float)
    if pred.shape != (4,):
        raise ValueError(f"expected 4 predictions, got shape {pred.shape}")
    return POSITIONS[int(np.argmax(pred))]


def _check_aligned(predictions, labels):
    predictions = np.asarray(predictions, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if predictions.shape != labels.shape or predictions.ndim != 2 or predictions.shape[1] != 4:
        raise ValueError(
            f"misaligned predictions {predictions.shape} and labels {labels.shape}"
        )
    return predictions, labels


def sample_detection_accuracy(predictions, labels) -> np.ndarray:
    """Per-sample ``clamp(1 - max_i |pred_i - label_i|, 0, 1)``."""
    predictions, labels = _check_aligned(predictions, labels)
    err = np.max(np.abs(predictions - labels), axis=1)
    return np.clip(1.0 - err, 0.0, 1.0)


def _group_means(values, groups, n_groups):
    out = np.full(n_groups, np.nan)
    for g in range(n_groups):
        sel = groups == g
        if sel.any():
            out[g] = values[sel].mean()
    return out


def detection_accuracy(predictions, labels, height_bins) -> np.ndarray:
    """Mean per-sample detection accuracy for each of the 5 height bins (NaN if empty)."""
    acc = sample_detection_accuracy(predictions, labels)
    height_bins = np.asarray(height_bins)
    if height_bins.shape != acc.shape:
        raise ValueError("height bins not aligned with predictions")
    return _group_means(acc, height_bins, 5)


def localization_accuracy(predictions, positions) -> np.ndarray:
    """Fraction of correct argmax localizations per true position (NaN if empty)."""
    predictions = np.asarray(predictions, dtype=float)
    positions = np.asarray(positions)
    if predictions.ndim != 2 or predictions.shape[1] != 4 or positions.shape != predictions.shape[:1]:
        raise ValueError(
            f"misaligned predictions {predictions.shape} and positions {positions.shape}"
        )
    hit = (np.argmax(predictions, axis=1) == positions).astype(float)
    return _group_means(hit, positions, 4)


@dataclass
class MetricsTable:
    levels: list[int]
    detection: np.ndarray  # (5 heights, n_levels)
    localization: np.ndarray  # (4 positions, n_levels)
    extra: dict = field(default_factory=dict)

    @property
    def detection_average(self) -> np.ndarray:
        return np.nanmean(self.detection, axis=0)

    @property
    def localization_average(self) -> np.ndarray:
        return np.nanmean(self.localization, axis=0)

    def column(self, level: int) -> int:
        return self.levels.index(level)

    def to_csv(self, path) -> None:
        """Two blocks: detection by height, then localization by wheel."""
        cols = [f"L{j}" for j in self.levels]
        fmt = lambda v: repr(float(v))  # noqa: E731
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["table", "group"] + cols)
            for name, row in zip(HEIGHT_NAMES[::-1], self.detection[::-1]):
                w.writerow(["detection", name] + [fmt(v) for v in row])
            w.writerow(["detection", "Average"] + [fmt(v) for v in self.detection_average])
            for name, row in zip(POSITION_NAMES, self.localization):
                w.writerow(["localization", name] + [fmt(v) for v in row])
            w.writerow(["localization", "Average"] + [fmt(v) for v in self.localization_average])

    def to_long_csv(self, path) -> None:
        """(table, level, group, accuracy) rows for surface plots."""
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["table", "level", "group", "accuracy"])
            for c, j in enumerate(self.levels):
                for name, row in zip(HEIGHT_NAMES, self.detection):
                    w.writerow(["detection", j, name, repr(float(row[c]))])
                for name, row in zip(POSITION_NAMES, self.localization):
                    w.writerow(["localization", j, name, repr(float(row[c]))])

    @classmethod
    def from_csv(cls, path) -> "MetricsTable":
        with open(Path(path), newline="") as fh:
            rows = list(csv.reader(fh))
        levels = [int(c[1:]) for c in rows[0][2:]]
        det = [r[2:] for r in rows[1:] if r[0] == "detection" and r[1] != "Average"][::-1]
        loc = [r[2:] for r in rows[1:] if r[0] == "localization" and r[1] != "Average"]
        return cls(levels, np.array(det, dtype=float), np.array(loc, dtype=float))


def evaluate(predictions, dataset) -> tuple[np.ndarray, np.ndarray]:
    """(detection per height bin, localization per position) on one dataset."""
    det = detection_accuracy(predictions, dataset.labels, dataset.height_bins)
    loc = localization_accuracy(predictions, dataset.positions)
    return det, loc
