"""Revolution segmentation and RMS energy features (envelope -> WPD -> RMS)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dataset import Dataset, encode_label
from .flatgen import AbaRecord, SimConfig
from .hilbert import analytic_amplitude
from .wpd import DB2, MAX_LEVEL, QmfPair, decompose

SEGMENTS_PER_CHANNEL = 25
DEFAULT_SEGMENT_LEN = 378


@dataclass(frozen=True)
class SignalSegment:
    samples: np.ndarray
    channel: int
    revolution: int
    height_m: float


def segment_len(config: SimConfig, override: int | None = None) -> int:
    """Samples per wheel revolution, rounded up (``override`` wins when given)."""
    if override is not None:
        if override < 8:
            raise ValueError(f"segment length override too small: {override}")
        return int(override)
    samples = config.sample_rate_hz * config.revolution_period_s
    # guard against ceil(376.0000000001) style round-off
    return int(math.ceil(samples - 1e-9))


def segment(
    record: AbaRecord, length: int, count: int = SEGMENTS_PER_CHANNEL
) -> np.ndarray:
    """Cut each channel into ``count`` consecutive non-overlapping windows.

    Returns an array of shape (4, count, length); trailing samples are dropped.
    """
    ch = record.channels
    if ch.shape[1] < count * length:
        raise ValueError(
            f"record has {ch.shape[1]} samples, needs {count * length} for {count} segments"
        )
    return ch[:, : count * length].reshape(4, count, length)


def segment_objects(record: AbaRecord, length: int, count: int = SEGMENTS_PER_CHANNEL):
    """Same windows as :func:`segment`, wrapped as :class:`SignalSegment`."""
    arr = segment(record, length, count)
    return [
        [SignalSegment(arr[c, r], c, r, record.flat.height_m) for r in range(count)]
        for c in range(4)
    ]


def rms(coeffs) -> float:
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.size == 0:
        raise ValueError("rms of an empty series")
    return float(np.sqrt(np.mean(coeffs**2)))


def _leaf_rms(tree, level: int) -> np.ndarray:
    return np.sqrt(np.mean(tree.subspaces(level) ** 2, axis=1))


def extract(segments, level: int, filters: QmfPair = DB2) -> np.ndarray:
    """Feature vector of length 4 * 2**level from four aligned segments.

    Channel blocks are concatenated in (FL, FR, RL, RR) order.
    """
    return extract_levels(segments, [level], filters)[level]


def extract_levels(
    segments, levels: Iterable[int], filters: QmfPair = DB2
) -> dict[int, np.ndarray]:
    """Features for several WPD levels from one decomposition per channel."""
    segments = [np.asarray(getattr(s, "samples", s), dtype=float) for s in segments]
    if len(segments) != 4:
        raise ValueError(f"expected 4 aligned segments, got {len(segments)}")
    levels = sorted(set(levels))
    if not levels or levels[0] < 0 or levels[-1] > MAX_LEVEL:
        raise ValueError(f"levels must lie in 0..{MAX_LEVEL}, got {levels}")
    trees = [decompose(analytic_amplitude(s), levels[-1], filters) for s in segments]
    return {j: np.concatenate([_leaf_rms(t, j) for t in trees]) for j in levels}


def record_features(
    record: AbaRecord, length: int, levels: Sequence[int], count: int = SEGMENTS_PER_CHANNEL
) -> dict[int, np.ndarray]:
    """Per-level feature matrices (count, 4 * 2**j) for one record."""
    segs = segment(record, length, count)
    per_rev = [extract_levels(segs[:, r], levels) for r in range(count)]
    return {j: np.vstack([f[j] for f in per_rev]) for j in levels}


def build_datasets(
    records: Sequence[AbaRecord],
    length: int,
    levels: Sequence[int],
    count: int = SEGMENTS_PER_CHANNEL,
) -> dict[int, Dataset]:
    """Original datasets for every requested level.

    Row order follows the order of ``records`` (callers pass them sorted by
    height, then defect position) and then revolution index.
    """
    feats = {j: [] for j in levels}
    labels = []
    for rec in records:
        per_level = record_features(rec, length, levels, count)
        for j in levels:
            feats[j].append(per_level[j])
        labels.append(np.tile(encode_label(rec.flat), (count, 1)))
    labels = np.vstack(labels)
    return {j: Dataset(np.vstack(feats[j]), labels.copy(), j) for j in levels}
