"""Wavelet packet decomposition on a balanced binary tree (db2 filters).

Each split is a zero-padded full convolution followed by keeping the odd
output samples, so a node of length ``n`` has children of length
``(n + 3) // 2`` and 378 samples shrink to 8 after six levels.  Children are
kept in natural (Paley) order: node ``n`` at level ``j`` has its lowpass
child at ``2n`` and its highpass child at ``2n + 1``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAX_LEVEL = 6


@dataclass(frozen=True)
class QmfPair:
    lowpass: np.ndarray
    highpass: np.ndarray

    @classmethod
    def from_lowpass(cls, g) -> "QmfPair":
        g = np.asarray(g, dtype=float)
        k = np.arange(g.size)
        h = (-1.0) ** k * g[::-1]
        return cls(g, h)

    @property
    def length(self) -> int:
        return self.lowpass.size


def db2() -> QmfPair:
    """Daubechies filter pair with 4 taps and 2 vanishing moments."""
    s3 = math.sqrt(3.0)
    d = 4.0 * math.sqrt(2.0)
    return QmfPair.from_lowpass([(1 + s3) / d, (3 + s3) / d, (3 - s3) / d, (1 - s3) / d])


DB2 = db2()


def child_length(n: int, filter_length: int = 4) -> int:
    return (n + filter_length - 1) // 2


def decompose_step(parent: np.ndarray, filters: QmfPair = DB2) -> tuple[np.ndarray, np.ndarray]:
    """Split one node into its (approximation, detail) children."""
    parent = np.asarray(parent, dtype=float)
    if parent.ndim != 1 or parent.size < 2:
        raise ValueError(f"parent must be 1-D with at least 2 samples, got shape {parent.shape}")
    approx = np.convolve(parent, filters.lowpass)[1::2]
    detail = np.convolve(parent, filters.highpass)[1::2]
    return approx, detail


@dataclass(frozen=True)
class WpdTree:
    """All nodes of a decomposition; ``nodes[i]`` holds the 2**i subspaces of level i."""

    level: int
    nodes: tuple[tuple[np.ndarray, ...], ...]
    input_length: int

    @property
    def leaves(self) -> tuple[np.ndarray, ...]:
        return self.nodes[self.level]

    def subspaces(self, level: int | None = None) -> np.ndarray:
        """Subspaces of one level stacked into a (2**level, len) array."""
        level = self.level if level is None else level
        return np.vstack(self.nodes[level])

    def to_csv(self, path, level: int | None = None) -> None:
        """Leaf coefficients, one row per subspace (e.g. 64 x 8 at level 6)."""
        mat = self.subspaces(level)
        with open(Path(path), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["node"] + [f"k{i}" for i in range(mat.shape[1])])
            for n, row in enumerate(mat):
                writer.writerow([n] + [repr(float(v)) for v in row])


def decompose(amplitude: np.ndarray, level: int, filters: QmfPair = DB2) -> WpdTree:
    """Full wavelet packet tree of ``amplitude`` down to ``level``."""
    x = np.asarray(amplitude, dtype=float)
    if not 0 <= level <= MAX_LEVEL:
        raise ValueError(f"level must be in 0..{MAX_LEVEL}, got {level}")
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D series, got shape {x.shape}")
    if x.size < max(2, 2**level):
        raise ValueError(f"input of length {x.size} too short for level {level}")
    nodes = [(x,)]
    for _ in range(level):
        children = []
        for node in nodes[-1]:
            children.extend(decompose_step(node, filters))
        nodes.append(tuple(children))
    return WpdTree(level, tuple(nodes), x.size)
