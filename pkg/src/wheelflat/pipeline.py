"""End-to-end stages: simulate, load, extract, augment, train, evaluate, sweep."""

from __future__ import annotations

import logging
import re
import time
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import augment, evaluation, features, fnn
from .config import RunConfig
from .dataset import Dataset
from .flatgen import (
    CHANNELS,
    POSITIONS,
    AbaRecord,
    SimConfig,
    WheelPosition,
    height_ladder,
    make_flat,
    read_aba_csv,
    synthesize,
)

logger = logging.getLogger(__name__)

LADDER_EXPONENTS = (-4, -3, -2, -1, 0)
_RECORD_NAME = re.compile(r"^aba_h1e(-?\d+)_(fl|fr|rl|rr)\.csv$")


def record_filename(height_m: float, position: WheelPosition) -> str:
    exp = int(round(np.log10(height_m * 1e3)))
    return f"aba_h1e{exp}_{position.code}.csv"


def _ladder_index(height_m: float) -> int:
    ladder = height_ladder()
    return min(range(len(ladder)), key=lambda i: abs(np.log10(ladder[i] / height_m)))


def simulate_all(config: SimConfig, heights: Sequence[float] | None = None) -> list[AbaRecord]:
    """Records for every (height, defect position), ordered height-major.

    Each record draws from its own seed, derived from ``config.rng_seed`` and
    its grid cell, so noise differs between records but stays reproducible.
    """
    heights = height_ladder() if heights is None else sorted(heights)
    records = []
    for h in heights:
        hi = _ladder_index(h)
        for p, pos in enumerate(POSITIONS):
            rec_cfg = replace(config, rng_seed=config.rng_seed * 1000 + hi * 10 + p)
            records.append(synthesize(make_flat(h, pos, config.wheel_radius_m), rec_cfg))
    return records


def write_records(records: Sequence[AbaRecord], out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for rec in records:
        path = out_dir / record_filename(rec.flat.height_m, rec.flat.location)
        rec.to_csv(path)
        paths.append(path)
    return paths


def load_records(signal_dir, config: SimConfig) -> list[AbaRecord]:
    """Read every ``aba_h1e{exp}_{pos}.csv`` in a directory, sorted by (height, position)."""
    signal_dir = Path(signal_dir)
    if not signal_dir.is_dir():
        raise FileNotFoundError(f"{signal_dir}: signal directory not found")
    found = []
    for path in signal_dir.iterdir():
        m = _RECORD_NAME.match(path.name)
        if m:
            exp = int(m.group(1))
            if exp not in LADDER_EXPONENTS:
                raise ValueError(f"{path}: height 1e{exp} mm is not on the ladder")
            found.append((exp, CHANNELS.index(m.group(2)), path))
    if not found:
        raise FileNotFoundError(f"{signal_dir}: no aba_h*_*.csv files")
    records = []
    expected = config.n_samples
    for exp, ch, path in sorted(found):
        t, channels = read_aba_csv(path)
        if channels.shape[1] != expected:
            raise ValueError(f"{path}: {channels.shape[1]} samples, expected {expected}")
        dt = np.diff(t)
        if not np.allclose(dt, 1.0 / config.sample_rate_hz, rtol=1e-6):
            raise ValueError(f"{path}: time column does not match {config.sample_rate_hz} Hz")
        flat = make_flat(10.0**exp * 1e-3, POSITIONS[ch], config.wheel_radius_m)
        records.append(AbaRecord(channels, config.sample_rate_hz, flat, config))
    return records


def extract_datasets(records, config: RunConfig, levels: Sequence[int]) -> dict[int, Dataset]:
    seg_len = features.segment_len(config.sim, config.segment_len_override)
    return features.build_datasets(records, seg_len, levels, config.segments_per_channel)


def prepare(original: Dataset, config: RunConfig) -> Dataset:
    if not config.augment:
        return original
    return augment.augment_all(original, config.interpolation_points)


def evaluate_model(model: fnn.FnnModel, data: Dataset, rows=None):
    held = data if rows is None or len(rows) == 0 else data.subset(rows)
    return evaluation.evaluate(fnn.forward(model, held.features), held)


def sweep(records, config: RunConfig) -> evaluation.MetricsTable:
    """Extract, augment, train and score on the validation split for each level."""
    levels = list(config.levels)
    originals = extract_datasets(records, config, levels)
    det_cols, loc_cols, extra = [], [], {}
    for j in levels:
        t0 = time.perf_counter()
        data = prepare(originals[j], config)
        model, report = fnn.train(data, config.train)
        det, loc = evaluate_model(model, data, report.val_idx)
        det_cols.append(det)
        loc_cols.append(loc)
        extra[j] = {"final_mse": report.final_mse, "iterations": report.iterations}
        logger.info(
            "level %d: detection %.3f localization %.3f mse %.2e (%d it, %.1f s)",
            j, np.nanmean(det), np.nanmean(loc), report.final_mse, report.iterations,
            time.perf_counter() - t0,
        )
    return evaluation.MetricsTable(levels, np.column_stack(det_cols), np.column_stack(loc_cols), extra)
