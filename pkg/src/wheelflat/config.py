"""Run configuration: one JSON file, validated up front, unknown keys rejected."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .flatgen import SimConfig
from .fnn import TrainConfig
from .wpd import MAX_LEVEL


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    level: int = 6
    levels: tuple[int, ...] = tuple(range(MAX_LEVEL + 1))
    heights_mm: tuple[float, ...] = (1e-4, 1e-3, 1e-2, 1e-1, 1e-0)
    segment_len_override: int | None = 378
    segments_per_channel: int = 25
    augment: bool = True
    interpolation_points: int = 4

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(int(j) for j in self.levels))
        object.__setattr__(self, "heights_mm", tuple(float(h) for h in self.heights_mm))
        for j in (self.level, *self.levels):
            if not 0 <= j <= MAX_LEVEL:
                raise ConfigError(f"WPD level {j} outside 0..{MAX_LEVEL}")
        if not self.levels:
            raise ConfigError("levels must not be empty")
        allowed = {1e-4, 1e-3, 1e-2, 1e-1, 1e-0}
        for h in self.heights_mm:
            if not any(abs(h - a) <= 1e-12 * a for a in allowed):
                raise ConfigError(f"height {h} mm is not on the ladder {sorted(allowed)}")
        if self.segments_per_channel < 1 or self.interpolation_points < 0:
            raise ConfigError("segments_per_channel must be >= 1, interpolation_points >= 0")

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, sim=replace(self.sim, rng_seed=seed), train=replace(self.train, seed=seed))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sim"] = self.sim.to_dict()
        d["levels"] = list(self.levels)
        d["heights_mm"] = list(self.heights_mm)
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _build(cls, data, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    try:
        return cls(**data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def from_dict(data: dict) -> RunConfig:
    data = dict(data)
    sim = _build(SimConfig, data.pop("sim", {}), "sim")
    train = _build(TrainConfig, data.pop("train", {}), "train")
    return _build(RunConfig, {**data, "sim": sim, "train": train}, "config")


def load(path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return from_dict(data)
