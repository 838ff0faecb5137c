"""Wheel-flat geometry and surrogate axle-box acceleration (ABA) signals.

The surrogate replaces a multibody simulation with an impulse train (one
impact per wheel revolution) driving a bank of damped modes.  Each impact
is a half-sine force pulse whose duration is the time the wheel needs to
roll over the flat chord, so longer flats push energy towards the lower
modes.  Amplitude scales log-linearly with flat height between two peak
anchors.  All constants live on :class:`SimConfig`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

G = 9.80665  # m/s^2 per g

# Modal frequencies of the flexible wheelset (Hz).
DEFAULT_MODES_HZ = (55.626, 76.292, 136.996, 279.376, 365.859, 445.490, 731.255)
DEFAULT_DAMPING = 0.02
# torsion, 1st/2nd axle bending, 1st umbrella, wheel+axle bending, wheel bending,
# 2nd wheel+axle bending
DEFAULT_OPPOSITE_TRANSFER = (-1.0, 1.0, -1.0, 0.15, 0.6, 0.15, -0.6)


class Wheelset(enum.IntEnum):
    FRONT = 0
    REAR = 1


class Side(enum.IntEnum):
    LEFT = 0
    RIGHT = 1


class Bogie(enum.IntEnum):
    FRONT = 0
    REAR = 1


@dataclass(frozen=True)
class WheelPosition:
    wheelset: Wheelset
    side: Side
    bogie: Bogie = Bogie.FRONT

    @property
    def channel(self) -> int:
        """Index into the fixed channel order (FL, FR, RL, RR)."""
        return 2 * int(self.wheelset) + int(self.side)

    @property
    def code(self) -> str:
        return CHANNELS[self.channel]

    @classmethod
    def from_channel(cls, index: int) -> "WheelPosition":
        if not 0 <= index < 4:
            raise ValueError(f"channel index must be in 0..3, got {index}")
        return cls(Wheelset(index // 2), Side(index % 2))

    @classmethod
    def from_code(cls, code: str) -> "WheelPosition":
        try:
            return cls.from_channel(CHANNELS.index(code.lower()))
        except ValueError:
            raise ValueError(f"unknown wheel position {code!r}; expected one of {CHANNELS}") from None


CHANNELS = ("fl", "fr", "rl", "rr")
POSITIONS = tuple(WheelPosition.from_channel(i) for i in range(4))


@dataclass(frozen=True)
class WheelFlat:
    height_m: float
    angle_rad: float
    skid_length_m: float
    location: WheelPosition


def flat_geometry(height_m: float, wheel_radius_m: float = 0.5) -> tuple[float, float]:
    """Half-angle and skid (chord) length of a sharp-edged flat.

    Inverts ``h = r (1 - cos theta)`` and evaluates ``l = 2 r sin theta``.

    Returns
    -------
    (angle_rad, skid_length_m)
    """
    if not wheel_radius_m > 0:
        raise ValueError(f"wheel radius must be positive, got {wheel_radius_m}")
    if not 0 <= height_m < wheel_radius_m:
        raise ValueError(
            f"flat height must satisfy 0 <= h < r = {wheel_radius_m}, got {height_m}"
        )
    angle = math.acos(1.0 - height_m / wheel_radius_m)
    return angle, 2.0 * wheel_radius_m * math.sin(angle)


def make_flat(height_m: float, location: WheelPosition, wheel_radius_m: float = 0.5) -> WheelFlat:
    angle, length = flat_geometry(height_m, wheel_radius_m)
    return WheelFlat(height_m, angle, length, location)


def height_ladder() -> list[float]:
    """The five flat heights 1e-4 ... 1e-0 mm, in metres, ascending."""
    return [10.0 ** (e - 3) for e in (-4, -3, -2, -1, 0)]


def height_exponent_mm(height_m: float) -> float:
    return math.log10(height_m * 1e3)


@dataclass(frozen=True)
class SimConfig:
    wheel_radius_m: float = 0.5
    speed_m_per_s: float = 16.667
    sample_rate_hz: float = 2000.0
    duration_s: float = 5.0
    ringing_modes: tuple[tuple[float, float], ...] = tuple(
        (f, DEFAULT_DAMPING) for f in DEFAULT_MODES_HZ
    )
    # (height_m, peak_g) anchors of the log-linear amplitude law.
    peak_anchor_high: tuple[float, float] = (1e-3, 100.0)
    peak_anchor_low: tuple[float, float] = (1e-4, 10.0)
    opposite_wheel_gain: float = 0.7
    # Signed per-mode transfer from the flat wheel to the opposite axle box.
    # Axle modes (torsion, bending) reach it fully, coupled wheel/axle modes
    # partly, wheel-local umbrella/bending modes barely.  None = all ones.
    opposite_mode_transfer: tuple[float, ...] | None = DEFAULT_OPPOSITE_TRANSFER
    # Std of the per-impact log-normal modal participation (0 = identical impacts).
    modal_variability: float = 0.5
    other_wheelset_gain: float = 0.25
    other_wheelset_delay_rev: float = 1.0 / 3.0
    noise_fraction: float = 0.01
    impact_jitter: float = 0.03
    # Angular position of the flat at t = 0 as a fraction of a revolution.
    flat_phase_rev: float = 0.6
    # Revolutions simulated before t = 0 so the record starts in steady state.
    warmup_revs: int = 4
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(
            self, "ringing_modes", tuple((float(f), float(z)) for f, z in self.ringing_modes)
        )
        if self.opposite_mode_transfer is not None:
            object.__setattr__(
                self, "opposite_mode_transfer", tuple(map(float, self.opposite_mode_transfer))
            )
        object.__setattr__(self, "peak_anchor_high", tuple(map(float, self.peak_anchor_high)))
        object.__setattr__(self, "peak_anchor_low", tuple(map(float, self.peak_anchor_low)))
        self.validate()

    def validate(self) -> None:
        for name in ("wheel_radius_m", "speed_m_per_s", "sample_rate_hz", "duration_s"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.ringing_modes:
            raise ValueError("at least one ringing mode is required")
        fmax = max(f for f, _ in self.ringing_modes)
        if self.sample_rate_hz < 2 * fmax:
            raise ValueError(
                f"sample_rate_hz={self.sample_rate_hz} is below twice the highest mode ({fmax} Hz)"
            )
        for f, z in self.ringing_modes:
            if f <= 0 or not 0 < z < 1:
                raise ValueError(f"invalid ringing mode ({f}, {z})")
        (h_hi, a_hi), (h_lo, a_lo) = self.peak_anchor_high, self.peak_anchor_low
        if not (0 < h_lo < h_hi and 0 < a_lo < a_hi):
            raise ValueError("amplitude anchors must be positive and increasing in height")
        if self.opposite_mode_transfer is not None and len(self.opposite_mode_transfer) != len(
            self.ringing_modes
        ):
            raise ValueError("opposite_mode_transfer needs one entry per ringing mode")
        if min(self.noise_fraction, self.impact_jitter, self.modal_variability, self.warmup_revs) < 0:
            raise ValueError(
                "noise_fraction, impact_jitter, modal_variability and warmup_revs must be >= 0"
            )
        if not 0 <= self.flat_phase_rev < 1:
            raise ValueError("flat_phase_rev must be in [0, 1)")

    @property
    def revolution_period_s(self) -> float:
        return 2 * math.pi * self.wheel_radius_m / self.speed_m_per_s

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.sample_rate_hz))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ringing_modes"] = [list(m) for m in self.ringing_modes]
        d["peak_anchor_high"] = list(self.peak_anchor_high)
        d["peak_anchor_low"] = list(self.peak_anchor_low)
        if self.opposite_mode_transfer is not None:
            d["opposite_mode_transfer"] = list(self.opposite_mode_transfer)
        return d


@dataclass(frozen=True)
class AbaRecord:
    """Four ABA channels ordered (FL, FR, RL, RR), in m/s^2."""

    channels: np.ndarray = field(repr=False)
    sample_rate_hz: float
    flat: WheelFlat
    config: SimConfig

    def __post_init__(self):
        ch = np.asarray(self.channels, dtype=float)
        if ch.ndim != 2 or ch.shape[0] != 4:
            raise ValueError(f"expected 4 channels, got array of shape {ch.shape}")
        ch.setflags(write=False)
        object.__setattr__(self, "channels", ch)

    @property
    def time(self) -> np.ndarray:
        return np.arange(self.channels.shape[1]) / self.sample_rate_hz

    def to_csv(self, path) -> None:
        write_aba_csv(path, self.time, self.channels)


def peak_amplitude(height_m: float, config: SimConfig) -> float:
    """Target defect-channel peak (m/s^2) for a flat of the given height."""
    if height_m <= 0:
        return 0.0
    (h_hi, a_hi), (h_lo, a_lo) = config.peak_anchor_high, config.peak_anchor_low
    slope = math.log10(a_hi / a_lo) / math.log10(h_hi / h_lo)
    log_a = math.log10(a_hi) + slope * (math.log10(height_m) - math.log10(h_hi))
    return 10.0**log_a * G


def mode_weights(skid_length_m: float, config: SimConfig) -> np.ndarray:
    """Spectral weight of each mode under a half-sine impact pulse.

    The pulse lasts as long as the wheel takes to roll over the flat chord.
    """
    freqs = np.array([f for f, _ in config.ringing_modes])
    x = 2.0 * freqs * skid_length_m / config.speed_m_per_s
    w = np.empty_like(x)
    near = np.isclose(x, 1.0)
    w[~near] = np.abs(np.cos(0.5 * np.pi * x[~near]) / (1.0 - x[~near] ** 2))
    w[near] = np.pi / 4
    return w


def _impulse_train(t: np.ndarray, onsets: np.ndarray, gains: np.ndarray, modes) -> np.ndarray:
    """Sum of damped-mode responses; ``gains[i, m]`` scales mode m of impact i."""
    out = np.zeros_like(t)
    for onset, row in zip(onsets, gains):
        start = np.searchsorted(t, onset)
        tau = t[start:] - onset
        for g, (f, zeta) in zip(row, modes):
            if g == 0:
                continue
            wn = 2 * np.pi * f
            wd = wn * math.sqrt(1 - zeta**2)
            out[start:] += g * np.exp(-zeta * wn * tau) * np.sin(wd * tau)
    return out


def synthesize(flat: WheelFlat, config: SimConfig) -> AbaRecord:
    """Generate a deterministic four-channel surrogate ABA record."""
    config.validate()
    if not 0 <= flat.height_m < config.wheel_radius_m:
        raise ValueError("flat height outside [0, wheel radius)")
    n = config.n_samples
    t = np.arange(n) / config.sample_rate_hz
    period = config.revolution_period_s
    amp = peak_amplitude(flat.height_m, config)
    modes = config.ringing_modes
    n_modes = len(modes)
    rng = np.random.default_rng(config.rng_seed)

    # Roles: 0 flat wheel, 1 opposite wheel, 2 other wheelset same side,
    # 3 other wheelset opposite side.  Random draws are made per role so a
    # relabelling of the defect position permutes the channels exactly.
    k = np.arange(-config.warmup_revs, int(math.ceil(config.duration_s / period)) + 1)
    onsets = (config.flat_phase_rev + k) * period
    jitter = 1.0 + config.impact_jitter * rng.standard_normal(len(k))
    s = config.modal_variability
    participation = np.exp(s * rng.standard_normal((len(k), n_modes)) - 0.5 * s**2)
    # keep each impact's total modal energy at its nominal value
    participation /= np.sqrt(np.mean(participation**2, axis=1, keepdims=True))
    noise = rng.standard_normal((4, n))

    roles = np.zeros((4, n))
    if amp > 0:
        weights = mode_weights(flat.skid_length_m, config)
        transfer = np.ones(n_modes)
        if config.opposite_mode_transfer is not None:
            transfer = np.array(config.opposite_mode_transfer)
        gains = jitter[:, None] * participation * weights
        near = _impulse_train(t, onsets, gains, modes)
        opposite = _impulse_train(t, onsets, gains * transfer, modes)
        far = _impulse_train(t, onsets + config.other_wheelset_delay_rev * period, gains, modes)
        # Calibrate on the noise-free trains: the flat wheel peaks at amp, the
        # opposite wheel at opposite_wheel_gain * amp.
        scale = amp / np.max(np.abs(near))
        roles[0] = scale * near
        roles[1] = config.opposite_wheel_gain * amp / np.max(np.abs(opposite)) * opposite
        roles[2] = roles[3] = config.other_wheelset_gain * scale * far
        roles += config.noise_fraction * amp * noise

    loc = flat.location
    channels = np.empty_like(roles)
    for ch in range(4):
        pos = WheelPosition.from_channel(ch)
        same_set = pos.wheelset == loc.wheelset
        same_side = pos.side == loc.side
        role = (0 if same_side else 1) if same_set else (2 if same_side else 3)
        channels[ch] = roles[role]
    return AbaRecord(channels, config.sample_rate_hz, flat, config)


def impact_count(config: SimConfig) -> int:
    """Number of defect-channel impact onsets inside the record."""
    period = config.revolution_period_s
    return int(math.ceil(config.duration_s / period - config.flat_phase_rev))


def write_aba_csv(path, time: np.ndarray, channels: np.ndarray) -> None:
    path = Path(path)
    data = np.column_stack([time, np.asarray(channels).T])
    with open(path, "w", newline="") as fh:
        fh.write("t,fl,fr,rl,rr\n")
        for row in data:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_aba_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read an ABA CSV; returns ``(time, channels)`` with channels shaped (4, n)."""
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "t,fl,fr,rl,rr":
            raise ValueError(f"{path}:1: unexpected header {header!r}")
        rows = []
        for lineno, line in enumerate(fh, start=2):
            parts = line.strip().split(",")
            try:
                if len(parts) != 5:
                    raise ValueError(f"expected 5 fields, got {len(parts)}")
                vals = [float(p) for p in parts]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in vals):
                raise ValueError(f"{path}:{lineno}: non-finite value")
            rows.append(vals)
    if not rows:
        raise ValueError(f"{path}: no samples")
    data = np.array(rows)
    return data[:, 0], data[:, 1:].T.copy()


def with_seed(config: SimConfig, seed: int) -> SimConfig:
    return replace(config, rng_seed=seed)
