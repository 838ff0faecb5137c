"""Analytic signal and envelope of finite real segments."""

import numpy as np

MIN_LENGTH = 8


def analytic_signal(x: np.ndarray) -> np.ndarray:
    """Discrete analytic signal of a real segment (circular semantics).

    Negative-frequency bins are zeroed and positive ones doubled; the DC and
    (for even lengths) Nyquist bins are kept as they are.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D segment, got shape {x.shape}")
    if x.size < MIN_LENGTH:
        raise ValueError(f"segment too short: {x.size} < {MIN_LENGTH}")
    if not np.all(np.isfinite(x)):
        raise ValueError("segment contains non-finite values")
    n = x.size
    spectrum = np.fft.fft(x)
    gain = np.zeros(n)
    gain[0] = 1.0
    half = n // 2
    if n % 2 == 0:
        gain[half] = 1.0
        gain[1:half] = 2.0
    else:
        gain[1 : half + 1] = 2.0
    return np.fft.ifft(spectrum * gain)


def analytic_amplitude(x: np.ndarray) -> np.ndarray:
    """Envelope ``sqrt(x^2 + H[x]^2)``; same length as ``x``, non-negative."""
    return np.abs(analytic_signal(x))
