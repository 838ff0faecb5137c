"""Feedforward regression network D -> 32 -> 16 -> 4 trained by scaled conjugate gradient.

Hidden layers use tanh, the output layer is linear.  Inputs are z-scored
with statistics taken from the training split.  Training is full batch and
minimises the mean squared error over all outputs.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .dataset import Dataset

logger = logging.getLogger(__name__)

FORMAT_NAME = "wheelflat-fnn"
FORMAT_VERSION = 1
HIDDEN = (32, 16)
N_OUT = 4


class TrainingDiverged(RuntimeError):
    pass


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    max_iter: int = 300
    grad_tol: float = 1e-6
    mse_goal: float = 0.0
    val_fraction: float = 0.2
    seed: int = 0
    # scaled conjugate gradient constants
    scg_sigma: float = 5e-5
    scg_lambda: float = 5e-7

    def __post_init__(self):
        if self.max_iter < 0:
            raise ValueError("max_iter must be >= 0")
        if not 0 <= self.val_fraction < 1:
            raise ValueError("val_fraction must be in [0, 1)")
        if self.scg_sigma <= 0 or self.scg_lambda <= 0:
            raise ValueError("SCG constants must be positive")


@dataclass
class FnnModel:
    weights: list[np.ndarray]  # W1 (32, D), W2 (16, 32), W3 (4, 16)
    biases: list[np.ndarray]
    mu: np.ndarray
    sigma: np.ndarray
    seed: int = 0
    config: TrainConfig = field(default_factory=TrainConfig)

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def n_inputs(self) -> int:
        return self.weights[0].shape[1]

    def params(self) -> np.ndarray:
        return np.concatenate([a.ravel() for pair in zip(self.weights, self.biases) for a in pair])

    def set_params(self, theta: np.ndarray) -> None:
        self.weights, self.biases = unpack(theta, self.layer_sizes)


@dataclass
class TrainReport:
    final_mse: float
    iterations: int
    mse_history: list[float]
    train_idx: np.ndarray
    val_idx: np.ndarray
    seed: int
    stop_reason: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["train_idx"] = self.train_idx.tolist()
        d["val_idx"] = self.val_idx.tolist()
        return d

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n")

    @classmethod
    def load(cls, path) -> "TrainReport":
        d = json.loads(Path(path).read_text())
        d["train_idx"] = np.array(d["train_idx"], dtype=int)
        d["val_idx"] = np.array(d["val_idx"], dtype=int)
        return cls(**d)


def unpack(theta: np.ndarray, sizes) -> tuple[list[np.ndarray], list[np.ndarray]]:
    weights, biases, pos = [], [], 0
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        weights.append(theta[pos : pos + n_in * n_out].reshape(n_out, n_in))
        pos += n_in * n_out
        biases.append(theta[pos : pos + n_out])
        pos += n_out
    if pos != theta.size:
        raise ValueError(f"parameter vector has {theta.size} entries, expected {pos}")
    return weights, biases


def init_model(n_inputs: int, seed: int = 0, config: TrainConfig | None = None) -> FnnModel:
    """Uniform init in +-1/sqrt(fan_in); identity normalisation."""
    rng = np.random.default_rng(seed)
    sizes = [n_inputs, *HIDDEN, N_OUT]
    weights, biases = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / math.sqrt(n_in)
        weights.append(rng.uniform(-bound, bound, (n_out, n_in)))
        biases.append(rng.uniform(-bound, bound, n_out))
    return FnnModel(
        weights, biases, np.zeros(n_inputs), np.ones(n_inputs), seed, config or TrainConfig()
    )


def normalization_stats(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mu = x.mean(axis=0)
    sigma = x.std(axis=0)
    sigma[sigma == 0] = 1.0
    return mu, sigma


def _forward_layers(weights, biases, z):
    a1 = np.tanh(z @ weights[0].T + biases[0])
    a2 = np.tanh(a1 @ weights[1].T + biases[1])
    return a1, a2, a2 @ weights[2].T + biases[2]


def forward(model: FnnModel, features: np.ndarray) -> np.ndarray:
    """Predict labels for one vector (D,) or a batch (N, D)."""
    x = np.asarray(features, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != model.n_inputs:
        raise ValueError(f"expected {model.n_inputs} features, got {x.shape[1]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input features")
    out = _forward_layers(model.weights, model.biases, (x - model.mu) / model.sigma)[2]
    return out[0] if single else out


def loss_and_grad(theta: np.ndarray, sizes, z: np.ndarray, y: np.ndarray, want_grad: bool = True):
    """MSE over all N x 4 outputs and its gradient w.r.t. the flat parameter vector.

    ``z`` is already normalised.
    """
    weights, biases = unpack(theta, sizes)
    a1, a2, out = _forward_layers(weights, biases, z)
    err = out - y
    mse = float(np.mean(err**2))
    if not want_grad:
        return mse, None
    d3 = 2.0 * err / err.size
    d2 = (d3 @ weights[2]) * (1.0 - a2**2)
    d1 = (d2 @ weights[1]) * (1.0 - a1**2)
    grads = [
        d1.T @ z, d1.sum(axis=0),
        d2.T @ a1, d2.sum(axis=0),
        d3.T @ a2, d3.sum(axis=0),
    ]
    return mse, np.concatenate([g.ravel() for g in grads])


def stratified_split(dataset: Dataset, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded split holding out ``fraction`` of every (height bin, position) group."""
    n = len(dataset)
    if fraction == 0:
        return np.arange(n), np.array([], dtype=int)
    rng = np.random.default_rng(seed)
    keys = dataset.height_bins * 5 + (dataset.positions + 1)
    val = []
    for key in np.unique(keys):
        rows = np.flatnonzero(keys == key)
        n_val = int(round(fraction * rows.size))
        val.append(rng.permutation(rows)[:n_val])
    val_idx = np.sort(np.concatenate(val))
    train_mask = np.ones(n, dtype=bool)
    train_mask[val_idx] = False
    return np.flatnonzero(train_mask), val_idx


def scg(fun, theta0: np.ndarray, config: TrainConfig):
    """Scaled conjugate gradient minimisation (Moller).

    ``fun(theta)`` returns ``(loss, grad)``.  Returns the final parameters,
    the loss history of accepted steps, the iteration count and the reason
    for stopping.
    """
    w = theta0.copy()
    f_w, g_w = fun(w)
    r = -g_w
    p = r.copy()
    lam, lam_bar = config.scg_lambda, 0.0
    success = True
    history = [f_w]
    n_params = w.size
    reason = "max_iter"
    k = 0
    for k in range(1, config.max_iter + 1):
        if math.sqrt(float(r @ r)) < config.grad_tol:
            reason = "grad_tol"
            k -= 1
            break
        p2 = float(p @ p)
        if success:
            sig = config.scg_sigma / math.sqrt(p2)
            _, g_s = fun(w + sig * p)
            delta = float(p @ (g_s - g_w)) / sig
        delta += (lam - lam_bar) * p2
        if delta <= 0:
            lam_bar = 2.0 * (lam - delta / p2)
            delta = -delta + lam * p2
            lam = lam_bar
        mu = float(p @ r)
        if mu <= 0:
            # lost descent direction: restart along the gradient
            p, success = r.copy(), True
            continue
        alpha = mu / delta
        w_new = w + alpha * p
        f_new, g_new = fun(w_new)
        if not math.isfinite(f_new):
            raise TrainingDiverged(f"non-finite loss at iteration {k}")
        comparison = 2.0 * delta * (f_w - f_new) / mu**2
        if comparison >= 0:
            w, f_w, g_w = w_new, f_new, g_new
            r_new = -g_new
            lam_bar = 0.0
            success = True
            if k % n_params == 0:
                p = r_new
            else:
                beta = (float(r_new @ r_new) - float(r_new @ r)) / mu
                p = r_new + beta * p
            r = r_new
            history.append(f_w)
            if comparison >= 0.75:
                lam *= 0.25
        else:
            lam_bar = lam
            success = False
        if comparison < 0.25:
            lam += delta * (1.0 - comparison) / p2
        if f_w <= config.mse_goal:
            reason = "mse_goal"
            break
    return w, history, k, reason


def train(dataset: Dataset, config: TrainConfig | None = None) -> tuple[FnnModel, TrainReport]:
    config = config or TrainConfig()
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    if not np.all(np.isfinite(dataset.features)) or not np.all(np.isfinite(dataset.labels)):
        raise ValueError("dataset contains non-finite values")
    train_idx, val_idx = stratified_split(dataset, config.val_fraction, config.seed)
    x = dataset.features[train_idx]
    y = dataset.labels[train_idx]
    model = init_model(x.shape[1], config.seed, config)
    model.mu, model.sigma = normalization_stats(x)
    z = (x - model.mu) / model.sigma
    sizes = model.layer_sizes

    theta, history, iters, reason = scg(
        lambda th: loss_and_grad(th, sizes, z, y), model.params(), config
    )
    if not np.all(np.isfinite(theta)):
        raise TrainingDiverged("non-finite parameters after training")
    model.set_params(theta)
    logger.info("trained %s: mse=%.3e after %d iterations (%s)", sizes, history[-1], iters, reason)
    report = TrainReport(history[-1], iters, history, train_idx, val_idx, config.seed, reason)
    return model, report


def save(model: FnnModel, path) -> None:
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "layer_sizes": model.layer_sizes,
        "weights": [w.ravel().tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "mu": model.mu.tolist(),
        "sigma": model.sigma.tolist(),
        "seed": model.seed,
        "train_config": asdict(model.config),
    }
    Path(path).write_text(json.dumps(doc) + "\n")


def load(path) -> FnnModel:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"{path}: cannot read model file: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise ModelFormatError(f"{path}: not a {FORMAT_NAME} model file")
    if doc.get("version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: model version mismatch: expected {FORMAT_VERSION}, found {doc.get('version')}"
        )
    try:
        sizes = [int(s) for s in doc["layer_sizes"]]
        if sizes[1:] != [*HIDDEN, N_OUT]:
            raise ModelFormatError(f"{path}: unsupported layer sizes {sizes}")
        weights, biases = [], []
        for (n_in, n_out), w, b in zip(zip(sizes[:-1], sizes[1:]), doc["weights"], doc["biases"]):
            w = np.array(w, dtype=float)
            b = np.array(b, dtype=float)
            if w.size != n_in * n_out or b.size != n_out:
                raise ModelFormatError(f"{path}: layer {n_in}->{n_out} has wrong parameter count")
            weights.append(w.reshape(n_out, n_in))
            biases.append(b)
        mu = np.array(doc["mu"], dtype=float)
        sigma = np.array(doc["sigma"], dtype=float)
        if mu.shape != (sizes[0],) or sigma.shape != (sizes[0],):
            raise ModelFormatError(f"{path}: normalisation stats do not match input size")
        config = TrainConfig(**doc["train_config"])
        return FnnModel(weights, biases, mu, sigma, int(doc["seed"]), config)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"{path}: malformed model file: {exc}") from None
