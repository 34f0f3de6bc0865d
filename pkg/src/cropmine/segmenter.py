"""
Per-pixel logistic cropland classifier trained with cross-entropy and Adam.

Features per pixel are the raw band values followed (for window_radius > 0)
by the per-band means over the (2r+1)^2 edge-clamped window, standardized
with statistics of the training pixels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from .clustering import BandStats, standardize
from .errors import ConfigError, UnlearnableError
from .raster_io import CROPLAND, NON_CROPLAND, UNKNOWN, LabelMask, Raster
from .seeding import make_rng


@dataclass(frozen=True)
class SegHyper:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    epochs: int = 50
    batch_size: int = 1024
    window_radius: int = 1
    l2: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ConfigError("beta1 and beta2 must lie in (0, 1)")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be > 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be >= 1")
        if self.window_radius < 0 or self.l2 < 0:
            raise ConfigError("window_radius and l2 must be >= 0")


@dataclass(frozen=True, eq=False)
class SegModel:
    weights: np.ndarray
    bias: float
    window_radius: int
    stats: BandStats
    loss_history: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias)):
            raise ValueError("model parameters must be finite")

    @property
    def params(self) -> np.ndarray:
        return np.append(self.weights, self.bias)

    @property
    def bands(self) -> int:
        return self.weights.size // (2 if self.window_radius > 0 else 1)

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "window_radius": self.window_radius,
            "feature_stats": self.stats.to_dict(),
            "loss_history": list(self.loss_history),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SegModel":
        return cls(
            np.array(d["weights"], dtype=np.float64),
            float(d["bias"]),
            int(d["window_radius"]),
            BandStats.from_dict(d["feature_stats"]),
            tuple(d.get("loss_history", ())),
        )


@dataclass(frozen=True, eq=False)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n), 0)


def window_features(raster: Raster, window_radius: int) -> np.ndarray:
    """Unstandardized (pixels, features) matrix in row-major pixel order."""
    bands = raster.data.astype(np.float64)
    if window_radius == 0:
        return bands.reshape(raster.bands, -1).T
    size = 2 * window_radius + 1
    means = np.stack([ndimage.uniform_filter(b, size=size, mode="nearest") for b in bands])
    return np.concatenate([bands, means]).reshape(2 * raster.bands, -1).T


def featurize(
    raster: Raster, window_radius: int, stats: Optional[BandStats] = None
) -> tuple[np.ndarray, BandStats]:
    """Standardized features; without ``stats`` they are estimated from every pixel."""
    raw = window_features(raster, window_radius)
    if stats is None:
        return standardize(raw)
    return stats.apply(raw), stats


def loss_and_gradient(params: np.ndarray, x: np.ndarray, y: np.ndarray, l2: float = 0.0):
    """
    Mean binary cross-entropy plus (l2/2)*||w||^2; ``params`` is the weight vector
    followed by the bias. Returns (loss, gradient with the same layout as params).
    """
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    w, b = params[:-1], params[-1]
    z = x @ w + b
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w))
    residual = _sigmoid(z) - y
    grad = np.empty_like(params, dtype=np.float64)
    grad[:-1] = x.T @ residual / x.shape[0] + l2 * w
    grad[-1] = residual.mean()
    return loss, grad


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def adam_update(params: np.ndarray, grad: np.ndarray, state: AdamState, hyper: SegHyper):
    if np.shape(params) != np.shape(grad) or np.shape(grad) != np.shape(state.m):
        raise ValueError("params, gradient and optimizer state shapes differ")
    t = state.step + 1
    m = hyper.beta1 * state.m + (1 - hyper.beta1) * grad
    v = hyper.beta2 * state.v + (1 - hyper.beta2) * grad * grad
    m_hat = m / (1 - hyper.beta1**t)
    v_hat = v / (1 - hyper.beta2**t)
    new = params - hyper.learning_rate * m_hat / (np.sqrt(v_hat) + hyper.epsilon)
    return new, AdamState(m, v, t)


def training_set(raster: Raster, mask: LabelMask, window_radius: int):
    if mask.shape != raster.shape:
        raise ValueError(f"mask {mask.shape} and raster {raster.shape} differ in size")
    codes = mask.data.ravel()
    labeled = codes != UNKNOWN
    y = (codes[labeled] == CROPLAND).astype(np.float64)
    if y.size == 0 or y.min() == y.max():
        missing = "all" if y.size == 0 else ("cropland" if y.max() == 0 else "non-cropland")
        raise UnlearnableError(f"training mask has no labeled {missing} pixels")
    raw = window_features(raster, window_radius)[labeled]
    return raw, y


def train_segmenter(raster: Raster, training_mask: LabelMask, hyper: Optional[SegHyper] = None) -> SegModel:
    hyper = hyper or SegHyper()
    raw, y = training_set(raster, training_mask, hyper.window_radius)
    x, stats = standardize(raw)
    n = x.shape[0]
    rng = make_rng(hyper.seed)
    params = np.zeros(x.shape[1] + 1)
    state = AdamState.zeros(params.size)
    history = []
    for _ in range(hyper.epochs):
        order = rng.permutation(n)
        for s in range(0, n, hyper.batch_size):
            idx = order[s:s + hyper.batch_size]
            _, grad = loss_and_gradient(params, x[idx], y[idx], hyper.l2)
            params, state = adam_update(params, grad, state, hyper)
        history.append(loss_and_gradient(params, x, y, hyper.l2)[0])
    return SegModel(params[:-1].copy(), float(params[-1]), hyper.window_radius, stats, tuple(history))


def predict_logits(raster: Raster, model: SegModel) -> np.ndarray:
    if raster.bands != model.bands:
        raise ValueError(f"raster has {raster.bands} bands, model expects {model.bands}")
    x, _ = featurize(raster, model.window_radius, model.stats)
    return (x @ model.weights + model.bias).reshape(raster.shape)


def predict_mask(raster: Raster, model: SegModel) -> LabelMask:
    """Cropland where p > 0.5 (logit > 0); p == 0.5 goes to non-cropland."""
    z = predict_logits(raster, model)
    return LabelMask(np.where(z > 0, CROPLAND, NON_CROPLAND).astype(np.uint8), kind="predicted")
