"""
Pixel sampling, band standardization and Lloyd's k-means with k-means++ seeding.

Distances are squared Euclidean computed as explicit sums of squared
differences (not the dot-product expansion) so that exact ties stay exact;
ties resolve to the lowest centroid index.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ConfigError
from .raster_io import LabelMask, Raster
from .seeding import make_rng

log = logging.getLogger(__name__)

_CHUNK = 65536


@dataclass(frozen=True)
class ClusterConfig:
    K: int = 10
    max_iters: int = 100
    tol: float = 1e-6
    init: Optional[Sequence[Sequence[float]]] = None  # explicit centroids; None -> k-means++
    seed: int = 0
    sample_size: int = 1_000_000

    def __post_init__(self):
        if not 1 <= self.K <= 256:
            raise ConfigError("K must lie in [1, 256] (cluster maps are 8-bit)")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")
        if self.tol < 0:
            raise ConfigError("tol must be >= 0")
        if self.sample_size < 1:
            raise ConfigError("sample_size must be >= 1")
        if self.init is not None and len(self.init) != self.K:
            raise ConfigError(f"explicit init must supply exactly K={self.K} centroids")


@dataclass(frozen=True, eq=False)
class BandStats:
    mean: np.ndarray
    std: np.ndarray
    constant: np.ndarray  # bool per band; constant bands pass through unscaled

    @classmethod
    def identity(cls, bands: int) -> "BandStats":
        return cls(np.zeros(bands), np.ones(bands), np.ones(bands, dtype=bool))

    def apply(self, features: np.ndarray) -> np.ndarray:
        x = np.array(features, dtype=np.float64)
        live = ~self.constant
        x[:, live] = (x[:, live] - self.mean[live]) / self.std[live]
        return x

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist(), "constant": self.constant.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "BandStats":
        return cls(np.array(d["mean"], float), np.array(d["std"], float), np.array(d["constant"], bool))


@dataclass(frozen=True, eq=False)
class ClusterModel:
    centroids: np.ndarray  # (K, bands), standardized space
    stats: BandStats
    inertia: float
    iterations_run: int
    history: tuple[float, ...] = field(default=())

    @property
    def K(self) -> int:
        return self.centroids.shape[0]

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "centroids": self.centroids.tolist(),
            "stats": self.stats.to_dict(),
            "inertia": self.inertia,
            "iterations": self.iterations_run,
            "inertia_history": list(self.history),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterModel":
        return cls(
            np.array(d["centroids"], dtype=np.float64),
            BandStats.from_dict(d["stats"]),
            float(d["inertia"]),
            int(d["iterations"]),
            tuple(d.get("inertia_history", ())),
        )


def sample_pixels(rasters: Union[Raster, Sequence[Raster]], n: int, seed: int) -> np.ndarray:
    """
    Draw ``n`` distinct pixels uniformly without replacement from each raster.

    Passing several rasters pools the per-raster samples (row blocks in input order),
    so a model can be fit jointly across quads.
    """
    if isinstance(rasters, Raster):
        rasters = [rasters]
    rng = make_rng(seed)
    blocks = []
    for r in rasters:
        total = r.width * r.height
        if not 1 <= n <= total:
            raise ValueError(f"cannot sample {n} pixels from a raster with {total}")
        idx = rng.choice(total, size=n, replace=False)
        blocks.append(r.pixels()[idx].astype(np.float64))
    if len({b.shape[1] for b in blocks}) != 1:
        raise ValueError("pooled rasters must share a band count")
    return np.concatenate(blocks, axis=0)


def standardize(features: np.ndarray) -> tuple[np.ndarray, BandStats]:
    """Zero-mean, unit sample-std (ddof=1) scaling per band; constant bands are left as-is."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("standardize needs a 2-D matrix with at least 2 rows")
    mean = x.mean(axis=0)
    std = x.std(axis=0, ddof=1)
    constant = ~(std > 0)
    stats = BandStats(mean, np.where(constant, 1.0, std), constant)
    return stats.apply(x), stats


def _nearest(x: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(x.shape[0]), labels]


def nearest_centroid(x: np.ndarray, centroids: np.ndarray, threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Labels and squared distances to the nearest centroid, processed in row chunks."""
    starts = range(0, x.shape[0], _CHUNK)
    if threads > 1 and x.shape[0] > _CHUNK:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda s: _nearest(x[s:s + _CHUNK], centroids), starts))
    else:
        parts = [_nearest(x[s:s + _CHUNK], centroids) for s in starts]
    if not parts:
        return np.empty(0, dtype=np.intp), np.empty(0)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def kmeans_plusplus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """D^2 seeding: first centroid uniform, each next one with probability proportional to D^2."""
    n = x.shape[0]
    centroids = [x[int(rng.integers(n))]]
    d2 = ((x - centroids[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        else:
            idx = int(rng.integers(n))
        centroids.append(x[idx])
        d2 = np.minimum(d2, ((x - x[idx]) ** 2).sum(axis=1))
    return np.array(centroids, dtype=np.float64)


def _update_centroids(x, labels, d2, centroids):
    k = centroids.shape[0]
    counts = np.bincount(labels, minlength=k)
    sums = np.stack([np.bincount(labels, weights=x[:, j], minlength=k) for j in range(x.shape[1])], axis=1)
    new = centroids.copy()
    filled = counts > 0
    new[filled] = sums[filled] / counts[filled, None]
    empty = np.flatnonzero(~filled)
    if empty.size:
        # farthest points from their assigned centroid; stable order breaks ties by row index
        order = np.argsort(-d2, kind="stable")
        for j, row in zip(empty, order):
            new[j] = x[row]
        log.debug("reseeded %d empty clusters", empty.size)
    return new


def fit_kmeans(
    features: np.ndarray,
    config: ClusterConfig,
    stats: Optional[BandStats] = None,
    threads: int = 1,
) -> ClusterModel:
    x = np.asarray(features, dtype=np.float64)
    n, d = x.shape
    if n < config.K:
        raise ValueError(f"need at least K={config.K} rows, got {n}")
    if config.init is not None:
        centroids = np.array(config.init, dtype=np.float64)
        if centroids.shape != (config.K, d):
            raise ConfigError(f"explicit init has shape {centroids.shape}, expected {(config.K, d)}")
    else:
        centroids = kmeans_plusplus(x, config.K, make_rng(config.seed))

    labels, d2 = nearest_centroid(x, centroids, threads)
    inertia = float(d2.sum())
    history = [inertia]
    iterations = 0
    for iterations in range(1, config.max_iters + 1):
        centroids = _update_centroids(x, labels, d2, centroids)
        labels, d2 = nearest_centroid(x, centroids, threads)
        prev, inertia = inertia, float(d2.sum())
        history.append(inertia)
        # converged on a relative change below tol, or at an exact fixed point
        if prev == inertia or abs(prev - inertia) < config.tol * prev:
            break
    return ClusterModel(
        centroids,
        stats if stats is not None else BandStats.identity(d),
        inertia,
        iterations,
        tuple(history),
    )


def assign_clusters(raster: Raster, model: ClusterModel, threads: int = 1) -> LabelMask:
    if raster.bands != model.centroids.shape[1]:
        raise ValueError(f"raster has {raster.bands} bands, model expects {model.centroids.shape[1]}")
    x = model.stats.apply(raster.pixels())
    labels, _ = nearest_centroid(x, model.centroids, threads)
    return LabelMask(labels.reshape(raster.shape).astype(np.uint8), kind="cluster", classes=model.K)
