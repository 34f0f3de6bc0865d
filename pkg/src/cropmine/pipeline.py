"""Weak-label refinement chain: sample -> cluster -> regions -> filter -> mine."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .clustering import BandStats, ClusterConfig, ClusterModel, assign_clusters, fit_kmeans, sample_pixels, standardize
from .mining import MinedLabels, MiningThresholds, mine_labels
from .raster_io import LabelMask, Raster
from .regions import RegionSet, extract_regions, filter_regions
from .seeding import derive_seed


@dataclass(frozen=True)
class RefineConfig:
    cluster: ClusterConfig = ClusterConfig()
    standardize: bool = True
    connectivity: int = 4
    q_small: float = 0.99
    q_large: float = 0.25
    thresholds: MiningThresholds = MiningThresholds()


@dataclass(frozen=True, eq=False)
class Refinement:
    model: ClusterModel
    cluster_map: LabelMask
    regions: RegionSet
    filtered: RegionSet
    mined: MinedLabels


def fit_cluster_model(imagery: Raster, config: ClusterConfig, use_standardize: bool = True,
                      seed: int = 0, threads: int = 1) -> ClusterModel:
    n = min(config.sample_size, imagery.width * imagery.height)
    sample = sample_pixels(imagery, n, derive_seed(seed, "sample"))
    if use_standardize:
        features, stats = standardize(sample)
    else:
        features, stats = sample, BandStats.identity(imagery.bands)
    cfg = config if config.init is not None else replace(config, seed=derive_seed(seed, "kmeans++"))
    return fit_kmeans(features, cfg, stats, threads=threads)


def refine(imagery: Raster, weak: LabelMask, config: Optional[RefineConfig] = None,
           seed: int = 0, threads: int = 1) -> Refinement:
    config = config or RefineConfig()
    model = fit_cluster_model(imagery, config.cluster, config.standardize, seed, threads)
    cmap = assign_clusters(imagery, model, threads)
    regions = extract_regions(cmap, config.connectivity)
    filtered = filter_regions(regions, config.q_small, config.q_large)
    mined = mine_labels(filtered, weak, config.thresholds)
    return Refinement(model, cmap, regions, filtered, mined)
