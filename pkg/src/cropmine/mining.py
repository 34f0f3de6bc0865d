"""
Score regions against the weak cropland layer, mine confident labels and
compose the extended training mask.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, FormatError
from .raster_io import CROPLAND, NON_CROPLAND, UNKNOWN, LabelMask, check_same_shape
from .regions import Region, RegionSet

POLARITIES = ("both", "positives", "negatives")


@dataclass(frozen=True)
class MiningThresholds:
    positive_min: float = 0.80
    negative_max: float = 0.20

    def __post_init__(self):
        if not 0.0 <= self.negative_max < self.positive_min <= 1.0:
            raise ConfigError(
                f"need 0 <= negative_max < positive_min <= 1, got {self.negative_max}, {self.positive_min}"
            )


@dataclass(frozen=True)
class MinedLabels:
    positives: tuple[tuple[int, float], ...] = ()
    negatives: tuple[tuple[int, float], ...] = ()
    discarded: int = 0
    thresholds: MiningThresholds = field(default_factory=MiningThresholds)

    def __post_init__(self):
        t = self.thresholds
        assert all(f > t.positive_min for _, f in self.positives)
        assert all(f < t.negative_max for _, f in self.negatives)
        assert not {r for r, _ in self.positives} & {r for r, _ in self.negatives}

    def select(self, polarity: str) -> "MinedLabels":
        if polarity not in POLARITIES:
            raise ConfigError(f"polarity must be one of {POLARITIES}, got {polarity!r}")
        pos = self.positives if polarity in ("both", "positives") else ()
        neg = self.negatives if polarity in ("both", "negatives") else ()
        dropped = len(self.positives) + len(self.negatives) - len(pos) - len(neg)
        return MinedLabels(pos, neg, self.discarded + dropped, self.thresholds)

    def to_dict(self) -> dict:
        regions = [{"id": r, "polarity": "positive", "fraction": f} for r, f in self.positives]
        regions += [{"id": r, "polarity": "negative", "fraction": f} for r, f in self.negatives]
        return {
            "thresholds": {"positive_min": self.thresholds.positive_min, "negative_max": self.thresholds.negative_max},
            "discarded": self.discarded,
            "regions": regions,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MinedLabels":
        pos = tuple((int(r["id"]), float(r["fraction"])) for r in d["regions"] if r["polarity"] == "positive")
        neg = tuple((int(r["id"]), float(r["fraction"])) for r in d["regions"] if r["polarity"] == "negative")
        return cls(pos, neg, int(d.get("discarded", 0)), MiningThresholds(**d["thresholds"]))


def intersection_fraction(region: Region, weak: LabelMask) -> float:
    """Share of the region's pixels that the weak layer marks as cropland."""
    rows, cols = region.pixels[:, 0], region.pixels[:, 1]
    h, w = weak.shape
    if rows.size and (rows.max() >= h or cols.max() >= w or rows.min() < 0 or cols.min() < 0):
        raise FormatError("region extends beyond the weak mask")
    return int(np.count_nonzero(weak.data[rows, cols] == CROPLAND)) / region.area_px


def region_fractions(region_set: RegionSet, weak: LabelMask) -> np.ndarray:
    """intersection_fraction for every region at once, aligned with ``region_set.ids``."""
    if region_set.shape != weak.shape:
        raise FormatError(f"region grid {region_set.shape} differs from weak mask {weak.shape}")
    lm = region_set.label_map.ravel()
    inside = lm >= 0
    size = int(region_set.ids.max(initial=-1)) + 1
    hits = np.bincount(lm[inside], weights=(weak.data.ravel()[inside] == CROPLAND), minlength=size)
    hits = np.rint(hits).astype(np.int64)[region_set.ids]
    return hits / region_set.areas


def mine_labels(
    region_set: RegionSet,
    weak: LabelMask,
    thresholds: Optional[MiningThresholds] = None,
    polarity: str = "both",
) -> MinedLabels:
    """Strict thresholds: fraction > positive_min is cropland, < negative_max is non-cropland."""
    t = thresholds or MiningThresholds()
    fractions = region_fractions(region_set, weak)
    pos, neg = [], []
    for rid, f in zip(region_set.ids.tolist(), fractions.tolist()):
        if f > t.positive_min:
            pos.append((rid, f))
        elif f < t.negative_max:
            neg.append((rid, f))
    mined = MinedLabels(tuple(pos), tuple(neg), len(region_set) - len(pos) - len(neg), t)
    return mined.select(polarity)


def mined_raster(mined: MinedLabels, region_set: RegionSet) -> np.ndarray:
    """Per-pixel codes from mined regions alone (0 where no mined region)."""
    size = int(region_set.label_map.max(initial=-1)) + 2
    lut = np.zeros(size, dtype=np.uint8)
    for rid, _ in mined.positives:
        lut[rid + 1] = CROPLAND
    for rid, _ in mined.negatives:
        lut[rid + 1] = NON_CROPLAND
    return lut[region_set.label_map + 1]


def compose_extended_mask(
    human: LabelMask,
    mined: MinedLabels,
    region_set: RegionSet,
    dims: Optional[tuple[int, int]] = None,
) -> LabelMask:
    """Human label where known, else mined cropland, else mined non-cropland, else unknown."""
    if dims is not None and tuple(dims) != human.shape:
        raise FormatError(f"dims {tuple(dims)} differ from human mask {human.shape}")
    if region_set.shape != human.shape:
        raise FormatError(f"region grid {region_set.shape} differs from human mask {human.shape}")
    out = np.where(human.data != UNKNOWN, human.data, mined_raster(mined, region_set))
    return LabelMask(out.astype(np.uint8), kind="extended")


def overlay(base: LabelMask, extra: np.ndarray) -> LabelMask:
    """Fill unknown pixels of ``base`` from ``extra`` codes; known pixels are never touched."""
    check_same_shape(base, LabelMask(extra.astype(np.uint8), kind="extended"))
    out = np.where(base.data != UNKNOWN, base.data, extra)
    return LabelMask(out.astype(np.uint8), kind="extended")


def mined_summary(mined: MinedLabels, region_set: RegionSet, pixel_size_m: float) -> dict:
    """Region counts and km^2 areas per polarity."""
    area_of = dict(zip(region_set.ids.tolist(), region_set.areas.tolist()))
    km2_per_px = pixel_size_m**2 / 1e6
    out = {}
    for name, items in (("positive", mined.positives), ("negative", mined.negatives)):
        px = sum(area_of[rid] for rid, _ in items)
        out[name] = {"count": len(items), "area_px": px, "area_km2": px * km2_per_px}
    return out
