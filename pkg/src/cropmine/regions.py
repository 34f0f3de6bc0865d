"""
Contiguous same-cluster regions and the sequential area-quantile filter.

Regions are pixel sets rather than vector polygons. A RegionSet keeps a
region-id image (``-1`` marks pixels not in the set) together with per-region
cluster code, area and bounding box. Region ids are assigned in row-major
order of each component's first pixel and survive filtering unchanged.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from scipy import ndimage

from .raster_io import LabelMask

_STRUCTURE = {
    4: ndimage.generate_binary_structure(2, 1),
    8: ndimage.generate_binary_structure(2, 2),
}


@dataclass(frozen=True, eq=False)
class Region:
    id: int
    cluster: int
    pixels: np.ndarray  # (area_px, 2) array of (row, col)
    area_px: int


@dataclass(frozen=True, eq=False)
class RegionSet:
    label_map: np.ndarray  # (height, width) int64 region id, -1 outside the set
    ids: np.ndarray
    clusters: np.ndarray
    areas: np.ndarray
    bboxes: np.ndarray  # (n, 4): row0, col0, row1, col1 (exclusive)
    connectivity: int
    thresholds: Optional[tuple[int, int]] = None
    warning: Optional[str] = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.label_map.shape

    def __len__(self) -> int:
        return int(self.ids.size)

    def __iter__(self) -> Iterator[Region]:
        for i in range(len(self)):
            yield self._region_at(i)

    def _region_at(self, i: int) -> Region:
        rid = int(self.ids[i])
        r0, c0, r1, c1 = self.bboxes[i]
        rows, cols = np.nonzero(self.label_map[r0:r1, c0:c1] == rid)
        pixels = np.column_stack([rows + r0, cols + c0])
        return Region(rid, int(self.clusters[i]), pixels, int(self.areas[i]))

    def region(self, rid: int) -> Region:
        pos = np.searchsorted(self.ids, rid)
        if pos >= self.ids.size or self.ids[pos] != rid:
            raise KeyError(rid)
        return self._region_at(int(pos))

    def membership(self) -> np.ndarray:
        return self.label_map >= 0

    def to_records(self) -> list[dict]:
        return [
            {
                "id": int(rid),
                "cluster": int(c),
                "area_px": int(a),
                "bbox": [int(v) for v in bb],
            }
            for rid, c, a, bb in zip(self.ids, self.clusters, self.areas, self.bboxes)
        ]


def extract_regions(cluster_map: LabelMask, connectivity: int = 4) -> RegionSet:
    """Maximal connected components of equal-code pixels; partitions the grid."""
    if connectivity not in _STRUCTURE:
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    codes = cluster_map.data
    h, w = codes.shape
    combined = np.zeros((h, w), dtype=np.int64)
    offset = 0
    for c in np.unique(codes):
        lab, n = ndimage.label(codes == c, structure=_STRUCTURE[connectivity])
        sel = lab > 0
        combined[sel] = lab[sel] + offset
        offset += n

    flat = combined.ravel()
    old_ids, first = np.unique(flat, return_index=True)
    order = np.argsort(first, kind="stable")
    remap = np.empty(offset + 1, dtype=np.int64)
    remap[old_ids[order]] = np.arange(order.size)
    label_map = remap[combined]

    n = order.size
    areas = np.bincount(label_map.ravel(), minlength=n)
    clusters = codes.ravel()[first[order]].astype(np.int64)
    bboxes = np.array(
        [(s[0].start, s[1].start, s[0].stop, s[1].stop) for s in ndimage.find_objects(label_map + 1)],
        dtype=np.int64,
    ).reshape(n, 4)
    return RegionSet(label_map, np.arange(n), clusters, areas, bboxes, connectivity)


def nearest_rank(values: np.ndarray, q: float) -> int:
    """The ceil(q*n)-th smallest value (1-based); rank clamped to [1, n]."""
    values = np.asarray(values)
    n = values.size
    if n == 0:
        raise ValueError("quantile of an empty sample")
    # guard against q*n landing a hair above an integer through rounding
    rank = math.ceil(q * n - 1e-9)
    rank = min(max(rank, 1), n)
    return int(np.partition(values, rank - 1)[rank - 1])


def area_quantile(region_set: RegionSet, q: float) -> int:
    if not 0.0 < q <= 1.0:
        raise ValueError(f"q must lie in (0, 1], got {q}")
    if len(region_set) == 0:
        raise ValueError("area_quantile of an empty region set")
    return nearest_rank(region_set.areas, q)


def subset(region_set: RegionSet, keep: np.ndarray, **extra) -> RegionSet:
    """Restrict a RegionSet to the regions flagged in ``keep`` (aligned with ``ids``)."""
    keep = np.asarray(keep, dtype=bool)
    lut = np.full(int(region_set.label_map.max(initial=-1)) + 2, -1, dtype=np.int64)
    kept_ids = region_set.ids[keep]
    lut[kept_ids + 1] = kept_ids
    return RegionSet(
        lut[region_set.label_map + 1],
        kept_ids,
        region_set.clusters[keep],
        region_set.areas[keep],
        region_set.bboxes[keep],
        region_set.connectivity,
        **extra,
    )


def filter_regions(region_set: RegionSet, q_small: float = 0.99, q_large: float = 0.25) -> RegionSet:
    """
    Two-stage area filter.

    Stage 1 drops regions with area strictly below the q_small nearest-rank
    quantile of all areas; stage 2 drops survivors with area strictly above
    the q_large quantile of the survivors' areas. Order is preserved.
    """
    if len(region_set) == 0:
        raise ValueError("filter_regions needs a non-empty region set")
    areas = region_set.areas
    low = nearest_rank(areas, q_small) if q_small > 0 else int(areas.min())
    stage1 = areas >= low
    high = nearest_rank(areas[stage1], q_large)
    keep = stage1 & (areas <= high)
    warning = None
    if not keep.any():
        warning = "all regions removed by the area filter"
        warnings.warn(warning, RuntimeWarning, stacklevel=2)
    return subset(region_set, keep, thresholds=(low, high), warning=warning)
