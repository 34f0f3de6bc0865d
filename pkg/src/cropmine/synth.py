"""
Synthetic cropland scenes: imagery, total truth, corrupted weak labels and
sparse noise-free human annotations.

Layout of a scene: the background is a Voronoi partition into non-crop
subclasses, crop fields are non-overlapping axis-aligned rectangles placed on
top of it, and every pixel's band vector is its class spectrum (plus an
optional per-field offset) with independent Gaussian noise. All randomness
comes from PCG64 streams derived from the scene seed (see ``seeding``).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import ndimage

from .errors import ConfigError, CoverageError, PlacementError
from .raster_io import CROPLAND, NON_CROPLAND, UNKNOWN, LabelMask, Raster, DEFAULT_PIXEL_SIZE_M
from .seeding import derive_seed, make_rng

# Blue, green, red, red-edge, NIR surface reflectance.
DEFAULT_CROP_SPECTRUM = (0.060, 0.100, 0.070, 0.220, 0.380)
DEFAULT_NON_CROP_SPECTRA = (
    (0.120, 0.160, 0.200, 0.250, 0.300),  # bare soil
    (0.070, 0.100, 0.110, 0.180, 0.280),  # shrub/grass
    (0.030, 0.060, 0.040, 0.150, 0.420),  # woodland
)


@dataclass(frozen=True)
class CorruptionConfig:
    shift_px: tuple[int, int] = (3, 3)  # (dx, dy): columns, rows
    dilation_radius: int = 2
    flip_rate: float = 0.10

    def __post_init__(self):
        object.__setattr__(self, "shift_px", tuple(int(v) for v in self.shift_px))
        if len(self.shift_px) != 2:
            raise ConfigError("shift_px must be (dx, dy)")
        if self.dilation_radius < 0:
            raise ConfigError("dilation_radius must be >= 0")
        if not 0.0 <= self.flip_rate <= 1.0:
            raise ConfigError(f"flip_rate must lie in [0, 1], got {self.flip_rate}")


@dataclass(frozen=True)
class SceneConfig:
    width: int = 256
    height: int = 256
    bands: int = 5
    field_count: int = 14
    field_size_range: tuple[int, int] = (16, 40)
    crop_spectrum: tuple[float, ...] = DEFAULT_CROP_SPECTRUM
    non_crop_spectra: tuple[tuple[float, ...], ...] = DEFAULT_NON_CROP_SPECTRA
    noise_std: float = 0.02
    non_crop_noise: Optional[tuple[float, ...]] = None  # per-subclass override of noise_std
    non_crop_subclass_count: int = 3
    background_cells: int = 24
    field_gap: int = 2
    pixel_size_m: float = DEFAULT_PIXEL_SIZE_M
    corruption: CorruptionConfig = field(default_factory=CorruptionConfig)
    human_coverage: float = 0.04056
    human_polygon_count: int = 67
    human_crop_share: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "field_size_range", tuple(int(v) for v in self.field_size_range))
        object.__setattr__(self, "crop_spectrum", tuple(float(v) for v in self.crop_spectrum))
        object.__setattr__(
            self, "non_crop_spectra", tuple(tuple(float(v) for v in s) for s in self.non_crop_spectra)
        )
        if self.non_crop_noise is not None:
            object.__setattr__(self, "non_crop_noise", tuple(float(v) for v in self.non_crop_noise))
            if len(self.non_crop_noise) != len(self.non_crop_spectra) or min(self.non_crop_noise) < 0:
                raise ConfigError("non_crop_noise needs one non-negative value per non-crop subclass")
        if isinstance(self.corruption, dict):
            object.__setattr__(self, "corruption", CorruptionConfig(**self.corruption))
        lo, hi = self.field_size_range
        if min(self.width, self.height, self.bands) < 1:
            raise ConfigError("width, height and bands must be >= 1")
        if not 1 <= lo <= hi <= min(self.width, self.height):
            raise ConfigError(f"field_size_range {self.field_size_range} invalid for a {self.width}x{self.height} scene")
        if self.field_count < 0:
            raise ConfigError("field_count must be >= 0")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be >= 0")
        if len(self.crop_spectrum) != self.bands or any(len(s) != self.bands for s in self.non_crop_spectra):
            raise ConfigError("every spectrum must have one value per band")
        if self.non_crop_subclass_count < 1 or len(self.non_crop_spectra) != self.non_crop_subclass_count:
            raise ConfigError(
                f"need {self.non_crop_subclass_count} non-crop spectra, got {len(self.non_crop_spectra)}"
            )
        if self.background_cells < self.non_crop_subclass_count:
            raise ConfigError("background_cells must be >= non_crop_subclass_count")
        if self.human_crop_share is not None and not 0.0 <= self.human_crop_share <= 1.0:
            raise ConfigError("human_crop_share must lie in [0, 1]")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["corruption"]["shift_px"] = list(self.corruption.shift_px)
        d["field_size_range"] = list(self.field_size_range)
        d["crop_spectrum"] = list(self.crop_spectrum)
        d["non_crop_spectra"] = [list(s) for s in self.non_crop_spectra]
        if self.non_crop_noise is not None:
            d["non_crop_noise"] = list(self.non_crop_noise)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SceneConfig":
        return cls(**d)


class HumanPolygon(NamedTuple):
    """Axis-aligned annotation rectangle; rows [row0, row1), cols [col0, col1)."""

    row0: int
    col0: int
    row1: int
    col1: int
    label: int

    @property
    def area(self) -> int:
        return (self.row1 - self.row0) * (self.col1 - self.col0)


@dataclass(frozen=True, eq=False)
class SceneBundle:
    imagery: Raster
    truth: LabelMask
    weak: LabelMask
    human: LabelMask
    human_polygons: tuple[HumanPolygon, ...] = ()
    subclass: Optional[np.ndarray] = None

    def __post_init__(self):
        shapes = {self.imagery.shape, self.truth.shape, self.weak.shape, self.human.shape}
        if len(shapes) != 1:
            raise ConfigError(f"bundle layers disagree in shape: {shapes}")


def rasterize_polygons(polygons: Sequence[HumanPolygon], shape: tuple[int, int]) -> LabelMask:
    data = np.zeros(shape, dtype=np.uint8)
    for p in polygons:
        data[p.row0:p.row1, p.col0:p.col1] = p.label
    return LabelMask(data, kind="sparse_human")


def _voronoi_background(cfg: SceneConfig, rng: np.random.Generator) -> np.ndarray:
    h, w = cfg.height, cfg.width
    n = cfg.background_cells
    seeds_r = rng.integers(0, h, size=n)
    seeds_c = rng.integers(0, w, size=n)
    cell_class = np.arange(n) % cfg.non_crop_subclass_count
    rng.shuffle(cell_class)
    rows = np.arange(h)[:, None, None]
    cols = np.arange(w)[None, :, None]
    cell = np.empty((h, w), dtype=np.int64)
    step = max(1, 4_000_000 // max(1, w * n))
    for r0 in range(0, h, step):
        d2 = (rows[r0:r0 + step] - seeds_r) ** 2 + (cols - seeds_c) ** 2
        cell[r0:r0 + step] = np.argmin(d2, axis=-1)
    return cell_class[cell]


def _place_fields(cfg: SceneConfig, rng: np.random.Generator, max_attempts: int = 2000) -> list[tuple]:
    lo, hi = cfg.field_size_range
    blocked = np.zeros((cfg.height, cfg.width), dtype=bool)
    fields = []
    g = cfg.field_gap
    for i in range(cfg.field_count):
        for _ in range(max_attempts):
            fh, fw = rng.integers(lo, hi + 1, size=2)
            r0 = int(rng.integers(0, cfg.height - fh + 1))
            c0 = int(rng.integers(0, cfg.width - fw + 1))
            if not blocked[max(0, r0 - g):r0 + fh + g, max(0, c0 - g):c0 + fw + g].any():
                blocked[r0:r0 + fh, c0:c0 + fw] = True
                fields.append((r0, c0, r0 + int(fh), c0 + int(fw)))
                break
        else:
            raise PlacementError(f"could not place field {i + 1} of {cfg.field_count} after {max_attempts} attempts")
    return fields


def generate_scene(config: SceneConfig, seed: Optional[int] = None) -> SceneBundle:
    """Build imagery, truth, weak and human layers; bit-identical for a fixed (config, seed)."""
    seed = config.seed if seed is None else seed
    rng = make_rng(derive_seed(seed, "scene"))
    h, w = config.height, config.width

    subclass = _voronoi_background(config, rng)
    fields = _place_fields(config, rng)

    n_sub = config.non_crop_subclass_count
    spectra = np.array(config.non_crop_spectra + (config.crop_spectrum,), dtype=np.float64)
    klass = subclass.copy()
    truth = np.full((h, w), NON_CROPLAND, dtype=np.uint8)
    for r0, c0, r1, c1 in fields:
        klass[r0:r1, c0:c1] = n_sub
        truth[r0:r1, c0:c1] = CROPLAND

    image = spectra[klass]
    sigma = np.array((config.non_crop_noise or (config.noise_std,) * n_sub) + (config.noise_std,))
    if sigma.any():
        image = image + rng.normal(0.0, 1.0, size=image.shape) * sigma[klass][..., None]
    imagery = Raster(np.moveaxis(image, -1, 0).astype(np.float32), pixel_size_m=config.pixel_size_m)
    truth_mask = LabelMask(truth, kind="truth")

    weak = corrupt_to_weak(truth_mask, config.corruption, derive_seed(seed, "weak"))
    polygons = sample_human_polygons(
        truth_mask,
        config.human_coverage,
        config.human_polygon_count,
        derive_seed(seed, "human"),
        crop_share=config.human_crop_share,
    )
    human = rasterize_polygons(polygons, truth.shape)
    return SceneBundle(imagery, truth_mask, weak, human, tuple(polygons), subclass=subclass)


def corrupt_to_weak(truth: LabelMask, config: CorruptionConfig, seed: int) -> LabelMask:
    """Shift, dilate and randomly flip the cropland layer of a total truth mask."""
    if (truth.data == UNKNOWN).any():
        raise ConfigError("truth mask must be total over {1, 2}")
    crop = truth.data == CROPLAND
    h, w = crop.shape
    dx, dy = config.shift_px

    shifted = np.zeros_like(crop)
    src_r = slice(max(0, -dy), min(h, h - dy))
    src_c = slice(max(0, -dx), min(w, w - dx))
    dst_r = slice(max(0, dy), min(h, h + dy))
    dst_c = slice(max(0, dx), min(w, w + dx))
    if src_r.start < src_r.stop and src_c.start < src_c.stop:
        shifted[dst_r, dst_c] = crop[src_r, src_c]

    r = config.dilation_radius
    if r > 0:
        shifted = ndimage.maximum_filter(shifted, size=2 * r + 1, mode="constant", cval=False)

    if config.flip_rate > 0:
        rng = make_rng(seed)
        shifted = shifted ^ (rng.random(shifted.shape) < config.flip_rate)

    return LabelMask(np.where(shifted, CROPLAND, NON_CROPLAND).astype(np.uint8), kind="weak")


def sample_human_polygons(
    truth: LabelMask,
    coverage_target: float,
    polygon_count: int,
    seed: int,
    crop_share: Optional[float] = None,
    attempts_per_polygon: int = 5000,
) -> list[HumanPolygon]:
    """
    Sample non-overlapping annotation rectangles, each inside one truth category.

    Rectangles are sized so their mean area is coverage_target * pixels / polygon_count.
    With ``crop_share`` None, rectangle centres are uniform over the grid; otherwise each
    rectangle first draws its category (cropland with probability ``crop_share``) and
    then a centre uniformly among that category's pixels.
    """
    if not 0.0 < coverage_target < 0.5:
        raise ConfigError(f"coverage_target must lie in (0, 0.5), got {coverage_target}")
    if polygon_count < 0:
        raise ConfigError("polygon_count must be >= 0")
    if polygon_count == 0:
        return []

    rng = make_rng(seed)
    t = truth.data
    h, w = t.shape
    target_area = coverage_target * h * w / polygon_count
    occupied = np.zeros((h, w), dtype=bool)
    by_category = {c: np.flatnonzero(t == c) for c in (NON_CROPLAND, CROPLAND)}

    polygons = []
    for i in range(polygon_count):
        for _ in range(attempts_per_polygon):
            ph = max(1, int(round(math.sqrt(target_area) * rng.uniform(0.75, 1.33))))
            pw = max(1, int(round(target_area / ph)))
            if ph > h or pw > w:
                continue
            if crop_share is None:
                r0 = int(rng.integers(0, h - ph + 1))
                c0 = int(rng.integers(0, w - pw + 1))
            else:
                cat = CROPLAND if rng.random() < crop_share else NON_CROPLAND
                pool = by_category[cat]
                if pool.size == 0:
                    continue
                centre = int(pool[rng.integers(0, pool.size)])
                r0 = min(max(0, centre // w - ph // 2), h - ph)
                c0 = min(max(0, centre % w - pw // 2), w - pw)
            win = t[r0:r0 + ph, c0:c0 + pw]
            label = int(win.flat[0])
            if label == UNKNOWN or (win != label).any():
                continue
            if occupied[max(0, r0 - 1):r0 + ph + 1, max(0, c0 - 1):c0 + pw + 1].any():
                continue
            occupied[r0:r0 + ph, c0:c0 + pw] = True
            polygons.append(HumanPolygon(r0, c0, r0 + ph, c0 + pw, label))
            break
        else:
            raise CoverageError(f"could not place human polygon {i + 1} of {polygon_count}")

    covered = sum(p.area for p in polygons) / (h * w)
    if abs(covered - coverage_target) > 0.25 * coverage_target:
        raise CoverageError(f"labeled fraction {covered:.5f} outside +-25% of {coverage_target}")
    return polygons


def sample_human_labels(
    truth: LabelMask,
    coverage_target: float,
    polygon_count: int,
    seed: int,
    crop_share: Optional[float] = None,
) -> LabelMask:
    polygons = sample_human_polygons(truth, coverage_target, polygon_count, seed, crop_share=crop_share)
    return rasterize_polygons(polygons, truth.shape)
