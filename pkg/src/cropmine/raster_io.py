"""
Raster and label-mask data model plus the native on-disk format.

A layer is stored as two files sharing a stem:

    <name>.bin   little-endian payload, row-major; rasters are band-sequential
                 (band 0 full plane, then band 1, ...)
    <name>.json  sidecar header

Raster sidecar: {"width", "height", "bands", "pixel_size_m", "dtype": "f32"}
Mask sidecar:   {"width", "height", "bands": 1, "dtype": "u8", "kind"}
                (cluster masks may add "classes": K)

PNG rendering uses a fixed label palette and, for cluster maps, K hues
evenly spaced around the HSV colour wheel at full saturation and value.
"""

from __future__ import annotations

import colorsys
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
from PIL import Image

from .errors import AlphabetError, FormatError, NonFiniteError, PayloadSizeError

PathLike = Union[str, Path]

UNKNOWN = 0
NON_CROPLAND = 1
CROPLAND = 2

DEFAULT_BANDS = 5
DEFAULT_PIXEL_SIZE_M = 4.7

MASK_KINDS = ("sparse_human", "weak", "extended", "predicted", "truth", "cluster")
_ALPHABETS = {
    "sparse_human": (0, 1, 2),
    "extended": (0, 1, 2),
    "truth": (0, 1, 2),
    "weak": (1, 2),
    "predicted": (1, 2),
}

LABEL_PALETTE = {
    UNKNOWN: (0, 0, 0),
    NON_CROPLAND: (180, 180, 180),
    CROPLAND: (34, 139, 34),
}


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Raster:
    """Multi-band image; ``data`` has shape (bands, height, width), float32."""

    data: np.ndarray
    pixel_size_m: float = DEFAULT_PIXEL_SIZE_M

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim == 2:
            data = data[None]
        if data.ndim != 3:
            raise FormatError(f"raster data must be 3-D (bands, height, width), got {data.ndim}-D")
        if min(data.shape) < 1:
            raise FormatError(f"raster dimensions must be >= 1, got {data.shape}")
        data = data.astype("<f4", copy=False)
        if not np.isfinite(data).all():
            raise NonFiniteError("raster contains non-finite values")
        object.__setattr__(self, "data", _frozen(data))
        object.__setattr__(self, "pixel_size_m", float(self.pixel_size_m))

    @property
    def bands(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    def pixels(self) -> np.ndarray:
        """Per-pixel band vectors as an (height*width, bands) array in row-major order."""
        return self.data.reshape(self.bands, -1).T

    def __eq__(self, other):
        if not isinstance(other, Raster):
            return NotImplemented
        return (
            self.pixel_size_m == other.pixel_size_m
            and self.data.shape == other.data.shape
            and self.data.tobytes() == other.data.tobytes()
        )


@dataclass(frozen=True, eq=False)
class LabelMask:
    """Single-band categorical layer; ``data`` has shape (height, width), uint8."""

    data: np.ndarray
    kind: str
    classes: Optional[int] = None

    def __post_init__(self):
        if self.kind not in MASK_KINDS:
            raise FormatError(f"unknown mask kind {self.kind!r}")
        data = np.asarray(self.data)
        if data.ndim != 2 or min(data.shape) < 1:
            raise FormatError(f"mask data must be a non-empty 2-D grid, got shape {data.shape}")
        if data.dtype != np.uint8:
            if data.size and (data.min() < 0 or data.max() > 255):
                raise AlphabetError("mask codes must fit in 8 bits")
            data = data.astype(np.uint8)
        _check_alphabet(data, self.kind, self.classes)
        object.__setattr__(self, "data", _frozen(data))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __eq__(self, other):
        if not isinstance(other, LabelMask):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.classes == other.classes
            and self.data.shape == other.data.shape
            and self.data.tobytes() == other.data.tobytes()
        )


def _check_alphabet(data: np.ndarray, kind: str, classes: Optional[int]) -> None:
    present = np.unique(data)
    if kind == "cluster":
        if classes is not None and present.size and present[-1] >= classes:
            raise AlphabetError(f"cluster code {present[-1]} outside [0, {classes})")
        return
    bad = np.setdiff1d(present, _ALPHABETS[kind])
    if bad.size:
        raise AlphabetError(f"{kind} mask contains codes {bad.tolist()} outside {_ALPHABETS[kind]}")


def check_same_shape(*layers) -> None:
    shapes = {tuple(layer.shape) for layer in layers}
    if len(shapes) > 1:
        raise FormatError(f"layer dimensions differ: {sorted(shapes)}")


def _paths(path: PathLike) -> tuple[Path, Path]:
    p = Path(path)
    if p.suffix in (".json", ".bin"):
        p = p.with_suffix("")
    return p.with_name(p.name + ".json"), p.with_name(p.name + ".bin")


def _read_header(path: PathLike) -> tuple[dict, bytes]:
    header_path, payload_path = _paths(path)
    for p in (header_path, payload_path):
        if not p.exists():
            raise FileNotFoundError(f"missing file: {p}")
    try:
        header = json.loads(header_path.read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"{header_path}: malformed header ({e})") from e
    for key in ("width", "height", "bands", "dtype"):
        if key not in header:
            raise FormatError(f"{header_path}: header lacks {key!r}")
    return header, payload_path.read_bytes()


def _write(path: PathLike, header: dict, payload: bytes) -> None:
    header_path, payload_path = _paths(path)
    header_path.parent.mkdir(parents=True, exist_ok=True)
    payload_path.write_bytes(payload)
    header_path.write_text(json.dumps(header, indent=2) + "\n")


def load_raster(path: PathLike) -> Raster:
    header, payload = _read_header(path)
    if header["dtype"] != "f32":
        raise FormatError(f"raster dtype must be 'f32', got {header['dtype']!r}")
    w, h, b = int(header["width"]), int(header["height"]), int(header["bands"])
    if min(w, h, b) < 1:
        raise FormatError(f"invalid raster dimensions {w}x{h}x{b}")
    expected = w * h * b * 4
    if len(payload) != expected:
        raise PayloadSizeError(f"payload has {len(payload)} bytes, header implies {expected}")
    data = np.frombuffer(payload, dtype="<f4").reshape(b, h, w)
    if not np.isfinite(data).all():
        raise NonFiniteError(f"{path}: raster contains non-finite values")
    return Raster(data.copy(), pixel_size_m=header.get("pixel_size_m", DEFAULT_PIXEL_SIZE_M))


def save_raster(raster: Raster, path: PathLike) -> None:
    if not np.isfinite(raster.data).all():
        raise NonFiniteError("refusing to write a raster with non-finite values")
    header = {
        "width": raster.width,
        "height": raster.height,
        "bands": raster.bands,
        "pixel_size_m": raster.pixel_size_m,
        "dtype": "f32",
    }
    _write(path, header, raster.data.astype("<f4").tobytes())


def load_mask(path: PathLike) -> LabelMask:
    header, payload = _read_header(path)
    if header["dtype"] != "u8" or int(header["bands"]) != 1:
        raise FormatError("mask must be single-band 'u8'")
    if "kind" not in header:
        raise FormatError("mask header lacks 'kind'")
    w, h = int(header["width"]), int(header["height"])
    if len(payload) != w * h:
        raise PayloadSizeError(f"payload has {len(payload)} bytes, header implies {w * h}")
    data = np.frombuffer(payload, dtype=np.uint8).reshape(h, w).copy()
    return LabelMask(data, kind=header["kind"], classes=header.get("classes"))


def save_mask(mask: LabelMask, path: PathLike) -> None:
    header = {"width": mask.width, "height": mask.height, "bands": 1, "dtype": "u8", "kind": mask.kind}
    if mask.classes is not None:
        header["classes"] = int(mask.classes)
    _write(path, header, mask.data.tobytes())


def cluster_palette(k: int) -> np.ndarray:
    """K RGB colours with hues i/K, i = 0..K-1, at saturation 1 and value 1."""
    rgb = [colorsys.hsv_to_rgb(i / k, 1.0, 1.0) for i in range(k)]
    return np.round(np.array(rgb) * 255).astype(np.uint8)


def colorize(mask: LabelMask) -> np.ndarray:
    """RGB image (height, width, 3) for a mask using the fixed palettes."""
    if mask.kind == "cluster":
        k = mask.classes if mask.classes is not None else int(mask.data.max()) + 1
        return cluster_palette(k)[mask.data]
    lut = np.zeros((256, 3), dtype=np.uint8)
    for code, rgb in LABEL_PALETTE.items():
        lut[code] = rgb
    return lut[mask.data]


def render_png(layer: LabelMask, path: PathLike) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(colorize(layer)).save(path, format="PNG")
