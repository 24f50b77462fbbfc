"""Raster types, file I/O and preprocessing (resize, normalize, binarize)."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image


class RasterError(ValueError):
    pass


class ImageReadError(RasterError):
    def __init__(self, path, reason):
        super().__init__(f"{path}: {reason}")
        self.path = str(path)
        self.reason = reason


def _frozen(arr, dtype):
    arr = np.array(arr, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Row-major real raster with values in [0, 1], stored as an (H, W) float64 array."""

    data: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.data, np.float64)
        if arr.ndim != 2 or arr.size == 0:
            raise RasterError(f"expected a non-empty 2-D raster, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
            raise RasterError("gray values must lie in [0, 1]")
        object.__setattr__(self, "data", arr)

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape

    def __eq__(self, other):
        return isinstance(other, GrayImage) and np.array_equal(self.data, other.data)


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Row-major {0, 1} raster (1 = foreground), stored as an (H, W) uint8 array."""

    data: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.data)
        if raw.ndim != 2 or raw.size == 0:
            raise RasterError(f"expected a non-empty 2-D raster, got shape {raw.shape}")
        if raw.dtype != bool and not np.isin(raw, (0, 1)).all():
            raise RasterError("mask values must be 0 or 1")
        object.__setattr__(self, "data", _frozen(raw, np.uint8))

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape

    @property
    def foreground(self):
        return int(self.data.sum(dtype=np.int64))

    def as_bool(self):
        return self.data.astype(bool)

    def to_gray(self):
        return GrayImage(self.data.astype(np.float64))

    def __eq__(self, other):
        return isinstance(other, BinaryMask) and np.array_equal(self.data, other.data)


def binarize(img, threshold=0.5):
    """Pixels >= threshold become foreground."""
    return BinaryMask(img.data >= threshold)


def load_image(path, kind="gray", threshold=0.5):
    """Read an 8-bit grayscale PNG or PGM (P2/P5).

    ``kind="mask"`` binarizes the p/255 intensities at ``threshold``.
    Colour, palette, 16-bit and other formats are rejected.
    """
    if kind not in ("gray", "mask"):
        raise ValueError(f"kind must be 'gray' or 'mask', not {kind!r}")
    path = Path(path)
    try:
        with Image.open(path) as im:
            im.load()
            fmt, mode = im.format, im.mode
            arr = np.asarray(im)
    except FileNotFoundError:
        raise ImageReadError(path, "file not found") from None
    except (OSError, SyntaxError, ValueError) as exc:
        raise ImageReadError(path, f"unreadable image ({exc})") from None
    if fmt not in ("PNG", "PPM"):
        raise ImageReadError(path, f"unsupported format {fmt}")
    if mode != "L":
        raise ImageReadError(path, f"unsupported pixel mode {mode!r}; need 8-bit grayscale")
    gray = GrayImage(arr.astype(np.float64) / 255.0)
    return binarize(gray, threshold) if kind == "mask" else gray


def _to_uint8(values):
    return np.floor(np.clip(values, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def write_png(img, path):
    """Write an 8-bit PNG. Gray rasters and masks encode v as round(v*255);
    an (H, W, 3) float array in [0, 1] is written as RGB."""
    if isinstance(img, BinaryMask):
        arr = img.data * np.uint8(255)
    elif isinstance(img, GrayImage):
        arr = _to_uint8(img.data)
    else:
        arr = np.asarray(img)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise RasterError(f"colour raster must be (H, W, 3), got {arr.shape}")
        if arr.dtype != np.uint8:
            arr = _to_uint8(arr)
    path = Path(path)
    # fixed encoder settings so identical rasters produce identical bytes
    Image.fromarray(np.ascontiguousarray(arr)).save(path, format="PNG", optimize=False, compress_level=6)


def _source_coords(n_out, n_in):
    # half-pixel centre alignment
    return (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5


def resize_array(arr, width, height, mode="bilinear"):
    if width < 1 or height < 1:
        raise RasterError(f"target size must be at least 1x1, got {width}x{height}")
    arr = np.asarray(arr, dtype=np.float64)
    h, w = arr.shape
    if (h, w) == (height, width):
        return arr.copy()
    if mode == "nearest":
        rows = np.clip(np.floor((np.arange(height) + 0.5) * h / height), 0, h - 1).astype(int)
        cols = np.clip(np.floor((np.arange(width) + 0.5) * w / width), 0, w - 1).astype(int)
        return arr[np.ix_(rows, cols)]
    if mode != "bilinear":
        raise ValueError(f"unknown resize mode {mode!r}")
    ys = np.clip(_source_coords(height, h), 0, h - 1)
    xs = np.clip(_source_coords(width, w), 0, w - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    # a + (b - a) * t is exact when a == b, so flat regions stay flat
    p00 = arr[np.ix_(y0, x0)]
    p10 = arr[np.ix_(y1, x0)]
    top = p00 + (arr[np.ix_(y0, x1)] - p00) * fx
    bottom = p10 + (arr[np.ix_(y1, x1)] - p10) * fx
    return top + (bottom - top) * fy


def resize(img, width, height, mode=None):
    """Resize to ``width`` x ``height``.

    Masks default to nearest-neighbour (stays binary), gray images to bilinear.
    Resizing a mask bilinearly returns a GrayImage.
    """
    if isinstance(img, BinaryMask):
        mode = mode or "nearest"
        out = resize_array(img.data, width, height, mode)
        return BinaryMask(out.astype(np.uint8)) if mode == "nearest" else GrayImage(np.clip(out, 0, 1))
    out = resize_array(img.data, width, height, mode or "bilinear")
    return GrayImage(np.clip(out, 0.0, 1.0))


def preprocess(img, size=(224, 224)):
    """Rescale to the working resolution (224x224 by default)."""
    width, height = size
    return resize(img, width, height)
