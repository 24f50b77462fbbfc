"""Numerical kernels shared by the metrics: contours, exact EDT, smoothing,
DCT-II and Haar wavelets."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .raster import BinaryMask, GrayImage, RasterError

CANNY_SIGMA = 1.4
CANNY_LOW = 0.1
CANNY_HIGH = 0.3

BINOMIAL_5 = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


class EmptySeedsError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ContourSet:
    """Unique (row, col) edge pixels of a ``height`` x ``width`` raster, row-major sorted."""

    points: np.ndarray
    height: int
    width: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64).reshape(-1, 2)
        if len(pts):
            if pts.min() < 0 or pts[:, 0].max() >= self.height or pts[:, 1].max() >= self.width:
                raise ValueError("contour point outside the raster")
            pts = np.unique(pts, axis=0)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_mask(cls, edges):
        edges = np.asarray(edges, dtype=bool)
        return cls(np.argwhere(edges), edges.shape[0], edges.shape[1])

    def __len__(self):
        return len(self.points)

    @property
    def empty(self):
        return len(self.points) == 0

    def to_mask(self):
        out = np.zeros((self.height, self.width), dtype=bool)
        if len(self.points):
            out[self.points[:, 0], self.points[:, 1]] = True
        return out

    def __eq__(self, other):
        return (isinstance(other, ContourSet)
                and (self.height, self.width) == (other.height, other.width)
                and np.array_equal(self.points, other.points))


@dataclass(frozen=True, eq=False)
class DistanceMap:
    data: np.ndarray

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    def at(self, points):
        points = np.asarray(points).reshape(-1, 2)
        return self.data[points[:, 0], points[:, 1]]


def _mask_array(mask):
    return mask.as_bool() if isinstance(mask, BinaryMask) else np.asarray(mask, dtype=bool)


def morph_boundary(mask):
    """Foreground pixels with at least one background 4-neighbour; the frame counts as background."""
    fg = _mask_array(mask)
    padded = np.pad(fg, 1, constant_values=False)
    interior = (padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:])
    return ContourSet.from_mask(fg & ~interior)


def _non_max_suppression(mag, gx, gy):
    h, w = mag.shape
    padded = np.pad(mag, 1)
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    # neighbour offsets (drow, dcol) along the quantised gradient direction
    bins = np.digitize(angle, [22.5, 67.5, 112.5, 157.5]) % 4
    offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    keep = np.zeros_like(mag, dtype=bool)
    for b, (dr, dc) in offsets.items():
        sel = bins == b
        fwd = padded[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]
        bwd = padded[1 - dr:1 - dr + h, 1 - dc:1 - dc + w]
        keep |= sel & (mag >= fwd) & (mag >= bwd)
    return keep & (mag > 0)


def canny_edges(image, sigma=CANNY_SIGMA, low=CANNY_LOW, high=CANNY_HIGH):
    """Boolean edge map: Gaussian smoothing, Sobel gradients, non-maximum
    suppression and 8-connected hysteresis. ``low``/``high`` are fractions of
    the peak gradient magnitude."""
    if not 0 <= low <= high:
        raise ValueError("need 0 <= low <= high")
    img = np.asarray(image, dtype=np.float64)
    smooth = ndimage.gaussian_filter(img, sigma, mode="nearest") if sigma > 0 else img
    gx = ndimage.sobel(smooth, axis=1, mode="nearest")
    gy = ndimage.sobel(smooth, axis=0, mode="nearest")
    mag = np.hypot(gx, gy)
    peak = mag.max()
    # a flat raster has only rounding noise for a gradient
    if peak <= 1e-12:
        return np.zeros(img.shape, dtype=bool)
    thin = _non_max_suppression(mag, gx, gy)
    norm = mag / peak
    weak = thin & (norm >= low)
    strong = thin & (norm >= high)
    labels, n = ndimage.label(weak, structure=np.ones((3, 3), dtype=int))
    if n == 0:
        return np.zeros(img.shape, dtype=bool)
    anchored = np.zeros(n + 1, dtype=bool)
    anchored[np.unique(labels[strong])] = True
    anchored[0] = False
    return anchored[labels]


def canny_contour(mask, sigma=CANNY_SIGMA, low=CANNY_LOW, high=CANNY_HIGH):
    return ContourSet.from_mask(canny_edges(_mask_array(mask).astype(np.float64), sigma, low, high))


def extract_contour(mask, extractor="canny", **kwargs):
    if extractor == "canny":
        return canny_contour(mask, **kwargs)
    if extractor == "morph":
        return morph_boundary(mask)
    raise ValueError(f"unknown contour extractor {extractor!r}")


def _squared_edt_1d(f):
    """Lower envelope of parabolas rooted at (q, f[q]) (Felzenszwalb-Huttenlocher)."""
    n = len(f)
    out = np.empty(n)
    v = np.zeros(n, dtype=np.int64)
    z = np.empty(n + 1)
    k = -1
    for q in range(n):
        if f[q] == np.inf:
            continue
        if k < 0:
            k = 0
            v[0] = q
            z[0], z[1] = -np.inf, np.inf
            continue
        while True:
            p = v[k]
            s = ((f[q] + q * q) - (f[p] + p * p)) / (2.0 * (q - p))
            if s <= z[k]:
                k -= 1
                if k < 0:
                    break
            else:
                break
        k += 1
        v[k] = q
        z[k] = s if k > 0 else -np.inf
        z[k + 1] = np.inf
    if k < 0:
        out.fill(np.inf)
        return out
    j = 0
    for x in range(n):
        while z[j + 1] < x:
            j += 1
        p = v[j]
        out[x] = (x - p) ** 2 + f[p]
    return out


def _edt_envelope(seeds):
    h, w = seeds.shape
    f = np.where(seeds, 0.0, np.inf)
    cols = np.empty_like(f)
    for c in range(w):
        cols[:, c] = _squared_edt_1d(f[:, c])
    out = np.empty_like(f)
    for r in range(h):
        out[r] = _squared_edt_1d(cols[r])
    return np.sqrt(out)


def distance_transform(seeds, width=None, height=None, method="scipy"):
    """Exact Euclidean distance from every pixel to the nearest seed pixel.

    ``method="envelope"`` runs the separable lower-envelope transform in pure
    Python; ``"scipy"`` delegates to ``scipy.ndimage.distance_transform_edt``.
    Both return sqrt of the exact integer squared distance.
    """
    if isinstance(seeds, ContourSet):
        height = seeds.height if height is None else height
        width = seeds.width if width is None else width
        grid = np.zeros((height, width), dtype=bool)
        if len(seeds.points):
            grid[seeds.points[:, 0], seeds.points[:, 1]] = True
    else:
        grid = np.asarray(seeds, dtype=bool)
    if not grid.any():
        raise EmptySeedsError("distance transform needs at least one seed pixel")
    if method == "scipy":
        data = ndimage.distance_transform_edt(~grid)
    elif method == "envelope":
        data = _edt_envelope(grid)
    else:
        raise ValueError(f"unknown distance transform method {method!r}")
    data = np.asarray(data, dtype=np.float64)
    data.setflags(write=False)
    return DistanceMap(data)


def gaussian_downsample2x(img):
    """Binomial [1 4 6 4 1]/16 low-pass (reflect border), then keep every second pixel."""
    arr = img.data if isinstance(img, GrayImage) else np.asarray(img, dtype=np.float64)
    h, w = arr.shape
    if h < 2 or w < 2:
        raise RasterError(f"image too small to downsample: {w}x{h}")
    smooth = ndimage.correlate1d(arr, BINOMIAL_5, axis=0, mode="reflect")
    smooth = ndimage.correlate1d(smooth, BINOMIAL_5, axis=1, mode="reflect")
    out = smooth[:2 * (h // 2):2, :2 * (w // 2):2]
    if isinstance(img, GrayImage):
        return GrayImage(np.clip(out, 0.0, 1.0))
    return out


def dct_matrix(n):
    k = np.arange(n)[:, None]
    x = np.arange(n)[None, :]
    mat = np.sqrt(2.0 / n) * np.cos(np.pi * (2 * x + 1) * k / (2 * n))
    mat[0] /= np.sqrt(2.0)
    return mat


def _square(block):
    arr = block.data if isinstance(block, GrayImage) else np.asarray(block, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 2:
        raise ValueError(f"dct2 needs a square block of side >= 2, got {arr.shape}")
    return arr


def dct2(block):
    """Orthonormal 2-D DCT-II."""
    arr = _square(block)
    c = dct_matrix(arr.shape[0])
    return c @ arr @ c.T


def idct2(coeffs):
    arr = _square(coeffs)
    c = dct_matrix(arr.shape[0])
    return c.T @ arr @ c


@dataclass(frozen=True)
class HaarPyramid:
    """``details[i]`` holds (LH, HL, HH) for level i + 1 (finest first);
    ``approx`` is the LL band of the coarsest level."""

    approx: np.ndarray
    details: tuple

    @property
    def levels(self):
        return len(self.details)

    def to_array(self):
        """Mallat layout: LL in the top-left corner, each level's bands around it."""
        out = self.approx
        for lh, hl, hh in reversed(self.details):
            out = np.block([[out, hl], [lh, hh]])
        return out


def _haar_step(arr):
    a = arr[0::2, 0::2]
    b = arr[0::2, 1::2]
    c = arr[1::2, 0::2]
    d = arr[1::2, 1::2]
    ll = (a + b + c + d) / 2.0
    lh = (a + b - c - d) / 2.0
    hl = (a - b + c - d) / 2.0
    hh = (a - b - c + d) / 2.0
    return ll, (lh, hl, hh)


def haar_dwt2(img, levels=1):
    """Orthonormal 2-D Haar decomposition; on a 2x2 block [[a, b], [c, d]]
    LL=(a+b+c+d)/2, LH=(a+b-c-d)/2, HL=(a-b+c-d)/2, HH=(a-b-c+d)/2."""
    arr = img.data if isinstance(img, GrayImage) else np.asarray(img, dtype=np.float64)
    if levels < 1:
        raise ValueError("levels must be >= 1")
    step = 2 ** levels
    if arr.shape[0] % step or arr.shape[1] % step:
        raise ValueError(f"shape {arr.shape} is not divisible by 2**{levels}")
    details = []
    for _ in range(levels):
        arr, bands = _haar_step(arr)
        details.append(bands)
    return HaarPyramid(arr, tuple(details))


def haar_idwt2(pyr):
    arr = pyr.approx
    for lh, hl, hh in reversed(pyr.details):
        out = np.empty((arr.shape[0] * 2, arr.shape[1] * 2))
        out[0::2, 0::2] = (arr + lh + hl + hh) / 2.0
        out[0::2, 1::2] = (arr + lh - hl - hh) / 2.0
        out[1::2, 0::2] = (arr - lh + hl - hh) / 2.0
        out[1::2, 1::2] = (arr - lh - hl + hh) / 2.0
        arr = out
    return arr
