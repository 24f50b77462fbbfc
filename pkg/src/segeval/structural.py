"""Image-based metrics: SSIM, MS-SSIM with per-scale quality maps, and the
average hash score over four 64-bit perceptual hashes."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .imgproc import dct2, gaussian_downsample2x, haar_dwt2
from .overlap import check_same_shape
from .raster import BinaryMask, GrayImage, RasterError, resize_array, write_png

# Five-scale exponents of Wang et al. (2003); they sum to 1.0001, so they are
# renormalised to sum to one.
_MSSSIM_RAW = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
MSSSIM_WEIGHTS = tuple(w / sum(_MSSSIM_RAW) for w in _MSSSIM_RAW)


@dataclass(frozen=True)
class SsimConfig:
    scales: int = 5
    weights: tuple = MSSSIM_WEIGHTS
    window: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.scales < 1:
            raise ValueError("scales must be >= 1")
        if len(self.weights) != self.scales:
            raise ValueError(f"need {self.scales} scale weights, got {len(self.weights)}")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError(f"scale weights must sum to 1, got {sum(self.weights)!r}")
        if self.window < 1 or self.sigma <= 0 or self.dynamic_range <= 0:
            raise ValueError("window, sigma and dynamic_range must be positive")
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("stabilisers must be positive")

    @classmethod
    def with_scales(cls, scales, **kwargs):
        """Config using the first ``scales`` standard weights, renormalised."""
        if not 1 <= scales <= len(_MSSSIM_RAW):
            raise ValueError(f"standard weights exist for 1..{len(_MSSSIM_RAW)} scales")
        raw = _MSSSIM_RAW[:scales]
        return cls(scales=scales, weights=tuple(w / sum(raw) for w in raw), **kwargs)

    @property
    def c1(self):
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self):
        return (self.k2 * self.dynamic_range) ** 2

    @property
    def c3(self):
        return self.c2 / 2

    def min_size(self, scales=None):
        return self.window * 2 ** ((self.scales if scales is None else scales) - 1)

    def max_scales_for(self, height, width):
        m = 0
        while self.window * 2 ** m <= min(height, width):
            m += 1
        return m


@dataclass(frozen=True)
class SsimResult:
    msssim: float
    scale_ssim: tuple
    scale_cs: tuple
    maps: tuple
    weights: tuple
    clamp_count: int = 0

    @property
    def scales(self):
        return len(self.maps)

    def recompute(self):
        value = self.scale_ssim[-1] ** self.weights[-1]
        for cs, w in zip(self.scale_cs[:-1], self.weights[:-1]):
            value *= cs ** w
        return value


def gaussian_window(size, sigma):
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def _array(img):
    if isinstance(img, BinaryMask):
        return img.data.astype(np.float64)
    if isinstance(img, GrayImage):
        return img.data
    return np.asarray(img, dtype=np.float64)


def _blur(arr, taps):
    out = ndimage.correlate1d(arr, taps, axis=0, mode="reflect")
    return ndimage.correlate1d(out, taps, axis=1, mode="reflect")


def ssim_terms(a, b, cfg=SsimConfig()):
    """Local luminance map, contrast*structure map and the number of pixels
    whose structure term was negative and clamped to 0."""
    a = _array(a)
    b = _array(b)
    if a.shape != b.shape:
        raise RasterError(f"images differ in size: {a.shape} vs {b.shape}")
    if min(a.shape) < cfg.window:
        raise RasterError(f"image {a.shape[1]}x{a.shape[0]} is smaller than the {cfg.window}px window")
    taps = gaussian_window(cfg.window, cfg.sigma)
    mu_a = _blur(a, taps)
    mu_b = _blur(b, taps)
    var_a = np.maximum(_blur(a * a, taps) - mu_a * mu_a, 0.0)
    var_b = np.maximum(_blur(b * b, taps) - mu_b * mu_b, 0.0)
    cov = _blur(a * b, taps) - mu_a * mu_b
    sd_ab = np.sqrt(var_a) * np.sqrt(var_b)
    lum = (2 * mu_a * mu_b + cfg.c1) / (mu_a * mu_a + mu_b * mu_b + cfg.c1)
    con = (2 * sd_ab + cfg.c2) / (var_a + var_b + cfg.c2)
    struct = (cov + cfg.c3) / (sd_ab + cfg.c3)
    negative = struct < 0
    struct = np.where(negative, 0.0, struct)
    return lum, con * struct, int(np.count_nonzero(negative))


def ssim_map(a, b, cfg=SsimConfig()):
    """Single-scale SSIM with unit exponents; returns (mean, quality map)."""
    lum, cs, _ = ssim_terms(a, b, cfg)
    qmap = np.clip(lum * cs, 0.0, 1.0)
    return float(qmap.mean()), GrayImage(qmap)


def msssim(a, b, cfg=SsimConfig()):
    a = _array(a)
    b = _array(b)
    if a.shape != b.shape:
        raise RasterError(f"images differ in size: {a.shape} vs {b.shape}")
    need = cfg.min_size()
    if min(a.shape) < need:
        fit = cfg.max_scales_for(*a.shape)
        hint = f"; at most {fit} scale(s) fit" if fit else ""
        raise RasterError(
            f"image {a.shape[1]}x{a.shape[0]} is too small for {cfg.scales} scales "
            f"(needs >= {need}px per side){hint}")
    ssims, css, maps = [], [], []
    clamped = 0
    for j in range(cfg.scales):
        if j:
            a = gaussian_downsample2x(a)
            b = gaussian_downsample2x(b)
        lum, cs, n_neg = ssim_terms(a, b, cfg)
        clamped += n_neg
        qmap = np.clip(lum * cs, 0.0, 1.0)
        maps.append(GrayImage(qmap))
        ssims.append(float(qmap.mean()))
        css.append(float(np.clip(cs, 0.0, 1.0).mean()))
    result = SsimResult(0.0, tuple(ssims), tuple(css), tuple(maps), cfg.weights, clamped)
    return SsimResult(result.recompute(), result.scale_ssim, result.scale_cs,
                      result.maps, result.weights, clamped)


def jet(values):
    """Piecewise-linear Jet colormap: 0 -> (0, 0, 0.5), 0.5 -> (0.5, 1, 0.5), 1 -> (0.5, 0, 0)."""
    v = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    r = np.clip(1.5 - np.abs(4 * v - 3), 0.0, 1.0)
    g = np.clip(1.5 - np.abs(4 * v - 2), 0.0, 1.0)
    b = np.clip(1.5 - np.abs(4 * v - 1), 0.0, 1.0)
    return np.stack([r, g, b], axis=-1)


def quality_map_png(result, scale, path):
    """Write the 1-based ``scale`` quality map as a Jet-coloured RGB PNG."""
    if not 1 <= scale <= result.scales:
        raise IndexError(f"scale must be in 1..{result.scales}, got {scale}")
    write_png(jet(result.maps[scale - 1].data), path)


HASH_KINDS = ("aHash", "dHash", "pHash", "wHash")
# features are snapped to this grid so thresholds compare exact integers
_QUANT = 1e9


@dataclass(frozen=True)
class HashCode:
    bits: int
    kind: str

    def __post_init__(self):
        if self.kind not in HASH_KINDS:
            raise ValueError(f"unknown hash kind {self.kind!r}")
        if not 0 <= self.bits < 1 << 64:
            raise ValueError("hash must fit in 64 bits")

    @property
    def hex(self):
        return f"{self.bits:016x}"

    def __sub__(self, other):
        return hamming(self, other)


def hamming(a, b):
    if a.kind != b.kind:
        raise ValueError(f"cannot compare {a.kind} with {b.kind}")
    return (a.bits ^ b.bits).bit_count()


def _pack(flags):
    """Row-major booleans -> int, first flag in the most significant bit."""
    value = 0
    for f in np.asarray(flags, dtype=bool).ravel():
        value = (value << 1) | int(f)
    return value


def _quantize(values):
    return np.rint(np.asarray(values, dtype=np.float64) * _QUANT).astype(np.int64)


def _above_mean(q):
    return q * q.size > q.sum()


def _above_median(q):
    s = np.sort(q.ravel())
    n = s.size
    return 2 * q > s[(n - 1) // 2] + s[n // 2]


def phash_features(arr):
    """64 low-frequency DCT coefficients of the 32x32 thumbnail: the top-left
    8x8 block in row-major order minus DC, followed by coefficient (0, 8)."""
    coeffs = dct2(resize_array(arr, 32, 32))
    block = coeffs[:8, :8].ravel()[1:]
    return np.append(block, coeffs[0, 8])


def whash_features(arr):
    """3-level Haar coefficients of the 8x8 thumbnail in Mallat layout, with DC set to 0."""
    coeffs = haar_dwt2(resize_array(arr, 8, 8), levels=3).to_array().copy()
    coeffs[0, 0] = 0.0
    return coeffs.ravel()


def image_hash(img, kind):
    arr = _array(img)
    if kind == "aHash":
        flags = _above_mean(_quantize(resize_array(arr, 8, 8)))
    elif kind == "dHash":
        q = _quantize(resize_array(arr, 9, 8))
        flags = q[:, :-1] < q[:, 1:]
    elif kind == "pHash":
        flags = _above_median(_quantize(phash_features(arr)))
    elif kind == "wHash":
        flags = _above_median(_quantize(whash_features(arr)))
    else:
        raise ValueError(f"unknown hash kind {kind!r}")
    return HashCode(_pack(flags), kind)


@dataclass(frozen=True)
class HashScores:
    aHash: int
    dHash: int
    pHash: int
    wHash: int
    ahs: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "ahs", (self.aHash + self.dHash + self.pHash + self.wHash) / 4)

    @property
    def ahs_normalized(self):
        return self.ahs / 64.0

    def as_dict(self):
        return {k: getattr(self, k) for k in HASH_KINDS}


def ahs(gt, pred):
    """Per-kind Hamming distances between the masks' hashes and their mean (0-64)."""
    check_same_shape(gt, pred)
    dists = [hamming(image_hash(gt, k), image_hash(pred, k)) for k in HASH_KINDS]
    return HashScores(*dists)
