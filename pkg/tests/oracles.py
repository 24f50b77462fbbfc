"""Slow, straight-line reference implementations used as test oracles.

Nothing here imports the package's kernels; loops are deliberate except
where noted.
"""
import math


def brute_distance_map(seeds, height, width):
    pts = [(r, c) for r, c in seeds]
    out = [[0.0] * width for _ in range(height)]
    for r in range(height):
        for c in range(width):
            out[r][c] = min(math.sqrt((r - pr) ** 2 + (c - pc) ** 2) for pr, pc in pts)
    return out


def brute_distance_map_np(seeds, height, width):
    """Same O(N*S) minimum as above, broadcast over numpy arrays for larger grids."""
    import numpy as np
    rr, cc = np.mgrid[:height, :width]
    s = np.asarray(seeds, dtype=np.int64)
    d2 = (rr[..., None] - s[:, 0]) ** 2 + (cc[..., None] - s[:, 1]) ** 2
    return np.sqrt(d2.min(axis=-1).astype(np.float64))


def nearest_distances(a, b):
    """For each point of ``a`` the Euclidean distance to the closest point of ``b``."""
    return [min(math.hypot(ar - br, ac - bc) for br, bc in b) for ar, ac in a]


def percentile_linear(values, q):
    s = sorted(values)
    rank = q / 100.0 * (len(s) - 1)
    lo = int(math.floor(rank))
    hi = min(lo + 1, len(s) - 1)
    return s[lo] + (s[hi] - s[lo]) * (rank - lo)


def mlcd(gt_pts, pred_pts):
    d = nearest_distances(pred_pts, gt_pts)
    return sum(d) / len(d)


def hd95(gt_pts, pred_pts, q=95.0):
    return max(percentile_linear(nearest_distances(pred_pts, gt_pts), q),
               percentile_linear(nearest_distances(gt_pts, pred_pts), q))


def hausdorff(a, b):
    return max(max(nearest_distances(a, b)), max(nearest_distances(b, a)))


def assd(a, b):
    d1 = nearest_distances(a, b)
    d2 = nearest_distances(b, a)
    return (sum(d1) + sum(d2)) / (len(d1) + len(d2))


# --- naive perceptual hashes -------------------------------------------------

def _lerp(a, b, t):
    return a + (b - a) * t


def naive_resize(img, width, height):
    """Bilinear, half-pixel centres, clamped edges; ``img`` is a list of rows."""
    h, w = len(img), len(img[0])
    out = []
    for y in range(height):
        sy = min(max((y + 0.5) * (h / height) - 0.5, 0.0), h - 1)
        y0 = int(math.floor(sy))
        y1 = min(y0 + 1, h - 1)
        fy = sy - y0
        row = []
        for x in range(width):
            sx = min(max((x + 0.5) * (w / width) - 0.5, 0.0), w - 1)
            x0 = int(math.floor(sx))
            x1 = min(x0 + 1, w - 1)
            fx = sx - x0
            top = _lerp(img[y0][x0], img[y0][x1], fx)
            bottom = _lerp(img[y1][x0], img[y1][x1], fx)
            row.append(_lerp(top, bottom, fy))
        out.append(row)
    return out


def naive_dct2(block, keep=None):
    """Orthonormal 2-D DCT-II by the defining double sum; only the top-left
    ``keep`` x ``keep`` coefficients are computed when ``keep`` is given."""
    n = len(block)
    m = n if keep is None else keep
    out = [[0.0] * m for _ in range(m)]
    for u in range(m):
        for v in range(m):
            s = 0.0
            for x in range(n):
                for y in range(n):
                    s += (block[x][y] * math.cos(math.pi * (2 * x + 1) * u / (2 * n))
                          * math.cos(math.pi * (2 * y + 1) * v / (2 * n)))
            cu = math.sqrt(1.0 / n) if u == 0 else math.sqrt(2.0 / n)
            cv = math.sqrt(1.0 / n) if v == 0 else math.sqrt(2.0 / n)
            out[u][v] = cu * cv * s
    return out


def naive_haar_mallat(img, levels):
    """Mallat-layout Haar coefficients computed level by level with explicit loops."""
    n = len(img)
    coeffs = [row[:] for row in img]
    size = n
    for _ in range(levels):
        half = size // 2
        src = [row[:size] for row in coeffs[:size]]
        for i in range(half):
            for j in range(half):
                a = src[2 * i][2 * j]
                b = src[2 * i][2 * j + 1]
                c = src[2 * i + 1][2 * j]
                d = src[2 * i + 1][2 * j + 1]
                coeffs[i][j] = (a + b + c + d) / 2
                coeffs[i][j + half] = (a - b + c - d) / 2
                coeffs[i + half][j] = (a + b - c - d) / 2
                coeffs[i + half][j + half] = (a - b - c + d) / 2
        size = half
    return coeffs


def _q(x):
    return int(round(x * 1e9))


def _bits_to_int(bits):
    v = 0
    for b in bits:
        v = v * 2 + (1 if b else 0)
    return v


def _median_bits(vals):
    q = [_q(v) for v in vals]
    s = sorted(q)
    n = len(s)
    twice_median = s[(n - 1) // 2] + s[n // 2]
    return [2 * v > twice_median for v in q]


def naive_hashes(img):
    """aHash, dHash, pHash, wHash of a list-of-rows image, as ints."""
    small = naive_resize(img, 8, 8)
    flat = [_q(v) for row in small for v in row]
    total = sum(flat)
    ahash = _bits_to_int([v * 64 > total for v in flat])

    wide = naive_resize(img, 9, 8)
    dbits = []
    for row in wide:
        for x in range(8):
            dbits.append(_q(row[x]) < _q(row[x + 1]))
    dhash = _bits_to_int(dbits)

    d = naive_dct2(naive_resize(img, 32, 32), keep=9)
    feats = [d[r][c] for r in range(8) for c in range(8)][1:] + [d[0][8]]
    phash = _bits_to_int(_median_bits(feats))

    w = naive_haar_mallat(naive_resize(img, 8, 8), 3)
    w[0][0] = 0.0
    whash = _bits_to_int(_median_bits([v for row in w for v in row]))
    return {"aHash": ahash, "dHash": dhash, "pHash": phash, "wHash": whash}


def popcount(x):
    return bin(x).count("1")


# --- binomial ------------------------------------------------------------------

def pmf(k, n, p):
    return math.comb(n, k) * p ** k * (1 - p) ** (n - k)


def cp_bounds(k, n, alpha, iters=200):
    """Clopper-Pearson by bisection on tail sums built from math.comb."""
    def upper_tail(p):
        return sum(pmf(i, n, p) for i in range(k, n + 1))

    def lower_tail(p):
        return sum(pmf(i, n, p) for i in range(0, k + 1))

    lower = 0.0
    if k > 0:
        lo, hi = 0.0, 1.0
        for _ in range(iters):
            mid = (lo + hi) / 2
            lo, hi = (mid, hi) if upper_tail(mid) < alpha / 2 else (lo, mid)
        lower = (lo + hi) / 2
    upper = 1.0
    if k < n:
        lo, hi = 0.0, 1.0
        for _ in range(iters):
            mid = (lo + hi) / 2
            lo, hi = (mid, hi) if lower_tail(mid) > alpha / 2 else (lo, mid)
        upper = (lo + hi) / 2
    return lower, upper


# --- SSIM ----------------------------------------------------------------------

def _reflect(i, n):
    # scipy "reflect": d c b a | a b c d | d c b a
    while i < 0 or i >= n:
        i = -i - 1 if i < 0 else 2 * n - i - 1
    return i


def naive_ssim_terms(a, b, window=11, sigma=1.5, k1=0.01, k2=0.03, L=1.0):
    """Per-pixel (luminance, contrast*structure) lists with unit exponents."""
    h, w = len(a), len(a[0])
    half = (window - 1) / 2
    g1 = [math.exp(-((i - half) ** 2) / (2 * sigma * sigma)) for i in range(window)]
    s = sum(g1)
    g1 = [v / s for v in g1]
    c1, c2 = (k1 * L) ** 2, (k2 * L) ** 2
    c3 = c2 / 2
    lum = [[0.0] * w for _ in range(h)]
    cs = [[0.0] * w for _ in range(h)]
    r0 = window // 2
    for y in range(h):
        for x in range(w):
            ma = mb = saa = sbb = sab = 0.0
            for i in range(window):
                for j in range(window):
                    wt = g1[i] * g1[j]
                    va = a[_reflect(y + i - r0, h)][_reflect(x + j - r0, w)]
                    vb = b[_reflect(y + i - r0, h)][_reflect(x + j - r0, w)]
                    ma += wt * va
                    mb += wt * vb
                    saa += wt * va * va
                    sbb += wt * vb * vb
                    sab += wt * va * vb
            va_ = max(saa - ma * ma, 0.0)
            vb_ = max(sbb - mb * mb, 0.0)
            cov = sab - ma * mb
            sd = math.sqrt(va_) * math.sqrt(vb_)
            lum[y][x] = (2 * ma * mb + c1) / (ma * ma + mb * mb + c1)
            st = max((cov + c3) / (sd + c3), 0.0)
            cs[y][x] = (2 * sd + c2) / (va_ + vb_ + c2) * st
    return lum, cs


def naive_downsample(img):
    taps = [1 / 16, 4 / 16, 6 / 16, 4 / 16, 1 / 16]
    h, w = len(img), len(img[0])
    out = []
    for y in range(h // 2):
        row = []
        for x in range(w // 2):
            v = 0.0
            for i in range(5):
                for j in range(5):
                    v += taps[i] * taps[j] * img[_reflect(2 * y + i - 2, h)][_reflect(2 * x + j - 2, w)]
            row.append(v)
        out.append(row)
    return out
