"""Synthetic masks for tests, demos and the bundled experiment scripts."""
import numpy as np

from .raster import BinaryMask


def ellipse(shape, center, radii, angle=0.0):
    rows, cols = np.mgrid[:shape[0], :shape[1]]
    dy = rows - center[0]
    dx = cols - center[1]
    ca, sa = np.cos(angle), np.sin(angle)
    u = (dx * ca + dy * sa) / radii[1]
    v = (-dx * sa + dy * ca) / radii[0]
    return u * u + v * v <= 1.0


def random_blob(rng, shape=(64, 64), n_ellipses=None, margin=2, min_radius=3.0):
    """Union of 1-3 random ellipses kept ``margin`` pixels inside the frame."""
    h, w = shape
    n = int(rng.integers(1, 4)) if n_ellipses is None else n_ellipses
    out = np.zeros(shape, dtype=bool)
    max_r = max(min_radius + 1, min(h, w) / 4)
    for _ in range(n):
        ry, rx = rng.uniform(min_radius, max_r, size=2)
        reach = max(ry, rx)
        lo = margin + reach
        cy = rng.uniform(lo, h - 1 - lo) if h - 1 - lo > lo else (h - 1) / 2
        cx = rng.uniform(lo, w - 1 - lo) if w - 1 - lo > lo else (w - 1) / 2
        out |= ellipse(shape, (cy, cx), (ry, rx), rng.uniform(0, np.pi))
    if margin > 0:
        out[:margin] = out[-margin:] = False
        out[:, :margin] = out[:, -margin:] = False
    if not out.any():
        out[h // 2, w // 2] = True
    return BinaryMask(out)


def lung_pair(rng, size=224, jitter=6.0):
    """Ground truth shaped like a pair of lung fields and a perturbed prediction."""
    shape = (size, size)
    s = size / 224.0
    gt = (ellipse(shape, (112 * s, 68 * s), (80 * s, 38 * s), 0.08)
          | ellipse(shape, (112 * s, 156 * s), (80 * s, 40 * s), -0.08))
    dy, dx = rng.normal(0, jitter * s, size=2)
    grow = rng.uniform(-6, 6) * s
    pred = (ellipse(shape, (112 * s + dy, 68 * s + dx), (80 * s + grow, 38 * s + grow / 2), 0.08 + rng.normal(0, 0.05))
            | ellipse(shape, (112 * s + dy, 156 * s + dx), (80 * s + grow, 40 * s + grow / 2), -0.08 + rng.normal(0, 0.05)))
    return BinaryMask(gt), BinaryMask(pred)


def random_smooth_blob(rng, shape=(64, 64)):
    """Star-shaped blob with a low-order Fourier boundary; no narrow gaps or sharp concavities."""
    h, w = shape
    r0 = rng.uniform(0.2, 0.35) * min(h, w)
    cy = h / 2 + rng.uniform(-2, 2)
    cx = w / 2 + rng.uniform(-2, 2)
    rows, cols = np.mgrid[:h, :w]
    theta = np.arctan2(rows - cy, cols - cx)
    radius = np.hypot(rows - cy, cols - cx)
    bound = np.ones_like(theta)
    for k in range(2, 5):
        bound += rng.uniform(0, 0.25 / k) * np.cos(k * theta + rng.uniform(0, 2 * np.pi))
    return BinaryMask(radius <= r0 * bound)


def write_synthetic_cohort(out_dir, n_cases=30, models=("model_a", "model_b", "model_c"),
                           seed=0, size=224):
    """Write GT masks, one prediction directory per model and a split manifest.

    Model ``i`` predicts with increasing jitter, so the expected ranking is the
    listed order. Returns the manifest path.
    """
    from pathlib import Path

    from .cohort import CaseEntry, CohortManifest, split, write_manifest
    from .raster import write_png

    out = Path(out_dir)
    (out / "gt").mkdir(parents=True, exist_ok=True)
    for m in models:
        (out / m).mkdir(exist_ok=True)
    rng = np.random.default_rng(seed)
    ages = (5, 18, 30, 96, 140, 170, 200, 240)
    entries = []
    for i in range(n_cases):
        case = f"case{i:03d}"
        gt, _ = lung_pair(rng, size)
        write_png(gt, out / "gt" / f"{case}.png")
        preds = {}
        for j, m in enumerate(models):
            _, pred = lung_pair(rng, size, jitter=2.0 + 3.0 * j)
            write_png(pred, out / m / f"{case}.png")
            preds[m] = f"{m}/{case}.png"
        entries.append(CaseEntry(case, f"pt{i // 2:03d}", ages[i % len(ages)], "synthetic",
                                 f"gt/{case}.png", preds))
    manifest = split(CohortManifest(tuple(entries), tuple(models), out), seed=seed)
    path = out / "manifest.csv"
    write_manifest(manifest, path)
    return path
