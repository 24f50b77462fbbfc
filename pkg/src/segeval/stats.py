"""Binomial confidence intervals, CI-derived p-values and group aggregation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Optional

from .overlap import dice as dice_score
from .overlap import iou as iou_score
from .overlap import pooled
from .records import METRICS

# z used by the Altman-Bland recipe for recovering an SE from a 95% CI
AB_Z = 1.96


class EmptyGroupError(ValueError):
    pass


@dataclass(frozen=True)
class CiResult:
    estimate: float
    lower: float
    upper: float
    method: str
    n: int
    alpha: float = 0.05
    successes: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")

    def as_dict(self):
        out = {"estimate": self.estimate, "lower": self.lower, "upper": self.upper,
               "method": self.method, "n": self.n, "alpha": self.alpha}
        if self.successes is not None:
            out["successes"] = self.successes
        return out


def z_value(alpha):
    return NormalDist().inv_cdf(1 - alpha / 2)


def _check_binomial(k, n, alpha):
    if n < 1 or not 0 <= k <= n or int(k) != k or int(n) != n:
        raise ValueError(f"need integers 0 <= k <= n and n >= 1, got k={k}, n={n}")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")


def binom_pmf(i, n, p):
    if p <= 0.0:
        return 1.0 if i == 0 else 0.0
    if p >= 1.0:
        return 1.0 if i == n else 0.0
    log = (math.lgamma(n + 1) - math.lgamma(i + 1) - math.lgamma(n - i + 1)
           + i * math.log(p) + (n - i) * math.log1p(-p))
    return math.exp(log)


def binom_sf(k, n, p):
    """P(X >= k)."""
    return math.fsum(binom_pmf(i, n, p) for i in range(k, n + 1))


def binom_cdf(k, n, p):
    """P(X <= k)."""
    return math.fsum(binom_pmf(i, n, p) for i in range(0, k + 1))


def _bisect(fn, target, increasing, tol=1e-12):
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if (fn(mid) < target) == increasing:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def clopper_pearson(k, n, alpha=0.05):
    """Exact interval by bisection on binomial tail sums (no incomplete beta)."""
    _check_binomial(k, n, alpha)
    k, n = int(k), int(n)
    half = alpha / 2
    lower = 0.0 if k == 0 else _bisect(lambda p: binom_sf(k, n, p), half, increasing=True)
    upper = 1.0 if k == n else _bisect(lambda p: binom_cdf(k, n, p), half, increasing=False)
    return CiResult(k / n, lower, upper, "clopper_pearson", n, alpha, successes=k)


def wald_clipped(p_hat, n, alpha=0.05):
    """p_hat +/- z * sqrt(p_hat (1 - p_hat) / n), clipped to [0, 1]."""
    if not 0.0 <= p_hat <= 1.0 or n < 1:
        raise ValueError(f"need 0 <= p_hat <= 1 and n >= 1, got {p_hat}, {n}")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    half = z_value(alpha) * math.sqrt(p_hat * (1 - p_hat) / n)
    return CiResult(p_hat, max(0.0, p_hat - half), min(1.0, p_hat + half), "wald_clipped", n, alpha)


def p_from_z(z):
    """Altman & Bland (2011): P = exp(-0.717 z - 0.416 z^2), at most 1."""
    z = abs(z)
    return min(1.0, math.exp(-0.717 * z - 0.416 * z * z))


def p_from_ci(estimate, lower, upper):
    """Two-sided p-value for H0: effect = 0, given a 95% CI for the effect."""
    if not upper > lower:
        raise ValueError("degenerate confidence interval")
    se = (upper - lower) / (2 * AB_Z)
    return p_from_z(estimate / se)


def se_from_ci(ci):
    """Standard error implied by a 95% CI.

    A side truncated at 0 or 1 carries no width information, so the
    other side's half-width is used when exactly one side was clipped.
    """
    lo_clipped = ci.lower <= 0.0 < ci.estimate
    hi_clipped = ci.upper >= 1.0 > ci.estimate
    if hi_clipped and not lo_clipped:
        return (ci.estimate - ci.lower) / AB_Z
    if lo_clipped and not hi_clipped:
        return (ci.upper - ci.estimate) / AB_Z
    return (ci.upper - ci.lower) / (2 * AB_Z)


@dataclass(frozen=True)
class Comparison:
    difference: float
    se: float
    z: float
    p: float
    significant: bool


def compare_cis(a, b, level=0.05):
    diff = a.estimate - b.estimate
    se = math.hypot(se_from_ci(a), se_from_ci(b))
    if se == 0.0:
        z = 0.0 if diff == 0 else math.copysign(math.inf, diff)
    else:
        z = diff / se
    p = p_from_z(z)
    return Comparison(diff, se, z, p, p < level)


@dataclass(frozen=True)
class GroupSummary:
    group: str
    model_id: str
    n: int
    excluded: int
    means: dict
    dice_wald: CiResult
    dice_cp: CiResult
    case_ids: tuple
    pooled: bool = False
    notes: tuple = field(default=())

    def ci(self, method="wald_clipped"):
        return self.dice_cp if method == "clopper_pearson" else self.dice_wald

    def as_dict(self):
        return {
            "group": self.group, "model_id": self.model_id, "n": self.n,
            "excluded": self.excluded, "pooled": self.pooled, "means": dict(self.means),
            "dice_ci": {"wald_clipped": self.dice_wald.as_dict(),
                        "clopper_pearson": self.dice_cp.as_dict()},
            "notes": list(self.notes),
        }


def compare_models(a, b, method="wald_clipped", level=0.05):
    if tuple(a.case_ids) != tuple(b.case_ids):
        raise ValueError(f"{a.model_id} and {b.model_id} were evaluated on different cases")
    return compare_cis(a.ci(method), b.ci(method), level)


def aggregate(records, alpha=0.05, pooled_counts=False):
    """Fold per-case records into a group summary.

    Records with any metric error are left out and counted in ``excluded``.
    The Clopper-Pearson interval needs a success count, so it is taken as
    round(mean Dice * n).
    """
    records = sorted(records, key=lambda r: r.case_id)
    good = [r for r in records if r.ok]
    if not good:
        raise EmptyGroupError("no error-free records to aggregate")
    n = len(good)
    means = {m: math.fsum(getattr(r, m) for r in good) / n for m in METRICS}
    notes = []
    if pooled_counts:
        total = pooled(r.counts for r in good)
        means["iou"] = iou_score(total)
        means["dice"] = dice_score(total)
        notes.append("iou/dice from pooled confusion counts")
    dice_mean = min(1.0, max(0.0, means["dice"]))
    k = int(round(dice_mean * n))
    notes.append(f"clopper_pearson uses k=round(dice*n)={k}")
    first = good[0]
    return GroupSummary(
        group=first.group, model_id=first.model_id, n=n, excluded=len(records) - n,
        means=means, dice_wald=wald_clipped(dice_mean, n, alpha),
        dice_cp=clopper_pearson(k, n, alpha), case_ids=tuple(r.case_id for r in good),
        pooled=pooled_counts, notes=tuple(notes))
