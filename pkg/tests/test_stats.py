import csv
import math
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from segeval.overlap import ConfusionCounts
from segeval.records import METRICS, EvalRecord
from segeval.stats import (CiResult, EmptyGroupError, aggregate, clopper_pearson, compare_cis, compare_models,
                           p_from_ci, p_from_z, se_from_ci, wald_clipped)

GROUP_N = {"P1": 11, "P2": 17, "P3": 11}
PUBLISHED = Path(__file__).parent / "data" / "published_dice_cis.csv"


def published_rows():
    with PUBLISHED.open() as f:
        return [(r["table"], r["group"], float(r["dice"]), float(r["lower"]), float(r["upper"]))
                for r in csv.DictReader(f)]


def rec(case, dice=0.9, model="m", group="P1", **kw):
    values = {m: 0.0 for m in METRICS}
    values.update(iou=dice / (2 - dice), dice=dice, msssim=0.9)
    values.update(kw)
    return EvalRecord(case, model, group, counts=ConfusionCounts(1, 0, 0, 1), **values)


# --- Clopper-Pearson -------------------------------------------------------------

def test_cp_zero_successes():
    ci = clopper_pearson(0, 7)
    assert ci.lower == 0.0 and ci.upper < 1


def test_cp_all_successes_closed_form():
    ci = clopper_pearson(11, 11)
    assert ci.upper == 1.0
    assert ci.lower == pytest.approx(0.025 ** (1 / 11), abs=1e-9)
    assert ci.lower == pytest.approx(0.7151, abs=1e-4)


def test_cp_against_oracle():
    for k, n in [(8, 10), (3, 17), (1, 5), (29, 30)]:
        ci = clopper_pearson(k, n)
        lo, hi = oracles.cp_bounds(k, n, 0.05)
        assert ci.lower == pytest.approx(lo, abs=1e-9)
        assert ci.upper == pytest.approx(hi, abs=1e-9)


@given(st.integers(1, 40).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n))))
def test_cp_mirror_and_contains_estimate(kn):
    k, n = kn
    a, b = clopper_pearson(k, n), clopper_pearson(n - k, n)
    assert a.lower == pytest.approx(1 - b.upper, abs=1e-9)
    assert a.upper == pytest.approx(1 - b.lower, abs=1e-9)
    assert a.lower <= k / n <= a.upper


@pytest.mark.parametrize("k,n,alpha", [(-1, 5, 0.05), (6, 5, 0.05), (1, 0, 0.05), (1, 5, 1.5)])
def test_cp_rejects(k, n, alpha):
    with pytest.raises(ValueError):
        clopper_pearson(k, n, alpha)


# --- Wald ----------------------------------------------------------------------------

@pytest.mark.parametrize("p,n,lo,hi", [(0.9268, 11, 0.7728, 1.0), (0.9476, 17, 0.8416, 1.0)])
def test_wald_anchor_rows(p, n, lo, hi):
    ci = wald_clipped(p, n)
    assert abs(ci.lower - lo) <= 1e-3 and abs(ci.upper - hi) <= 1e-3


def test_wald_degenerate():
    ci = wald_clipped(1.0, 9)
    assert (ci.lower, ci.upper) == (1.0, 1.0)


@pytest.mark.parametrize("row", published_rows(), ids=lambda r: f"{r[1]}-{r[2]}")
def test_wald_reproduces_published_intervals(row):
    _, group, dice, lo, hi = row
    ci = wald_clipped(dice, GROUP_N[group])
    assert abs(ci.lower - lo) <= 1e-3 and abs(ci.upper - hi) <= 1e-3


# --- p-values ------------------------------------------------------------------------

def test_p_from_ci_anchor():
    assert p_from_ci(0.1, 0.0, 0.2) == pytest.approx(math.exp(-0.717 * 1.96 - 0.416 * 1.96 ** 2))
    assert p_from_ci(0.1, 0.0, 0.2) == pytest.approx(0.0496, abs=1e-4)
    assert p_from_ci(0.0, -0.1, 0.1) == 1.0


def test_p_from_ci_close_to_normal_tail():
    p = p_from_ci(0.3, 0.1, 0.5)
    z = 0.3 / (0.4 / (2 * 1.96))
    exact = math.erfc(z / math.sqrt(2))
    assert abs(p - exact) / exact <= 0.2


def test_p_from_ci_degenerate():
    with pytest.raises(ValueError):
        p_from_ci(0.1, 0.2, 0.2)


@given(st.floats(0, 30), st.floats(0, 30))
def test_p_strictly_decreasing_in_z(z1, z2):
    if z2 - z1 > 1e-6:
        assert p_from_z(z1) > p_from_z(z2)
    assert p_from_z(-z1) == p_from_z(z1)


# --- comparisons ----------------------------------------------------------------------

def test_se_from_clipped_ci_uses_open_side():
    ci = wald_clipped(0.9268, 11)
    assert se_from_ci(ci) == pytest.approx((0.9268 - ci.lower) / 1.96)


def test_compare_equal_models():
    ci = wald_clipped(0.8, 11)
    c = compare_cis(ci, ci)
    assert c.z == 0 and c.p == 1.0 and not c.significant


def test_compare_published_significant_pair():
    # P1 test group: 0.9268 vs 0.4589, both over 11 images
    c = compare_cis(wald_clipped(0.9268, 11), wald_clipped(0.4589, 11))
    assert c.significant and c.p < 0.05


@given(st.floats(0.05, 0.95), st.floats(0.01, 0.2), st.floats(0.01, 0.2), st.floats(0.0, 0.5))
def test_non_overlapping_cis_are_significant(est_a, half_a, half_b, gap):
    a = CiResult(est_a, est_a - half_a, est_a + half_a, "wald_clipped", 10)
    est_b = est_a + half_a + gap + half_b + 1e-6
    b = CiResult(est_b, est_b - half_b, est_b + half_b, "wald_clipped", 10)
    assert compare_cis(a, b).significant


def test_compare_models_requires_same_cases():
    a = aggregate([rec("c1"), rec("c2")])
    b = aggregate([rec("c1", model="n"), rec("c3", model="n")])
    with pytest.raises(ValueError):
        compare_models(a, b)


# --- aggregation ------------------------------------------------------------------------

def test_aggregate_single_record():
    s = aggregate([rec("a", dice=0.8, mlcd=3.5)])
    assert s.n == 1 and s.means["dice"] == 0.8 and s.means["mlcd"] == 3.5


def test_aggregate_mean_and_exclusion():
    bad = rec("c", dice=0.1)
    bad.errors = {"mlcd": "empty prediction contour"}
    s = aggregate([rec("b", dice=1.0), rec("a", dice=0.8), bad])
    assert s.means["dice"] == pytest.approx(0.9)
    assert s.n == 2 and s.excluded == 1
    assert s.case_ids == ("a", "b")


def test_aggregate_eleven_cases_published_interval():
    dices = [0.98, 0.95, 0.90, 0.97, 0.85, 0.93, 0.96, 0.92, 0.91, 0.94, 0.8848]
    assert sum(dices) / 11 == pytest.approx(0.9268, abs=1e-12)
    s = aggregate([rec(f"c{i:02d}", dice=d) for i, d in enumerate(dices)])
    assert abs(s.dice_wald.lower - 0.7728) <= 1e-3 and s.dice_wald.upper == 1.0
    assert s.dice_cp.successes == 10


def test_aggregate_pooled_counts():
    r1 = rec("a", dice=0.5)
    r1.counts = ConfusionCounts(1, 1, 1, 1)
    r2 = rec("b", dice=1.0)
    r2.counts = ConfusionCounts(3, 0, 0, 1)
    s = aggregate([r1, r2], pooled_counts=True)
    assert s.means["dice"] == pytest.approx(8 / 10)
    assert s.pooled


def test_aggregate_empty():
    with pytest.raises(EmptyGroupError):
        aggregate([])
