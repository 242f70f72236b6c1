from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from affecta.analytics.stats import (
    cohens_d,
    cohens_d_from_summary,
    mann_whitney_u,
    mean_impute,
    midranks,
    rank_biserial,
    shapiro_wilk,
    t_test,
    t_test_from_summary,
    u_null_distribution,
)

from .oracles import brute_force_u_p, pooled_d, t_two_sided_oracle

# W and p from the single-precision reference AS R94 routine (frozen)
SW_VECTORS = {
    "weights_11": (
        [148, 154, 158, 160, 161, 162, 166, 170, 182, 195, 236],
        0.7888146948631716,
        0.006703814061898823,
    ),
    "outlier_10": ([1] * 9 + [100], 0.36572062769765235, 1.0036928213864587e-07),
    "n3": ([1, 2, 4], 0.9642857142857142, 0.6368868450289689),
    "n5": ([2.1, 3.3, 3.9, 4.4, 9.0], 0.8462936597801825, 0.1830845608259008),
    "uniform_30": (list(np.linspace(0, 1, 30)), 0.9574505592737161, 0.26623268279592593),
}


def test_midranks():
    assert midranks([3, 1, 3, 2]) == [3.5, 1.0, 3.5, 2.0]


def test_u_distribution_counts_all_splits():
    dist = u_null_distribution(midranks(list(range(14))), 7)
    assert sum(dist.values()) == math.comb(14, 7)
    assert min(dist) == 0 and max(dist) == 49


def test_u_seven_by_seven():
    a = [1, 2, 3, 4, 5, 6, 13]
    b = [7, 8, 9, 10, 11, 12, 14]
    res = mann_whitney_u(a, b)
    assert res.statistic == 6 and res.exact
    assert res.p_value == pytest.approx(60 / 3432, abs=1e-15)
    assert res.effect_size == pytest.approx(1 - 12 / 49)
    assert res.significant


def test_three_vs_three():
    res = mann_whitney_u([1, 2, 3], [4, 5, 6])
    assert res.statistic == 0
    assert res.p_value == pytest.approx(0.1, abs=1e-15)


def test_identical_groups_have_no_effect():
    res = mann_whitney_u([1, 2, 2, 5], [5, 2, 1, 2])
    assert res.effect_size == 0.0
    assert res.p_value == 1.0


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.integers(0, 6), min_size=1, max_size=6),
    st.lists(st.integers(0, 6), min_size=1, max_size=6),
)
def test_exact_matches_brute_force(a, b):
    res = mann_whitney_u(a, b, exact=True)
    u, p = brute_force_u_p(a, b)
    assert res.statistic == pytest.approx(u)
    assert res.p_value == pytest.approx(p, abs=1e-12)
    assert -1 <= res.effect_size <= 1


def test_normal_approximation_matches_reference():
    scipy_stats = pytest.importorskip("scipy.stats")
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = rng.integers(0, 30, size=rng.integers(11, 25)).tolist()
        b = rng.integers(5, 35, size=rng.integers(11, 25)).tolist()
        ours = mann_whitney_u(a, b)
        ref = scipy_stats.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic", use_continuity=True)
        assert not ours.exact
        assert ours.statistic == min(ref.statistic, len(a) * len(b) - ref.statistic)
        assert ours.p_value == pytest.approx(ref.pvalue, abs=1e-12)


def test_u_rejects_empty():
    with pytest.raises(ValueError):
        mann_whitney_u([], [1.0])


def test_rank_biserial_bounds():
    assert rank_biserial(0, 5, 4) == 1.0
    assert rank_biserial(20, 5, 4) == -1.0


def test_cohens_d_from_summaries():
    d = cohens_d_from_summary(46, 32, 7, 105, 90.5, 7)
    assert d == pytest.approx(pooled_d(46, 32, 7, 105, 90.5, 7), abs=1e-15)
    assert d == pytest.approx(-0.87, abs=0.005)


def test_t_test_matches_oracle_and_reference():
    rng = np.random.default_rng(11)
    for _ in range(10):
        a = rng.normal(0, 1, 16).tolist()
        b = (np.asarray(a) + rng.normal(0.3, 1, 16)).tolist()
        res = t_test(a, b, "paired")
        assert res.df == 15
        assert res.p_value == pytest.approx(t_two_sided_oracle(res.statistic, 15), abs=1e-9)
        ind = t_test(a, b)
        assert ind.df == 30
        assert ind.p_value == pytest.approx(t_two_sided_oracle(ind.statistic, 30), abs=1e-9)
        assert ind.effect_size == pytest.approx(cohens_d(a, b), abs=1e-12)


def test_t_test_against_scipy():
    scipy_stats = pytest.importorskip("scipy.stats")
    a, b = [1.2, 3.4, 2.2, 5.0, 4.1], [2.0, 6.5, 7.1, 5.9]
    ref = scipy_stats.ttest_ind(a, b)
    ours = t_test(a, b)
    assert ours.statistic == pytest.approx(ref.statistic, abs=1e-12)
    assert ours.p_value == pytest.approx(ref.pvalue, abs=1e-12)


def test_zero_diff_paired():
    res = t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], "paired")
    assert (res.statistic, res.p_value, res.effect_size) == (0.0, 1.0, 0.0)
    assert cohens_d([1, 2], [1, 2], paired=True) == 0.0


def test_t_test_errors():
    with pytest.raises(ValueError):
        t_test([1, 1], [2, 2])
    with pytest.raises(ValueError):
        t_test([1], [2, 3])
    with pytest.raises(ValueError):
        t_test([1, 2], [2, 3, 4], "paired")
    with pytest.raises(ValueError):
        t_test([1, 2], [2, 3], "welch")
    with pytest.raises(ValueError):
        t_test_from_summary(1, 0, 3, 2, 0, 3)


@pytest.mark.parametrize("name", sorted(SW_VECTORS))
def test_shapiro_wilk_reference_vectors(name):
    sample, w, p = SW_VECTORS[name]
    res = shapiro_wilk(sample)
    assert res.statistic == pytest.approx(w, abs=1e-7)
    assert res.p_value == pytest.approx(p, rel=1e-4, abs=1e-9)


def test_shapiro_wilk_classic_weights_example():
    res = shapiro_wilk(SW_VECTORS["weights_11"][0])
    assert round(res.statistic, 2) == 0.79
    assert res.significant


def test_shapiro_wilk_normal_quantiles():
    from statistics import NormalDist

    sample = [NormalDist().inv_cdf((i - 0.375) / 20.25) for i in range(1, 21)]
    res = shapiro_wilk(sample)
    assert res.statistic > 0.95 and res.p_value > 0.05


def test_shapiro_wilk_scale_invariant():
    x = [2.1, 3.3, 3.9, 4.4, 9.0, 1.0, 7.7]
    a, b = shapiro_wilk(x), shapiro_wilk([10 * v - 4 for v in x])
    assert a.statistic == pytest.approx(b.statistic, abs=1e-12)


@pytest.mark.parametrize("bad", [[1.0, 2.0], list(range(51)), [3.0] * 8])
def test_shapiro_wilk_errors(bad):
    with pytest.raises(ValueError):
        shapiro_wilk(bad)


def test_mean_impute_examples():
    out = mean_impute({"a": [2.0, 4.0, None], "b": [10.0, 10.0, 10.0]})
    assert out == {"a": [2.0, 4.0, 3.0], "b": [10.0, 10.0, 10.0]}
    assert mean_impute({"a": [1.0, float("nan")]}) == {"a": [1.0, 1.0]}
    with pytest.raises(ValueError):
        mean_impute({"a": [None, None]})


@given(st.lists(st.one_of(st.none(), st.floats(-1e6, 1e6)), min_size=1).filter(lambda v: any(x is not None for x in v)))
def test_mean_impute_conserves_mean(values):
    observed = [v for v in values if v is not None]
    filled = mean_impute({"g": values})["g"]
    assert len(filled) == len(values)
    assert math.fsum(filled) / len(filled) == pytest.approx(math.fsum(observed) / len(observed), abs=1e-12 * max(1, max(map(abs, observed))))
