"""Loss functions: worked examples, definedness guards, bounds, identities."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agreeloss.exceptions import (
    DimensionMismatchError,
    InvalidInputError,
    UndefinedValueError,
)
from agreeloss.losses import (
    MetricEntry,
    MetricReport,
    NEGATIVELY_ORIENTED,
    SeriesPair,
    l_kbb,
    l_lmc,
    l_lmc_median,
    l_nr2,
    l_nrp,
    l_w,
    mae,
    mse,
    nse,
    skill_score,
    v_mean_avg,
    v_median_avg,
)
from agreeloss.vector_stats import lp_mean, variance


def pair(z, y) -> SeriesPair:
    return SeriesPair(np.asarray(z, dtype=float), np.asarray(y, dtype=float))


def random_pairs(count, seed, max_n=120, min_n=2):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(min_n, max_n))
        y = rng.normal(rng.uniform(-5, 5), rng.uniform(0.2, 4.0), n)
        z = y + rng.normal(0.0, rng.uniform(0.05, 3.0), n)
        yield pair(z, y)


class TestSeriesPair:
    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            pair([1.0, 2.0], [1.0])

    def test_flags(self):
        p = pair([1.0, 1.0], [1.0, 2.0])
        assert p.y_nonconstant and p.z_differs
        q = pair([3.0, 3.0], [3.0, 3.0])
        assert not q.y_nonconstant and not q.z_differs
        assert not q.agreement_defined

    def test_defined_when_z_differs_on_constant_y(self):
        p = pair([3.0, 4.0], [3.0, 3.0])
        assert p.agreement_defined


class TestMae:
    def test_perfect(self):
        assert mae(pair([1.0, 2.0], [1.0, 2.0])) == 0.0

    def test_half(self):
        assert mae(pair([0.0, 1.0], [0.0, 2.0])) == 0.5

    def test_one(self):
        assert mae(pair([1.0, 1.0], [0.0, 2.0])) == 1.0


class TestMse:
    def test_perfect(self):
        assert mse(pair([1.0, 2.0], [1.0, 2.0])) == 0.0

    def test_half(self):
        assert mse(pair([0.0, 1.0], [0.0, 2.0])) == 0.5

    def test_mean_prediction_gives_variance(self):
        y = np.array([0.0, 2.0])
        p = pair(np.full(2, y.mean()), y)
        assert mse(p) == variance(y) == 1.0


class TestNse:
    def test_perfect_is_one(self):
        assert nse(pair([0.0, 2.0], [0.0, 2.0])) == 1.0

    def test_climatology_is_zero(self):
        y = np.array([0.5, 1.5, 4.0])
        assert nse(pair(np.full(3, y.mean()), y)) == 0.0

    def test_value(self):
        assert nse(pair([0.0, 1.0], [0.0, 2.0])) == 0.5

    def test_constant_reference_undefined(self):
        with pytest.raises(UndefinedValueError):
            nse(pair([1.0, 2.0], [3.0, 3.0]))


class TestSkillScore:
    def test_optimal(self):
        assert skill_score(0.0, 2.5) == 1.0

    def test_ties_reference(self):
        assert skill_score(1.7, 1.7) == 0.0

    def test_zero_reference_undefined(self):
        with pytest.raises(UndefinedValueError):
            skill_score(1.0, 0.0)

    def test_negative_inputs_rejected(self):
        with pytest.raises(InvalidInputError):
            skill_score(-0.1, 1.0)

    def test_reduces_to_nse(self):
        for p in random_pairs(200, seed=21):
            clim = SeriesPair(np.full(p.n, p.y.mean()), p.y)
            assert abs(skill_score(mse(p), mse(clim)) - nse(p)) <= 1e-12


class TestLw:
    def test_perfect_is_zero(self):
        assert l_w(pair([0.0, 2.0], [0.0, 2.0])) == 0.0

    def test_mean_prediction_is_one(self):
        y = np.array([0.3, 1.9, 5.0])
        assert l_w(pair(np.full(3, y.mean()), y)) == 1.0

    def test_hand_value(self):
        # numerator 1, denominator (1+1)^2 + (0+1)^2 = 5
        assert l_w(pair([0.0, 1.0], [0.0, 2.0])) == 0.2

    def test_undefined_for_constant_identical(self):
        with pytest.raises(UndefinedValueError):
            l_w(pair([3.0, 3.0], [3.0, 3.0]))

    def test_constant_y_different_z_is_one(self):
        assert l_w(pair([1.0, 5.0], [3.0, 3.0])) == 1.0


class TestLnr2:
    def test_perfect_is_zero(self):
        assert l_nr2(pair([0.0, 2.0], [0.0, 2.0])) == 0.0

    def test_mean_prediction_is_one(self):
        y = np.array([0.3, 1.9, 5.0])
        assert abs(l_nr2(pair(np.full(3, y.mean()), y)) - 1.0) <= 1e-12

    def test_hand_value(self):
        expected = 1.0 / (1.0 + math.sqrt(2.0)) ** 2
        assert math.isclose(l_nr2(pair([0.0, 1.0], [0.0, 2.0])), expected, rel_tol=1e-15)

    def test_exact_one_cases(self):
        # constant observations, differing predictions
        assert abs(l_nr2(pair([1.0, 5.0], [3.0, 3.0])) - 1.0) <= 1e-12
        # predictions equal to the observation mean
        y = np.array([0.0, 2.0, 7.0])
        assert abs(l_nr2(pair(np.full(3, y.mean()), y)) - 1.0) <= 1e-12
        # z - mean(y) is a positive multiple of mean(y) - y
        y = np.array([0.0, 2.0])
        a = 0.5
        z = y.mean() + a * (y.mean() - y)
        assert abs(l_nr2(pair(z, y)) - 1.0) <= 1e-12

    def test_denominator_dominates_numerator(self):
        for p in random_pairs(200, seed=22):
            mu = p.y.mean()
            direct = math.sqrt(np.sum((p.z - p.y) ** 2))
            path = math.sqrt(np.sum((p.z - mu) ** 2)) + math.sqrt(np.sum((mu - p.y) ** 2))
            assert direct <= path * (1.0 + 1e-12)

    def test_shared_zero_set_with_lw(self):
        p = pair([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert l_w(p) == 0.0 and l_nr2(p) == 0.0
        q = pair([1.0, 2.0, 3.1], [1.0, 2.0, 3.0])
        assert l_w(q) > 0.0 and l_nr2(q) > 0.0


class TestLlmc:
    def test_perfect_is_zero(self):
        y = np.array([0.0, 2.0])
        assert l_lmc(pair(y, y), float(y.mean())) == 0.0

    def test_hand_value(self):
        # numerator 1, denominator (1+0) + (1+1) = 3
        assert math.isclose(l_lmc(pair([0.0, 1.0], [0.0, 2.0]), 1.0), 1.0 / 3.0, rel_tol=1e-15)

    def test_median_benchmark_matches_nrp_at_p1(self):
        for p in random_pairs(150, seed=23):
            lhs = l_lmc(p, lp_mean(p.y, 1))
            rhs = l_nrp(p, 1)
            assert abs(lhs - rhs) <= 1e-12

    def test_wrapper_equals_explicit_median(self):
        p = pair([0.0, 1.0, 4.0], [0.0, 2.0, 3.0])
        assert l_lmc_median(p) == l_lmc(p, float(np.median(p.y)))

    def test_zero_denominator_undefined(self):
        with pytest.raises(UndefinedValueError):
            l_lmc(pair([3.0, 3.0], [3.0, 3.0]), 3.0)


class TestLkbb:
    def test_p2_equals_lw(self):
        for p in random_pairs(200, seed=24):
            assert abs(l_kbb(p, 2) - l_w(p)) <= 1e-12

    def test_p1_hand_value(self):
        assert math.isclose(l_kbb(pair([0.0, 1.0], [0.0, 2.0]), 1), 1.0 / 3.0, rel_tol=1e-15)

    def test_perfect_is_zero_for_any_p(self):
        y = np.array([0.0, 2.0, 5.0])
        for p_exp in (1, 1.5, 2, 3, math.inf):
            assert l_kbb(pair(y, y), p_exp) == 0.0

    def test_rejects_p_below_one(self):
        with pytest.raises(InvalidInputError):
            l_kbb(pair([0.0, 1.0], [0.0, 2.0]), 0.5)

    def test_chebyshev_limit_bounded(self):
        for p in random_pairs(100, seed=25):
            assert 0.0 <= l_kbb(p, math.inf) <= 1.0


class TestLnrp:
    def test_p2_equals_lnr2(self):
        for p in random_pairs(200, seed=26):
            assert abs(l_nrp(p, 2) - l_nr2(p)) <= 1e-12

    def test_p1_hand_value(self):
        # median 1; numerator 1, denominator (1 + 2)
        assert math.isclose(l_nrp(pair([0.0, 1.0], [0.0, 2.0]), 1), 1.0 / 3.0, rel_tol=1e-15)

    def test_perfect_is_zero_for_any_p(self):
        y = np.array([0.0, 2.0, 5.0])
        for p_exp in (1, 1.5, 2, 3, math.inf):
            assert l_nrp(pair(y, y), p_exp) == 0.0

    def test_bounds_across_p(self):
        for p in random_pairs(100, seed=27):
            for p_exp in (1, 1.5, 2, 3, math.inf):
                assert 0.0 <= l_nrp(p, p_exp) <= 1.0


class TestIdentificationAverages:
    def test_vbar_mean_zero_on_perfect(self):
        assert v_mean_avg(pair([1.0, 2.0], [1.0, 2.0])) == 0.0

    def test_vbar_mean_cancellation(self):
        assert v_mean_avg(pair([2.0, 1.0], [1.0, 2.0])) == 0.0

    def test_vbar_mean_mean_prediction(self):
        assert v_mean_avg(pair([1.0, 1.0], [0.0, 2.0])) == 0.0

    def test_vbar_median_extremes(self):
        assert v_median_avg(pair([3.0, 3.0], [1.0, 2.0])) == 0.5
        assert v_median_avg(pair([0.0, 0.0], [1.0, 2.0])) == -0.5

    def test_vbar_median_balanced(self):
        assert v_median_avg(pair([2.0, 1.0], [1.0, 2.0])) == 0.0


class TestInvariances:
    def test_translation_invariance(self):
        rng = np.random.default_rng(28)
        for p in random_pairs(100, seed=29):
            c = float(rng.uniform(-50.0, 50.0))
            for loss in (l_w, l_nr2):
                base = loss(p)
                shifted = loss(pair(p.z + c, p.y + c))
                assert abs(shifted - base) <= 1e-10 * (1.0 + abs(base))

    def test_scale_invariance(self):
        rng = np.random.default_rng(30)
        for p in random_pairs(100, seed=31):
            c = float(rng.uniform(0.05, 20.0) * rng.choice([-1.0, 1.0]))
            for loss in (l_w, l_nr2):
                base = loss(p)
                scaled = loss(pair(c * p.z, c * p.y))
                assert abs(scaled - base) <= 1e-10 * (1.0 + abs(base))

    def test_bounds(self):
        for p in random_pairs(300, seed=32):
            assert 0.0 <= l_w(p) <= 1.0
            assert 0.0 <= l_nr2(p) <= 1.0


@st.composite
def _paired_lists(draw):
    n = draw(st.integers(min_value=2, max_value=30))
    # width=32 keeps squared differences clear of float64 underflow.
    floats = st.floats(-1e4, 1e4, allow_nan=False, allow_infinity=False, width=32)
    y = draw(st.lists(floats, min_size=n, max_size=n))
    z = draw(st.lists(floats, min_size=n, max_size=n))
    return z, y


@given(_paired_lists())
@settings(max_examples=300, deadline=None)
def test_agreement_losses_bounded_or_undefined(zy):
    z, y = zy
    p = pair(z, y)
    try:
        values = (l_w(p), l_nr2(p))
    except UndefinedValueError:
        assert not p.agreement_defined
        return
    for v in values:
        assert -1e-12 <= v <= 1.0 + 1e-12


class TestMetricReport:
    def test_rejects_duplicate_names(self):
        entries = (
            MetricEntry("mse", 1.0, NEGATIVELY_ORIENTED),
            MetricEntry("mse", 2.0, NEGATIVELY_ORIENTED),
        )
        with pytest.raises(InvalidInputError):
            MetricReport(entries)

    def test_rejects_out_of_range_agreement(self):
        with pytest.raises(InvalidInputError):
            MetricReport((MetricEntry("lw", 1.5, NEGATIVELY_ORIENTED),))

    def test_clamps_boundary_rounding(self):
        report = MetricReport((MetricEntry("lw", 1.0 + 1e-12, NEGATIVELY_ORIENTED),))
        assert report.value_of("lw") == 1.0

    def test_undefined_entries_allowed(self):
        report = MetricReport((MetricEntry("nse", None, NEGATIVELY_ORIENTED),))
        assert report.has_undefined()
