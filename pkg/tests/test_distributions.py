import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ulc_bounds.distributions import (
    DiscretePMF,
    PMFError,
    cdf,
    convolve,
    first_ulc_violation,
    is_log_concave,
    is_ultra_log_concave,
    log_mgf,
    lower_tail,
    make_binomial,
    make_geometric,
    make_poisson,
    make_truncated_poisson,
    mean,
    mgf,
    point_mass,
    poisson_cutoff,
    random_ulc,
    survival,
    total_variation,
    upper_tail,
    variance,
)


def exact_truncated_poisson(lam, k, l):
    w = [Fraction(lam) ** n / math.factorial(n) for n in range(k, l + 1)]
    z = sum(w)
    return [x / z for x in w]


# -- construction ------------------------------------------------------------

def test_rejects_unnormalized():
    with pytest.raises(PMFError, match="sum to 0.98"):
        DiscretePMF(0, (0.5, 0.48))


@pytest.mark.parametrize("masses", [(0.5, 0.0, 0.5), (1.5, -0.5)])
def test_rejects_nonpositive_masses(masses):
    with pytest.raises(PMFError):
        DiscretePMF(0, masses)


def test_rejects_negative_offset():
    with pytest.raises(PMFError):
        DiscretePMF(-1, (1.0,))


def test_json_round_trip():
    pmf = make_truncated_poisson(2.3, 1, 9)
    back = DiscretePMF.from_json(pmf.to_json())
    assert back == pmf
    assert set(json.loads(pmf.to_json())) == {"offset", "masses"}


def test_binomial_small():
    assert make_binomial(2, 0.5).masses == pytest.approx((0.25, 0.5, 0.25), abs=1e-15)


@pytest.mark.parametrize("p", [0.0, 1.0])
def test_binomial_rejects_degenerate(p):
    with pytest.raises(ValueError):
        make_binomial(3, p)


def test_truncated_poisson_single_point():
    assert make_truncated_poisson(1, 0, 0) == point_mass(0)


def test_truncated_poisson_matches_exact_weights():
    # weights 2^n/n! on [1,3] are (2, 2, 4/3)
    exact = exact_truncated_poisson(2, 1, 3)
    assert exact == [Fraction(3, 8), Fraction(3, 8), Fraction(1, 4)]
    got = make_truncated_poisson(2, 1, 3)
    assert got.offset == 1
    np.testing.assert_allclose(got.masses, [float(x) for x in exact], rtol=1e-14)


@pytest.mark.parametrize("make", [
    lambda: make_binomial(17, 0.3),
    lambda: make_truncated_poisson(7.5, 2, 40),
    lambda: make_poisson(20.0),
    lambda: random_ulc(11, 30),
])
def test_constructors_normalized(make):
    assert abs(math.fsum(make().masses) - 1.0) <= 1e-12


def test_poisson_cutoff_mass_loss():
    from scipy.special import pdtrc
    for lam in (0.5, 1, 5, 20):
        l = poisson_cutoff(lam)
        assert pdtrc(l, lam) < 1e-12 <= pdtrc(l - 1, lam)


# -- moments -----------------------------------------------------------------

def test_mean_point_mass_and_binomial():
    assert mean(point_mass(3)) == 3
    assert mean(make_binomial(4, 0.5)) == pytest.approx(2.0, abs=1e-14)


def test_mean_truncated_poisson_exact():
    exact = exact_truncated_poisson(2, 0, 10)
    expected = float(sum(n * p for n, p in enumerate(exact)))
    assert mean(make_truncated_poisson(2, 0, 10)) == pytest.approx(expected, rel=1e-14)


def test_variance():
    assert variance(point_mass(3)) == 0
    assert variance(make_binomial(10, 0.3)) == pytest.approx(10 * 0.3 * 0.7, rel=1e-13)
    assert abs(variance(make_truncated_poisson(5, 0, 60)) - 5) < 1e-8


def test_mgf_values():
    pmf = make_binomial(3, 0.5)
    assert mgf(pmf, 0.0) == 1.0
    assert mgf(pmf, 1.0) == pytest.approx(((1 + math.e) / 2) ** 3, rel=1e-14)
    assert mgf(point_mass(4), 0.7) == pytest.approx(math.exp(2.8), rel=1e-15)


def test_mgf_overflow_and_log_form():
    pmf = make_truncated_poisson(3.0, 0, 100)
    assert math.isfinite(log_mgf(pmf, 10.0))
    with pytest.raises(OverflowError):
        mgf(pmf, 10.0)


# -- tails -------------------------------------------------------------------

def test_tails_cover_space_at_zero():
    for pmf in (make_binomial(5, 0.3), make_binomial(4, 0.5), random_ulc(3, 20)):
        assert upper_tail(pmf, 0) + lower_tail(pmf, 0) >= 1 - 1e-15


def test_poisson_one_upper_tail():
    pmf = make_truncated_poisson(1, 0, 40)
    assert upper_tail(pmf, 1.0) == pytest.approx(1 - 2 / math.e, abs=1e-10)


def test_point_mass_tails():
    pm = point_mass(5)
    assert upper_tail(pm, 0.5) == 0
    assert upper_tail(pm, 0) == 1
    assert lower_tail(pm, 0.5) == 0


def test_survival_cdf_partition():
    pmf = random_ulc(8, 25)
    for j in range(pmf.lower - 1, pmf.upper + 2):
        assert survival(pmf, j + 1) + cdf(pmf, j) == pytest.approx(1.0, abs=1e-14)


def test_tail_snaps_integer_threshold():
    pmf = make_binomial(6, 1 / 3)  # mean 2 up to rounding
    mu = mean(pmf)
    assert upper_tail(pmf, 3 - mu) == pytest.approx(survival(pmf, 3), abs=0)
    assert lower_tail(pmf, mu - 1) == pytest.approx(cdf(pmf, 1), abs=0)


# -- predicates --------------------------------------------------------------

def test_log_concavity_examples():
    assert is_log_concave(make_geometric(0.3, 20))
    assert is_log_concave(make_binomial(6, 0.3))
    assert not is_log_concave(DiscretePMF.from_weights(0, [1, 10, 1, 10]))


def test_ulc_examples():
    assert is_ultra_log_concave(make_binomial(5, 0.7))
    assert is_ultra_log_concave(make_truncated_poisson(3.3, 2, 17))


def test_geometric_not_ulc_first_violation():
    # n=1: p1^2 = c^2/16 < 2 p0 p2 = c^2/8
    g = make_geometric(0.5, 20)
    ratios = [n * g.masses[n] ** 2 - (n + 1) * g.masses[n - 1] * g.masses[n + 1]
              for n in range(1, 20)]
    assert all(r < 0 for r in ratios)
    assert not is_ultra_log_concave(g)
    assert first_ulc_violation(g) == 1


def test_poisson_equality_in_ulc_inequality():
    for lam, k, l in [(0.7, 0, 30), (4.0, 3, 25), (12.0, 1, 50)]:
        pmf = make_truncated_poisson(lam, k, l)
        for i in range(1, len(pmf.masses) - 1):
            n = pmf.offset + i
            a, b, c = pmf.masses[i - 1: i + 2]
            assert abs(n * b * b - (n + 1) * a * c) <= 1e-12 * n * b * b


# -- random_ulc and convolution ---------------------------------------------

def test_random_ulc_deterministic():
    assert random_ulc(42, 30) == random_ulc(42, 30)
    assert random_ulc(42, 30) != random_ulc(43, 30)


def test_random_ulc_variance_below_mean():
    for seed in range(1000):
        pmf = random_ulc(seed, 30)
        assert variance(pmf) <= mean(pmf) + 1e-12


def test_convolve_examples():
    assert convolve(point_mass(2), point_mass(3)) == point_mass(5)
    s = convolve(make_binomial(2, 0.5), make_binomial(3, 0.5))
    np.testing.assert_allclose(s.masses, make_binomial(5, 0.5).masses, atol=1e-15)
    assert s.offset == 0


def test_total_variation():
    a = make_binomial(3, 0.5)
    assert total_variation(a, a) == 0
    assert total_variation(point_mass(0), point_mass(2)) == 1


seeds = st.integers(min_value=0, max_value=2**32 - 1)
sizes = st.integers(min_value=1, max_value=40)


@settings(max_examples=200, deadline=None)
@given(seeds, sizes)
def test_random_ulc_is_ulc(seed, size):
    pmf = random_ulc(seed, size)
    assert is_ultra_log_concave(pmf, 1e-9)
    assert pmf.upper <= size
    # ULC is pointwise stronger than log-concavity
    assert is_log_concave(pmf)


@settings(max_examples=200, deadline=None)
@given(seeds, seeds, sizes, sizes)
def test_convolution_closure(s1, s2, n1, n2):
    a, b = random_ulc(s1, n1), random_ulc(s2, n2)
    c = convolve(a, b)
    assert is_ultra_log_concave(c, 1e-9)
    assert c.lower >= a.lower + b.lower
    assert c.upper <= a.upper + b.upper
    assert mean(c) == pytest.approx(mean(a) + mean(b), rel=1e-12, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(min_value=1e-3, max_value=1.0), min_size=1, max_size=12),
       st.integers(0, 5))
def test_ulc_implies_lc(weights, offset):
    pmf = DiscretePMF.from_weights(offset, weights)
    if is_ultra_log_concave(pmf):
        assert is_log_concave(pmf)


@settings(max_examples=100, deadline=None)
@given(seeds, sizes, st.floats(min_value=0, max_value=3))
def test_mgf_monotone_in_t(seed, size, t):
    pmf = random_ulc(seed, size)
    assert log_mgf(pmf, t + 0.1) >= log_mgf(pmf, t) - 1e-12
