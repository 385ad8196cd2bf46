import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laplace_ls.errors import LaplaceError
from laplace_ls.inference import (
    ConfidenceQuery,
    covariance_block2,
    marginal_density_coefficient,
    mass_denominator,
    mass_from_correction,
    noise_variance,
    odds_against,
    poids_first,
    poids_from_sigma,
    prob_outside,
    prob_within,
    sigma_from_poids,
    variance_for_variable,
)
from laplace_ls.matrix_core import NormalSystem, gram, invert_spd, residual
from laplace_ls.reverse_cholesky import factor, solve

from conftest import regressions


def _with_stats(A, b):
    S = gram(A, b)
    x = solve(factor(S)).values
    _, rss = residual(A, x, b)
    return S.with_rss(max(rss, 1e-12), A.rows)


def test_noise_variance_biased_and_unbiased():
    assert noise_variance(31096.0, 129) == pytest.approx(241.05426, rel=1e-7)
    assert noise_variance(31096.0, 129, 6, unbiased=True) == 31096.0 / 123
    with pytest.raises(ValueError):
        noise_variance(1.0, 3, 3, unbiased=True)
    with pytest.raises(ValueError):
        noise_variance(0.0, 3)


def test_poids_sigma_round_trip():
    assert sigma_from_poids(0.5) == 1.0
    assert poids_from_sigma(sigma_from_poids(123.4)) == pytest.approx(123.4, rel=1e-15)


def test_poids_from_two_by_two():
    S = NormalSystem.from_rows([[4.0], [2.0, 5.0]], [1.0, 1.0], s=10, rss=2.0)
    r = poids_first(factor(S), 10, 2.0)
    assert r.poids == pytest.approx(3.2 / (2 * 0.2), rel=1e-15)
    assert r.sigma == pytest.approx(math.sqrt(0.2 * 5.0 / 16.0), rel=1e-14)
    assert marginal_density_coefficient(factor(S), 10, 2.0) == r.poids


def test_variance_requires_stats():
    S = NormalSystem.from_rows([[4.0], [2.0, 5.0]], [1.0, 1.0])
    with pytest.raises(LaplaceError):
        variance_for_variable(S, 0)


def test_confidence_known_values():
    q = ConfidenceQuery(1.0, 1.0)
    assert prob_within(q) == pytest.approx(0.8427007929497149, rel=1e-15)
    assert prob_within(q) + prob_outside(q) == pytest.approx(1.0, rel=1e-15)
    assert odds_against(ConfidenceQuery(1.0, 0.0)) == 1.0
    assert odds_against(ConfidenceQuery(1e6, 1.0)) == math.inf
    with pytest.raises(ValueError):
        ConfidenceQuery(0.0, 1.0)
    with pytest.raises(ValueError):
        ConfidenceQuery(1.0, -1.0)


def test_far_tail_keeps_relative_precision():
    # erfc(5) = 1.5374597944280348e-12
    tail = prob_outside(ConfidenceQuery(25.0, 1.0))
    assert tail == pytest.approx(1.5374597944280348e-12, rel=1e-13)


def test_masses():
    assert mass_from_correction(0.0, 1000.0) == 1e-3
    assert mass_denominator(-0.00305, 1067.09) == pytest.approx(1070.3546, abs=1e-4)
    with pytest.raises(ValueError):
        mass_from_correction(-1.0, 10.0)
    with pytest.raises(ValueError):
        mass_from_correction(0.0, 0.0)


@settings(max_examples=80, deadline=None)
@given(regressions())
def test_variance_matches_inverse_oracle(case):
    A, b = case
    S = _with_stats(A, b)
    inv = invert_spd(S)
    for j in range(S.n):
        r = variance_for_variable(S, j)
        assert r.sigma ** 2 == pytest.approx(S.rss / S.s * inv[j, j], rel=1e-9)
        u = variance_for_variable(S, j, unbiased=True) if S.s > S.n else None
        if u is not None:
            assert u.sigma ** 2 == pytest.approx(S.rss / (S.s - S.n) * inv[j, j], rel=1e-9)


@settings(max_examples=80, deadline=None)
@given(regressions())
def test_covariance_block_matches_full_covariance(case):
    A, b = case
    if A.cols < 2:
        return
    S = _with_stats(A, b)
    block = covariance_block2(factor(S), S.s, S.rss)
    full = S.rss / S.s * invert_spd(S)
    assert np.allclose(block, full[:2, :2], rtol=1e-9, atol=1e-9 * np.abs(full[:2, :2]).max())


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 1e8), st.floats(0.0, 10.0))
def test_probability_bounds_and_complement(poids, width):
    q = ConfidenceQuery(poids, width)
    p, t = prob_within(q), prob_outside(q)
    assert 0.0 <= p <= 1.0 and 0.0 <= t <= 1.0
    assert p + t == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 1e6), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_probability_monotone_in_width(poids, a, b):
    lo, hi = sorted((a, b))
    assert prob_within(ConfidenceQuery(poids, lo)) <= prob_within(ConfidenceQuery(poids, hi))
