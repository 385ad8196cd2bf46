import math

import numpy as np
import pytest
from hypothesis import given, settings

from laplace_ls.errors import NotPositiveDefiniteError, UnsolvedVariableError
from laplace_ls.matrix_core import NormalSystem, gram, invert_spd
from laplace_ls.reverse_cholesky import SNAPSHOT_LIMIT, extract_L, factor, reduce_once, solve, subsystem

from conftest import regressions


@pytest.fixture
def two_by_two():
    return NormalSystem.from_rows([[4.0], [2.0, 5.0]], [1.0, 1.0])


def test_two_by_two_by_hand(two_by_two):
    # m11 = 4 - 2*2/5, rhs1 = 1 - 2*1/5
    f = factor(two_by_two)
    assert f.M[0, 0] == pytest.approx(3.2, rel=1e-15)
    assert f.reduced_rhs[0] == pytest.approx(0.6, rel=1e-15)
    assert f.M[1, 1] == 5.0 and f.M[1, 0] == 2.0
    x = solve(f)
    assert x[0] == pytest.approx(0.1875, rel=1e-15)  # (5 - 2) / 16
    assert x[1] == pytest.approx(0.125, rel=1e-15)  # (4 - 2) / 16


def test_partial_solve_leaves_tail_unsolved(two_by_two):
    x = solve(factor(two_by_two), 1)
    assert x.is_solved(0) and not x.is_solved(1)
    assert math.isnan(x.x[1])
    with pytest.raises(UnsolvedVariableError):
        x[1]
    with pytest.raises(ValueError):
        solve(factor(two_by_two), 3)


def test_not_positive_definite_reports_step():
    S = NormalSystem.from_matrix([[1.0, 2.0], [2.0, 1.0]], [0.0, 0.0])
    with pytest.raises(NotPositiveDefiniteError) as err:
        factor(S)
    assert err.value.step == 1


def test_snapshot_policy(two_by_two):
    f = factor(two_by_two)
    assert [s.size for s in f.snapshots] == [2, 1]
    assert factor(two_by_two, snapshots=False).snapshots == ()
    assert SNAPSHOT_LIMIT == 64
    m, r = subsystem(f, 1)
    assert m.shape == (1, 1) and r[0] == pytest.approx(0.6)
    with pytest.raises(ValueError):
        subsystem(factor(two_by_two, snapshots=False), 1)


def test_reduce_once_matches_first_step(saturn):
    one = reduce_once(saturn.system)
    chained = factor(saturn.system).snapshots[1]
    assert np.array_equal(one.matrix, chained.matrix)
    assert np.array_equal(one.rhs, chained.rhs)


@settings(max_examples=80, deadline=None)
@given(regressions())
def test_factor_identity(case):
    A, b = case
    S = gram(A, b)
    f = factor(S)
    D = np.diag(f.M)
    rebuilt = (f.M / D[:, None]).T @ f.M
    assert np.allclose(rebuilt, S.matrix(), rtol=0, atol=1e-10 * np.abs(S.matrix()).max())
    L = extract_L(f)
    assert np.all(np.diag(L) > 0)
    assert np.allclose(L.T @ L, S.matrix(), rtol=0, atol=1e-10 * np.abs(S.matrix()).max())


@settings(max_examples=80, deadline=None)
@given(regressions())
def test_solution_satisfies_normal_equations(case):
    A, b = case
    S = gram(A, b)
    x = solve(factor(S)).values
    m = S.matrix()
    kappa = np.linalg.cond(m)
    assert np.linalg.norm(m @ x - S.rhs) <= 1e-12 * kappa * (np.linalg.norm(m) * np.linalg.norm(x) + np.linalg.norm(S.rhs))


@settings(max_examples=80, deadline=None)
@given(regressions())
def test_pivots_decrease_and_match_inverse(case):
    A, b = case
    S = gram(A, b)
    f = factor(S)
    piv = f.leading_pivots()
    assert piv[0] == S.entry(0, 0)
    assert all(b <= a + 1e-12 * abs(a) for a, b in zip(piv, piv[1:]))
    assert f.M[0, 0] * invert_spd(S)[0, 0] == pytest.approx(1.0, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(regressions())
def test_snapshots_are_schur_complements(case):
    A, b = case
    S = gram(A, b)
    f = factor(S)
    m, r = S.matrix(), S.rhs
    for snap in f.snapshots[1:]:
        k = snap.size
        schur = m[:k, :k] - m[:k, k:] @ np.linalg.solve(m[k:, k:], m[k:, :k])
        rs = r[:k] - m[:k, k:] @ np.linalg.solve(m[k:, k:], r[k:])
        assert np.allclose(snap.matrix, schur, rtol=1e-8, atol=1e-10 * np.abs(m).max())
        assert np.allclose(snap.rhs, rs, rtol=1e-8, atol=1e-10 * (np.abs(r).max() + np.abs(m).max()))
