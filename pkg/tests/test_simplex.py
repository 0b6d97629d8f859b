import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from retailgame import simplex
from retailgame.errors import InvalidInputError, SolverStalledError
from retailgame.simplex import LpProblem, LpStatus, solve


def test_lower_bound_only():
    s = solve(LpProblem([1.0], A_ub=[[-1.0]], b_ub=[-3.0], lower=[-np.inf]))
    assert s.status is LpStatus.OPTIMAL
    assert s.x[0] == pytest.approx(3.0) and s.objective_value == pytest.approx(3.0)


def test_two_variable_example():
    s = solve(LpProblem([-1.0, -1.0], A_ub=[[1, 1], [1, 0]], b_ub=[4, 2]))
    assert s.objective_value == pytest.approx(-4.0, abs=1e-12)
    assert s.x.sum() == pytest.approx(4.0) and s.x[0] <= 2 + 1e-9
    assert 0 in s.active_rows


def test_infeasible():
    s = solve(LpProblem([0.0], A_ub=[[1.0], [-1.0]], b_ub=[0.0, -1.0], lower=[-np.inf]))
    assert s.status is LpStatus.INFEASIBLE


def test_unbounded():
    assert solve(LpProblem([-1.0])).status is LpStatus.UNBOUNDED


def test_equalities_and_free_vars():
    # min x + 2y, x + y = 1, x - y = 3, both free -> x=2, y=-1
    s = solve(LpProblem([1, 2], A_eq=[[1, 1], [1, -1]], b_eq=[1, 3], lower=[-np.inf, -np.inf]))
    assert s.status is LpStatus.OPTIMAL
    assert np.allclose(s.x, [2, -1])


def test_redundant_equalities():
    s = solve(LpProblem([1, 1], A_eq=[[1, 1], [2, 2]], b_eq=[1, 2]))
    assert s.status is LpStatus.OPTIMAL and s.objective_value == pytest.approx(1.0)


def test_upper_bounds():
    s = solve(LpProblem([-1, -2], lower=[-1, 0.5], upper=[3, 2]))
    assert np.allclose(s.x, [3, 2])
    s = solve(LpProblem([1], lower=[-np.inf], upper=[5]))
    assert s.status is LpStatus.UNBOUNDED


def test_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        LpProblem([1, 2], A_ub=[[1, 2, 3]], b_ub=[1])
    with pytest.raises(InvalidInputError):
        LpProblem([1, 2], A_ub=[[1, 2]], b_ub=[1, 2])
    with pytest.raises(InvalidInputError):
        LpProblem([1, 2], lower=[0])
    with pytest.raises(InvalidInputError):
        LpProblem([1], A_eq=[[1]])


def test_pivot_cap(monkeypatch):
    monkeypatch.setattr(simplex, "MAX_PIVOTS", 1)
    with pytest.raises(SolverStalledError):
        solve(LpProblem([-1, -1, -1], A_ub=[[1, 2, 0], [0, 1, 2], [2, 0, 1]], b_ub=[4, 4, 4]))


def _vertex_oracle(c, A, b):
    """Best objective over all basic feasible points of {A x <= b, x >= 0}."""
    n = len(c)
    G = np.vstack([A, -np.eye(n)])
    h = np.concatenate([b, np.zeros(n)])
    best = np.inf
    for rows in itertools.combinations(range(G.shape[0]), n):
        M = G[list(rows)]
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, h[list(rows)])
        if np.all(G @ x <= h + 1e-9):
            best = min(best, float(c @ x))
    return best


@given(st.integers(0, 2**31), st.integers(1, 3), st.integers(1, 8))
@settings(max_examples=150, deadline=None)
def test_vertex_enumeration(seed, n, m):
    rng = np.random.default_rng(seed)
    A = rng.uniform(-1, 2, size=(m, n))
    # A positive row keeps the region bounded.
    A[0] = np.abs(A[0]) + 0.1
    b = rng.uniform(0, 5, size=m)
    c = rng.uniform(-3, 3, size=n)
    s = solve(LpProblem(c, A_ub=A, b_ub=b))
    assert s.status is LpStatus.OPTIMAL
    assert s.objective_value == pytest.approx(_vertex_oracle(c, A, b), abs=1e-9)
    assert np.all(A @ s.x <= b + 1e-7) and np.all(s.x >= -1e-7)
    # Weak duality style spot check: no sampled feasible point beats the optimum.
    pts = rng.uniform(0, 5, size=(200, n))
    feas = pts[np.all(pts @ A.T <= b, axis=1)]
    assert np.all(feas @ c >= s.objective_value - 1e-9)


@pytest.mark.parametrize("seed", range(30))
def test_against_scipy(seed):
    rng = np.random.default_rng(seed)
    n, m_ub, m_eq = rng.integers(2, 8), rng.integers(1, 10), rng.integers(0, 3)
    x0 = rng.uniform(-1, 2, n)
    A_ub = rng.normal(size=(m_ub, n))
    b_ub = A_ub @ x0 + rng.uniform(0, 1, m_ub)
    A_eq = rng.normal(size=(m_eq, n))
    b_eq = A_eq @ x0
    lo = np.where(rng.random(n) < 0.3, -np.inf, -1.0)
    up = np.where(rng.random(n) < 0.7, np.inf, 3.0)
    c = rng.normal(size=n)
    ours = solve(LpProblem(c, A_ub, b_ub, A_eq if m_eq else None, b_eq if m_eq else None, lo, up))
    ref = linprog(c, A_ub, b_ub, A_eq if m_eq else None, b_eq if m_eq else None,
                  bounds=list(zip(lo, up)), method="highs")
    if ref.status == 3:
        assert ours.status is LpStatus.UNBOUNDED
    else:
        assert ref.status == 0
        assert ours.status is LpStatus.OPTIMAL
        assert ours.objective_value == pytest.approx(ref.fun, abs=1e-7 * max(1, abs(ref.fun)))


def test_deterministic():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(20, 6))
    p = LpProblem(rng.normal(size=6), A, A @ np.ones(6) + 1, lower=np.full(6, -5.0), upper=np.full(6, 5.0))
    a, b = solve(p), solve(p)
    assert np.array_equal(a.x, b.x) and a.objective_value == b.objective_value and a.pivots == b.pivots
