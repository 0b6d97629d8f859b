"""Payoff allocations over a value table: Shapley value and nucleolus."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, RetailGameError
from .game import ValueTable, popcounts
from .simplex import LpProblem, LpStatus, solve

EFFICIENCY_TOL = 1e-7
FIX_TOL = 1e-7
MAX_NUCLEOLUS_PLAYERS = 12


class AllocationMethod(str, enum.Enum):
    SHAPLEY = "shapley"
    NUCLEOLUS = "nucleolus"


@dataclass(frozen=True)
class Allocation:
    x: np.ndarray
    method: AllocationMethod
    efficiency_gap: float
    negative_players: frozenset[int]
    stage_excesses: tuple[float, ...] = field(default=(), compare=False)

    @property
    def n_players(self) -> int:
        return self.x.size


def _make_allocation(x, table, method, stages=()):
    x = np.asarray(x, dtype=float)
    x.setflags(write=False)
    gap = float(x.sum() - table.grand_value)
    scale = max(1.0, abs(table.grand_value))
    if abs(gap) > EFFICIENCY_TOL * scale:
        raise RetailGameError(f"{method.value} allocation misses efficiency by {gap:g}")
    neg = frozenset(int(i) for i in np.flatnonzero(x < 0.0))
    return Allocation(x, method, gap, neg, tuple(stages))


def _member_matrix(n):
    masks = np.arange(1 << n)
    return ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(float)


def shapley(table: ValueTable) -> Allocation:
    """Exact Shapley value by the subset formula.

    Weights ``(|T|-1)! (n-|T|)! / n!`` are ratios of exact integers, so each
    is the correctly rounded float and nothing overflows.
    """
    n = table.player_count
    v = table.values
    sizes = popcounts(n)
    n_fact = math.factorial(n)
    weight_by_size = np.array(
        [0.0] + [math.factorial(s - 1) * math.factorial(n - s) / n_fact for s in range(1, n + 1)])
    w = weight_by_size[sizes]
    masks = np.arange(1 << n)
    phi = np.empty(n)
    for i in range(n):
        bit = 1 << i
        with_i = masks[(masks & bit) != 0]
        phi[i] = float(np.sum(w[with_i] * (v[with_i] - v[with_i ^ bit])))
    return _make_allocation(phi, table, AllocationMethod.SHAPLEY)


def excess_profile(table: ValueTable, x) -> np.ndarray:
    """Excesses v(T) - x(T) of every proper non-empty coalition, largest first."""
    x = np.asarray(getattr(x, "x", x), dtype=float)
    n = table.player_count
    if x.size != n:
        raise InvalidInputError(f"allocation has {x.size} entries for {n} players")
    if n == 1:
        return np.zeros(0)
    mem = _member_matrix(n)[1:-1]
    e = table.values[1:-1] - mem @ x
    return np.sort(e)[::-1]


def _stage_dual(v_unfixed, mem_unfixed, rhs_fixed, mem_fixed, n):
    """Solve the dual of ``min eps s.t. x(T)+eps >= v(T), x(S) = rhs_S, x(N) = v(N)``.

    Variables are lambda_T >= 0 (one per unfixed coalition) followed by free
    multipliers for the fixed equalities (which include the grand coalition).
    Returns (eps, lambda).
    """
    k, f = len(v_unfixed), len(rhs_fixed)
    c = -np.concatenate([v_unfixed, rhs_fixed])
    A_eq = np.zeros((n + 1, k + f))
    A_eq[:n, :k] = mem_unfixed.T
    A_eq[:n, k:] = mem_fixed.T
    A_eq[n, :k] = 1.0
    b_eq = np.zeros(n + 1)
    b_eq[n] = 1.0
    lower = np.concatenate([np.zeros(k), np.full(f, -np.inf)])
    sol = solve(LpProblem(c, A_eq=A_eq, b_eq=b_eq, lower=lower))
    if sol.status is not LpStatus.OPTIMAL:
        raise RetailGameError(f"nucleolus stage LP is {sol.status.value}")
    return -sol.objective_value, sol.x[:k]


def _in_span(basis_q, rows, tol=1e-9):
    if basis_q.shape[1] == 0:
        return np.zeros(rows.shape[0], dtype=bool)
    resid = rows - (rows @ basis_q) @ basis_q.T
    return np.linalg.norm(resid, axis=1) <= tol * np.maximum(1.0, np.linalg.norm(rows, axis=1))


def nucleolus(table: ValueTable) -> Allocation:
    """Nucleolus by sequential LPs.

    Each stage minimises the largest excess among coalitions not yet fixed.
    Coalitions with a positive multiplier in the stage optimum are fixed at
    that excess, and any coalition whose membership vector becomes a linear
    combination of fixed ones is dropped because its excess is then
    determined. The loop stops when the fixed rows pin down every payoff.
    """
    n = table.player_count
    if n > MAX_NUCLEOLUS_PLAYERS:
        raise InvalidInputError(f"nucleolus limited to {MAX_NUCLEOLUS_PLAYERS} players, got {n}")
    v = table.values
    if n == 1:
        return _make_allocation([v[1]], table, AllocationMethod.NUCLEOLUS)

    mem = _member_matrix(n)
    grand = (1 << n) - 1
    fixed_masks = [grand]
    fixed_rhs = [float(v[grand])]
    unfixed = np.arange(1, grand)
    stages: list[float] = []

    def span_basis():
        u, sv, _ = np.linalg.svd(mem[fixed_masks].T, full_matrices=False)
        return u[:, sv > 1e-9 * sv[0]]

    q = span_basis()
    while q.shape[1] < n:
        if len(stages) >= n + 1:
            raise RetailGameError("nucleolus did not terminate within n + 1 stages")
        eps, lam = _stage_dual(v[unfixed], mem[unfixed], np.array(fixed_rhs), mem[fixed_masks], n)
        stages.append(eps)
        tight = lam > FIX_TOL
        if not np.any(tight):
            raise RetailGameError("nucleolus stage produced no binding coalition")
        for t in unfixed[tight]:
            fixed_masks.append(int(t))
            fixed_rhs.append(float(v[t]) - eps)
        new_q = span_basis()
        if new_q.shape[1] == q.shape[1]:
            raise RetailGameError("nucleolus stage did not reduce the allocation set")
        q = new_q
        rest = unfixed[~tight]
        unfixed = rest[~_in_span(q, mem[rest])]

    A = mem[fixed_masks]
    x, *_ = np.linalg.lstsq(A, np.array(fixed_rhs), rcond=None)
    return _make_allocation(x, table, AllocationMethod.NUCLEOLUS, stages)


def check_individual_rationality(x, table: ValueTable, tol: float = 1e-9) -> frozenset[int]:
    """Players whose payoff falls below their stand-alone value."""
    x = np.asarray(getattr(x, "x", x), dtype=float)
    singles = np.array([table.values[1 << i] for i in range(table.player_count)])
    scale = max(1.0, abs(table.grand_value))
    return frozenset(int(i) for i in np.flatnonzero(x < singles - tol * scale))
