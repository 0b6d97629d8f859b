"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Problems are stated as::

    minimize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                lower <= x <= upper      (entries may be +-inf)

and converted internally to standard form ``A x = b, x >= 0, b >= 0``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, SolverStalledError

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7
MAX_PIVOTS = 10**6
MAX_NONZEROS = 1 << 25


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LpProblem:
    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        n = self.c.size
        self.A_ub, self.b_ub = _rows(self.A_ub, self.b_ub, n, "inequality")
        self.A_eq, self.b_eq = _rows(self.A_eq, self.b_eq, n, "equality")
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float).reshape(-1)
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).reshape(-1)
        if self.lower.size != n or self.upper.size != n:
            raise InvalidInputError(f"bounds must have {n} entries")
        if np.any(self.lower == np.inf) or np.any(self.upper == -np.inf):
            raise InvalidInputError("lower bounds cannot be +inf and upper bounds cannot be -inf")
        finite = [self.c, self.A_ub, self.b_ub, self.A_eq, self.b_eq]
        if not all(np.all(np.isfinite(a)) for a in finite):
            raise InvalidInputError("LP data must be finite")
        if np.count_nonzero(self.A_ub) + np.count_nonzero(self.A_eq) > MAX_NONZEROS:
            raise InvalidInputError("LP too large for the dense solver")

    @property
    def n_vars(self) -> int:
        return self.c.size


def _rows(A, b, n, what):
    if A is None and b is None:
        return np.zeros((0, n)), np.zeros(0)
    if A is None or b is None:
        raise InvalidInputError(f"{what} rows need both a matrix and a right-hand side")
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1) if A.size else A.reshape(0, n)
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.shape[1] != n:
        raise InvalidInputError(f"{what} matrix has {A.shape[1]} columns, objective has {n}")
    if A.shape[0] != b.size:
        raise InvalidInputError(f"{what} matrix has {A.shape[0]} rows but {b.size} right-hand sides")
    return A, b


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray
    objective_value: float
    active_rows: list[int] = field(default_factory=list)
    pivots: int = 0


class _Tableau:
    """Constraint rows ``T[:m]`` with rhs in the last column, plus one cost row."""

    def __init__(self, A, b, basis):
        m, n = A.shape
        self.T = np.zeros((m + 1, n + 1))
        self.T[:m, :n] = A
        self.T[:m, n] = b
        self.basis = list(basis)
        self.pivots = 0

    def set_cost(self, cost):
        n = self.T.shape[1] - 1
        self.T[-1, :n] = cost
        self.T[-1, n] = 0.0
        for r, j in enumerate(self.basis):
            if self.T[-1, j] != 0.0:
                self.T[-1] -= self.T[-1, j] * self.T[r]

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, j] = 0.0
        T[r, j] = 1.0
        self.basis[r] = j
        self.pivots += 1
        if self.pivots > MAX_PIVOTS:
            raise SolverStalledError(f"simplex exceeded {MAX_PIVOTS} pivots")

    def run(self, allowed):
        """Iterate with Bland's rule over columns flagged in ``allowed``.

        Returns False when the objective is unbounded below.
        """
        T = self.T
        m = T.shape[0] - 1
        while True:
            red = T[-1, :-1]
            cand = np.flatnonzero((red < -PIVOT_TOL) & allowed)
            if cand.size == 0:
                return True
            j = int(cand[0])
            col = T[:m, j]
            rows = np.flatnonzero(col > PIVOT_TOL)
            if rows.size == 0:
                return False
            ratios = T[rows, -1] / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
            r = min(ties, key=lambda i: self.basis[i])
            self.pivot(int(r), j)


def solve(problem: LpProblem) -> LpSolution:
    """Minimise the LP; deterministic for identical input."""
    p = problem
    n = p.n_vars
    lo, up = p.lower, p.upper

    # Column map: x = offset + sum(sign * y[col]) with y >= 0.
    cols: list[tuple[int, float]] = []
    offset = np.zeros(n)
    extra_ub_rows, extra_ub_rhs = [], []
    for k in range(n):
        if np.isfinite(lo[k]):
            offset[k] = lo[k]
            cols.append((k, 1.0))
            if np.isfinite(up[k]):
                row = np.zeros(n)
                row[k] = 1.0
                extra_ub_rows.append(row)
                extra_ub_rhs.append(up[k])
        elif np.isfinite(up[k]):
            offset[k] = up[k]
            cols.append((k, -1.0))
        else:
            cols.append((k, 1.0))
            cols.append((k, -1.0))
    S = np.zeros((n, len(cols)))
    for j, (k, s) in enumerate(cols):
        S[k, j] = s

    A_ub = p.A_ub if not extra_ub_rows else np.vstack([p.A_ub, np.array(extra_ub_rows)])
    b_ub = p.b_ub if not extra_ub_rows else np.concatenate([p.b_ub, extra_ub_rhs])
    m_ub, m_eq = A_ub.shape[0], p.A_eq.shape[0]
    m = m_ub + m_eq
    ny = len(cols)

    # Structural + slack columns, then artificials.
    A = np.zeros((m, ny + m_ub))
    b = np.zeros(m)
    A[:m_ub, :ny] = A_ub @ S
    A[:m_ub, ny:] = np.eye(m_ub)
    b[:m_ub] = b_ub - A_ub @ offset
    A[m_ub:, :ny] = p.A_eq @ S
    b[m_ub:] = p.b_eq - p.A_eq @ offset
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    basis = [-1] * m
    for r in range(m_ub):
        if not neg[r]:
            basis[r] = ny + r
    art_rows = [r for r in range(m) if basis[r] < 0]
    n_struct = ny + m_ub
    n_cols = n_struct + len(art_rows)
    full = np.zeros((m, n_cols))
    full[:, :n_struct] = A
    for a, r in enumerate(art_rows):
        full[r, n_struct + a] = 1.0
        basis[r] = n_struct + a

    tab = _Tableau(full, b, basis)
    allowed = np.ones(n_cols, dtype=bool)
    if art_rows:
        phase1 = np.zeros(n_cols)
        phase1[n_struct:] = 1.0
        tab.set_cost(phase1)
        tab.run(allowed)
        if -tab.T[-1, -1] > FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
            return LpSolution(LpStatus.INFEASIBLE, np.full(n, np.nan), float("nan"), [], tab.pivots)
        # Drive remaining artificials out; rows with no structural entry are redundant.
        drop = []
        for r in range(m):
            if tab.basis[r] >= n_struct:
                row = tab.T[r, :n_struct]
                nz = np.flatnonzero(np.abs(row) > PIVOT_TOL)
                if nz.size:
                    tab.pivot(r, int(nz[0]))
                else:
                    drop.append(r)
        if drop:
            keep = [r for r in range(m) if r not in drop]
            tab.T = np.vstack([tab.T[keep], tab.T[-1:]])
            tab.basis = [tab.basis[r] for r in keep]
        allowed[n_struct:] = False

    cost = np.zeros(n_cols)
    cost[:ny] = S.T @ p.c
    tab.set_cost(cost)
    if not tab.run(allowed):
        return LpSolution(LpStatus.UNBOUNDED, np.full(n, np.nan), float("-inf"), [], tab.pivots)

    y = np.zeros(n_cols)
    for r, j in enumerate(tab.basis):
        y[j] = tab.T[r, -1]
    x = offset + S @ y[:ny]
    obj = float(p.c @ x)

    active = []
    if m_ub:
        lhs = p.A_ub @ x
        scale = np.maximum(1.0, np.abs(p.b_ub))
        active.extend(np.flatnonzero(np.abs(lhs - p.b_ub) <= FEAS_TOL * scale).tolist())
    active.extend(range(p.A_ub.shape[0], p.A_ub.shape[0] + m_eq))
    return LpSolution(LpStatus.OPTIMAL, x, obj, active, tab.pivots)
