"""Coalitions as bitmasks and the data-sharing characteristic function.

Player 0 is the retailer and owns bit 0; customer ``i`` owns bit ``i``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal

import numpy as np

from .errors import DataError, InvalidInputError
from .gaussian import GaussianDist
from .loads import TimestepLoadSet, conditional_forecast, realized_demand_dist
from .newsvendor import Prices, expected_profit_analytical, optimal_quantity, profit_array
from . import rng as rngmod

MAX_CUSTOMERS = 24
RETAILER = 1


def mask_of(players: Iterable[int]) -> int:
    m = 0
    for i in players:
        if i < 0:
            raise InvalidInputError(f"negative player index {i}")
        m |= 1 << i
    return m


def members(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def popcounts(n_players: int) -> np.ndarray:
    masks = np.arange(1 << n_players)
    counts = np.zeros(1 << n_players, dtype=np.int64)
    for i in range(n_players):
        counts += (masks >> i) & 1
    return counts


@dataclass(frozen=True)
class ExpectationEngine:
    """How E[profit] is evaluated: closed form, or Monte Carlo with ``n_samples``."""

    kind: Literal["analytical", "monte_carlo"] = "analytical"
    n_samples: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("analytical", "monte_carlo"):
            raise InvalidInputError(f"unknown expectation engine {self.kind!r}")
        if self.kind == "monte_carlo" and self.n_samples < 2:
            raise InvalidInputError("Monte Carlo engine needs n_samples >= 2")


ANALYTICAL = ExpectationEngine()


@dataclass(frozen=True)
class ValueTable:
    """Characteristic function over all ``2**player_count`` coalitions, indexed by mask."""

    values: np.ndarray
    player_count: int
    monotonicity_violations: int = field(default=0, compare=False)

    def __post_init__(self):
        n = self.player_count
        if n < 1:
            raise InvalidInputError("a game needs at least the retailer")
        if n - 1 > MAX_CUSTOMERS:
            raise InvalidInputError(f"at most {MAX_CUSTOMERS} customers supported, got {n - 1}")
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (1 << n,):
            raise InvalidInputError(
                f"value table for {n} players needs {1 << n} entries, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise InvalidInputError("value table contains non-finite values")
        outside = vals[0::2]
        if np.any(outside != 0.0):
            bad = int(np.flatnonzero(outside != 0.0)[0]) * 2
            raise InvalidInputError(f"coalition mask {bad} lacks the retailer but has value {vals[bad]}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __getitem__(self, mask: int) -> float:
        return float(self.values[mask])

    @property
    def grand(self) -> int:
        return (1 << self.player_count) - 1

    @property
    def grand_value(self) -> float:
        return float(self.values[-1])

    @classmethod
    def from_mapping(cls, values: dict[int, float], player_count: int) -> "ValueTable":
        arr = np.zeros(1 << player_count)
        for m, v in values.items():
            arr[m] = v
        return cls(arr, player_count, count_monotonicity_violations(arr, player_count))


def count_monotonicity_violations(values: np.ndarray, n_players: int, tol: float = 1e-12) -> int:
    """Number of (T, i) with i not in T and v(T + i) < v(T)."""
    masks = np.arange(1 << n_players)
    count = 0
    for i in range(n_players):
        bit = 1 << i
        lo = masks[(masks & bit) == 0]
        count += int(np.sum(values[lo | bit] < values[lo] - tol))
    return count


def _profit_gain_mc(q_new: float, q_base: float, realized: GaussianDist, p: Prices,
                    engine: ExpectationEngine, timestep: int, mask: int) -> float:
    if q_new == q_base:
        return 0.0
    if realized.variance == 0.0:
        d = np.array([realized.mean])
    else:
        g = rngmod.stream(engine.seed, "coalition_mc", timestep, mask)
        d = realized.mean + realized.std * g.standard_normal(engine.n_samples)
    return float(profit_array(q_new, d, p).mean() - profit_array(q_base, d, p).mean())


def coalition_value(mask: int, loads: TimestepLoadSet, p: Prices,
                    engine: ExpectationEngine = ANALYTICAL) -> float:
    """Expected profit gain from re-optimising the purchase with the coalition's data."""
    if not mask & RETAILER:
        return 0.0
    customers = [i for i in members(mask) if i != 0]
    realized = realized_demand_dist(loads)
    q_base = optimal_quantity(conditional_forecast(loads, []), p).quantity
    q_new = optimal_quantity(conditional_forecast(loads, customers), p).quantity
    if engine.kind == "analytical":
        if q_new == q_base:
            return 0.0
        return (expected_profit_analytical(q_new, realized, p)
                - expected_profit_analytical(q_base, realized, p))
    return _profit_gain_mc(q_new, q_base, realized, p, engine, loads.timestep, mask)


def build_value_table(loads: TimestepLoadSet, p: Prices,
                      engine: ExpectationEngine = ANALYTICAL) -> ValueTable:
    """Evaluate every coalition once per distinct customer subset."""
    comps = sorted(loads.components, key=lambda c: c.customer_id)
    m = len(comps)
    if [c.customer_id for c in comps] != list(range(1, m + 1)):
        raise InvalidInputError("customer ids must be 1..M for coalition bitmasks")
    if m > MAX_CUSTOMERS:
        raise InvalidInputError(f"at most {MAX_CUSTOMERS} customers supported, got {m}")
    realised = loads.disclosed()
    if len(realised) != m:
        raise InvalidInputError(f"full disclosure set required at timestep {loads.timestep}")

    l_s = [realised[c.customer_id] for c in comps]

    realized = realized_demand_dist(loads)
    empty = conditional_forecast(loads, [])
    q_base = optimal_quantity(empty, p).quantity
    h_base = expected_profit_analytical(q_base, realized, p)

    values = np.zeros(1 << (m + 1))
    for sub in range(1 << m):
        mask = (sub << 1) | RETAILER
        if sub == 0:
            continue
        # Same sums as conditional_forecast, accumulated in the same order.
        mean = 0.0
        var = 0.0
        for k, c in enumerate(comps):
            if sub >> k & 1:
                mean += l_s[k]
            else:
                mean += c.mu_s
                var += c.sigma_s * c.sigma_s
            mean += c.mu_u
            var += c.sigma_u * c.sigma_u
        q_new = optimal_quantity(GaussianDist(mean, max(var, 0.0)), p).quantity
        if q_new == q_base:
            continue
        if engine.kind == "analytical":
            values[mask] = expected_profit_analytical(q_new, realized, p) - h_base
        else:
            values[mask] = _profit_gain_mc(q_new, q_base, realized, p, engine, loads.timestep, mask)
    return ValueTable(values, m + 1, count_monotonicity_violations(values, m + 1))


def dump_value_table(table: ValueTable) -> str:
    """CSV text with columns mask, members, value (members space separated)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["mask", "members", "value"])
    for mask in range(1 << table.player_count):
        w.writerow([mask, " ".join(str(i) for i in members(mask)), repr(float(table.values[mask]))])
    return buf.getvalue()


def load_value_table(text: str) -> ValueTable:
    """Parse the CSV produced by :func:`dump_value_table`.

    The member column is cross-checked against the mask when present.
    """
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise DataError("value table is empty")
    header = [h.strip() for h in rows[0]]
    if header[:1] != ["mask"] or "value" not in header:
        raise DataError(f"value table header must contain mask and value, got {rows[0]}")
    vi = header.index("value")
    mi = header.index("members") if "members" in header else None
    body = [r for r in rows[1:] if any(cell.strip() for cell in r)]
    if not body:
        raise DataError("value table has no rows")
    n_rows = len(body)
    n_players = int(round(math.log2(n_rows))) if n_rows > 0 else 0
    if (1 << n_players) != n_rows or n_players < 1:
        raise DataError(f"value table needs 2**(M+1) rows, got {n_rows}")
    values: dict[int, float] = {}
    for lineno, r in enumerate(body, start=2):
        try:
            mask = int(r[0])
            value = float(r[vi])
        except (ValueError, IndexError) as exc:
            raise DataError(f"row {lineno}: cannot parse {r}") from exc
        if not 0 <= mask < n_rows:
            raise DataError(f"row {lineno}: mask {mask} out of range for {n_players} players")
        if mask in values:
            raise DataError(f"row {lineno}: duplicate mask {mask}")
        if not math.isfinite(value):
            raise DataError(f"row {lineno}: non-finite value")
        if mi is not None and len(r) > mi and r[mi].strip():
            listed = sorted(int(t) for t in r[mi].split())
            if listed != members(mask):
                raise DataError(f"row {lineno}: members {listed} disagree with mask {mask}")
        values[mask] = value
    try:
        return ValueTable.from_mapping(values, n_players)
    except InvalidInputError as exc:
        raise DataError(str(exc)) from exc
