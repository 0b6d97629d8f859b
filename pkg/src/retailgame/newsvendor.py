"""Retailer economics: profit, cost, cost ratio and the optimal purchase."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePricingError, InvalidInputError, UnboundedQuantileError
from .gaussian import GaussianDist, partial_expectation_above, std_quantile
from . import rng as rngmod


@dataclass(frozen=True)
class Prices:
    """Retail, wholesale and imbalance prices in currency per kWh.

    ``b_minus`` settles a shortage (demand above purchase), ``b_plus`` a
    surplus. A positive ``b_plus`` means the retailer is paid for surplus
    energy; a positive ``b_minus`` means the retailer pays for shortage.
    """

    r_r: float
    r_w: float
    b_minus: float
    b_plus: float

    def __post_init__(self):
        for name in ("r_r", "r_w", "b_minus", "b_plus"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidInputError(f"price {name} must be finite")
        if not self.r_r > self.r_w:
            raise InvalidInputError(f"retail price r_r={self.r_r} must exceed wholesale r_w={self.r_w}")
        if not (self.b_minus >= self.r_w and self.b_plus <= self.r_w and self.b_minus > self.b_plus):
            raise InvalidInputError(
                "dual pricing requires b_minus >= r_w >= b_plus and b_minus > b_plus, got "
                f"b_minus={self.b_minus}, r_w={self.r_w}, b_plus={self.b_plus}")


REFERENCE_PRICES = Prices(r_r=0.1, r_w=0.06, b_minus=0.16, b_plus=0.03)


class QuantityMethod(str, enum.Enum):
    QUANTILE_RULE = "quantile_rule"
    FORECAST_MEAN = "forecast_mean"
    GRID_SEARCH = "grid_search"


@dataclass(frozen=True)
class QuantityDecision:
    quantity: float
    method: QuantityMethod


def profit(q: float, d: float, p: Prices) -> float:
    return p.r_r * d - p.r_w * q - p.b_minus * max(d - q, 0.0) + p.b_plus * max(q - d, 0.0)


def cost(q: float, d: float, p: Prices) -> float:
    return p.r_w * q + p.b_minus * max(d - q, 0.0) - p.b_plus * max(q - d, 0.0)


def profit_array(q: float, d: np.ndarray, p: Prices) -> np.ndarray:
    """Vectorised ``profit`` over an array of demands."""
    short = np.maximum(d - q, 0.0)
    surplus = np.maximum(q - d, 0.0)
    return p.r_r * d - p.r_w * q - p.b_minus * short + p.b_plus * surplus


def cost_ratio(p: Prices) -> float:
    spread = p.b_minus - p.b_plus
    if not spread > 0:
        raise DegeneratePricingError(f"b_minus ({p.b_minus}) must exceed b_plus ({p.b_plus})")
    return (p.b_minus - p.r_w) / spread


def optimal_quantity(forecast: GaussianDist, p: Prices) -> QuantityDecision:
    """Purchase at the cost-ratio quantile of the forecast."""
    gamma = cost_ratio(p)
    if forecast.variance == 0.0:
        return QuantityDecision(forecast.mean, QuantityMethod.QUANTILE_RULE)
    if gamma <= 0.0 or gamma >= 1.0:
        raise UnboundedQuantileError(
            f"cost ratio {gamma} gives an infinite quantile for a non-degenerate forecast")
    q = forecast.mean + std_quantile(gamma) * forecast.std
    return QuantityDecision(q, QuantityMethod.QUANTILE_RULE)


def mean_quantity(forecast: GaussianDist) -> QuantityDecision:
    return QuantityDecision(forecast.mean, QuantityMethod.FORECAST_MEAN)


def expected_profit_analytical(q: float, realized: GaussianDist, p: Prices) -> float:
    shortage = partial_expectation_above(realized, q)
    surplus = shortage - (realized.mean - q)
    return p.r_r * realized.mean - p.r_w * q - p.b_minus * shortage + p.b_plus * surplus


def _mc_estimate(profits: np.ndarray) -> tuple[float, float]:
    n = profits.size
    mean = float(profits.mean())
    if n < 2:
        return mean, float("nan")
    se = float(profits.std(ddof=1)) / math.sqrt(n)
    return mean, se


def expected_profit_mc(q: float, realized: GaussianDist, p: Prices, n: int,
                       rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo estimate of expected profit and its standard error."""
    if n < 2:
        raise InvalidInputError(f"need at least 2 samples, got {n}")
    if realized.variance == 0.0:
        return profit(q, realized.mean, p), 0.0
    d = realized.mean + realized.std * rng.standard_normal(n)
    return _mc_estimate(profit_array(q, d, p))


def grid_search_quantity(realized: GaussianDist, p: Prices, n_grid: int, n_samples: int,
                         upper: float, seed: int, common_samples: bool = True,
                         keys: tuple[int, ...] = ()) -> QuantityDecision:
    """Pick the grid point in [0, upper] with the highest Monte Carlo expected profit.

    With ``common_samples`` every grid point is scored on the same demand
    draws (stream ``grid_search`` keyed by ``keys + (0,)``). Otherwise point
    ``j`` uses its own stream keyed by ``keys + (j + 1,)``. Ties go to the
    lower quantity.
    """
    if n_grid < 2:
        raise InvalidInputError(f"n_grid must be >= 2, got {n_grid}")
    if not upper > 0:
        raise InvalidInputError(f"upper bound must be positive, got {upper}")
    grid = np.linspace(0.0, upper, n_grid)
    scores = np.empty(n_grid)
    if common_samples and realized.variance > 0.0:
        shared = rngmod.stream(seed, "grid_search", *keys, 0)
        d = realized.mean + realized.std * shared.standard_normal(n_samples)
        for j, q in enumerate(grid):
            scores[j] = profit_array(q, d, p).mean()
    else:
        for j, q in enumerate(grid):
            scores[j] = expected_profit_mc(q, realized, p, n_samples,
                                           rngmod.stream(seed, "grid_search", *keys, j + 1))[0]
    best = int(np.argmax(scores))  # first maximum, i.e. lowest quantity on ties
    return QuantityDecision(float(grid[best]), QuantityMethod.GRID_SEARCH)
