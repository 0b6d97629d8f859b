"""Scenario engine: per-timestep games, horizon aggregation, method comparison."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .allocation import (MAX_NUCLEOLUS_PLAYERS, Allocation, check_individual_rationality,
                         nucleolus, shapley)
from .config import FixedAlpha, ScenarioConfig
from .errors import DataError
from .gaussian import GaussianDist, sample
from .game import ValueTable, build_value_table
from .loads import (TimestepLoadSet, build_load_set, conditional_forecast, realized_demand_dist,
                    split_load)
from .newsvendor import (expected_profit_analytical, grid_search_quantity, mean_quantity,
                         optimal_quantity, profit_array)
from . import rng as rngmod

log = logging.getLogger(__name__)

ARMS = (
    "nodata_nodata_mean",
    "nodata_nodata_cr",
    "data_nodata_mean",
    "data_nodata_cr",
    "data_data_mean",
    "data_data_cr",
)


@dataclass
class TimestepResult:
    timestep: int
    forecast_nodata: GaussianDist
    forecast_data: GaussianDist
    q_nodata: float
    q_data: float
    grand_value: float
    allocations: dict[str, Allocation]
    ir_violations: dict[str, frozenset]
    monotonicity_violations: int
    baseline_profit: float
    energy: np.ndarray
    schedulable_mean: np.ndarray
    negative_disclosures: int
    grid_quantity: Optional[float] = None
    table: Optional[ValueTable] = field(default=None, repr=False)


@dataclass
class AggregateReport:
    methods: tuple[str, ...]
    totals: dict[str, np.ndarray]
    retailer_share: dict[str, float]
    energy_cost: np.ndarray
    savings: dict[str, np.ndarray]
    baseline_profit: float
    uplift: dict[str, float]
    avg_schedulable: np.ndarray
    total_value: float
    negative_disclosures: int

    def as_dict(self) -> dict:
        return {
            "methods": list(self.methods),
            "total_value": self.total_value,
            "baseline_profit": self.baseline_profit,
            "retailer_share": dict(self.retailer_share),
            "retailer_uplift": dict(self.uplift),
            "totals": {m: v.tolist() for m, v in self.totals.items()},
            "customer_energy_cost": self.energy_cost.tolist(),
            "customer_savings": {m: v.tolist() for m, v in self.savings.items()},
            "average_schedulable_load": self.avg_schedulable.tolist(),
            "negative_disclosures": self.negative_disclosures,
        }


def active_methods(config: ScenarioConfig) -> tuple[str, ...]:
    methods = config.allocation_methods
    if "nucleolus" in methods and config.customers + 1 > MAX_NUCLEOLUS_PLAYERS:
        log.warning("skipping nucleolus: %d players exceeds the limit of %d",
                    config.customers + 1, MAX_NUCLEOLUS_PLAYERS)
        methods = tuple(m for m in methods if m != "nucleolus")
    return methods


def timestep_loads(config: ScenarioConfig, loads_at_t: np.ndarray, t: int) -> TimestepLoadSet:
    """Split measured loads and draw the realised schedulable loads for timestep ``t``."""
    seed = config.master_seed
    policy = config.alpha_policy
    comps = []
    l_s = []
    for i, mu in enumerate(np.asarray(loads_at_t, dtype=float), start=1):
        if isinstance(policy, FixedAlpha):
            alpha = policy.value
        else:
            alpha = float(rngmod.stream(seed, "alpha", t, i).uniform(policy.low, policy.high))
        c = split_load(float(mu), alpha, config.beta_s, config.beta_u, customer_id=i)
        comps.append(c)
        l_s.append(sample(GaussianDist.from_std(c.mu_s, c.sigma_s),
                          rngmod.stream(seed, "disclosure", t, i)))
    return build_load_set(t, comps, l_s)


def run_timestep(config: ScenarioConfig, loads_at_t: np.ndarray, t: int,
                 methods: Optional[tuple[str, ...]] = None, keep_table: bool = False) -> TimestepResult:
    if methods is None:
        methods = active_methods(config)
    p = config.price_model()
    loads = timestep_loads(config, loads_at_t, t)
    d_empty = conditional_forecast(loads, [])
    d_full = realized_demand_dist(loads)
    q_empty = optimal_quantity(d_empty, p).quantity
    q_full = optimal_quantity(d_full, p).quantity

    table = build_value_table(loads, p, config.engine())
    allocations: dict[str, Allocation] = {}
    ir: dict[str, frozenset] = {}
    for m in methods:
        alloc = shapley(table) if m == "shapley" else nucleolus(table)
        allocations[m] = alloc
        ir[m] = check_individual_rationality(alloc, table)

    grid_q = None
    gv = config.grid_validation
    if gv is not None and d_empty.mean > 0:
        grid_q = grid_search_quantity(d_full, p, gv.n_grid, gv.n_samples, 2.0 * d_empty.mean,
                                      config.master_seed, keys=(t,)).quantity

    disclosed = loads.disclosed()
    comps = loads.components
    return TimestepResult(
        timestep=t,
        forecast_nodata=d_empty,
        forecast_data=d_full,
        q_nodata=q_empty,
        q_data=q_full,
        grand_value=table.grand_value,
        allocations=allocations,
        ir_violations=ir,
        monotonicity_violations=table.monotonicity_violations,
        baseline_profit=expected_profit_analytical(q_empty, d_full, p),
        energy=np.array([disclosed[c.customer_id] + c.mu_u for c in comps]),
        schedulable_mean=np.array([c.mu_s for c in comps]),
        negative_disclosures=sum(1 for v in disclosed.values() if v < 0),
        grid_quantity=grid_q,
        table=table if keep_table else None,
    )


def _check_profiles(config: ScenarioConfig, profiles: np.ndarray) -> np.ndarray:
    profiles = np.asarray(profiles, dtype=float)
    if profiles.ndim != 2 or profiles.shape[1] != config.customers:
        raise DataError(f"profiles must have shape (timesteps, {config.customers}), got {profiles.shape}")
    if profiles.shape[0] < config.horizon:
        raise DataError(f"profiles cover {profiles.shape[0]} timesteps, horizon needs {config.horizon}")
    return profiles[: config.horizon]


def _run_chunk(args):
    config, rows, start, methods, keep = args
    return [run_timestep(config, rows[k], start + k, methods, keep) for k in range(len(rows))]


def run_timesteps(config: ScenarioConfig, profiles: np.ndarray, threads: int = 1,
                  keep_tables: bool = False) -> list[TimestepResult]:
    profiles = _check_profiles(config, profiles)
    methods = active_methods(config)
    n = profiles.shape[0]
    if threads <= 1 or n < 2:
        return [run_timestep(config, profiles[t], t, methods, keep_tables) for t in range(n)]
    # Contiguous chunks, reassembled in order, so output is independent of scheduling.
    bounds = np.linspace(0, n, min(n, threads * 4) + 1).astype(int)
    jobs = [(config, profiles[a:b], int(a), methods, keep_tables)
            for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        chunks = list(pool.map(_run_chunk, jobs))
    return [r for chunk in chunks for r in chunk]


def aggregate(config: ScenarioConfig, results: list[TimestepResult]) -> AggregateReport:
    methods = tuple(results[0].allocations) if results else ()
    n = config.customers + 1
    totals = {m: np.zeros(n) for m in methods}
    total_value = 0.0
    baseline = 0.0
    energy = np.zeros(n - 1)
    sched = np.zeros(n - 1)
    neg = 0
    for r in results:
        for m in methods:
            totals[m] += r.allocations[m].x
        total_value += r.grand_value
        baseline += r.baseline_profit
        energy += r.energy
        sched += r.schedulable_mean
        neg += r.negative_disclosures
    r_r = config.prices.r_r
    energy_cost = r_r * energy
    share = {m: (float(totals[m][0] / total_value) if total_value > 0 else float("nan"))
             for m in methods}
    with np.errstate(divide="ignore", invalid="ignore"):
        savings = {m: np.where(energy_cost > 0, totals[m][1:] / energy_cost, np.nan) for m in methods}
    uplift = {m: (float(totals[m][0] / baseline) if baseline != 0 else float("nan")) for m in methods}
    return AggregateReport(
        methods=methods,
        totals=totals,
        retailer_share=share,
        energy_cost=energy_cost,
        savings=savings,
        baseline_profit=baseline,
        uplift=uplift,
        avg_schedulable=sched / max(len(results), 1),
        total_value=total_value,
        negative_disclosures=neg,
    )


def run_horizon(config: ScenarioConfig, profiles: np.ndarray, threads: int = 1,
                keep_tables: bool = False) -> tuple[list[TimestepResult], AggregateReport]:
    results = run_timesteps(config, profiles, threads, keep_tables)
    return results, aggregate(config, results)


@dataclass
class ComparisonResult:
    """Per-arm profit draws, shaped ``(timesteps, n_per_timestep)``."""

    samples: dict[str, np.ndarray]

    @property
    def n_per_timestep(self) -> int:
        return next(iter(self.samples.values())).shape[1]

    def summary(self) -> dict[str, dict[str, float]]:
        """Mean, pooled spread and 5% quantile of each arm.

        ``within_std`` is the root mean of per-timestep variances: the profit
        risk at a given timestep, with the daily load cycle taken out.
        """
        out = {}
        for arm, s in self.samples.items():
            flat = s.ravel()
            out[arm] = {
                "mean": float(flat.mean()),
                "std": float(flat.std(ddof=1)),
                "within_std": float(np.sqrt(s.var(axis=1, ddof=1).mean())),
                "q05": float(np.quantile(flat, 0.05)),
                "std_error": float(flat.std(ddof=1) / np.sqrt(flat.size)),
            }
        return out

    def paired_difference(self, better: str, worse: str) -> tuple[float, float]:
        """Mean and standard error of ``better - worse`` on shared draws."""
        d = (self.samples[better] - self.samples[worse]).ravel()
        return float(d.mean()), float(d.std(ddof=1) / np.sqrt(d.size))


def method_comparison(config: ScenarioConfig, profiles: np.ndarray,
                      n_samples: int = 200) -> ComparisonResult:
    """Profit samples for the six realisation x forecast x purchase-rule arms.

    Arm names read ``<realisation>_<forecast>_<rule>``: realisation and
    forecast are either without (``nodata``) or with (``data``) the
    schedulable load data; the rule is the forecast mean or the cost-ratio
    quantile. Arms sharing a realisation use the same demand draws.
    """
    profiles = _check_profiles(config, profiles)
    p = config.price_model()
    per_arm = {a: [] for a in ARMS}
    for t in range(profiles.shape[0]):
        loads = timestep_loads(config, profiles[t], t)
        d_empty = conditional_forecast(loads, [])
        d_full = realized_demand_dist(loads)
        g = rngmod.stream(config.master_seed, "comparison", t)
        z = g.standard_normal((2, n_samples))
        real = {"nodata": d_empty.mean + d_empty.std * z[0], "data": d_full.mean + d_full.std * z[1]}
        fc = {"nodata": d_empty, "data": d_full}
        for arm in ARMS:
            r, f, rule = arm.split("_")
            if r == "nodata" and f == "data":
                continue
            q = (mean_quantity(fc[f]) if rule == "mean" else optimal_quantity(fc[f], p)).quantity
            per_arm[arm].append(profit_array(q, real[r], p))
    return ComparisonResult({a: np.vstack(v) for a, v in per_arm.items()})
