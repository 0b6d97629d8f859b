"""CSV and JSON writers for simulation outputs.

Floats are written with ``repr`` so identical runs give identical bytes.
"""

from __future__ import annotations

import csv
import json
import platform
from pathlib import Path

import numpy as np

from . import __version__
from .allocation import EFFICIENCY_TOL, FIX_TOL
from .config import ScenarioConfig, dump_config
from .game import dump_value_table
from .gaussian import std_quantile
from .harness import AggregateReport, ComparisonResult, TimestepResult
from .simplex import FEAS_TOL, PIVOT_TOL

Z90 = std_quantile(0.95)


def _f(x: float) -> str:
    return repr(float(x))


def write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_allocations(path: Path, results: list[TimestepResult]) -> None:
    rows = []
    for r in results:
        for method, alloc in r.allocations.items():
            for player, x in enumerate(alloc.x):
                rows.append([r.timestep, player, method, _f(x)])
    write_rows(path, ["timestep", "player", "method", "payoff"], rows)


def write_aggregate(path: Path, report: AggregateReport) -> None:
    """Player 0 carries the retailer share of the total value; customers their savings fraction."""
    rows = []
    for m in report.methods:
        totals = report.totals[m]
        rows.append([0, m, _f(totals[0]), _f(report.retailer_share[m])])
        for i in range(1, totals.size):
            rows.append([i, m, _f(totals[i]), _f(report.savings[m][i - 1])])
    write_rows(path, ["player", "method", "total_payoff", "share_or_savings"], rows)


def write_forecast_band(path: Path, results: list[TimestepResult]) -> None:
    rows = []
    for r in results:
        a, b = r.forecast_nodata, r.forecast_data
        rows.append([r.timestep, _f(a.mean), _f(a.mean - Z90 * a.std), _f(a.mean + Z90 * a.std),
                     _f(b.mean), _f(b.mean - Z90 * b.std), _f(b.mean + Z90 * b.std)])
    write_rows(path, ["timestep", "mean_nodata", "lo90_nodata", "hi90_nodata",
                       "mean_data", "lo90_data", "hi90_data"], rows)


def write_timesteps(path: Path, results: list[TimestepResult]) -> None:
    methods = list(results[0].allocations) if results else []
    header = ["timestep", "q_nodata", "q_data", "grand_value", "baseline_profit",
              "monotonicity_violations", "grid_quantity"] + [f"ir_violations_{m}" for m in methods]
    rows = []
    for r in results:
        row = [r.timestep, _f(r.q_nodata), _f(r.q_data), _f(r.grand_value), _f(r.baseline_profit),
               r.monotonicity_violations, "" if r.grid_quantity is None else _f(r.grid_quantity)]
        row += [" ".join(str(i) for i in sorted(r.ir_violations[m])) for m in methods]
        rows.append(row)
    write_rows(path, header, rows)


def write_method_comparison(path: Path, comp: ComparisonResult) -> None:
    """Sample index runs over (timestep, draw) in row-major order."""
    rows = []
    for arm, s in comp.samples.items():
        for k, v in enumerate(s.ravel()):
            rows.append([arm, k, _f(v)])
    write_rows(path, ["arm", "sample_index", "profit"], rows)


def write_value_tables(directory: Path, results: list[TimestepResult]) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for r in results:
        if r.table is not None:
            (directory / f"t{r.timestep:05d}.csv").write_text(dump_value_table(r.table), encoding="utf-8")


def _json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True, allow_nan=True) + "\n", encoding="utf-8")


def metadata(config: ScenarioConfig, source: str, extra: dict | None = None) -> dict:
    meta = {
        "master_seed": config.master_seed,
        "config": dump_config(config),
        "profiles": source,
        "versions": {
            "retailgame": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "tolerances": {
            "efficiency_relative": EFFICIENCY_TOL,
            "nucleolus_fix": FIX_TOL,
            "lp_pivot": PIVOT_TOL,
            "lp_feasibility": FEAS_TOL,
        },
        "conventions": {
            "customer_energy": "realised schedulable load plus unschedulable mean, per timestep",
            "savings_fraction": "total payoff / (retail price * customer energy)",
            "retailer_uplift": "retailer payoff / sum of expected profit at the no-data purchase",
            "average_schedulable_load": "mean over timesteps of the schedulable forecast mean",
            "negative_schedulable_draws": "kept as drawn; counted in report.json",
        },
    }
    if extra:
        meta.update(extra)
    return meta


def write_suite(out: Path, config: ScenarioConfig, results: list[TimestepResult],
                report: AggregateReport, comparison: ComparisonResult | None,
                source: str) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def path(name):
        p = out / name
        written.append(p)
        return p

    write_allocations(path("allocations.csv"), results)
    write_aggregate(path("aggregate.csv"), report)
    write_forecast_band(path("forecast_band.csv"), results)
    write_timesteps(path("timesteps.csv"), results)
    report_data = report.as_dict()
    if comparison is not None:
        write_method_comparison(path("method_comparison.csv"), comparison)
        report_data["method_comparison"] = comparison.summary()
    if any(r.table is not None for r in results):
        write_value_tables(out / "value_tables", results)
    _json(path("report.json"), report_data)
    _json(path("run_metadata.json"), metadata(config, source))
    return written
