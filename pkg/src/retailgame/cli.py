"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import ScenarioConfig, dump_config, load_config, parse_config
from .errors import ConfigError, DataError, InvalidInputError, RetailGameError

log = logging.getLogger("retailgame")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4


def _engine_override(text: str) -> dict:
    if text == "analytical":
        return {"kind": "analytical"}
    if text.startswith("mc:"):
        try:
            n = int(text[3:])
        except ValueError:
            raise ConfigError(f"--engine: bad sample count in {text!r}") from None
        return {"kind": "monte_carlo", "n_samples": n}
    raise ConfigError(f"--engine must be 'analytical' or 'mc:<n>', got {text!r}")


def _scenario(args) -> ScenarioConfig:
    cfg = load_config(args.config)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    if getattr(args, "engine", None):
        overrides["expectation_engine"] = _engine_override(args.engine)
    if overrides:
        data = dump_config(cfg)
        data.update(overrides)
        cfg = parse_config(data)
    return cfg


def _profiles(args, cfg: ScenarioConfig):
    from .profiles import ingest_profiles, synthesize_profiles

    if getattr(args, "input", None):
        return ingest_profiles(args.input, cfg.customers), str(args.input)
    return synthesize_profiles(cfg.customers, cfg.horizon, cfg.master_seed, cfg.steps_per_day), "synthetic"


def cmd_simulate(args) -> int:
    from .harness import method_comparison, run_horizon
    from .reports import write_suite

    cfg = _scenario(args)
    if not args.input and not args.synthetic:
        raise ConfigError("simulate needs --input PROFILES.csv or --synthetic")
    profiles, source = _profiles(args, cfg)
    log.info("running %d timesteps for %d customers", cfg.horizon, cfg.customers)
    results, report = run_horizon(cfg, profiles, threads=args.threads, keep_tables=args.dump_tables)
    comparison = None
    if args.comparison_samples > 0:
        comparison = method_comparison(cfg, profiles, args.comparison_samples)
    out = Path(args.out)
    for p in write_suite(out, cfg, results, report, comparison, source):
        log.info("wrote %s", p)
    for m in report.methods:
        print(f"{m}: retailer share {report.retailer_share[m]:.4f}, "
              f"retailer uplift {report.uplift[m]:.4f}")
    return EXIT_OK


def cmd_allocate(args) -> int:
    from .allocation import nucleolus, shapley
    from .game import load_value_table
    from .reports import write_rows

    try:
        text = Path(args.input).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read value table {args.input}: {exc.strerror}") from None
    table = load_value_table(text)
    methods = ["shapley", "nucleolus"] if args.method == "both" else [args.method]
    allocs = {}
    for m in methods:
        allocs[m] = shapley(table) if m == "shapley" else nucleolus(table)
    print("player," + ",".join(methods))
    for i in range(table.player_count):
        print(f"{i}," + ",".join(repr(float(allocs[m].x[i])) for m in methods))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        rows = [[0, i, m, repr(float(x))] for m in methods for i, x in enumerate(allocs[m].x)]
        write_rows(out / "allocations.csv", ["timestep", "player", "method", "payoff"], rows)
    return EXIT_OK


def cmd_newsvendor(args) -> int:
    from pydantic import ValidationError

    from .config import PricesConfig, format_validation_error
    from .gaussian import GaussianDist
    from .newsvendor import (cost_ratio, expected_profit_analytical, grid_search_quantity,
                             optimal_quantity)

    seed = args.seed
    if args.config:
        cfg = _scenario(args)
        prices = cfg.price_model()
        seed = cfg.master_seed if seed is None else seed
    else:
        try:
            prices = PricesConfig(r_r=args.r_r, r_w=args.r_w, b_minus=args.b_minus,
                                  b_plus=args.b_plus).to_prices()
        except ValidationError as exc:
            raise ConfigError(format_validation_error(exc)) from None
    if args.std < 0:
        raise ConfigError("--std must be >= 0")
    forecast = GaussianDist.from_std(args.mean, args.std)
    gamma = cost_ratio(prices)
    q = optimal_quantity(forecast, prices).quantity
    print(f"cost_ratio={gamma!r}")
    print(f"quantity={q!r}")
    print(f"expected_profit={expected_profit_analytical(q, forecast, prices)!r}")
    if args.grid:
        if seed is None:
            raise ConfigError("--grid needs --seed (or a config with master_seed)")
        upper = args.upper if args.upper is not None else 2.0 * args.mean
        g = grid_search_quantity(forecast, prices, args.n_grid, args.n_samples, upper, seed)
        step = upper / (args.n_grid - 1)
        print(f"grid_quantity={g.quantity!r}")
        print(f"grid_step={step!r}")
        print(f"within_one_step={abs(g.quantity - q) <= step}")
    return EXIT_OK


def cmd_gen_data(args) -> int:
    from .profiles import synthesize_profiles, write_profiles

    if args.config:
        cfg = _scenario(args)
        m, horizon, seed, spd = cfg.customers, cfg.horizon, cfg.master_seed, cfg.steps_per_day
        if args.customers:
            m = args.customers
        if args.horizon:
            horizon = args.horizon
    else:
        if args.seed is None:
            raise ConfigError("gen-data needs --seed or --config; wall-clock seeding is not used")
        if not args.customers or not args.horizon:
            raise ConfigError("gen-data needs --customers and --horizon (or --config)")
        m, horizon, seed = args.customers, args.horizon, args.seed
        spd = max(1, 1440 // args.timestep_minutes)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "profiles.csv"
    path.write_text(write_profiles(synthesize_profiles(m, horizon, seed, spd)), encoding="utf-8")
    print(path)
    return EXIT_OK


def cmd_validate(args) -> int:
    from .profiles import ingest_profiles

    cfg = _scenario(args)
    print(f"config ok: {cfg.customers} customers, horizon {cfg.horizon}")
    if args.input:
        profiles = ingest_profiles(args.input, cfg.customers)
        if profiles.shape[0] < cfg.horizon:
            raise DataError(f"{args.input}: {profiles.shape[0]} timesteps, horizon needs {cfg.horizon}")
        print(f"data ok: {profiles.shape[0]} timesteps")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="retailgame", description="Value and share customer schedulable-load data.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run the per-timestep game over a horizon")
    s.add_argument("--config", required=True)
    src = s.add_mutually_exclusive_group()
    src.add_argument("--input", help="profile CSV (timestep,customer_id,load_kwh)")
    src.add_argument("--synthetic", action="store_true", help="generate profiles from the seed")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--engine", help="analytical or mc:<n>")
    s.add_argument("--comparison-samples", type=int, default=100,
                   help="draws per timestep for method_comparison.csv (0 disables)")
    s.add_argument("--dump-tables", action="store_true", help="write every value table as CSV")
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("allocate", help="Shapley/nucleolus for a value-table CSV (mask,members,value)")
    a.add_argument("--input", required=True)
    a.add_argument("--method", choices=["shapley", "nucleolus", "both"], default="both")
    a.add_argument("--out")
    a.set_defaults(func=cmd_allocate)

    n = sub.add_parser("newsvendor", help="optimal purchase for one Gaussian forecast")
    n.add_argument("--config")
    n.add_argument("--r-r", type=float, default=0.1)
    n.add_argument("--r-w", type=float, default=0.06)
    n.add_argument("--b-minus", type=float, default=0.16)
    n.add_argument("--b-plus", type=float, default=0.03)
    n.add_argument("--mean", type=float, required=True)
    n.add_argument("--std", type=float, required=True)
    n.add_argument("--grid", action="store_true", help="also run the Monte Carlo grid search")
    n.add_argument("--n-grid", type=int, default=100)
    n.add_argument("--n-samples", type=int, default=1000)
    n.add_argument("--upper", type=float, help="grid upper bound (default 2 * mean)")
    n.add_argument("--seed", type=int)
    n.set_defaults(func=cmd_newsvendor)

    g = sub.add_parser("gen-data", help="write synthetic profiles.csv")
    g.add_argument("--config")
    g.add_argument("--customers", type=int)
    g.add_argument("--horizon", type=int)
    g.add_argument("--timestep-minutes", type=int, default=30)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_data)

    v = sub.add_parser("validate", help="check a config and optional profile CSV")
    v.add_argument("--config", required=True)
    v.add_argument("--input")
    v.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InvalidInputError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RetailGameError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        log.debug("unhandled", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
