"""Acceptance checks. Each test records one PASS/FAIL line shown in the terminal summary."""

import itertools
import json
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.stats import spearmanr

from retailgame.allocation import excess_profile, nucleolus, shapley
from retailgame.config import dump_config, reference_config
from retailgame.gaussian import GaussianDist
from retailgame.harness import method_comparison, run_horizon, timestep_loads
from retailgame.loads import conditional_forecast, realized_demand_dist
from retailgame.newsvendor import (REFERENCE_PRICES as P, expected_profit_analytical, expected_profit_mc,
                                   grid_search_quantity, optimal_quantity)
from retailgame.profiles import synthesize_profiles

from oracles import lex_leq, random_table, shapley_permutations

MONTH_SEED = 2021
EXTRA_SEEDS = range(2022, 2031)


@pytest.fixture(scope="module")
def month():
    """Month-long 8-customer run with both allocation methods and a profit comparison."""
    t0 = time.perf_counter()
    cfg = reference_config(master_seed=MONTH_SEED)
    prof = synthesize_profiles(cfg.customers, cfg.horizon, cfg.master_seed, cfg.steps_per_day)
    results, report = run_horizon(cfg, prof)
    elapsed = time.perf_counter() - t0
    comparison = method_comparison(cfg, prof, n_samples=200)
    return cfg, prof, results, report, comparison, elapsed


def _grid_trials(forecasts, tag):
    hits = 0
    for k, (realized, upper) in enumerate(forecasts):
        g = grid_search_quantity(realized, P, 100, 1000, upper, MONTH_SEED, keys=(tag, k))
        hits += abs(g.quantity - optimal_quantity(realized, P).quantity) <= upper / 99
    return hits


def test_c1_quantile_rule_optimality(acceptance_log):
    t0 = time.perf_counter()
    cfg = reference_config()
    prof = synthesize_profiles(cfg.customers, cfg.horizon, MONTH_SEED)
    rng = np.random.default_rng(1)
    scenario = []
    for t in rng.integers(0, cfg.horizon, size=100):
        loads = timestep_loads(cfg, prof[t], int(t))
        scenario.append((realized_demand_dist(loads), 2 * conditional_forecast(loads, []).mean))
    generic = []
    for _ in range(100):
        mu = rng.uniform(1, 50)
        generic.append((GaussianDist.from_std(mu, mu * rng.uniform(0.02, 0.2)), 2 * mu))
    hits_s = _grid_trials(scenario, 1)
    hits_g = _grid_trials(generic, 2)
    elapsed = time.perf_counter() - t0
    wide = []
    for _ in range(100):
        mu = rng.uniform(1, 50)
        wide.append((GaussianDist.from_std(mu, mu * rng.uniform(0.2, 0.5)), 2 * mu))
    hits_w = _grid_trials(wide, 3)
    ok = hits_s >= 95 and hits_g >= 95 and elapsed < 5
    acceptance_log("C1 quantile-rule optimality", ok,
                   f"scenario {hits_s}/100, generic sd/mean<=0.2 {hits_g}/100, {elapsed:.2f}s "
                   f"(info: sd/mean in 0.2-0.5 {hits_w}/100)")
    assert ok


def test_c2_shapley_oracle(acceptance_log):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    for k in range(200):
        t = random_table(rng, 2 + k % 4)
        worst = max(worst, float(np.abs(shapley(t).x - shapley_permutations(t)).max()))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 10
    acceptance_log("C2 Shapley oracle equivalence", ok, f"max diff {worst:.2e}, {elapsed:.2f}s")
    assert ok


def _grid_nucleolus(table, centre, half, step):
    """Tolerance-lexicographic minimum of the excess vector over an efficient 2-D grid.

    Candidates within one step of the best value are kept at each level, since
    exact ties on the continuum become near-ties on the grid; the survivors'
    centroid is returned.
    """
    v, g = table.values, table.grand_value
    a = np.arange(-half, half + step / 2, step)
    x1, x2 = (m.ravel() for m in np.meshgrid(centre[1] + a, centre[2] + a, indexing="ij"))
    X = np.stack([g - x1 - x2, x1, x2], axis=1)
    masks = np.arange(1, 7)
    mem = ((masks[:, None] >> np.arange(3)) & 1).astype(float)
    e = -np.sort(-(v[masks][None, :] - X @ mem.T), axis=1)
    keep = np.arange(len(X))
    for k in range(e.shape[1]):
        col = e[keep, k]
        keep = keep[col <= col.min() + step]
    return X[keep].mean(axis=0)


def test_c3_nucleolus_small_games(acceptance_log):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    lex_fail = 0
    worst = 0.0
    for _ in range(50):
        t = random_table(rng, 3)
        x = nucleolus(t).x
        ours = excess_profile(t, x)
        # 10^4 random efficient allocations: half wide, half close to the nucleolus.
        ys = np.vstack([rng.uniform(-2, 2, size=(5000, 3)), x + rng.normal(scale=0.01, size=(5000, 3))])
        ys += ((t.grand_value - ys.sum(axis=1)) / 3)[:, None]
        lex_fail += sum(not lex_leq(ours, excess_profile(t, y), 1e-9) for y in ys)
        g = np.full(3, t.grand_value / 3)
        for half, step in ((3.0, 0.02), (0.1, 0.002), (0.01, 1e-3)):
            g = _grid_nucleolus(t, g, half, step)
        worst = max(worst, float(np.abs(g - x).max()))
    elapsed = time.perf_counter() - t0
    ok = lex_fail == 0 and worst <= 5e-3 and elapsed < 60
    acceptance_log("C3 nucleolus on 3-player games", ok,
                   f"lex violations {lex_fail}, grid gap {worst:.2e}, {elapsed:.1f}s")
    assert ok


def test_c4_mc_agreement(acceptance_log):
    rng = np.random.default_rng(4)
    hits = 0
    for k in range(1000):
        mu = rng.uniform(0.5, 50)
        f = GaussianDist.from_std(mu, mu * rng.uniform(0.01, 1.0))
        q = f.mean + f.std * rng.uniform(-3, 3)
        est, se = expected_profit_mc(q, f, P, 100_000, np.random.default_rng([4, k]))
        hits += abs(est - expected_profit_analytical(q, f, P)) <= 4 * se
    ok = hits >= 990
    acceptance_log("C4 MC/analytical agreement", ok, f"{hits}/1000 within 4 SE")
    assert ok


def test_c5_directional_reproduction(acceptance_log, month):
    cfg, prof, results, report, _, month_time = month
    t0 = time.perf_counter()
    sh, nu = report.retailer_share["shapley"], report.retailer_share["nucleolus"]
    positive = [bool(np.all(report.totals["shapley"][1:] > 0))]
    rhos = [spearmanr(report.totals["shapley"][1:], report.avg_schedulable).statistic]
    for seed in EXTRA_SEEDS:
        c = reference_config(master_seed=seed, allocation_methods=["shapley"])
        p = synthesize_profiles(c.customers, c.horizon, seed, c.steps_per_day)
        _, rep = run_horizon(c, p)
        positive.append(bool(np.all(rep.totals["shapley"][1:] > 0)))
        rhos.append(spearmanr(rep.totals["shapley"][1:], rep.avg_schedulable).statistic)
    elapsed = month_time + time.perf_counter() - t0
    checks = {
        "a": nu > sh,
        "b": 0.30 < sh < 0.95 and 0.30 < nu < 0.95,
        "c": sum(positive) >= 9,
        "d": rhos[0] > 0.5,
        "time": elapsed < 300,
    }
    ok = all(checks.values())
    acceptance_log("C5 directional reproduction", ok,
                   f"share shapley {sh:.3f} nucleolus {nu:.3f}, uplift shapley "
                   f"{report.uplift['shapley']:.3f} nucleolus {report.uplift['nucleolus']:.3f}, "
                   f"positive seeds {sum(positive)}/10, spearman {rhos[0]:.2f} "
                   f"(min over seeds {min(rhos):.2f}), {elapsed:.0f}s, "
                   f"failed {[k for k, v in checks.items() if not v]}")
    assert ok


def test_c6_efficiency(acceptance_log, month):
    _, _, results, _, _, _ = month
    worst = 0.0
    for r in results:
        scale = max(1.0, abs(r.grand_value))
        for a in r.allocations.values():
            worst = max(worst, abs(a.x.sum() - r.grand_value) / scale)
    ok = worst <= 1e-7 and len(results) == 1440
    acceptance_log("C6 efficiency over the month", ok, f"max relative gap {worst:.2e} over {len(results)} steps")
    assert ok


def test_c7_profit_distribution(acceptance_log, month):
    comp = month[4]
    summ = comp.summary()
    gains = {}
    for prefix in ("nodata_nodata", "data_nodata", "data_data"):
        d, se = comp.paired_difference(f"{prefix}_cr", f"{prefix}_mean")
        gains[prefix] = d / se
    narrower = {rule: summ[f"data_data_{rule}"]["within_std"] < summ[f"data_nodata_{rule}"]["within_std"]
                for rule in ("mean", "cr")}
    ok = all(z > 2 for z in gains.values()) and all(narrower.values())
    acceptance_log("C7 profit distribution by method", ok,
                   "cost-ratio gain in SE " + ", ".join(f"{k} {v:.1f}" for k, v in gains.items())
                   + "; within-timestep std data/nodata "
                   + ", ".join(f"{r} {summ[f'data_data_{r}']['within_std']:.4f}/"
                               f"{summ[f'data_nodata_{r}']['within_std']:.4f}" for r in ("mean", "cr")))
    assert ok


def test_c8_determinism(acceptance_log, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(dump_config(reference_config(horizon=96))))
    outs = []
    for name in ("run1", "run2"):
        out = tmp_path / name
        r = subprocess.run([sys.executable, "-m", "retailgame", "simulate", "--config", str(cfg),
                            "--synthetic", "--out", str(out), "--comparison-samples", "20",
                            "--dump-tables"], capture_output=True, text=True)
        assert r.returncode == 0, r.stderr
        outs.append(out)
    files = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*") if p.is_file())
    same = all((outs[0] / f).read_bytes() == (outs[1] / f).read_bytes() for f in files)
    ok = same and len(files) > 7
    acceptance_log("C8 determinism", ok, f"{len(files)} files byte-identical: {same}")
    assert ok
