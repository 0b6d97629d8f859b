import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from retailgame.errors import DataError, InvalidInputError
from retailgame.game import (ANALYTICAL, ExpectationEngine, ValueTable, build_value_table,
                             coalition_value, dump_value_table, load_value_table, mask_of, members)
from retailgame.loads import CustomerLoadComponent, TimestepLoadSet, build_load_set, split_load
from retailgame.newsvendor import REFERENCE_PRICES as P, optimal_quantity, profit


def random_loads(seed, m):
    rng = np.random.default_rng(seed)
    comps = [split_load(rng.uniform(0.2, 3), rng.uniform(0.1, 0.9), 1.0, 0.5, customer_id=i)
             for i in range(1, m + 1)]
    return build_load_set(seed, comps, [c.mu_s + c.sigma_s * rng.standard_normal() for c in comps])


def test_mask_helpers():
    assert mask_of([0, 2]) == 0b101
    assert members(0b1011) == [0, 1, 3]
    with pytest.raises(InvalidInputError):
        mask_of([-1])


def test_no_retailer_is_zero():
    loads = random_loads(1, 3)
    assert coalition_value(mask_of([1, 2]), loads, P) == 0.0


def test_retailer_alone_is_zero():
    assert coalition_value(1, random_loads(2, 3), P) == 0.0


def test_single_customer_quadrature():
    c = CustomerLoadComponent(1, mu_s=1.0, sigma_s=1.0, mu_u=1.0, sigma_u=0.5)
    loads = build_load_set(0, [c], [1.0])
    mean, sd = 2.0, 0.5
    q_base = 2.0 + 0.7363159173761295 * math.sqrt(1.25)
    q_new = 2.0 + 0.7363159173761295 * 0.5

    def expect(q):
        f = lambda d: profit(q, d, P) * stats.norm.pdf(d, mean, sd)
        return integrate.quad(f, mean - 12 * sd, mean + 12 * sd, points=[q], epsabs=1e-14, limit=200)[0]

    oracle = expect(q_new) - expect(q_base)
    assert oracle > 0
    assert coalition_value(0b11, loads, P) == pytest.approx(oracle, abs=1e-10)


def test_zero_customers():
    t = build_value_table(TimestepLoadSet(0, (), ()), P)
    assert t.player_count == 1 and list(t.values) == [0.0, 0.0]


def test_two_customers_shape():
    t = build_value_table(random_loads(3, 2), P)
    assert t.values.size == 8
    assert np.all(t.values[0::2] == 0.0)


@pytest.mark.parametrize("seed", range(4))
def test_table_matches_direct_evaluation(seed):
    loads = random_loads(seed, 4)
    t = build_value_table(loads, P)
    for mask in range(1 << 5):
        assert t[mask] == pytest.approx(coalition_value(mask, loads, P), abs=1e-13)


def test_anonymity_swap():
    a = CustomerLoadComponent(1, 1.0, 1.0, 1.0, 0.5)
    b = CustomerLoadComponent(2, 1.0, 1.0, 1.0, 0.5)
    c = CustomerLoadComponent(3, 0.4, 0.4, 2.0, 1.0)
    t = build_value_table(build_load_set(0, [a, b, c], [1.3, 1.3, 0.1]), P)
    swap = lambda m: (m & ~0b110) | ((m >> 1) & 1) << 2 | ((m >> 2) & 1) << 1
    for m in range(16):
        assert t[m] == t[swap(m)]


def test_monotonicity_diagnostic():
    # Build loads until a non-monotone table appears, and check the count against a direct scan.
    found = False
    for seed in range(200):
        t = build_value_table(random_loads(seed, 3), P)
        direct = sum(1 for m in range(16) for i in range(4)
                     if not m >> i & 1 and t[m | 1 << i] < t[m] - 1e-12)
        assert t.monotonicity_violations == direct
        found |= direct > 0
    assert found


def test_mc_engine_retailer_alone_zero_and_close():
    loads = random_loads(7, 3)
    eng = ExpectationEngine("monte_carlo", 20000, seed=11)
    t = build_value_table(loads, P, eng)
    exact = build_value_table(loads, P)
    assert t[1] == 0.0
    assert np.allclose(t.values, exact.values, atol=0.05 * max(1e-3, abs(exact.grand_value)) + 5e-3)
    assert np.array_equal(t.values, build_value_table(loads, P, eng).values)


def test_engine_validation():
    with pytest.raises(InvalidInputError):
        ExpectationEngine("nope")
    with pytest.raises(InvalidInputError):
        ExpectationEngine("monte_carlo", 1)


def test_table_validation():
    with pytest.raises(InvalidInputError):
        ValueTable(np.zeros(3), 2)
    with pytest.raises(InvalidInputError):
        ValueTable(np.array([0, 0, 1.0, 0]), 2)
    with pytest.raises(InvalidInputError):
        ValueTable(np.array([0, np.nan]), 1)


def test_full_disclosure_required():
    c = split_load(1.0, 0.5, 1.0, 0.5, customer_id=1)
    with pytest.raises(InvalidInputError):
        build_value_table(TimestepLoadSet(0, (c,), ()), P)


@given(st.integers(0, 10_000), st.integers(1, 5))
@settings(max_examples=30)
def test_csv_round_trip(seed, m):
    t = build_value_table(random_loads(seed, m), P)
    back = load_value_table(dump_value_table(t))
    assert np.array_equal(back.values, t.values) and back.player_count == t.player_count


@pytest.mark.parametrize("text", [
    "",
    "mask,members,value\n",
    "mask,members,value\n0,,0\n1,0,1\n2,1,0\n",
    "mask,members,value\n0,,0\n0,,0\n",
    "mask,members,value\n0,,0\n1,1,3\n",
    "mask,members,value\n0,,0\n1,0,abc\n",
    "mask,members,value\n0,,1\n1,0,3\n",
])
def test_bad_csv(text):
    with pytest.raises(DataError):
        load_value_table(text)
