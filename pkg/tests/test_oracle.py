"""The brute-force oracles against hand-derived values.

These expectations were fixed by hand before the solvers existed; the
solvers are checked against the oracles elsewhere.
"""

import math

import numpy as np
import pytest

from riskcap import (
    ExpectationAcceptance,
    PositiveCone,
    TVaRAcceptance,
    VaRAcceptance,
    build_space,
    linear_cone,
)
from riskcap.errors import DegenerateGridError
from riskcap.oracle import GridSpec, oracle_capital, oracle_tvar, random_instance, random_space
from riskcap.quantile import tvar

GRID = GridSpec(-100.0, 100.0, 0.01, 4)


def test_grid_validation():
    with pytest.raises(DegenerateGridError):
        GridSpec(1.0, 1.0, 0.1, 2)
    with pytest.raises(DegenerateGridError):
        GridSpec(0.0, 1.0, 0.0, 2)
    with pytest.raises(DegenerateGridError):
        GridSpec(0.0, 1.0, 0.1, 0)
    with pytest.raises(DegenerateGridError):
        GridSpec(0.0, math.inf, 0.1, 1)
    assert GridSpec(0.0, 1.0, 0.1, 3).final_step == pytest.approx(1e-4)


def test_oracle_var_fixture(three, bond):
    got = oracle_capital(VaRAcceptance(0.1), bond, three.position([0, 0, 1]), GRID)
    assert got.value == pytest.approx(-1.0, abs=1e-6)
    assert got.tolerance == pytest.approx(1e-6)


def test_oracle_positive_cone_infinite(three, bond):
    got = oracle_capital(PositiveCone(), bond, three.constant(-1.0), GRID)
    assert got.is_pos_inf


def test_oracle_expectation_fixture(three_b, bond_b):
    got = oracle_capital(ExpectationAcceptance(0.0), bond_b, three_b.position([0, 0, 1]), GRID)
    assert got.value == pytest.approx(-18 / 19, abs=1e-6)


def test_oracle_negative_infinity(three):
    from riskcap import TradedAsset

    S = TradedAsset(1.0, three.position([1, 0, 0]))
    assert oracle_capital(VaRAcceptance(0.1), S, three.zeros(), GRID).is_neg_inf


def test_oracle_finds_bracket_below_grid(three, cash):
    # true value 500 lies above the grid; -500 lies below it
    small = GridSpec(-100.0, 100.0, 1.0, 3)
    assert oracle_capital(PositiveCone(), cash, three.constant(-500.0), small).is_pos_inf
    got = oracle_capital(PositiveCone(), cash, three.constant(500.0), small)
    assert got.value == pytest.approx(-500.0, abs=1e-2)


def test_oracle_custom_predicate(three, bond):
    A = linear_cone(three, [[0.3, 0.3, 0.4]])
    got = oracle_capital(A, bond, three.constant(-1.0), GRID)
    assert got.value == pytest.approx(1 / 0.7, abs=1e-6)


@pytest.mark.parametrize(
    "x, expected",
    [([0, 0, 1], 0.0), ([-1, 0, 1], 0.5), ([3, 3, 3], -3.0), ([-2, -2, -2], 2.0)],
)
def test_oracle_tvar_values(three_b, x, expected):
    assert oracle_tvar(three_b, three_b.position(x), 0.1) == pytest.approx(expected, abs=1e-15)


def test_oracle_tvar_matches_segment_integral(rng):
    for _ in range(10_000):
        space = random_space(rng)
        X = space.position(rng.uniform(-3, 3, len(space)).round(rng.integers(0, 3)))
        alpha = float(rng.uniform(0.01, 0.99))
        assert abs(oracle_tvar(space, X, alpha) - tvar(space, X, alpha)) <= 1e-12


def test_oracle_monotone_in_acceptance_set(rng):
    # the positive cone sits inside the VaR set, so its requirement is larger
    for _ in range(100):
        inst = random_instance(rng, "var")
        small = oracle_capital(PositiveCone(), inst.asset, inst.position, GRID).value
        large = oracle_capital(inst.acceptance, inst.asset, inst.position, GRID).value
        assert large <= small + 1e-9


def test_random_instances_are_valid(rng):
    for kind in ("var", "tvar", "expectation", "positive-cone"):
        for _ in range(50):
            inst = random_instance(rng, kind)
            space = inst.space
            assert 2 <= len(space) <= 16
            assert np.all(np.isclose(space.p * 100, np.round(space.p * 100)))
            assert np.any(inst.asset.payoff.values[space.charged] > 0)
            assert 0.5 <= inst.asset.price <= 1.5
            if kind == "expectation":
                assert space.expectation(inst.asset.payoff) >= 0.05
    with pytest.raises(ValueError):
        random_instance(rng, "nope")


def test_single_state_space():
    space = build_space(["only"], [1])
    from riskcap import risk_free

    got = oracle_capital(TVaRAcceptance(0.5), risk_free(space), space.constant(2.0), GRID)
    assert got.value == pytest.approx(-2.0, abs=1e-6)
