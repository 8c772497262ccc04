import math

import numpy as np
import pytest

from riskcap import (
    Confidence,
    CustomCone,
    ExpectationAcceptance,
    Method,
    Position,
    PositiveCone,
    TradedAsset,
    TVaRAcceptance,
    VaRAcceptance,
    build_space,
    linear_cone,
    required_capital,
    risk_free,
    tvar,
    var,
)
from riskcap.capital import cone_bisect, expectation_closed_form, tvar_solve, var_interior_capital, var_sweep
from riskcap.errors import DegenerateAssetError, NonMonotonePredicateError, UnboundPositionError
from riskcap.oracle import GridSpec, oracle_capital, random_instance, random_position

KINDS = ("var", "tvar", "expectation", "positive-cone")


def test_required_capital_examples(three, bond, three_b, bond_b):
    A = VaRAcceptance(0.1)
    r = required_capital(A, bond, three.position([0, 0, 1]))
    assert r.value == -1.0 and r.amount.attained and r.method is Method.VAR_SWEEP
    for n in range(1, 65):
        assert required_capital(A, bond, three.position([-1 / n, 0, 1])).value == 0.0
    t = required_capital(TVaRAcceptance(0.1), bond_b, three_b.position([0, 0, 1]))
    assert t.value == pytest.approx(0.0, abs=1e-12) and t.method is Method.TVAR_BISECT


def test_var_sweep_examples(three, bond):
    assert var_sweep(three, bond, 0.1, three.position([0, 0, 1])).value == -1.0
    assert var_sweep(three, bond, 0.1, three.constant(-1.0)).value == 1.0
    S = TradedAsset(1.0, three.position([1, 0, 0]))
    assert var_sweep(three, S, 0.1, three.zeros()).amount.is_neg_inf


def test_var_sweep_pos_inf(three):
    S = TradedAsset(1.0, three.position([0, 0, 1]))
    assert var_sweep(three, S, 0.1, three.constant(-1.0)).amount.is_pos_inf


def test_var_sweep_acceptable_position_is_accepted(rng):
    for _ in range(500):
        inst = random_instance(rng, "var")
        r = required_capital(inst.acceptance, inst.asset, inst.position)
        if r.amount.is_finite:
            assert inst.acceptance.contains(r.acceptable_position)
            assert r.amount.confidence is Confidence.EXACT


def test_var_interior_capital(three, bond):
    X = three.position([0, 0, 1])
    assert var_interior_capital(three, bond, 0.1, X) == 0.0
    # limit from below equals the requirement where the map is continuous
    Y = three.constant(1.0)
    assert var_interior_capital(three, bond, 0.1, Y) == var_sweep(three, bond, 0.1, Y).value


def test_tvar_solve_examples(three_b, bond_b):
    r = tvar_solve(three_b, bond_b, 0.1, three_b.position([0, 0, 1]))
    assert r.value == pytest.approx(0.0, abs=1e-12)
    assert r.amount.confidence is Confidence.NUMERIC and r.amount.tolerance == 1e-10
    S = TradedAsset(1.0, three_b.position([0, 0, 1]))
    assert tvar_solve(three_b, S, 0.05, three_b.position([-1, -1, 0])).amount.is_pos_inf
    for c in (-3.0, 0.0, 2.5):
        got = tvar_solve(three_b, risk_free(three_b), 0.3, three_b.constant(c)).value
        assert got == pytest.approx(-c, abs=1e-12)


def test_tvar_plateau_finite(three_b):
    # zero-payoff mass 0.1 >= alpha, yet the tail on those states is harmless
    S = TradedAsset(1.0, three_b.position([0, 0, 1]))
    r = tvar_solve(three_b, S, 0.05, three_b.position([1, 2, -3]))
    assert r.amount.is_finite
    assert TVaRAcceptance(0.05).contains(r.acceptable_position)
    grid = GridSpec(-100, 100, 0.01, 5)
    assert r.value == pytest.approx(oracle_capital(TVaRAcceptance(0.05), S, three_b.position([1, 2, -3]), grid).value, abs=1e-6)


def test_tvar_degenerate_asset():
    space = build_space(["a", "b"], [0, 1])
    S = TradedAsset(1.0, space.position([1, 0]))
    with pytest.raises(DegenerateAssetError):
        tvar_solve(space, S, 0.1, space.zeros())


def test_expectation_examples(three_b, bond_b):
    r = expectation_closed_form(three_b, bond_b, 0.0, three_b.position([0, 0, 1]))
    assert r.value == pytest.approx(-18 / 19, abs=1e-15)
    X = three_b.position([0.3, -2, 1])
    assert expectation_closed_form(three_b, bond_b, three_b.expectation(X), X).value == pytest.approx(0.0, abs=1e-15)
    null = build_space(["a", "b"], [0, 1])
    S = TradedAsset(1.0, null.position([1, 0]))
    assert expectation_closed_form(null, S, 0.0, null.constant(-1.0)).amount.is_pos_inf
    assert expectation_closed_form(null, S, 0.0, null.constant(1.0)).amount.is_neg_inf


def test_positive_cone_examples(three, bond):
    assert cone_bisect(three, bond, PositiveCone(), three.constant(-1.0)).amount.is_pos_inf
    assert cone_bisect(three, bond, PositiveCone(), bond.payoff).value == -1.0
    rf = risk_free(three)
    X = three.position([0.3, -1.7, 2.0])
    assert cone_bisect(three, rf, PositiveCone(), X).value == pytest.approx(1.7, abs=1e-10)


def test_positive_cone_counts_null_states():
    space = build_space(["a", "b"], [0, 1])
    S = TradedAsset(1.0, space.position([0, 1]))
    assert required_capital(PositiveCone(), S, space.position([-1, 5])).amount.is_pos_inf


def test_cone_flags(three, bond):
    notes = cone_bisect(three, bond, PositiveCone(), three.zeros()).notes
    assert any("+inf" in n for n in notes)


def test_custom_cone_bisection(three, bond):
    A = linear_cone(three, [[0.3, 0.3, 0.4]])
    r = required_capital(A, bond, three.constant(-1.0))
    assert r.value == pytest.approx(1 / 0.7, abs=1e-9)
    assert r.amount.attained is True and r.method is Method.CONE_BISECT
    open_half = CustomCone(lambda X: X.space.expectation(X) > 0, three, closed=False, conic=True, convex=True)
    assert required_capital(open_half, bond, three.constant(-1.0)).amount.attained is None


def test_custom_cone_budget(three, bond):
    never = CustomCone(lambda X: False, three)
    r = cone_bisect(three, bond, never, three.zeros(), max_doublings=8)
    assert r.amount.is_pos_inf and r.amount.confidence is Confidence.BUDGET_EXHAUSTED
    always = CustomCone(lambda X: True, three)
    r = cone_bisect(three, bond, always, three.zeros(), max_doublings=8)
    assert r.amount.is_neg_inf and r.amount.confidence is Confidence.BUDGET_EXHAUSTED


def test_custom_cone_non_monotone_detected(three, bond):
    # accepts a band of amounts only; registration sampling is switched off
    band = CustomCone(lambda X: 0.5 <= X.values[2] <= 1.2, three, samples=0)
    with pytest.raises(NonMonotonePredicateError):
        required_capital(band, bond, three.zeros())


def test_unbound(three, three_b, bond):
    with pytest.raises(UnboundPositionError):
        required_capital(VaRAcceptance(0.1), bond, three_b.zeros())


def _same(a, b, tol):
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol


@pytest.mark.parametrize("kind", KINDS)
def test_s_additivity(kind, rng):
    for _ in range(150):
        inst = random_instance(rng, kind)
        S, X, A = inst.asset, inst.position, inst.acceptance
        base = required_capital(A, S, X).value
        for lam in (-2.0, -1.0, 0.5, 3.0):
            moved = required_capital(A, S, X + lam * S.payoff).value
            expected = base - lam * S.price if math.isfinite(base) else base
            assert _same(moved, expected, 1e-8), (kind, lam, moved, expected)


@pytest.mark.parametrize("kind", KINDS)
def test_monotone(kind, rng):
    for _ in range(150):
        inst = random_instance(rng, kind)
        A, S, X = inst.acceptance, inst.asset, inst.position
        Y = X + Position(inst.space, np.abs(random_position(rng, inst.space).values))
        assert required_capital(A, S, X).value >= required_capital(A, S, Y).value - 1e-10


def test_inclusion_chain(rng):
    for i in range(10_000):
        inst = random_instance(rng, KINDS[i % 4])
        A, S, X = inst.acceptance, inst.asset, inst.position
        rho = required_capital(A, S, X).value
        if A.in_interior(X):
            assert rho < 0
        if A.contains(X):
            assert rho <= 0
        if rho <= 0:
            assert A.in_closure(X)


def _bounded_away(rng, space):
    return TradedAsset(float(rng.uniform(0.5, 1.5)), space.position(rng.uniform(0.2, 1.5, len(space))))


def test_change_of_numeraire_var(rng):
    for _ in range(300):
        inst = random_instance(rng, "var")
        space, X = inst.space, inst.position
        S = _bounded_away(rng, space)
        alpha = inst.acceptance.alpha
        lhs = required_capital(inst.acceptance, S, X).value
        rhs = S.price * var(space, space.position(X.values / S.payoff.values), alpha)
        assert lhs == pytest.approx(rhs, abs=1e-8)


def test_change_of_numeraire_tvar(rng):
    for _ in range(100):
        inst = random_instance(rng, "tvar")
        space, X = inst.space, inst.position
        S = _bounded_away(rng, space)
        alpha = inst.acceptance.alpha
        st = S.payoff.values
        discounted = CustomCone(lambda Z: tvar(space, space.position(Z.values * st), alpha) <= 0, space,
                                closed=True, conic=True, convex=True, samples=16)
        lhs = required_capital(inst.acceptance, S, X).value
        rhs = S.price * required_capital(discounted, risk_free(space), space.position(X.values / st)).value
        assert lhs == pytest.approx(rhs, abs=1e-8)


@pytest.mark.parametrize("kind", KINDS)
def test_bounded_away_payoff_is_finite(kind, rng):
    for _ in range(200):
        inst = random_instance(rng, kind)
        S = _bounded_away(rng, inst.space)
        assert required_capital(inst.acceptance, S, inst.position).amount.is_finite


@pytest.mark.parametrize("kind", KINDS)
def test_agrees_with_oracle(kind, rng):
    grid = GridSpec(-1000.0, 1000.0, 0.1, 6)
    for _ in range(250):
        inst = random_instance(rng, kind)
        a = required_capital(inst.acceptance, inst.asset, inst.position).value
        b = oracle_capital(inst.acceptance, inst.asset, inst.position, grid).value
        assert _same(a, b, 1e-6), (kind, a, b)
