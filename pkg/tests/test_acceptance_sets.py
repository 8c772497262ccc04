import numpy as np
import pytest

from riskcap import (
    CustomCone,
    ExpectationAcceptance,
    PositiveCone,
    TVaRAcceptance,
    VaRAcceptance,
    contains,
    in_closure,
    in_interior,
    linear_cone,
)
from riskcap.errors import AlphaOutOfRangeError, InputError, NonMonotonePredicateError, UnboundPositionError
from riskcap.oracle import random_space

BUILTINS = [VaRAcceptance(0.1), TVaRAcceptance(0.1), ExpectationAcceptance(0.0),
            ExpectationAcceptance(-0.5), PositiveCone(), VaRAcceptance(0.45), TVaRAcceptance(0.6)]


def test_contains_examples(three, three_b):
    assert contains(VaRAcceptance(0.1), three, three.position([-1, 0, 0]))
    assert contains(PositiveCone(), three, three.position([0, 0, 1]))
    assert not contains(PositiveCone(), three, three.position([-0.001, 1, 1]))
    assert contains(TVaRAcceptance(0.1), three_b, three_b.position([0, 0, 1]))


def test_interior_examples(three, three_b):
    assert in_interior(VaRAcceptance(0.1), three, three.position([-1, 1, 1]))
    assert not in_interior(PositiveCone(), three, three.position([0, 1, 1]))
    # tvar of (0, 1, 1) at 0.1 is -0.5: half the tail mass sits on the value 1
    assert in_interior(TVaRAcceptance(0.1), three_b, three_b.position([0, 1, 1]))
    assert not in_interior(TVaRAcceptance(0.1), three_b, three_b.position([0, 0, 1]))


def test_closure_examples(three):
    assert in_closure(PositiveCone(), three, three.zeros())
    half = CustomCone(lambda X: X.space.expectation(X) > 0, three, closed=False, conic=True, convex=True)
    boundary = three.zeros()
    assert not half.contains(boundary)
    assert half.in_closure(boundary)
    assert not half.in_closure(three.constant(-1.0))


def test_var_closure_equals_contains(rng):
    A = VaRAcceptance(0.1)
    for _ in range(1000):
        space = random_space(rng)
        X = space.position(rng.uniform(-2, 2, len(space)))
        assert A.in_closure(X) == A.contains(X)


def test_binding_and_validation(three, three_b):
    with pytest.raises(UnboundPositionError):
        contains(VaRAcceptance(0.1), three, three_b.zeros())
    with pytest.raises(AlphaOutOfRangeError):
        VaRAcceptance(1.0)
    with pytest.raises(AlphaOutOfRangeError):
        TVaRAcceptance(0.0)


def test_chain_interior_contains_closure(rng):
    for _ in range(2000):
        space = random_space(rng)
        X = space.position(rng.uniform(-2, 2, len(space)).round(rng.integers(0, 2)))
        for A in BUILTINS:
            if A.in_interior(X):
                assert A.contains(X)
            if A.contains(X):
                assert A.in_closure(X)


def test_monotone_on_random_pairs(rng):
    for _ in range(10_000):
        space = random_space(rng, int(rng.integers(2, 8)))
        x = rng.uniform(-2, 2, len(space)).round(1)
        X = space.position(x)
        Y = space.position(x + rng.uniform(0, 1, len(space)) * (rng.random(len(space)) < 0.5))
        for A in BUILTINS:
            if A.contains(X):
                assert A.contains(Y)


def test_large_constants_accepted_small_rejected(three):
    for A in BUILTINS:
        assert A.contains(three.constant(10.0))
        assert not A.contains(three.constant(-10.0))


def test_cone_property(rng):
    cones = [A for A in BUILTINS if A.conic]
    for _ in range(1000):
        space = random_space(rng)
        X = space.position(rng.uniform(-2, 2, len(space)))
        for A in cones:
            if A.contains(X):
                for lam in (0.5, 2.0, 10.0):
                    assert A.contains(lam * X)


def test_tvar_convex(rng):
    A = TVaRAcceptance(0.2)
    for _ in range(2000):
        space = random_space(rng)
        X = space.position(rng.uniform(-2, 2, len(space)))
        Y = space.position(rng.uniform(-2, 2, len(space)))
        if A.contains(X) and A.contains(Y):
            assert A.contains((X + Y) / 2)


def test_flags():
    assert VaRAcceptance(0.1).conic and not VaRAcceptance(0.1).convex
    assert TVaRAcceptance(0.1).coherent
    assert ExpectationAcceptance(0.0).conic and not ExpectationAcceptance(0.2).conic
    assert PositiveCone().coherent


def test_custom_cone_rejects_non_monotone(three):
    with pytest.raises(NonMonotonePredicateError):
        CustomCone(lambda X: X.values.sum() <= 0, three)


def test_custom_interior_probe(three):
    A = CustomCone(lambda X: bool(np.all(X.values >= 0)), three, closed=True, conic=True, convex=True)
    assert A.in_interior(three.constant(1e-7))
    assert not A.in_interior(three.position([0, 1, 1]))
    assert not A.in_closure(three.position([-1e-3, 1, 1]))


def test_linear_cone(three):
    A = linear_cone(three, [[1, 0, 0], [0, 0.5, 0.5]], floor=0.0)
    assert A.contains(three.position([0, 1, -1]))
    assert not A.contains(three.position([0, 1, -2]))
    assert A.describe()["weights"] == [[1, 0, 0], [0, 0.5, 0.5]]
    with pytest.raises(InputError):
        linear_cone(three, [[-1, 0, 0]])
    with pytest.raises(InputError):
        linear_cone(three, [[1, 0]])
    with pytest.raises(InputError):
        linear_cone(three, [[0, 0, 0]])
