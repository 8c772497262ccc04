"""Acceptance sets: membership, interior and closure tests.

Built-in sets (VaR, TVaR, expectation floor, positive cone) are closed and
have exact interior descriptions. :class:`CustomCone` wraps an arbitrary
monotone predicate; its interior and closure tests probe along the constant
direction and are one-sided.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import PROB_TOL, Position, ScenarioSpace, check_alpha, parse_real
from .errors import InputError, NonMonotonePredicateError
from .quantile import tvar, var

#: Shifts tried by the epsilon probes of CustomCone, largest first.
EPS_GRID = tuple(10.0**-k for k in range(0, 9))


class AcceptanceSet(abc.ABC):
    """A monotone, nonempty, proper set of positions."""

    kind: str = "abstract"

    closed: bool = True
    conic: bool = False
    convex: bool = False

    @property
    def coherent(self) -> bool:
        return self.conic and self.convex

    @abc.abstractmethod
    def contains(self, X: Position) -> bool: ...

    @abc.abstractmethod
    def in_interior(self, X: Position) -> bool: ...

    def in_closure(self, X: Position) -> bool:
        return self.contains(X)

    def describe(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class VaRAcceptance(AcceptanceSet):
    """Positions whose probability of a strict loss is at most ``alpha``."""

    alpha: float
    kind = "var"
    conic = True

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_alpha(self.alpha))

    def contains(self, X: Position) -> bool:
        return X.space.prob(X.values < 0) <= self.alpha + PROB_TOL

    def in_interior(self, X: Position) -> bool:
        return var(X.space, X, self.alpha) < 0

    def describe(self) -> dict:
        return {"kind": self.kind, "alpha": self.alpha}


@dataclass(frozen=True)
class TVaRAcceptance(AcceptanceSet):
    alpha: float
    kind = "tvar"
    conic = True
    convex = True

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_alpha(self.alpha))

    def contains(self, X: Position) -> bool:
        return tvar(X.space, X, self.alpha) <= 0

    def in_interior(self, X: Position) -> bool:
        return tvar(X.space, X, self.alpha) < 0

    def describe(self) -> dict:
        return {"kind": self.kind, "alpha": self.alpha}


@dataclass(frozen=True)
class ExpectationAcceptance(AcceptanceSet):
    """Positions with expected value at least ``floor``."""

    floor: float = 0.0
    kind = "expectation"
    convex = True

    def __post_init__(self):
        object.__setattr__(self, "floor", parse_real(self.floor, "floor"))

    @property
    def conic(self) -> bool:  # type: ignore[override]
        return self.floor == 0.0

    def contains(self, X: Position) -> bool:
        return X.space.expectation(X) >= self.floor

    def in_interior(self, X: Position) -> bool:
        return X.space.expectation(X) > self.floor

    def describe(self) -> dict:
        return {"kind": self.kind, "floor": self.floor}


@dataclass(frozen=True)
class PositiveCone(AcceptanceSet):
    """Pointwise nonnegative positions, null states included."""

    kind = "positive-cone"
    conic = True
    convex = True

    def contains(self, X: Position) -> bool:
        return bool(np.min(X.values) >= 0)

    def in_interior(self, X: Position) -> bool:
        return bool(np.min(X.values) > 0)


@dataclass(frozen=True, eq=False)
class CustomCone(AcceptanceSet):
    """Acceptance set given by a user predicate.

    The predicate must be pure and monotone. Monotonicity is probed at
    construction on ``samples`` random ordered pairs drawn on ``space``; a
    counterexample raises :class:`NonMonotonePredicateError`. The declared
    flags are trusted as given.
    """

    predicate: Callable[[Position], bool]
    space: ScenarioSpace
    closed: bool = False
    conic: bool = False
    convex: bool = False
    name: str = "custom"
    samples: int = 256
    seed: int = 0
    kind = "custom"
    _meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        rng = np.random.default_rng(self.seed)
        n = len(self.space)
        for i in range(self.samples):
            scale = (0.1, 1.0, 10.0)[i % 3]
            x = rng.uniform(-scale, scale, n)
            bump = rng.uniform(0, scale, n) * (rng.random(n) < 0.5)
            X = Position(self.space, x)
            Y = Position(self.space, x + bump)
            if self.predicate(X) and not self.predicate(Y):
                raise NonMonotonePredicateError(
                    f"predicate {self.name!r} accepts {X.tolist()} but rejects the larger {Y.tolist()}"
                )

    def contains(self, X: Position) -> bool:
        self.space.check(X)
        return bool(self.predicate(X))

    def in_interior(self, X: Position) -> bool:
        # One-sided: True proves interiority, False only means not detected.
        return any(self.contains(X - eps) for eps in EPS_GRID)

    def in_closure(self, X: Position) -> bool:
        # X is in the closure iff X + eps is accepted for every eps > 0; by
        # monotonicity the smallest probed shift is the binding one.
        if self.contains(X):
            return True
        if self.closed:
            return False
        return all(self.contains(X + eps) for eps in EPS_GRID)

    def describe(self) -> dict:
        d = {"kind": self.kind, "name": self.name, "closed": self.closed,
             "conic": self.conic, "convex": self.convex}
        d.update(self._meta)
        return d


def linear_cone(space: ScenarioSpace, weights: Sequence[Sequence[float]], floor: float = 0.0) -> CustomCone:
    """Intersection of half-spaces ``sum_w w(s) X(s) >= floor`` over the given weight vectors.

    Weights must be nonnegative so the set is monotone.
    """
    W = np.atleast_2d(np.asarray(weights, dtype=float))
    if W.shape[1] != len(space):
        raise InputError(f"each weight vector needs {len(space)} entries, got {W.shape[1]}")
    if np.any(W < 0) or not np.all(np.isfinite(W)):
        raise InputError("weights must be finite and nonnegative")
    if np.any(W.sum(axis=1) == 0):
        raise InputError("a weight vector is identically zero")
    floor = parse_real(floor, "floor")

    def predicate(X: Position) -> bool:
        return bool(np.all(W @ X.values >= floor))

    return CustomCone(predicate, space, closed=True, conic=floor == 0.0, convex=True,
                      name="linear", _meta={"weights": W.tolist(), "floor": floor})


def _bound(space: ScenarioSpace, X: Position) -> None:
    space.check(X)


def contains(A: AcceptanceSet, space: ScenarioSpace, X: Position) -> bool:
    _bound(space, X)
    return A.contains(X)


def in_interior(A: AcceptanceSet, space: ScenarioSpace, X: Position) -> bool:
    _bound(space, X)
    return A.in_interior(X)


def in_closure(A: AcceptanceSet, space: ScenarioSpace, X: Position) -> bool:
    _bound(space, X)
    return A.in_closure(X)
