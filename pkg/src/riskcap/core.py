"""Scenario spaces, positions, traded assets and extended-real amounts.

All objects here are immutable. Positions carry a reference to the scenario
space they were built on; mixing positions from different spaces raises
:class:`~riskcap.errors.UnboundPositionError`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AlphaOutOfRangeError,
    DuplicateLabelError,
    EmptySpaceError,
    InputError,
    LengthMismatchError,
    NegativePayoffError,
    NegativeProbabilityError,
    NonFiniteValueError,
    NonPositivePriceError,
    ProbabilitySumMismatchError,
    UnboundPositionError,
    ZeroPayoffError,
)

#: Admissible deviation of the input probabilities from summing to one.
PROB_SUM_TOL = Fraction(1, 10**12)
#: Absolute tolerance used whenever a probability is compared with a level.
PROB_TOL = 1e-12


def _exact(value, what: str) -> Fraction:
    """Parse a number or decimal string without rounding."""
    try:
        if isinstance(value, str):
            return Fraction(value.strip())
        if isinstance(value, bool):
            raise TypeError
        return Fraction(value)
    except (ValueError, TypeError, OverflowError, ZeroDivisionError):
        raise InputError(f"{what}: cannot parse {value!r} as a finite number") from None


def parse_real(value, what: str = "value") -> float:
    """Parse a float or decimal string; reject NaN and infinities."""
    return float(_exact(value, what))


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise AlphaOutOfRangeError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    return alpha


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ScenarioSpace:
    """Finite set of states with a probability vector.

    Zero-probability states are allowed. They count for pointwise notions
    (sup-norm, the positive cone) but never for probabilities.
    ``renormalization`` records ``sum(input probs) - 1`` before rescaling.
    """

    states: tuple[str, ...]
    probs: tuple[float, ...]
    renormalization: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if not self.states:
            raise EmptySpaceError("a scenario space needs at least one state")
        if len(self.states) != len(self.probs):
            raise LengthMismatchError("one probability per state is required")
        if len(set(self.states)) != len(self.states):
            raise DuplicateLabelError("state labels must be unique")
        if any(not math.isfinite(p) or p < 0 for p in self.probs):
            raise NegativeProbabilityError("probabilities must be finite and nonnegative")
        if math.fsum(self.probs) != 1.0:
            raise ProbabilitySumMismatchError("probabilities must sum to one; use build_space")

    def __len__(self) -> int:
        return len(self.states)

    @cached_property
    def p(self) -> np.ndarray:
        return _readonly(np.array(self.probs, dtype=float))

    @cached_property
    def charged(self) -> np.ndarray:
        """Mask of states with strictly positive probability."""
        return _readonly(self.p > 0)

    def index(self, label: str) -> int:
        try:
            return self.states.index(label)
        except ValueError:
            raise InputError(f"unknown state {label!r}") from None

    def prob(self, mask) -> float:
        """Probability of the event given as a boolean mask over states."""
        mask = np.asarray(mask, dtype=bool)
        return math.fsum(self.p[mask])

    def expectation(self, X: Position) -> float:
        self.check(X)
        return math.fsum(self.p * X.values)

    def check(self, *items) -> None:
        """Raise unless every position / asset lives on this space."""
        for item in items:
            space = item.space
            if space is not self and space != self:
                raise UnboundPositionError("object is bound to a different scenario space")

    # convenience constructors
    def position(self, values: Iterable[float]) -> Position:
        return Position(self, values)

    def constant(self, c: float) -> Position:
        return Position(self, np.full(len(self), float(c)))

    def zeros(self) -> Position:
        return self.constant(0.0)

    def indicator(self, *which: str | int) -> Position:
        v = np.zeros(len(self))
        for w in which:
            v[w if isinstance(w, (int, np.integer)) else self.index(w)] = 1.0
        return Position(self, v)


def build_space(labels: Sequence, probs: Sequence) -> ScenarioSpace:
    """Validate and renormalize a scenario table.

    Probabilities may be floats, ints or decimal strings. Their exact sum must
    be within 1e-12 of one; they are then rescaled exactly, rounded, and the
    largest entry absorbs the remaining rounding so that ``math.fsum`` of the
    stored probabilities is exactly 1.
    """
    labels = [str(s) for s in labels]
    probs = list(probs)
    if not labels or not probs:
        raise EmptySpaceError("a scenario space needs at least one state")
    if len(labels) != len(probs):
        raise LengthMismatchError(f"{len(labels)} labels but {len(probs)} probabilities")
    if len(set(labels)) != len(labels):
        dup = sorted({s for s in labels if labels.count(s) > 1})
        raise DuplicateLabelError(f"duplicate state labels: {dup}")
    exact = [_exact(p, f"probability of {s!r}") for s, p in zip(labels, probs)]
    for s, q in zip(labels, exact):
        if q < 0:
            raise NegativeProbabilityError(f"probability of {s!r} is negative ({float(q)})")
    total = sum(exact, Fraction(0))
    if abs(total - 1) > PROB_SUM_TOL:
        raise ProbabilitySumMismatchError(f"probabilities sum to {float(total)!r}, not 1")
    p = np.array([float(q / total) for q in exact])
    for _ in range(8):
        residual = 1.0 - math.fsum(p)
        if residual == 0.0:
            break
        i = int(np.argmax(p))
        p[i] += residual
    return ScenarioSpace(tuple(labels), tuple(float(x) for x in p), float(total - 1))


@dataclass(frozen=True, eq=False)
class Position:
    """A payoff at time T: one finite real per state of ``space``."""

    space: ScenarioSpace
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.shape[0] != len(self.space):
            raise LengthMismatchError(f"expected {len(self.space)} values, got {v.shape[0]}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteValueError("position values must be finite")
        object.__setattr__(self, "values", _readonly(v))

    def _other(self, other) -> np.ndarray | float:
        if isinstance(other, Position):
            self.space.check(other)
            return other.values
        if isinstance(other, (int, float, np.floating, np.integer)):
            return float(other)
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return Position(self.space, self.values + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return Position(self.space, self.values - o)

    def __rsub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return Position(self.space, o - self.values)

    def __neg__(self):
        return Position(self.space, -self.values)

    def __mul__(self, k):
        if isinstance(k, (int, float, np.floating, np.integer)):
            return Position(self.space, self.values * float(k))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, k):
        if isinstance(k, (int, float, np.floating, np.integer)):
            return Position(self.space, self.values / float(k))
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, Position):
            return NotImplemented
        return self.space == other.space and bool(np.array_equal(self.values, other.values))

    __hash__ = None

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, key):
        if isinstance(key, str):
            key = self.space.index(key)
        return float(self.values[key])

    def __repr__(self) -> str:
        return f"Position({self.values.tolist()})"

    def tolist(self) -> list[float]:
        return self.values.tolist()

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.space.states, self.values.tolist()))

    def dominates(self, other: Position) -> bool:
        """True if ``self >= other`` in every state."""
        self.space.check(other)
        return bool(np.all(self.values >= other.values))

    @property
    def norm(self) -> float:
        return sup_norm(self)


def sup_norm(X: Position) -> float:
    """Maximum of |X| over all states, null states included."""
    return float(np.max(np.abs(X.values)))


@dataclass(frozen=True, eq=False)
class TradedAsset:
    """Eligible asset: a price today and a nonnegative, nonzero payoff."""

    price: float
    payoff: Position

    def __post_init__(self):
        price = float(self.price)
        if not math.isfinite(price) or price <= 0:
            raise NonPositivePriceError(f"asset price must be positive, got {self.price}")
        object.__setattr__(self, "price", price)
        if np.any(self.payoff.values < 0):
            raise NegativePayoffError("asset payoff must be nonnegative in every state")
        if not np.any(self.payoff.values > 0):
            raise ZeroPayoffError("asset payoff must be nonzero")

    @property
    def space(self) -> ScenarioSpace:
        return self.payoff.space

    @property
    def defaultable(self) -> bool:
        """True if the payoff vanishes on some state of positive probability."""
        st = self.payoff.values[self.space.charged]
        return bool(st.size == 0 or st.min() == 0.0)

    def __eq__(self, other):
        if not isinstance(other, TradedAsset):
            return NotImplemented
        return self.price == other.price and self.payoff == other.payoff

    __hash__ = None

    def __repr__(self) -> str:
        return f"TradedAsset(price={self.price}, payoff={self.payoff.tolist()})"


def build_asset(price, payoff: Position) -> TradedAsset:
    return TradedAsset(parse_real(price, "asset price"), payoff)


def risk_free(space: ScenarioSpace, price: float = 1.0) -> TradedAsset:
    """Bond paying one unit in every state."""
    return TradedAsset(price, space.constant(1.0))


class Confidence(enum.Enum):
    EXACT = "exact"
    NUMERIC = "numeric"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass(frozen=True)
class ExtendedAmount:
    """A value in the extended real line plus how it was obtained.

    ``attained`` is ``None`` when attainment of the infimum is unknown.
    Only comparisons are defined; arithmetic on infinities is left to callers.
    """

    value: float
    attained: bool | None = None
    confidence: Confidence = Confidence.EXACT
    tolerance: float | None = None

    def __post_init__(self):
        v = float(self.value)
        if math.isnan(v):
            raise ValueError("ExtendedAmount cannot be NaN")
        object.__setattr__(self, "value", v + 0.0)
        if math.isinf(v) and self.attained:
            raise ValueError("an infinite amount cannot be attained")
        if self.confidence is Confidence.NUMERIC and not (self.tolerance and self.tolerance > 0):
            raise ValueError("numeric confidence needs a positive tolerance")

    @classmethod
    def pos_inf(cls, confidence: Confidence = Confidence.EXACT, tolerance: float | None = None) -> ExtendedAmount:
        return cls(math.inf, False, confidence, tolerance)

    @classmethod
    def neg_inf(cls, confidence: Confidence = Confidence.EXACT, tolerance: float | None = None) -> ExtendedAmount:
        return cls(-math.inf, False, confidence, tolerance)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    @property
    def is_pos_inf(self) -> bool:
        return self.value == math.inf

    @property
    def is_neg_inf(self) -> bool:
        return self.value == -math.inf

    def __float__(self) -> float:
        return self.value

    @staticmethod
    def _v(other) -> float:
        return other.value if isinstance(other, ExtendedAmount) else float(other)

    def __lt__(self, other):
        return self.value < self._v(other)

    def __le__(self, other):
        return self.value <= self._v(other)

    def __gt__(self, other):
        return self.value > self._v(other)

    def __ge__(self, other):
        return self.value >= self._v(other)

    def __str__(self) -> str:
        if self.is_pos_inf:
            return "+inf"
        if self.is_neg_inf:
            return "-inf"
        return repr(self.value)
