"""Comparing two eligible assets with the same price.

Whether a capital requirement depends on the choice of eligible asset is a
universally quantified question over all positions. The functions here turn
it into budgeted refutation searches: a REFUTED verdict carries a witness
that has been re-evaluated with the capital solvers, while NOT_REFUTED only
means the search came up empty.

The searches exploit one structural fact. Fix an acceptable position ``X``
and a leverage ``lam``; if ``X + lam (S_T - R_T)`` is not in the closure of
the acceptance set, then ``X - lam R_T`` costs strictly more to fix with
``S`` than with ``R`` and ``X + lam S_T`` costs strictly less.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .acceptance import AcceptanceSet
from .capital import CapitalResult, required_capital
from .core import Position, TradedAsset
from .errors import NotFiniteError, PriceMismatchError, UnboundPositionError

#: Evaluated capital amounts must differ by more than this to count.
MARGIN = 1e-8
#: Structured leverage grid: plus and minus powers of ten.
LAMBDA_GRID = tuple(s * 10.0**k for k in range(-6, 7) for s in (1.0, -1.0))
DEFAULT_SEED = 42


@dataclass(frozen=True, eq=False)
class AssetPair:
    S: TradedAsset
    R: TradedAsset

    def __post_init__(self):
        if self.S.space != self.R.space:
            raise UnboundPositionError("the two assets live on different scenario spaces")
        if self.S.price != self.R.price:
            raise PriceMismatchError(f"asset prices differ: {self.S.price} vs {self.R.price}")

    @property
    def price(self) -> float:
        return self.S.price

    @property
    def space(self):
        return self.S.space

    @property
    def spread(self) -> Position:
        """Payoff ``R_T - S_T`` of the zero-cost long/short leg."""
        return self.R.payoff - self.S.payoff

    @property
    def identical(self) -> bool:
        return self.S == self.R


class Status(enum.Enum):
    REFUTED = "REFUTED"
    NOT_REFUTED = "NOT_REFUTED"


@dataclass(frozen=True, eq=False)
class Verdict:
    status: Status
    witness: dict | None = None
    trials: int = 0
    seed: int = DEFAULT_SEED

    @property
    def refuted(self) -> bool:
        return self.status is Status.REFUTED


@dataclass(frozen=True, eq=False)
class DominanceResult:
    status: Status
    witness_low: Position | None = None
    witness_high: Position | None = None
    capital_low: tuple[float, float] | None = None
    capital_high: tuple[float, float] | None = None
    trials: int = 0
    seed: int = DEFAULT_SEED
    equality: Verdict | None = None

    @property
    def refuted(self) -> bool:
        return self.status is Status.REFUTED


def leveraged_payoff(pair: AssetPair, m: float, lam: float) -> Position:
    """Payoff of investing ``m`` in ``S`` plus ``lam`` units of ``R - S``."""
    return (m / pair.price) * pair.S.payoff + lam * pair.spread


def portfolio_cost(pair: AssetPair, m: float, lam: float) -> float:
    """Time-zero cost of the portfolio behind :func:`leveraged_payoff`."""
    return (m / pair.price) * pair.S.price + lam * (pair.R.price - pair.S.price)


def _exceeds(a: float, b: float) -> bool:
    """``a > b + MARGIN`` on the extended reals (equal infinities do not count)."""
    if a == b:
        return False
    return a - b > MARGIN


def _lambdas(rng: np.random.Generator, budget: int) -> list[float]:
    draws = rng.choice([-1.0, 1.0], budget) * 10.0 ** rng.uniform(-6, 6, budget)
    return list(LAMBDA_GRID) + draws.tolist()


def _structural(pair: AssetPair) -> Iterator[Position]:
    space = pair.space
    for i in range(len(space)):
        e = space.indicator(i)
        yield e
        yield -e + 0.0
    for P in (pair.S.payoff, pair.R.payoff, space.constant(1.0)):
        yield P
        yield -P + 0.0


def _random(pair: AssetPair, rng: np.random.Generator, budget: int) -> Iterator[Position]:
    space = pair.space
    scale = max(pair.S.payoff.norm, pair.R.payoff.norm, 1.0)
    for _ in range(budget):
        x = rng.uniform(-2.0, 2.0, len(space)) * scale * rng.choice([0.1, 1.0, 10.0])
        x[rng.random(len(space)) < 0.2] = 0.0
        yield Position(space, x)


def _candidates(pair, rng, budget, extra: Iterable[Position]) -> Iterator[Position]:
    yield from extra
    yield from _structural(pair)
    yield from _random(pair, rng, budget)


# ------------------------------------------------------------ no leverage


def no_leverage_check(
    A: AcceptanceSet, pair: AssetPair, budget: int = 200, seed: int = DEFAULT_SEED
) -> Verdict:
    """Search for a nonzero leverage whose fully-leveraged payoff is acceptable.

    The baseline is the capital ``m0`` needed for the zero position with
    asset ``S``. REFUTED means some ``(m0 / P) S_T + lam (R_T - S_T)`` with
    ``lam != 0`` lies in the closure of ``A``.
    """
    pair.space.check(pair.S)
    m0 = required_capital(A, pair.S, pair.space.zeros()).value
    if not math.isfinite(m0):
        raise NotFiniteError(f"capital for the zero position is {m0}")
    if pair.identical or not np.any(pair.spread.values):
        return Verdict(Status.NOT_REFUTED, None, 0, seed)
    rng = np.random.default_rng(seed)
    trials = 0
    for lam in _lambdas(rng, budget):
        trials += 1
        Y = leveraged_payoff(pair, m0, lam)
        if A.in_closure(Y):
            return Verdict(Status.REFUTED, {"lambda": lam, "position": Y, "baseline": m0}, trials, seed)
    return Verdict(Status.NOT_REFUTED, None, trials, seed)


# --------------------------------------------------------------- equality


def _values(A, S, B, R, X) -> tuple[float, float]:
    return required_capital(A, S, X).value, required_capital(B, R, X).value


def equality_check(
    A: AcceptanceSet,
    B: AcceptanceSet,
    pair: AssetPair,
    budget: int = 200,
    seed: int = DEFAULT_SEED,
    *,
    candidates: Sequence[Position] = (),
) -> Verdict:
    """Search for a position where ``rho_{A,S}`` and ``rho_{B,R}`` differ.

    Each candidate ``X`` is screened two ways: closure membership of ``A``
    and ``B`` disagrees, or ``X`` is in the closure of ``A`` while a
    translate ``X + lam (R_T - S_T)`` is not. Screen hits, their natural
    derived positions and ``X`` itself are then evaluated with both capital
    requirements; a difference above ``MARGIN`` refutes equality.
    """
    rng = np.random.default_rng(seed)
    lambdas = _lambdas(rng, 0)
    spread = pair.spread
    moving = bool(np.any(spread.values))
    trials = 0
    for X in _candidates(pair, rng, budget, candidates):
        trials += 1
        derived = [("position", X, None)]
        in_a = A.in_closure(X)
        if in_a != B.in_closure(X):
            derived.append(("closure-mismatch", X, None))
        if in_a and moving:
            for lam in lambdas:
                W = X + lam * spread
                if not A.in_closure(W):
                    derived += [
                        ("translation-escape", W, lam),
                        ("translation-escape", X + lam * pair.R.payoff, lam),
                        ("translation-escape", X - lam * pair.S.payoff, lam),
                    ]
                    break
        for reason, Y, lam in derived:
            rs, rr = _values(A, pair.S, B, pair.R, Y)
            if _exceeds(rs, rr) or _exceeds(rr, rs):
                witness = {"reason": reason, "position": Y, "lambda": lam, "capital": (rs, rr)}
                return Verdict(Status.REFUTED, witness, trials, seed)
    return Verdict(Status.NOT_REFUTED, None, trials, seed)


# -------------------------------------------------------------- dominance


@dataclass
class _Search:
    A: AcceptanceSet
    pair: AssetPair
    low: tuple | None = None
    high: tuple | None = None
    cache: dict = field(default_factory=dict)

    def capital(self, X: Position) -> tuple[CapitalResult, CapitalResult]:
        key = X.values.tobytes()
        if key not in self.cache:
            self.cache[key] = (required_capital(self.A, self.pair.S, X), required_capital(self.A, self.pair.R, X))
        return self.cache[key]

    def offer(self, X: Position) -> tuple[CapitalResult, CapitalResult]:
        rs, rr = self.capital(X)
        if self.low is None and _exceeds(rr.value, rs.value):
            self.low = (X, rs.value, rr.value)
        if self.high is None and _exceeds(rs.value, rr.value):
            self.high = (X, rs.value, rr.value)
        return rs, rr

    @property
    def done(self) -> bool:
        return self.low is not None and self.high is not None

    def escape(self, X: Position, lam: float) -> None:
        """Try the pair of witnesses generated by an acceptable ``X`` and ``lam``."""
        W = X + lam * (self.pair.S.payoff - self.pair.R.payoff)
        if self.A.in_closure(W):
            return
        self.offer(X - lam * self.pair.R.payoff)
        self.offer(X + lam * self.pair.S.payoff)


def dominance_refute(
    A: AcceptanceSet,
    pair: AssetPair,
    budget: int = 200,
    seed: int = DEFAULT_SEED,
    *,
    candidates: Sequence[Position] = (),
) -> DominanceResult:
    """Look for positions where ``S`` is strictly cheaper and strictly dearer than ``R``.

    Finding both shows neither asset dominates the other. Candidates are
    tried in order: those supplied by the caller, state indicators and the
    payoffs with both signs, then ``budget`` random draws. Every acceptable
    position met along the way (the cheapest acceptable lift under either
    asset) seeds the leverage family from the module docstring, with the
    leverage taken from the structured grid and from the capital amounts
    themselves.
    """
    rng = np.random.default_rng(seed)
    lambdas = _lambdas(rng, 0)
    search = _Search(A, pair)
    P = pair.price
    trials = 0
    for Y in candidates:
        trials += 1
        search.offer(Y)
    for Y in _candidates(pair, rng, budget, ()):
        if search.done:
            break
        trials += 1
        rs, rr = search.offer(Y)
        if search.done:
            break
        if pair.identical:
            continue
        for res, sign in ((rs, -1.0), (rr, 1.0)):
            if not res.amount.is_finite or res.acceptable_position is None:
                continue
            X = res.acceptable_position
            m = res.value
            for lam in [sign * m / P * c for c in (1.0, 2.0, 4.0) if m != 0] + lambdas:
                search.escape(X, lam)
                if search.done:
                    break
            if search.done:
                break
    if search.done:
        return DominanceResult(
            Status.REFUTED,
            search.low[0],
            search.high[0],
            search.low[1:],
            search.high[1:],
            trials,
            seed,
        )
    equality = equality_check(A, A, pair, budget, seed, candidates=candidates)
    low = search.low or (None, None, None)
    high = search.high or (None, None, None)
    return DominanceResult(
        Status.NOT_REFUTED,
        low[0],
        high[0],
        low[1:] if low[0] is not None else None,
        high[1:] if high[0] is not None else None,
        trials,
        seed,
        equality,
    )
