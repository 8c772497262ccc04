"""Capital requirements with respect to a general eligible asset.

``required_capital(A, S, X)`` is the infimum of the amounts ``m`` such that
investing ``m`` in the asset ``S`` (that is, adding ``(m / S.price) * S.payoff``
to ``X``) lands in the acceptance set ``A``. The value may be ``+inf`` (no
amount suffices) or ``-inf`` (capital can be extracted without limit).

VaR and expectation sets are solved exactly. TVaR is solved by bisection on
a convex, nonincreasing function followed by an exact step on the final
linear piece. Other sets go through a generic bracket-and-bisect search on
the membership predicate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .acceptance import (
    AcceptanceSet,
    ExpectationAcceptance,
    PositiveCone,
    TVaRAcceptance,
    VaRAcceptance,
)
from .core import (
    PROB_TOL,
    Confidence,
    ExtendedAmount,
    Position,
    ScenarioSpace,
    TradedAsset,
    check_alpha,
    parse_real,
)
from .errors import DegenerateAssetError, NonMonotonePredicateError
from .quantile import tvar_array

BISECT_TOL = 1e-10
MAX_DOUBLINGS = 64


class Method(enum.Enum):
    VAR_SWEEP = "VAR_SWEEP"
    TVAR_BISECT = "TVAR_BISECT"
    EXPECTATION_CLOSED = "EXPECTATION_CLOSED"
    CONE_BISECT = "CONE_BISECT"


@dataclass(frozen=True, eq=False)
class CapitalResult:
    amount: ExtendedAmount
    method: Method
    acceptable_position: Position | None = None
    notes: tuple[str, ...] = ()

    @property
    def value(self) -> float:
        return self.amount.value


def lift(X: Position, S: TradedAsset, m: float) -> Position:
    """The position after investing ``m`` in ``S``."""
    return X + (m / S.price) * S.payoff


def _infinite(sign: int, method: Method, confidence=Confidence.EXACT, notes=()) -> CapitalResult:
    amount = ExtendedAmount.pos_inf(confidence) if sign > 0 else ExtendedAmount.neg_inf(confidence)
    return CapitalResult(amount, method, None, tuple(notes))


# --------------------------------------------------------------------- VaR


def _sweep(p_stuck: float, thresholds: np.ndarray, weights: np.ndarray, alpha: float) -> float:
    """Smallest threshold ``t`` with ``p_stuck + P[threshold > t] <= alpha``.

    Caller guarantees ``p_stuck <= alpha`` so the largest threshold qualifies.
    """
    u, inverse = np.unique(thresholds, return_inverse=True)
    mass = np.bincount(inverse, weights=weights)
    above = np.concatenate((np.cumsum(mass[::-1])[::-1][1:], [0.0]))
    ok = p_stuck + above <= alpha + PROB_TOL
    return float(u[int(np.argmax(ok))]) + 0.0


def _var_parts(space: ScenarioSpace, S: TradedAsset, X: Position):
    charged = space.charged
    st = S.payoff.values
    x = X.values
    stuck = charged & (st == 0)
    reach = charged & (st > 0)
    thresholds = -S.price * x[reach] / st[reach]
    return stuck, reach, thresholds


def var_sweep(space: ScenarioSpace, S: TradedAsset, alpha: float, X: Position) -> CapitalResult:
    """Exact capital requirement for the VaR acceptance set at level ``alpha``.

    A state where the asset pays nothing stays a loss state whatever is
    invested; any other state stops being a loss once ``m`` passes its
    threshold ``-S0 X / S_T``. The answer is the first threshold at which the
    remaining loss probability drops to ``alpha``.
    """
    alpha = check_alpha(alpha)
    space.check(S, X)
    stuck, reach, thresholds = _var_parts(space, S, X)
    p_stuck = space.prob(stuck & (X.values < 0))
    p_reach = space.prob(reach)
    if p_stuck > alpha + PROB_TOL:
        return _infinite(+1, Method.VAR_SWEEP)
    if p_stuck + p_reach <= alpha + PROB_TOL:
        return _infinite(-1, Method.VAR_SWEEP)
    m = _sweep(p_stuck, thresholds, space.p[reach], alpha)
    y = X.values + (m / S.price) * S.payoff.values
    covered = reach.copy()
    covered[reach] = thresholds <= m
    # a covered state sits at or above zero; drop the rounding residue
    y[covered] = np.maximum(y[covered], 0.0)
    return CapitalResult(ExtendedAmount(m, True), Method.VAR_SWEEP, Position(space, y))


def var_interior_capital(space: ScenarioSpace, S: TradedAsset, alpha: float, X: Position) -> float:
    """Capital requirement for the interior of the VaR set (never attained).

    On a finite space this is the limit of ``var_sweep`` along
    ``X - eps * 1`` as ``eps`` decreases to zero, so the difference with
    ``var_sweep`` at ``X`` is the jump of the capital requirement from below.
    """
    alpha = check_alpha(alpha)
    space.check(S, X)
    stuck, reach, thresholds = _var_parts(space, S, X)
    p_stuck = space.prob(stuck & (X.values <= 0))
    if p_stuck > alpha + PROB_TOL:
        return math.inf
    if p_stuck + space.prob(reach) <= alpha + PROB_TOL:
        return -math.inf
    return _sweep(p_stuck, thresholds, space.p[reach], alpha)


# -------------------------------------------------------------------- TVaR


def _kinks(x: np.ndarray, st: np.ndarray, price: float, lo: float, hi: float) -> np.ndarray:
    """Amounts in ``(lo, hi)`` where two state values of the lifted position cross."""
    dx = x[None, :] - x[:, None]
    ds = st[:, None] - st[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        m = price * dx / ds
    m = m[np.isfinite(m)]
    return np.unique(m[(m > lo) & (m < hi)])


def _polish(h, lo: float, hi: float, x, st, price) -> float:
    """Exact root of the piecewise-linear ``h`` inside a tight bracket."""
    pts = [lo, *_kinks(x, st, price, lo, hi).tolist(), hi]
    vals = [h(t) for t in pts]
    j = next(i for i, v in enumerate(vals) if v <= 0)
    if j == 0:
        return lo
    a, b, ha, hb = pts[j - 1], pts[j], vals[j - 1], vals[j]
    r = b if ha == hb else min(max(a + ha * (b - a) / (ha - hb), a), b)
    # candidates: the interpolated root and its next few floats, plus each
    # state's zero crossing (the exact root when one state carries the tail)
    cands = [r]
    for _ in range(4):
        cands.append(float(np.nextafter(cands[-1], math.inf)))
    with np.errstate(divide="ignore", invalid="ignore"):
        zeros = -price * x / st
    cands += zeros[np.isfinite(zeros) & (zeros > a) & (zeros < b)].tolist()
    for c in sorted(c for c in cands if a < c < b):
        if h(c) <= 0:
            return c + 0.0
    return b


def tvar_solve(
    space: ScenarioSpace,
    S: TradedAsset,
    alpha: float,
    X: Position,
    *,
    tol: float = BISECT_TOL,
    max_doublings: int = MAX_DOUBLINGS,
) -> CapitalResult:
    """Capital requirement for the TVaR acceptance set at level ``alpha``.

    ``h(m) = tvar(X + (m / S0) S_T)`` is continuous, convex and nonincreasing.
    When the asset pays zero with probability at least ``alpha``, ``h`` is
    constant beyond an explicit plateau point and the requirement is ``+inf``
    exactly when ``h`` is still positive there.
    """
    alpha = check_alpha(alpha)
    space.check(S, X)
    charged = space.charged
    w = space.p[charged]
    x = X.values[charged]
    st = S.payoff.values[charged]
    if not np.any(st > 0):
        raise DegenerateAssetError("asset pays nothing on every state of positive probability")
    price = S.price

    def h(m: float) -> float:
        return tvar_array(x + (m / price) * st, w, alpha)

    zero = st == 0
    lo = hi = None
    if math.fsum(w[zero]) >= alpha - PROB_TOL:
        top = 1.0 + float(np.max(x[zero]))
        plateau = float(np.max(price * (top - x[~zero]) / st[~zero]))
        if h(plateau) > 0:
            return _infinite(+1, Method.TVAR_BISECT)
        hi = plateau
    elif h(0.0) <= 0:
        hi = 0.0
    else:
        lo = 0.0

    step = 1.0
    if lo is None:
        for _ in range(max_doublings):
            cand = hi - step
            if h(cand) > 0:
                lo = cand
                break
            hi, step = cand, step * 2
        else:
            return _infinite(-1, Method.TVAR_BISECT, Confidence.BUDGET_EXHAUSTED)
    else:
        for _ in range(max_doublings):
            cand = lo + step
            if h(cand) <= 0:
                hi = cand
                break
            lo, step = cand, step * 2
        else:
            return _infinite(+1, Method.TVAR_BISECT, Confidence.BUDGET_EXHAUSTED)

    while hi - lo > tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if h(mid) <= 0:
            hi = mid
        else:
            lo = mid
    m = _polish(h, lo, hi, x, st, price) + 0.0
    amount = ExtendedAmount(m, True, Confidence.NUMERIC, tol)
    return CapitalResult(amount, Method.TVAR_BISECT, lift(X, S, m))


# ------------------------------------------------------------- expectation


def expectation_closed_form(space: ScenarioSpace, S: TradedAsset, floor: float, X: Position) -> CapitalResult:
    space.check(S, X)
    floor = parse_real(floor, "floor")
    es = space.expectation(S.payoff)
    ex = space.expectation(X)
    if es > 0:
        m = S.price * (floor - ex) / es
        y = lift(X, S, m)
        for _ in range(8):
            if space.expectation(y) >= floor:
                break
            m = float(np.nextafter(m, math.inf))
            y = lift(X, S, m)
        return CapitalResult(ExtendedAmount(m + 0.0, True), Method.EXPECTATION_CLOSED, y)
    return _infinite(-1 if ex >= floor else +1, Method.EXPECTATION_CLOSED)


# ------------------------------------------------------------ generic cone


def _positive_cone(space: ScenarioSpace, S: TradedAsset, X: Position, notes) -> CapitalResult:
    st = S.payoff.values
    x = X.values
    zero = st == 0
    if np.any(x[zero] < 0):
        return _infinite(+1, Method.CONE_BISECT, notes=notes)
    reach = ~zero
    m = S.price * float(np.max(-x[reach] / st[reach])) + 0.0
    y = x + (m / S.price) * st
    y[reach] = np.maximum(y[reach], 0.0)
    return CapitalResult(ExtendedAmount(m, True), Method.CONE_BISECT, Position(space, y), tuple(notes))


def cone_bisect(
    space: ScenarioSpace,
    S: TradedAsset,
    A: AcceptanceSet,
    X: Position,
    *,
    max_doublings: int = MAX_DOUBLINGS,
    tol: float = BISECT_TOL,
) -> CapitalResult:
    """Bracket-and-bisect search on ``m -> X + (m/S0) S_T in A``.

    Monotonicity of ``A`` and ``S_T >= 0`` make the accepted amounts an
    up-set. Running out of doublings yields an infinite amount flagged
    BUDGET_EXHAUSTED instead of a silent guess. The positive cone is
    pointwise and is solved in closed form.
    """
    space.check(S, X)
    notes = []
    if A.conic:
        if not A.in_interior(S.payoff):
            notes.append("may take +inf: eligible payoff not detected in the interior of the acceptance set")
        if A.in_closure(-S.payoff):
            notes.append("may take -inf: negative eligible payoff lies in the closure of the acceptance set")
    if isinstance(A, PositiveCone):
        return _positive_cone(space, S, X, notes)

    def f(m: float) -> bool:
        return A.contains(lift(X, S, m))

    lo = hi = None
    if f(0.0):
        hi = 0.0
    else:
        lo = 0.0
    step = 1.0
    if lo is None:
        for _ in range(max_doublings):
            cand = hi - step
            if not f(cand):
                lo = cand
                break
            hi, step = cand, step * 2
        else:
            return _infinite(-1, Method.CONE_BISECT, Confidence.BUDGET_EXHAUSTED, notes)
    else:
        for _ in range(max_doublings):
            cand = lo + step
            if f(cand):
                hi = cand
                break
            lo, step = cand, step * 2
        else:
            return _infinite(+1, Method.CONE_BISECT, Confidence.BUDGET_EXHAUSTED, notes)

    while hi - lo > tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if f(mid):
            hi = mid
        else:
            lo = mid

    for t in (hi + 1.0, hi + 2.0 * abs(hi) + 1.0):
        if not f(t):
            raise NonMonotonePredicateError(f"amount {hi} is accepted but the larger amount {t} is not")
    for t in (lo - 1.0, lo - 2.0 * abs(lo) - 1.0):
        if f(t):
            raise NonMonotonePredicateError(f"amount {lo} is rejected but the smaller amount {t} is accepted")

    attained = True if A.closed else None
    amount = ExtendedAmount(hi + 0.0, attained, Confidence.NUMERIC, tol)
    return CapitalResult(amount, Method.CONE_BISECT, lift(X, S, hi), tuple(notes))


# ---------------------------------------------------------------- dispatch


def required_capital(
    A: AcceptanceSet,
    S: TradedAsset,
    X: Position,
    *,
    tol: float = BISECT_TOL,
    max_doublings: int = MAX_DOUBLINGS,
) -> CapitalResult:
    space = S.space
    if isinstance(A, VaRAcceptance):
        return var_sweep(space, S, A.alpha, X)
    if isinstance(A, TVaRAcceptance):
        return tvar_solve(space, S, A.alpha, X, tol=tol, max_doublings=max_doublings)
    if isinstance(A, ExpectationAcceptance):
        return expectation_closed_form(space, S, A.floor, X)
    return cone_bisect(space, S, A, X, tol=tol, max_doublings=max_doublings)


def capital(A: AcceptanceSet, S: TradedAsset, X: Position, **kw) -> float:
    """Shorthand for ``required_capital(...).value``."""
    return required_capital(A, S, X, **kw).value
