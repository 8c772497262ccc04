"""Finiteness and continuity reports for capital requirements.

Each report states a verdict derived from an exact criterion on the finite
scenario space. Any witness position attached to a report has already been
re-evaluated with the capital solvers, so a report never carries a witness
that fails to exhibit the claimed behaviour.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .acceptance import AcceptanceSet, TVaRAcceptance, VaRAcceptance
from .capital import required_capital, var_interior_capital, var_sweep
from .core import (
    PROB_TOL,
    Confidence,
    Position,
    ScenarioSpace,
    TradedAsset,
    build_space,
    check_alpha,
)
from .errors import (
    DegenerateAssetError,
    InternalConsistencyError,
    NotConicError,
    NotFiniteError,
    TooManyStatesError,
)
from .quantile import tvar

#: Largest number of states the exact global-continuity search accepts.
MAX_SUBSET_STATES = 44
#: Residual gap below which the numeric probe calls a sequence convergent.
PROBE_GAP_TOL = 1e-6


class Scope(enum.Enum):
    POINTWISE = "pointwise"
    GLOBAL = "global"


@dataclass(frozen=True, eq=False)
class FinitenessReport:
    never_pos_inf: bool
    never_neg_inf: bool
    rule: str
    witnesses: dict[str, Position] = field(default_factory=dict)
    lipschitz_bound: float | None = None
    notes: tuple[str, ...] = ()

    @property
    def finite_everywhere(self) -> bool:
        return self.never_pos_inf and self.never_neg_inf


@dataclass(frozen=True, eq=False)
class ContinuityWitness:
    description: str
    position: Position
    gap: float
    subset: tuple[str, ...] = ()


@dataclass(frozen=True, eq=False)
class ContinuityReport:
    scope: Scope
    lsc: bool
    usc: bool
    witness: ContinuityWitness | None = None
    lipschitz_bound: float | None = None
    confidence: Confidence = Confidence.EXACT
    position: Position | None = None
    details: dict = field(default_factory=dict)

    @property
    def continuous(self) -> bool:
        return self.lsc and self.usc


def _charged_masses(space: ScenarioSpace, S: TradedAsset) -> tuple[float, float]:
    """``(P[S_T = 0], P[S_T > 0])``."""
    st = S.payoff.values
    return space.prob(space.charged & (st == 0)), space.prob(space.charged & (st > 0))


def _validated(A: AcceptanceSet, S: TradedAsset, candidates: dict[str, Position]):
    """Keep the witnesses whose capital requirement is the claimed infinity."""
    kept, notes = {}, []
    for side, X in candidates.items():
        value = required_capital(A, S, X).value
        if value == (math.inf if side == "+inf" else -math.inf):
            kept[side] = X
        else:
            notes.append(f"candidate witness for {side} evaluated to {value}; dropped")
    return kept, tuple(notes)


# -------------------------------------------------------------- finiteness


def var_finiteness(space: ScenarioSpace, S: TradedAsset, alpha: float) -> FinitenessReport:
    """Exact finiteness verdict for the VaR set with eligible asset ``S``.

    ``+inf`` is possible exactly when the asset pays nothing with probability
    above ``alpha``; ``-inf`` exactly when it pays something with probability
    at most ``alpha``.
    """
    alpha = check_alpha(alpha)
    space.check(S)
    z, plus = _charged_masses(space, S)
    never_pos = z <= alpha + PROB_TOL
    never_neg = plus > alpha + PROB_TOL
    candidates = {}
    if not never_pos:
        candidates["+inf"] = space.constant(-1.0)
    if not never_neg:
        candidates["-inf"] = space.zeros()
    witnesses, notes = _validated(VaRAcceptance(alpha), S, candidates)
    if len(witnesses) != len(candidates):
        raise InternalConsistencyError("VaR finiteness witness failed to evaluate to an infinity")
    return FinitenessReport(never_pos, never_neg, "var:zero-payoff-mass", witnesses, notes=notes)


def tvar_lipschitz_bound(space: ScenarioSpace, S: TradedAsset, alpha: float) -> float:
    """Sup-norm Lipschitz constant ``S0 / -tvar(S_T)`` of the TVaR requirement.

    Shifting the invested amount by ``d`` moves ``tvar`` of the lifted
    position by at most ``(d / S0) * tvar(S_T)`` (subadditivity and positive
    homogeneity), while ``tvar`` itself is 1-Lipschitz in the position.
    """
    alpha = check_alpha(alpha)
    space.check(S)
    t = tvar(space, S.payoff, alpha)
    if t >= 0:
        raise NotFiniteError(f"tvar of the asset payoff is {t}, the requirement is not finite everywhere")
    return S.price / -t


def tvar_finiteness(space: ScenarioSpace, S: TradedAsset, alpha: float) -> FinitenessReport:
    """TVaR requirements never take ``-inf``; they avoid ``+inf`` exactly when
    the asset pays nothing with probability strictly below ``alpha``."""
    alpha = check_alpha(alpha)
    space.check(S)
    z, plus = _charged_masses(space, S)
    if plus == 0:
        raise DegenerateAssetError("asset pays nothing on every state of positive probability")
    by_mass = z < alpha - PROB_TOL
    by_tvar = tvar(space, S.payoff, alpha) < 0
    if by_mass != by_tvar:
        raise InternalConsistencyError(
            f"P[S_T = 0] = {z} and tvar(S_T) disagree on finiteness at alpha = {alpha}"
        )
    candidates = {} if by_mass else {"+inf": space.constant(-1.0)}
    witnesses, notes = _validated(TVaRAcceptance(alpha), S, candidates)
    if len(witnesses) != len(candidates):
        raise InternalConsistencyError("TVaR finiteness witness failed to evaluate to +inf")
    bound = tvar_lipschitz_bound(space, S, alpha) if by_mass else None
    return FinitenessReport(by_mass, True, "tvar:zero-payoff-mass", witnesses, bound, notes)


def conic_finiteness(A: AcceptanceSet, space: ScenarioSpace, S: TradedAsset) -> FinitenessReport:
    """Finiteness for a conic set: ``+inf`` is avoided iff the payoff is an
    interior point of ``A``, ``-inf`` iff the negative payoff is outside the
    closure. For convex cones the first condition already gives finiteness.
    """
    if not A.conic:
        raise NotConicError(f"acceptance set {A.kind!r} is not declared conic")
    space.check(S)
    never_pos = bool(A.in_interior(S.payoff))
    never_neg = not A.in_closure(-S.payoff)
    if A.convex and never_pos and not never_neg:
        raise InternalConsistencyError(
            "declared convex cone contains the asset payoff in its interior and its negative in its closure"
        )
    candidates = {}
    if not never_pos:
        candidates["+inf"] = space.constant(-1.0)
    if not never_neg:
        candidates["-inf"] = space.constant(1.0)
    witnesses, notes = _validated(A, S, candidates)
    rule = "cone:coherent-interior" if A.convex else "cone:interior-closure"
    return FinitenessReport(never_pos, never_neg, rule, witnesses, notes=notes)


# -------------------------------------------------------------- continuity


def var_pointwise_continuity(space: ScenarioSpace, S: TradedAsset, alpha: float, X: Position) -> ContinuityReport:
    """Exact continuity verdict for the VaR requirement at ``X``.

    With ``Xt`` the cheapest acceptable lift of ``X``, the requirement is
    continuous at ``X`` iff ``P[Xt < 0] + P[X = 0, S_T = 0] <= alpha``. It is
    always lower semicontinuous because the VaR set is closed. A failure
    comes with the sequence ``X - (1/n) 1`` and the exact size of the jump.
    """
    alpha = check_alpha(alpha)
    result = var_sweep(space, S, alpha, X)
    if not result.amount.is_finite:
        raise NotFiniteError(f"capital requirement at X is {result.amount}")
    rho = result.value
    Xt = result.acceptable_position
    charged = space.charged
    stuck = charged & (S.payoff.values == 0)
    loss = space.prob(charged & (Xt.values < 0))
    pinned = space.prob(stuck & (X.values == 0))
    pinned_lifted = space.prob(stuck & (Xt.values == 0))
    continuous = loss + pinned <= alpha + PROB_TOL
    details = {
        "capital": rho,
        "loss_probability": loss,
        "pinned_probability": pinned,
        "pinned_probability_lifted": pinned_lifted,
    }
    if continuous:
        return ContinuityReport(Scope.POINTWISE, True, True, position=X, details=details)

    limit = var_interior_capital(space, S, alpha, X)
    gap = limit - rho
    probe = var_sweep(space, S, alpha, X - 2.0**-30).value
    # the limit may be +inf: every loss state left is then pinned for good
    reached = probe == limit if math.isinf(limit) else probe >= limit - 1e-9 * max(1.0, abs(limit))
    if not (gap > 0 and probe > rho and reached):
        raise InternalConsistencyError(
            f"discontinuity at X not confirmed: capital {rho}, limit {limit}, probe {probe}"
        )
    witness = ContinuityWitness("X - (1/n) * 1", X, gap)
    details["limit_from_below"] = limit
    return ContinuityReport(Scope.POINTWISE, True, False, witness, position=X, details=details)


def _half_sums(q: np.ndarray) -> np.ndarray:
    """All subset sums; the entry at index ``b`` is the sum over the bits of ``b``."""
    sums = np.zeros(1)
    for v in q:
        sums = np.concatenate((sums, sums + v))
    return sums


def find_window_subset(q: np.ndarray, lo: float, hi: float) -> int | None:
    """Bitmask of a subset whose sum lies in ``(lo, hi]``, or None.

    Meet in the middle: sort the subset sums of one half and, for each subset
    sum of the other half, look up the largest partner that keeps the total
    at most ``hi``.
    """
    q = np.asarray(q, dtype=float)
    k = len(q) // 2
    left, right = _half_sums(q[:k]), _half_sums(q[k:])
    order = np.argsort(right, kind="stable")
    rs = right[order]
    idx = np.searchsorted(rs, hi - left, side="right") - 1
    valid = idx >= 0
    total = np.where(valid, left + rs[np.maximum(idx, 0)], -np.inf)
    ok = valid & (total > lo) & (total <= hi)
    hits = np.flatnonzero(ok)
    if hits.size == 0:
        return None
    i = int(hits[0])
    return i | (int(order[idx[i]]) << k)


def var_global_continuity(space: ScenarioSpace, S: TradedAsset, alpha: float) -> ContinuityReport:
    """Exact global continuity verdict for the VaR requirement.

    With ``z = P[S_T = 0]`` the requirement is continuous everywhere iff no
    set of charged states where the asset pays has probability in
    ``(alpha - z, alpha]``. A hit ``B`` yields the discontinuity point ``-1_B``.
    """
    alpha = check_alpha(alpha)
    finiteness = var_finiteness(space, S, alpha)
    if not finiteness.finite_everywhere:
        raise NotFiniteError("the VaR requirement is not finite everywhere")
    charged = space.charged
    st = S.payoff.values
    z = space.prob(charged & (st == 0))
    items = np.flatnonzero(charged & (st > 0))
    if len(items) > MAX_SUBSET_STATES:
        raise TooManyStatesError(
            f"{len(items)} charged states with positive payoff exceed the limit of {MAX_SUBSET_STATES}"
        )
    lo, hi = alpha - z + PROB_TOL, alpha + PROB_TOL
    details = {"zero_payoff_mass": z, "window": [alpha - z, alpha], "states_searched": int(len(items))}
    mask = find_window_subset(space.p[items], lo, hi)
    if mask is None:
        return ContinuityReport(Scope.GLOBAL, True, True, details=details)
    chosen = [int(items[j]) for j in range(len(items)) if mask >> j & 1]
    X = -space.indicator(*chosen) + 0.0
    pointwise = var_pointwise_continuity(space, S, alpha, X)
    if pointwise.continuous:
        raise InternalConsistencyError("subset witness does not produce a discontinuity")
    labels = tuple(space.states[i] for i in chosen)
    witness = ContinuityWitness("-1_B at B = subset, approached by -1_B - (1/n) * 1", X, pointwise.witness.gap, labels)
    details["subset_probability"] = space.prob(np.isin(np.arange(len(space)), chosen))
    return ContinuityReport(Scope.GLOBAL, True, False, witness, details=details)


def tvar_global_continuity(space: ScenarioSpace, S: TradedAsset, alpha: float) -> ContinuityReport:
    """TVaR requirements are Lipschitz wherever they are finite everywhere."""
    bound = tvar_lipschitz_bound(space, S, alpha)
    return ContinuityReport(Scope.GLOBAL, True, True, lipschitz_bound=bound)


# ------------------------------------------------------------ numeric probe


def _sequence_gap(A, S, X, rho: float, sign: float, n_max: int, refinements: int):
    eps = [1.0 / n for n in range(1, n_max + 1)]
    eps += [1.0 / (n_max * 2.0**k) for k in range(1, refinements + 1)]
    values = [required_capital(A, S, X + sign * e).value for e in eps]
    at_n_max = values[n_max - 1]
    if not (math.isfinite(values[-1]) and math.isfinite(values[-2])):
        return math.inf, at_n_max
    limit = 2.0 * values[-1] - values[-2]
    return abs(limit - rho), abs(at_n_max - rho) if math.isfinite(at_n_max) else math.inf


def semicontinuity_probe(
    A: AcceptanceSet,
    S: TradedAsset,
    X: Position,
    n_max: int = 64,
    *,
    refinements: int = 20,
    gap_tol: float = PROBE_GAP_TOL,
) -> ContinuityReport:
    """Empirical semicontinuity at ``X`` along ``X + (1/n) 1`` and ``X - (1/n) 1``.

    The requirement is lower semicontinuous at ``X`` iff it is continuous
    along the upward sequence and upper semicontinuous iff along the downward
    one. After ``n_max`` terms the step is halved ``refinements`` more times
    and the limit is extrapolated linearly from the last two terms, which
    removes the ``O(1/n)`` residue of a Lipschitz sequence.
    """
    rho = required_capital(A, S, X).value
    if not math.isfinite(rho):
        raise NotFiniteError(f"capital requirement at X is {rho}")
    up_gap, up_raw = _sequence_gap(A, S, X, rho, +1.0, n_max, refinements)
    down_gap, down_raw = _sequence_gap(A, S, X, rho, -1.0, n_max, refinements)
    lsc, usc = up_gap <= gap_tol, down_gap <= gap_tol
    witness = None
    if not usc:
        witness = ContinuityWitness("X - (1/n) * 1", X, down_gap)
    elif not lsc:
        witness = ContinuityWitness("X + (1/n) * 1", X, up_gap)
    details = {
        "capital": rho,
        "upward_gap": up_gap,
        "downward_gap": down_gap,
        "upward_gap_at_n_max": up_raw,
        "downward_gap_at_n_max": down_raw,
        "n_max": n_max,
    }
    return ContinuityReport(Scope.POINTWISE, lsc, usc, witness, None, Confidence.NUMERIC, X, details)


# --------------------------------------------------------------- the demo


@dataclass(frozen=True)
class DemoRow:
    k: int
    states: int
    gap_unbounded: float
    gap_bounded: float


def _max_pointwise_gap(space: ScenarioSpace, S: TradedAsset, alpha: float) -> float:
    n = len(space)
    size = int(math.floor(alpha * n + 1e-9))
    order = np.argsort(S.payoff.values, kind="stable")
    reach = [int(i) for i in order if S.payoff.values[i] > 0]
    subsets = [reach[:size], reach[-size:], reach[::max(1, len(reach) // max(size, 1))][:size]]
    positions = [space.zeros(), space.constant(1.0)] + [-space.indicator(*s) + 0.0 for s in subsets if s]
    gap = 0.0
    for X in positions:
        report = var_pointwise_continuity(space, S, alpha, X)
        if report.witness is not None:
            gap = max(gap, report.witness.gap)
    return gap


def nonatomic_demo(ks=range(4, 13), alpha: float = 0.1) -> list[DemoRow]:
    """Refine uniform discretizations of two payoffs on the unit interval.

    One payoff is ``u`` itself (not bounded away from zero), the other is
    ``1/2 + u/2``. For each ``N = 2**k`` the largest exact pointwise jump of
    the VaR requirement over a few structured positions is reported. This is
    a qualitative illustration only: no finite model is nonatomic.
    """
    rows = []
    for k in ks:
        n = 2**k
        space = build_space([f"u{i}" for i in range(n)], [f"1/{n}"] * n)
        grid = np.arange(n) / n
        unbounded = TradedAsset(1.0, Position(space, grid))
        bounded = TradedAsset(1.0, Position(space, 0.5 + grid / 2))
        rows.append(DemoRow(k, n, _max_pointwise_gap(space, unbounded, alpha), _max_pointwise_gap(space, bounded, alpha)))
    return rows
