"""Brute-force reference implementations for cross-checking the solvers.

Nothing here imports the quantile or capital modules: membership is
re-derived from the definitions and the capital requirement is found by
scanning a grid of invested amounts. The code is slow on purpose; it favours
obviousness over speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

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
    build_space,
    check_alpha,
)
from .errors import DegenerateGridError


@dataclass(frozen=True)
class GridSpec:
    lo: float
    hi: float
    coarse_step: float
    refine_rounds: int = 4

    def __post_init__(self):
        vals = (self.lo, self.hi, self.coarse_step)
        if not all(math.isfinite(v) for v in vals):
            raise DegenerateGridError("grid bounds and step must be finite")
        if not self.lo < self.hi:
            raise DegenerateGridError(f"grid needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.coarse_step <= 0:
            raise DegenerateGridError("grid step must be positive")
        if int(self.refine_rounds) < 1:
            raise DegenerateGridError("at least one refinement round is required")

    @property
    def final_step(self) -> float:
        return self.coarse_step / 10.0**self.refine_rounds


# ------------------------------------------------------ membership by rows


def _tvar_rows(Y: np.ndarray, w: np.ndarray, alpha: float) -> np.ndarray:
    """TVaR of every row of ``Y`` through the tail-average identity."""
    order = np.argsort(Y, axis=1, kind="stable")
    v = np.take_along_axis(Y, order, axis=1)
    p = w[order]
    cum = np.cumsum(p, axis=1)
    # q = smallest value whose cumulative mass exceeds alpha
    k = np.minimum((cum <= alpha + PROB_TOL).sum(axis=1), Y.shape[1] - 1)
    q = v[np.arange(len(v)), k]
    below = v < q[:, None]
    mass_below = (p * below).sum(axis=1)
    mean_below = (p * v * below).sum(axis=1)
    return -(mean_below + q * (alpha - mass_below)) / alpha


def _accepts(A: AcceptanceSet, space: ScenarioSpace, Y: np.ndarray) -> np.ndarray:
    """Membership of every row of ``Y`` (rows are positions)."""
    w = space.p
    charged = space.charged
    if isinstance(A, VaRAcceptance):
        return (Y[:, charged] < 0).astype(float) @ w[charged] <= A.alpha + PROB_TOL
    if isinstance(A, TVaRAcceptance):
        return _tvar_rows(Y[:, charged], w[charged], A.alpha) <= 0
    if isinstance(A, ExpectationAcceptance):
        return Y @ w >= A.floor
    if isinstance(A, PositiveCone):
        return Y.min(axis=1) >= 0
    return np.array([bool(A.contains(Position(space, y))) for y in Y], dtype=bool)


# ------------------------------------------------------------- the oracle


def _lift_rows(X: Position, S: TradedAsset, ms: np.ndarray) -> np.ndarray:
    return X.values[None, :] + (ms / S.price)[:, None] * S.payoff.values[None, :]


def oracle_capital(A: AcceptanceSet, S: TradedAsset, X: Position, grid: GridSpec) -> ExtendedAmount:
    """Scan ``m`` on ``grid`` for the smallest acceptable investment.

    A bracket ``(rejected, accepted)`` from the coarse scan is cut into ten
    pieces ``refine_rounds`` times. If even the lowest grid point is
    acceptable, three deeper probes decide between ``-inf`` and a bracket
    below the grid; this is a heuristic and the finiteness reports are the
    authoritative check.
    """
    space = S.space
    space.check(X)

    def ok(ms: np.ndarray) -> np.ndarray:
        return _accepts(A, space, _lift_rows(X, S, np.asarray(ms, dtype=float)))

    count = int(math.floor((grid.hi - grid.lo) / grid.coarse_step + 1e-9)) + 1
    ms = grid.lo + grid.coarse_step * np.arange(count)
    acc = ok(ms)
    if not acc.any():
        return ExtendedAmount.pos_inf(Confidence.NUMERIC, grid.final_step)
    j = int(np.argmax(acc))
    if j > 0:
        rejected, accepted = ms[j - 1], ms[j]
    else:
        base = grid.lo if grid.lo < 0 else -1.0
        accepted = ms[0]
        probes = [base * f for f in (2.0, 4.0, 8.0)]
        hits = ok(probes)
        if hits.all():
            return ExtendedAmount.neg_inf(Confidence.NUMERIC, grid.final_step)
        i = int(np.argmin(hits))
        rejected = probes[i]
        accepted = probes[i - 1] if i > 0 else accepted
        # scan the deep bracket down to the coarse step before refining
        while accepted - rejected > grid.coarse_step * (1 + 1e-9):
            pts = np.linspace(rejected, accepted, 11)
            k = int(np.argmax(ok(pts)))
            rejected, accepted = pts[k - 1], pts[k]
    for _ in range(int(grid.refine_rounds)):
        pts = np.linspace(rejected, accepted, 11)
        k = int(np.argmax(ok(pts)))
        if k == 0:  # rounding in linspace; the bracket endpoint stays
            k = 1
        rejected, accepted = pts[k - 1], pts[k]
    return ExtendedAmount(float(accepted), None, Confidence.NUMERIC, grid.final_step)


def oracle_tvar(space: ScenarioSpace, X: Position, alpha: float) -> float:
    """TVaR from ``-(E[X; X < q] + q (alpha - P[X < q])) / alpha``.

    ``q`` is found by walking the sorted distinct values until the mass at or
    below the current value first exceeds ``alpha``.
    """
    alpha = check_alpha(alpha)
    space.check(X)
    pairs = [(float(x), float(p)) for x, p in zip(X.values, space.p) if p > 0]
    values = sorted({x for x, _ in pairs})
    q = values[-1]
    for v in values:
        if math.fsum(p for x, p in pairs if x <= v) > alpha + PROB_TOL:
            q = v
            break
    mass_below = math.fsum(p for x, p in pairs if x < q)
    mean_below = math.fsum(p * x for x, p in pairs if x < q)
    return -(mean_below + q * (alpha - mass_below)) / alpha + 0.0


# ------------------------------------------------------- random instances


@dataclass(frozen=True, eq=False)
class Instance:
    space: ScenarioSpace
    asset: TradedAsset
    acceptance: AcceptanceSet
    position: Position


def random_space(rng: np.random.Generator, n: int | None = None) -> ScenarioSpace:
    """States with probabilities in whole percent; some may be zero."""
    n = int(rng.integers(2, 17)) if n is None else n
    counts = rng.multinomial(100, rng.dirichlet(np.full(n, 0.8)))
    labels = [f"s{i}" for i in range(n)]
    return build_space(labels, [Fraction(int(c), 100) for c in counts])


def random_alpha(rng: np.random.Generator) -> float:
    return int(rng.integers(1, 60)) / 100


def random_asset(rng: np.random.Generator, space: ScenarioSpace) -> TradedAsset:
    """Payoff zero with probability 1/4 per state, otherwise in [0.2, 1.5]."""
    n = len(space)
    st = np.where(rng.random(n) < 0.25, 0.0, rng.uniform(0.2, 1.5, n))
    charged = np.flatnonzero(space.charged)
    if not np.any(st[charged] > 0):
        st[rng.choice(charged)] = rng.uniform(0.2, 1.5)
    return TradedAsset(float(rng.uniform(0.5, 1.5)), Position(space, st))


def random_position(rng: np.random.Generator, space: ScenarioSpace, scale: float = 2.0) -> Position:
    x = rng.uniform(-scale, scale, len(space))
    x[rng.random(len(space)) < 0.2] = 0.0
    return Position(space, x)


def random_instance(rng: np.random.Generator, kind: str) -> Instance:
    """A random space, asset, acceptance set of ``kind`` and position.

    ``kind`` is one of ``var``, ``tvar``, ``expectation``, ``positive-cone``.
    Expectation instances keep ``E[S_T] >= 0.05`` so the closed form is well
    conditioned.
    """
    space = random_space(rng)
    asset = random_asset(rng, space)
    if kind == "expectation":
        while space.expectation(asset.payoff) < 0.05:
            asset = random_asset(rng, space)
        A = ExpectationAcceptance(round(float(rng.uniform(-1, 1)), 2))
    elif kind == "var":
        A = VaRAcceptance(random_alpha(rng))
    elif kind == "tvar":
        A = TVaRAcceptance(random_alpha(rng))
    elif kind == "positive-cone":
        A = PositiveCone()
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return Instance(space, asset, A, random_position(rng, space))
