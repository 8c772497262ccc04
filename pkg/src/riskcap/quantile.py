"""Exact Value-at-Risk and Tail-Value-at-Risk for finite distributions.

Sign convention: both are capital amounts, so a position with a comfortable
cushion has a negative VaR. ``var(X, a)`` is the smallest ``m`` with
``P[X + m < 0] <= a``; ``tvar(X, a)`` averages ``var(X, b)`` over ``b`` in
``(0, a)``. On a finite law the map ``b -> var(X, b)`` is a step function, so
the average is a finite sum and no quadrature is involved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PROB_TOL, Position, ScenarioSpace, check_alpha


@dataclass(frozen=True, eq=False)
class SortedDistribution:
    """Law of a position under P: distinct values with their masses."""

    values: np.ndarray
    masses: np.ndarray
    cumulative: np.ndarray

    @classmethod
    def of(cls, X: Position) -> SortedDistribution:
        charged = X.space.charged
        values, inverse = np.unique(X.values[charged], return_inverse=True)
        masses = np.bincount(inverse, weights=X.space.p[charged])
        cumulative = np.cumsum(masses)
        cumulative[-1] = 1.0
        return cls(values, masses, cumulative)

    def lower_quantile(self, alpha: float) -> float:
        """Smallest attained value ``v`` with ``P[X <= v] > alpha``."""
        k = int(np.searchsorted(self.cumulative, alpha + PROB_TOL, side="right"))
        return float(self.values[min(k, len(self.values) - 1)])

    def tail_integral(self, alpha: float) -> float:
        """Integral of ``var_b`` over ``b`` in ``(0, alpha)``."""
        return _segment_integral(self.values, self.cumulative, alpha)


def _segment_integral(values: np.ndarray, cumulative: np.ndarray, alpha: float) -> float:
    # var_b equals -values[k] for b in [cum[k-1], cum[k]); clip the pieces at alpha.
    cum = np.where(np.abs(cumulative - alpha) <= PROB_TOL, alpha, cumulative)
    lower = np.concatenate(([0.0], cum[:-1]))
    seg = np.clip(np.minimum(cum, alpha) - lower, 0.0, None)
    return -float(seg @ values)


def _bind(space: ScenarioSpace, X: Position) -> None:
    space.check(X)


def var(space: ScenarioSpace, X: Position, alpha: float) -> float:
    alpha = check_alpha(alpha)
    _bind(space, X)
    return -SortedDistribution.of(X).lower_quantile(alpha) + 0.0


def tvar(space: ScenarioSpace, X: Position, alpha: float) -> float:
    alpha = check_alpha(alpha)
    _bind(space, X)
    return SortedDistribution.of(X).tail_integral(alpha) / alpha + 0.0


def tvar_array(values: np.ndarray, weights: np.ndarray, alpha: float) -> float:
    """TVaR of raw values with strictly positive weights summing to one.

    Hot path for the capital solvers; skips validation and deduplication
    (tied values contribute identical segments, so sorting suffices).
    """
    order = np.argsort(values, kind="stable")
    cumulative = np.cumsum(weights[order])
    cumulative[-1] = 1.0
    return _segment_integral(values[order], cumulative, alpha) / alpha + 0.0
