"""Capital requirements on finite scenario spaces with general eligible assets."""

from .acceptance import (
    AcceptanceSet,
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
from .capital import (
    CapitalResult,
    Method,
    cone_bisect,
    expectation_closed_form,
    required_capital,
    tvar_solve,
    var_interior_capital,
    var_sweep,
)
from .core import (
    Confidence,
    ExtendedAmount,
    Position,
    ScenarioSpace,
    TradedAsset,
    build_asset,
    build_space,
    risk_free,
    sup_norm,
)
from .diagnostics import (
    ContinuityReport,
    FinitenessReport,
    conic_finiteness,
    nonatomic_demo,
    semicontinuity_probe,
    tvar_finiteness,
    tvar_global_continuity,
    tvar_lipschitz_bound,
    var_finiteness,
    var_global_continuity,
    var_pointwise_continuity,
)
from .optimality import (
    AssetPair,
    DominanceResult,
    Status,
    Verdict,
    dominance_refute,
    equality_check,
    leveraged_payoff,
    no_leverage_check,
)
from .quantile import tvar, var

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
