"""Command-line interface: ``riskcap <command> --model FILE ...``.

Exit codes: 0 when the report was computed, 2 for invalid input (including
argument errors), 3 when ``oracle-check`` finds a disagreement. Reports are
JSON by default, with sorted keys and infinities written as the strings
``"+inf"`` and ``"-inf"``, so identical inputs give identical bytes.
"""

from __future__ import annotations

import argparse
import enum
import json
import math
import os
import sys
from typing import Sequence

import numpy as np

from .acceptance import (
    AcceptanceSet,
    ExpectationAcceptance,
    PositiveCone,
    TVaRAcceptance,
    VaRAcceptance,
    linear_cone,
)
from .capital import BISECT_TOL, required_capital
from .core import Position
from .diagnostics import (
    ContinuityReport,
    FinitenessReport,
    conic_finiteness,
    nonatomic_demo,
    semicontinuity_probe,
    tvar_finiteness,
    tvar_global_continuity,
    var_finiteness,
    var_global_continuity,
    var_pointwise_continuity,
)
from .errors import InputError, NotFiniteError, RiskCapError
from .modelfile import ACCEPTANCE_KINDS, Model, load_model
from .optimality import AssetPair, dominance_refute, equality_check, no_leverage_check
from .oracle import GridSpec, oracle_capital, random_instance
from .quantile import tvar, var

EXIT_OK, EXIT_INPUT, EXIT_DISAGREE = 0, 2, 3
DEFAULT_SEED = 42


def seed_from_env() -> int:
    raw = os.environ.get("RISKCAP_SEED", str(DEFAULT_SEED))
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"RISKCAP_SEED must be an integer, got {raw!r}") from None


# ------------------------------------------------------------ serializing


def jsonable(obj):
    """Convert report objects into plain JSON data."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            raise ValueError("NaN cannot be reported")
        if math.isinf(v):
            return "+inf" if v > 0 else "-inf"
        return v + 0.0
    if isinstance(obj, Position):
        return {s: jsonable(v) for s, v in obj.as_dict().items()}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _flatten(obj, prefix=""):
    if isinstance(obj, dict) and obj:
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else k)
    elif isinstance(obj, list) and obj and any(isinstance(v, (dict, list)) for v in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def render(report: dict, fmt: str) -> str:
    data = jsonable(report)
    if fmt == "json":
        return json.dumps(data, indent=2, sort_keys=True, allow_nan=False)
    rows = list(_flatten(data))
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {json.dumps(v, sort_keys=True)}" for k, v in rows)


def finiteness_dict(r: FinitenessReport) -> dict:
    return {
        "never_pos_inf": r.never_pos_inf,
        "never_neg_inf": r.never_neg_inf,
        "finite_everywhere": r.finite_everywhere,
        "rule": r.rule,
        "witnesses": dict(r.witnesses),
        "lipschitz_bound": r.lipschitz_bound,
        "notes": list(r.notes),
    }


def continuity_dict(r: ContinuityReport) -> dict:
    w = r.witness
    return {
        "scope": r.scope,
        "continuous": r.continuous,
        "lsc": r.lsc,
        "usc": r.usc,
        "witness": None if w is None else {
            "description": w.description,
            "position": w.position,
            "gap": w.gap,
            "subset": list(w.subset),
        },
        "lipschitz_bound": r.lipschitz_bound,
        "confidence": r.confidence,
        "details": r.details,
    }


# --------------------------------------------------------------- helpers


def _model(args) -> Model:
    if not args.model:
        raise InputError("--model FILE is required for this command")
    return load_model(args.model)


def _alpha(args, model: Model) -> float:
    alpha = args.alpha if args.alpha is not None else model.defaults.get("alpha")
    if alpha is None:
        raise InputError("--alpha is required (no default in the model file)")
    return alpha


def _weights(text: str) -> list[list[float]]:
    try:
        return [[float(v) for v in row.split(",")] for row in text.split(";")]
    except ValueError:
        raise InputError(f"cannot parse weights {text!r}; expected 'a,b,c;d,e,f'") from None


def _acceptance(args, model: Model) -> AcceptanceSet:
    kind = args.acceptance or model.defaults.get("acceptance") or "var"
    if kind == "var":
        return VaRAcceptance(_alpha(args, model))
    if kind == "tvar":
        return TVaRAcceptance(_alpha(args, model))
    floor = args.floor if args.floor is not None else model.defaults.get("floor", 0.0)
    if kind == "expectation":
        return ExpectationAcceptance(floor)
    if kind == "positive-cone":
        return PositiveCone()
    if kind == "linear":
        if not args.weights:
            raise InputError("--weights is required for the linear acceptance family")
        return linear_cone(model.space, _weights(args.weights), floor)
    raise InputError(f"unknown acceptance kind {kind!r}")


# -------------------------------------------------------------- commands


def cmd_quantile(args) -> tuple[int, dict]:
    model = _model(args)
    X = model.position(args.position)
    alpha = _alpha(args, model)
    fn = var if args.command == "var" else tvar
    value = fn(model.space, X, alpha)
    return EXIT_OK, {"command": args.command, "alpha": alpha, "position": args.position, "value": value,
                     "renormalization": model.space.renormalization}


def cmd_require(args) -> tuple[int, dict]:
    model = _model(args)
    A = _acceptance(args, model)
    S = model.asset(args.asset)
    X = model.position(args.position)
    result = required_capital(A, S, X, tol=args.tolerance)
    amount = result.amount
    return EXIT_OK, {
        "command": "require",
        "acceptance": A.describe(),
        "asset": args.asset,
        "position": args.position,
        "amount": amount.value,
        "attained": amount.attained,
        "confidence": amount.confidence,
        "tolerance": amount.tolerance,
        "method": result.method,
        "acceptable_position": result.acceptable_position,
        "notes": list(result.notes),
        "renormalization": model.space.renormalization,
    }


def cmd_diagnose(args) -> tuple[int, dict]:
    model = _model(args)
    A = _acceptance(args, model)
    S = model.asset(args.asset)
    X = model.position(args.position) if args.position else None
    space = model.space
    notes = []
    finiteness = continuity = None
    try:
        if isinstance(A, VaRAcceptance):
            finiteness = var_finiteness(space, S, A.alpha)
            if X is not None:
                continuity = var_pointwise_continuity(space, S, A.alpha, X)
            elif finiteness.finite_everywhere:
                continuity = var_global_continuity(space, S, A.alpha)
            else:
                notes.append("global continuity needs a requirement that is finite everywhere")
        elif isinstance(A, TVaRAcceptance):
            finiteness = tvar_finiteness(space, S, A.alpha)
            if finiteness.finite_everywhere:
                continuity = tvar_global_continuity(space, S, A.alpha)
            elif X is not None:
                continuity = semicontinuity_probe(A, S, X)
        else:
            if A.conic:
                finiteness = conic_finiteness(A, space, S)
            else:
                notes.append("finiteness criterion applies to conic acceptance sets only")
            if X is not None:
                continuity = semicontinuity_probe(A, S, X)
    except NotFiniteError as exc:
        notes.append(str(exc))
    return EXIT_OK, {
        "command": "diagnose",
        "acceptance": A.describe(),
        "asset": args.asset,
        "position": args.position,
        "finiteness": None if finiteness is None else finiteness_dict(finiteness),
        "continuity": None if continuity is None else continuity_dict(continuity),
        "notes": notes,
    }


def cmd_compare(args) -> tuple[int, dict]:
    model = _model(args)
    A = _acceptance(args, model)
    pair = AssetPair(model.asset(args.asset_a), model.asset(args.asset_b))
    seed = args.seed if args.seed is not None else seed_from_env()
    eq = equality_check(A, A, pair, args.budget, seed)
    dom = dominance_refute(A, pair, args.budget, seed)
    try:
        lev = no_leverage_check(A, pair, args.budget, seed)
        leverage = {"status": lev.status, "trials": lev.trials, "witness": lev.witness}
    except NotFiniteError as exc:
        leverage = {"status": None, "trials": 0, "witness": None, "note": str(exc)}
    return EXIT_OK, {
        "command": "compare",
        "acceptance": A.describe(),
        "asset_a": args.asset_a,
        "asset_b": args.asset_b,
        "budget": args.budget,
        "seed": seed,
        "equality": {"status": eq.status, "trials": eq.trials, "witness": eq.witness},
        "dominance": {
            "status": dom.status,
            "trials": dom.trials,
            "witness_low": dom.witness_low,
            "witness_high": dom.witness_high,
            "capital_low": dom.capital_low,
            "capital_high": dom.capital_high,
        },
        "no_leverage": leverage,
    }


ORACLE_KINDS = ("var", "tvar", "expectation", "positive-cone")


def _agree(a: float, b: float, tol: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol


def cmd_oracle_check(args) -> tuple[int, dict]:
    seed = args.seed if args.seed is not None else seed_from_env()
    grid = GridSpec(-1000.0, 1000.0, 0.1, 6)
    tol = 10 * grid.final_step
    rng = np.random.default_rng(seed)
    disagreements = []
    worst = 0.0
    checked = 0

    def check(A, S, X, label):
        nonlocal worst, checked
        a = required_capital(A, S, X).value
        b = oracle_capital(A, S, X, grid).value
        checked += 1
        if math.isfinite(a) and math.isfinite(b):
            worst = max(worst, abs(a - b))
        if not _agree(a, b, tol):
            disagreements.append({"case": label, "solver": a, "oracle": b})

    if args.model:
        model = load_model(args.model)
        A = _acceptance(args, model)
        for sname, S in sorted(model.assets.items()):
            for xname, X in sorted(model.positions.items()):
                check(A, S, X, f"model:{sname}:{xname}")
    for i in range(args.instances):
        kind = ORACLE_KINDS[i % len(ORACLE_KINDS)]
        inst = random_instance(rng, kind)
        check(inst.acceptance, inst.asset, inst.position, f"random:{i}:{kind}")
    code = EXIT_DISAGREE if disagreements else EXIT_OK
    return code, {
        "command": "oracle-check",
        "seed": seed,
        "instances": args.instances,
        "checked": checked,
        "tolerance": tol,
        "max_abs_difference": worst,
        "disagreements": disagreements,
        "agree": not disagreements,
    }


def cmd_demo(args) -> tuple[int, dict]:
    rows = nonatomic_demo(range(args.k_min, args.k_max + 1), args.alpha)
    return EXIT_OK, {
        "command": "demo",
        "demo": "nonatomic",
        "label": "qualitative",
        "alpha": args.alpha,
        "rows": [{"k": r.k, "states": r.states, "gap_unbounded": r.gap_unbounded,
                  "gap_bounded": r.gap_bounded} for r in rows],
        "min_gap_unbounded": min(r.gap_unbounded for r in rows),
        "max_gap_bounded": max(r.gap_bounded for r in rows),
    }


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="model file (.json or .csv)")
    common.add_argument("--format", choices=("json", "table"), default="json")
    common.add_argument("--tolerance", type=float, default=BISECT_TOL,
                        help="relative bracket width for bisection solvers")

    accept = argparse.ArgumentParser(add_help=False)
    accept.add_argument("--acceptance", choices=ACCEPTANCE_KINDS)
    accept.add_argument("--alpha", type=float)
    accept.add_argument("--floor", type=float)
    accept.add_argument("--weights", help="weight vectors for 'linear', e.g. '0.5,0.5,0;0,0,1'")

    parser = argparse.ArgumentParser(prog="riskcap", description="Capital requirements on finite scenario spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("var", "tvar"):
        p = sub.add_parser(name, parents=[common], help=f"{name} of a named position")
        p.add_argument("--alpha", type=float)
        p.add_argument("--position", required=True)
        p.set_defaults(handler=cmd_quantile)

    p = sub.add_parser("require", parents=[common, accept], help="capital requirement")
    p.add_argument("--asset", required=True)
    p.add_argument("--position", required=True)
    p.set_defaults(handler=cmd_require)

    p = sub.add_parser("diagnose", parents=[common, accept], help="finiteness and continuity reports")
    p.add_argument("--asset", required=True)
    p.add_argument("--position")
    p.set_defaults(handler=cmd_diagnose)

    p = sub.add_parser("compare", parents=[common, accept], help="compare two eligible assets")
    p.add_argument("--asset-a", required=True)
    p.add_argument("--asset-b", required=True)
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("oracle-check", parents=[common, accept], help="solver against brute-force oracle")
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=cmd_oracle_check)

    p = sub.add_parser("demo", parents=[common], help="demonstrations")
    p.add_argument("name", choices=("nonatomic",))
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--k-min", type=int, default=4)
    p.add_argument("--k-max", type=int, default=12)
    p.set_defaults(handler=cmd_demo)
    return parser


def run(argv: Sequence[str] | None = None) -> tuple[int, str]:
    """Parse ``argv``, run the command and return ``(exit code, output text)``.

    Errors are reported as ``{"error": ..., "type": ...}``.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), ""
    fmt = getattr(args, "format", "json")
    try:
        code, report = args.handler(args)
    except (RiskCapError, InputError) as exc:
        return EXIT_INPUT, render({"command": args.command, "error": str(exc), "type": type(exc).__name__}, fmt)
    return code, render(report, fmt)


def main(argv: Sequence[str] | None = None) -> int:
    code, text = run(argv)
    if text:
        stream = sys.stdout if code != EXIT_INPUT else sys.stderr
        print(text, file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
