"""Reading and writing model files.

A model holds one scenario space plus named positions and named assets. Two
formats are accepted:

JSON::

    {
      "scenario": [{"state": "w1", "prob": "0.05"}, ...],
      "positions": {"X": [0, 0, 1], "Y": {"w1": -1, "w2": 0, "w3": 0}},
      "assets": {"bond": {"price": 1.0, "payoff": [0, 1, 1]}},
      "defaults": {"alpha": 0.1, "acceptance": "var"}
    }

CSV, one row per state, header ``state,prob,<names>``. A column named
``name@price`` is an asset with that price; every other column is a
position.

:func:`dump_json` writes a canonical form: keys sorted, probabilities as the
decimal strings they were read from, values as shortest round-trip floats.
Writing, reading and writing again gives identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .core import Position, ScenarioSpace, TradedAsset, build_space, parse_real
from .errors import FileParseError, InputError, NameNotFoundError

ACCEPTANCE_KINDS = ("var", "tvar", "expectation", "positive-cone", "linear")


@dataclass(frozen=True, eq=False)
class Model:
    space: ScenarioSpace
    prob_text: tuple[str, ...]
    positions: dict[str, Position] = field(default_factory=dict)
    assets: dict[str, TradedAsset] = field(default_factory=dict)
    defaults: dict = field(default_factory=dict)

    def position(self, name: str) -> Position:
        try:
            return self.positions[name]
        except KeyError:
            raise NameNotFoundError(f"no position named {name!r}; known: {sorted(self.positions)}") from None

    def asset(self, name: str) -> TradedAsset:
        try:
            return self.assets[name]
        except KeyError:
            raise NameNotFoundError(f"no asset named {name!r}; known: {sorted(self.assets)}") from None

    def to_json(self) -> str:
        return dump_json(self)

    def __eq__(self, other):
        if not isinstance(other, Model):
            return NotImplemented
        return self.to_json() == other.to_json()

    __hash__ = None


def _prob_text(value) -> str:
    if isinstance(value, str):
        return value.strip()
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError
    return repr(float(value))


def _number(value, *, row=None, column=None) -> float:
    if isinstance(value, bool):
        raise FileParseError(f"expected a number, got {value!r}", row=row, column=column)
    try:
        v = parse_real(value)
    except InputError:
        raise FileParseError(f"expected a number, got {value!r}", row=row, column=column) from None
    if not math.isfinite(v):
        raise FileParseError(f"value {value!r} is not finite", row=row, column=column)
    return v


def _vector(raw, space: ScenarioSpace, name: str) -> list[float]:
    if isinstance(raw, dict):
        unknown = sorted(set(raw) - set(space.states))
        if unknown:
            raise FileParseError(f"{name!r} refers to unknown states {unknown}", column=name)
        missing = [s for s in space.states if s not in raw]
        if missing:
            raise FileParseError(f"{name!r} has no value for states {missing}", column=name)
        raw = [raw[s] for s in space.states]
    if not isinstance(raw, list):
        raise FileParseError(f"{name!r} must be a list or a state-to-value map", column=name)
    if len(raw) != len(space):
        raise FileParseError(f"{name!r} has {len(raw)} values for {len(space)} states", column=name)
    return [_number(v, row=i + 1, column=name) for i, v in enumerate(raw)]


def _check_defaults(defaults) -> dict:
    if not isinstance(defaults, dict):
        raise FileParseError("'defaults' must be an object", column="defaults")
    out = {}
    for key, value in defaults.items():
        if key == "acceptance":
            if value not in ACCEPTANCE_KINDS:
                raise FileParseError(f"unknown acceptance kind {value!r}", column="defaults.acceptance")
            out[key] = value
        elif key in ("alpha", "floor"):
            out[key] = _number(value, column=f"defaults.{key}")
        else:
            raise FileParseError(f"unknown default {key!r}", column="defaults")
    return out


def _build(labels, probs, prob_text, positions_raw, assets_raw, defaults) -> Model:
    names = list(positions_raw) + list(assets_raw)
    dup = sorted({n for n in names if names.count(n) > 1})
    if dup:
        raise FileParseError(f"names used for both a position and an asset: {dup}")
    space = build_space(labels, probs)
    positions = {name: Position(space, _vector(raw, space, name)) for name, raw in positions_raw.items()}
    assets = {}
    for name, (price, raw) in assets_raw.items():
        payoff = Position(space, _vector(raw, space, name))
        assets[name] = TradedAsset(_number(price, column=name), payoff)
    return Model(space, tuple(prob_text), positions, assets, _check_defaults(defaults))


def parse_json(text: str) -> Model:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileParseError(f"invalid JSON: {exc.msg}", row=exc.lineno, column=exc.colno) from None
    if not isinstance(doc, dict):
        raise FileParseError("model file must be a JSON object")
    unknown = sorted(set(doc) - {"scenario", "positions", "assets", "defaults"})
    if unknown:
        raise FileParseError(f"unknown top-level keys {unknown}")
    scenario = doc.get("scenario")
    if not isinstance(scenario, list) or not scenario:
        raise FileParseError("'scenario' must be a nonempty list", column="scenario")
    labels, probs = [], []
    for i, entry in enumerate(scenario, start=1):
        if not isinstance(entry, dict) or set(entry) != {"state", "prob"}:
            raise FileParseError("scenario entries need exactly 'state' and 'prob'", row=i, column="scenario")
        if not isinstance(entry["state"], str):
            raise FileParseError("state labels must be strings", row=i, column="state")
        try:
            probs.append(_prob_text(entry["prob"]))
        except TypeError:
            raise FileParseError(f"cannot read probability {entry['prob']!r}", row=i, column="prob") from None
        labels.append(entry["state"])
    positions_raw = doc.get("positions", {})
    assets_doc = doc.get("assets", {})
    if not isinstance(positions_raw, dict) or not isinstance(assets_doc, dict):
        raise FileParseError("'positions' and 'assets' must be objects")
    assets_raw = {}
    for name, spec in assets_doc.items():
        if not isinstance(spec, dict) or set(spec) != {"price", "payoff"}:
            raise FileParseError(f"asset {name!r} needs exactly 'price' and 'payoff'", column=name)
        assets_raw[name] = (spec["price"], spec["payoff"])
    for i, p in enumerate(probs, start=1):
        _number(p, row=i, column="prob")
    return _build(labels, probs, probs, positions_raw, assets_raw, doc.get("defaults", {}))


def parse_csv(text: str) -> Model:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise FileParseError("empty CSV file", row=1)
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0] != "state" or header[1] != "prob":
        raise FileParseError("header must start with 'state,prob'", row=1)
    positions_raw: dict[str, list] = {}
    assets_raw: dict[str, tuple] = {}
    columns = []
    for j, h in enumerate(header[2:], start=3):
        if not h:
            raise FileParseError("empty column name", row=1, column=j)
        if "@" in h:
            name, _, price = h.partition("@")
            _number(price, row=1, column=h)
            assets_raw[name] = (price, [])
            columns.append(assets_raw[name][1])
        else:
            positions_raw[h] = []
            columns.append(positions_raw[h])
        if len(positions_raw) + len(assets_raw) != len(columns):
            raise FileParseError(f"duplicate column {h!r}", row=1, column=h)
    labels, probs = [], []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise FileParseError(f"expected {len(header)} fields, got {len(row)}", row=i)
        labels.append(row[0].strip())
        prob = row[1].strip()
        _number(prob, row=i, column="prob")
        probs.append(prob)
        for j, (col, cell) in enumerate(zip(columns, row[2:])):
            col.append(_number(cell.strip(), row=i, column=header[j + 2]))
    return _build(labels, probs, probs, positions_raw, assets_raw, {})


def load_model(path: str | Path) -> Model:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileParseError(f"cannot read {path}: {exc.strerror}") from None
    if path.suffix.lower() == ".csv":
        return parse_csv(text)
    return parse_json(text)


def dump_json(model: Model) -> str:
    states = model.space.states
    doc = {
        "scenario": [{"state": s, "prob": p} for s, p in zip(states, model.prob_text)],
        "positions": {name: X.tolist() for name, X in model.positions.items()},
        "assets": {name: {"price": S.price, "payoff": S.payoff.tolist()} for name, S in model.assets.items()},
    }
    if model.defaults:
        doc["defaults"] = dict(model.defaults)
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"
