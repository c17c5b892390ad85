"""JSON scenario files.

Layout (times in days)::

    {
      "seasonality": {"kind": "constant", "value": 10.0},
      "mu": 0.0, "sigma": 0.01,
      "factors": [{"beta": 0.3466, "sigma": 0.01}, ...],
      "state": {"t": 0.0, "x": 0.0, "y": [0.0, ...]},
      "option": {"tau": 10.0, "T": 25.0, "strike": {"delta": 1.0}, "r": 0.0},
      "selection": {"J": [1]},
      "grid": {"T_min": 11, "T_max": 80, "step": 1},        # optional
      "mc": {"seed": 42, "paths": 1000000, "antithetic": true, "chunks": 1},  # optional
      "quad": {"nodes": 201}                                 # optional
    }

``seasonality`` may also be a bare number or
``{"kind": "tabulated", "knots": [[t, level], ...]}``.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ModelError, ValidationError
from .forward import DEFAULT_NODES
from .model import (
    FactorSelection,
    MarketState,
    MeanRevertingFactor,
    OptionSpec,
    Seasonality,
    SpotModel,
    Strike,
    validate,
)
from .montecarlo import McConfig

EXAMPLE: dict[str, Any] = {
    "seasonality": {"kind": "constant", "value": 10.0},
    "mu": 0.0,
    "sigma": 0.01,
    "factors": [{"beta": 0.3466, "sigma": 0.01}, {"beta": 0.0495, "sigma": 0.01}],
    "state": {"t": 0.0, "x": 0.0, "y": [0.0, 0.0]},
    "option": {"tau": 10.0, "T": 25.0, "strike": {"delta": 1.0}, "r": 0.0},
    "selection": {"J": [1]},
}


@dataclass(frozen=True)
class Grid:
    T_min: float
    T_max: float
    step: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.T_min) and math.isfinite(self.T_max)):
            raise ValidationError("grid: bounds must be finite")
        if not self.step > 0.0:
            raise ValidationError(f"grid.step must be > 0, got {self.step}")
        if self.T_max < self.T_min:
            raise ValidationError(f"grid.T_max={self.T_max} is below grid.T_min={self.T_min}")

    @classmethod
    def parse(cls, text: str) -> Grid:
        """Parse ``a:b:step`` (step optional, default 1)."""
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ValidationError(f"grid must look like a:b[:step], got {text!r}")
        try:
            vals = [float(p) for p in parts]
        except ValueError as exc:
            raise ValidationError(f"grid: {exc}") from None
        return cls(*vals)

    def values(self) -> list[float]:
        n = int(math.floor((self.T_max - self.T_min) / self.step + 1e-9))
        return [self.T_min + k * self.step for k in range(n + 1)]


@dataclass(frozen=True)
class Scenario:
    model: SpotModel
    state: MarketState
    option: OptionSpec
    selection: FactorSelection
    grid: Grid | None = None
    mc: McConfig | None = None
    quad_nodes: int = DEFAULT_NODES

    @property
    def full(self) -> FactorSelection:
        return FactorSelection.full(self.model.n)


def _field(d: dict, key: str, where: str):
    if not isinstance(d, dict):
        raise ValidationError(f"{where} must be an object")
    if key not in d:
        raise ValidationError(f"missing field {where}.{key}" if where else f"missing field {key}")
    return d[key]


def _num(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{name} must be a number, got {value!r}")
    return float(value)


def _seasonality(raw) -> Seasonality:
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return Seasonality.constant(raw)
    kind = _field(raw, "kind", "seasonality")
    if kind == "constant":
        return Seasonality.constant(_num(_field(raw, "value", "seasonality"), "seasonality.value"))
    if kind == "tabulated":
        knots = _field(raw, "knots", "seasonality")
        try:
            return Seasonality.tabulated([(_num(t, "knot"), _num(v, "knot")) for t, v in knots])
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ModelError):
                raise
            raise ValidationError(f"seasonality.knots must be [[t, level], ...]: {exc}") from None
    raise ValidationError(f"seasonality.kind must be 'constant' or 'tabulated', got {kind!r}")


def _strike(raw) -> Strike:
    if not isinstance(raw, dict) or len(raw) != 1 or not set(raw) <= {"delta", "K"}:
        raise ValidationError("option.strike must be exactly one of {'delta': x} or {'K': x}")
    (key, value), = raw.items()
    return Strike(**{key: _num(value, f"option.strike.{key}")})


def from_dict(doc: dict[str, Any]) -> Scenario:
    """Build and validate a scenario; errors name the offending field."""
    if not isinstance(doc, dict):
        raise ValidationError("scenario must be a JSON object")
    try:
        factors = _field(doc, "factors", "")
        if not isinstance(factors, list):
            raise ValidationError("factors must be a list")
        model = SpotModel(
            _seasonality(_field(doc, "seasonality", "")),
            _num(_field(doc, "mu", ""), "mu"),
            _num(_field(doc, "sigma", ""), "sigma"),
            tuple(
                MeanRevertingFactor(
                    _num(_field(f, "beta", f"factors[{k}]"), f"factors[{k}].beta"),
                    _num(_field(f, "sigma", f"factors[{k}]"), f"factors[{k}].sigma"),
                )
                for k, f in enumerate(factors)
            ),
        )
        st = _field(doc, "state", "")
        y = _field(st, "y", "state")
        if not isinstance(y, list):
            raise ValidationError("state.y must be a list")
        state = MarketState(
            _num(_field(st, "t", "state"), "state.t"),
            _num(_field(st, "x", "state"), "state.x"),
            tuple(_num(v, "state.y") for v in y),
        )
        validate(model, state)
        opt = _field(doc, "option", "")
        option = OptionSpec(
            _num(_field(opt, "tau", "option"), "option.tau"),
            _num(_field(opt, "T", "option"), "option.T"),
            _strike(_field(opt, "strike", "option")),
            _num(opt.get("r", 0.0), "option.r"),
        )
        option.check_times(state.t)
        sel_raw = doc.get("selection")
        if sel_raw is None:
            selection = FactorSelection.full(model.n)
        else:
            J = _field(sel_raw, "J", "selection")
            if not isinstance(J, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in J):
                raise ValidationError("selection.J must be a list of integer factor indices")
            selection = FactorSelection(tuple(J))
            selection.check(model.n)

        grid = None
        if doc.get("grid") is not None:
            g = doc["grid"]
            grid = Grid(
                _num(_field(g, "T_min", "grid"), "grid.T_min"),
                _num(_field(g, "T_max", "grid"), "grid.T_max"),
                _num(g.get("step", 1.0), "grid.step"),
            )
        mc = None
        if doc.get("mc") is not None:
            m = doc["mc"]
            seed = _field(m, "seed", "mc")
            if not isinstance(seed, int) or isinstance(seed, bool):
                raise ValidationError("mc.seed must be an integer")
            mc = McConfig(
                seed=seed,
                paths=int(m.get("paths", 1_000_000)),
                antithetic=bool(m.get("antithetic", True)),
                chunks=m.get("chunks"),
            )
        nodes = DEFAULT_NODES
        if doc.get("quad") is not None:
            nodes = _field(doc["quad"], "nodes", "quad")
            if not isinstance(nodes, int) or nodes < 3 or nodes % 2 == 0:
                raise ValidationError(f"quad.nodes must be an odd integer >= 3, got {nodes!r}")
    except ModelError:
        raise
    except (TypeError, AttributeError) as exc:
        raise ValidationError(f"malformed scenario: {exc}") from None
    return Scenario(model, state, option, selection, grid, mc, nodes)


def to_dict(s: Scenario) -> dict[str, Any]:
    m = s.model
    if m.seasonality.kind == "constant":
        seas: dict[str, Any] = {"kind": "constant", "value": m.seasonality.value}
    else:
        seas = {"kind": "tabulated", "knots": [list(k) for k in m.seasonality.knots]}
    strike = s.option.strike
    doc: dict[str, Any] = {
        "seasonality": seas,
        "mu": m.mu,
        "sigma": m.sigma,
        "factors": [{"beta": f.beta, "sigma": f.sigma} for f in m.factors],
        "state": {"t": s.state.t, "x": s.state.x, "y": list(s.state.y)},
        "option": {
            "tau": s.option.tau,
            "T": s.option.T,
            "strike": {"delta": strike.delta} if strike.delta is not None else {"K": strike.K},
            "r": s.option.r,
        },
        "selection": {"J": list(s.selection.indices)},
    }
    if s.grid is not None:
        doc["grid"] = {"T_min": s.grid.T_min, "T_max": s.grid.T_max, "step": s.grid.step}
    if s.mc is not None:
        doc["mc"] = {
            "seed": s.mc.seed,
            "paths": s.mc.paths,
            "antithetic": s.mc.antithetic,
            "chunks": s.mc.chunks,
        }
    if s.quad_nodes != DEFAULT_NODES:
        doc["quad"] = {"nodes": s.quad_nodes}
    return doc


def dumps(s: Scenario) -> str:
    return json.dumps(to_dict(s), indent=2)


def loads(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"scenario is not valid JSON: {exc}") from None
    return from_dict(doc)


def merge(base: dict, override: dict) -> dict:
    """Deep-merge ``override`` into a copy of ``base``; lists are replaced whole."""
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict) and key != "strike":
            out[key] = merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load(path: str | Path | None) -> Scenario:
    """Read a scenario file layered over the built-in example (``None`` gives the example)."""
    if path is None:
        return from_dict(EXAMPLE)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read scenario {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"scenario {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ValidationError("scenario must be a JSON object")
    return from_dict(merge(EXAMPLE, doc))


def example() -> Scenario:
    return from_dict(EXAMPLE)


def grid_values(grid: Grid) -> np.ndarray:
    return np.asarray(grid.values(), dtype=float)
