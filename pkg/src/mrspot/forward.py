"""Instantaneous forward prices and the average-delivery forward."""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import simpson

from .errors import BadNodeCount, TimeOrderViolation, UnsortedGrid
from .model import MarketState, SpotModel

DEFAULT_NODES = 201


@dataclass(frozen=True)
class ForwardQuote:
    t: float
    T: float
    price: float
    deterministic_part: float


def _h_exponent(model: SpotModel, t: float, T):
    """log h(t,T) - log Lambda(T), vectorised over T."""
    T = np.asarray(T, dtype=float)
    dt = T - t
    if np.any(dt < 0.0):
        raise TimeOrderViolation(f"delivery time before valuation time t={t}")
    out = model.growth_rate * dt
    if model.n:
        betas, sigmas = model.betas, model.sigmas
        decay = -np.expm1(-2.0 * betas * dt[..., None])
        out = out + 0.5 * np.sum(sigmas**2 / (2.0 * betas) * decay, axis=-1)
    return out


def _log_h(model: SpotModel, t: float, T):
    return np.log(model.seasonality(T)) + _h_exponent(model, t, T)


def _log_forward(model: SpotModel, state: MarketState, T):
    T = np.asarray(T, dtype=float)
    out = _log_h(model, state.t, T) + state.x
    if model.n:
        y = np.asarray(state.y, dtype=float)
        out = out + np.sum(np.exp(-model.betas * (T[..., None] - state.t)) * y, axis=-1)
    return out


def deterministic_part(model: SpotModel, t: float, T: float) -> float:
    """h(t,T): the forward price when X(t) and every Y_i(t) are zero."""
    return float(model.seasonality(T) * np.exp(_h_exponent(model, t, T)))


def forward_price(model: SpotModel, state: MarketState, T: float) -> ForwardQuote:
    """f(t,T) = h(t,T) exp{X(t) + sum_i exp(-beta_i (T-t)) Y_i(t)}."""
    h = deterministic_part(model, state.t, T)
    shift = state.x + sum(
        np.exp(-f.beta * (T - state.t)) * y for f, y in zip(model.factors, state.y)
    )
    price = h if shift == 0.0 else float(h * np.exp(shift))
    return ForwardQuote(state.t, float(T), price, h)


def forward_curve(
    model: SpotModel, state: MarketState, grid: Sequence[float]
) -> list[ForwardQuote]:
    grid = [float(T) for T in grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise UnsortedGrid("delivery grid must be sorted ascending")
    return [forward_price(model, state, T) for T in grid]


def curve_to_csv(quotes: Sequence[ForwardQuote]) -> str:
    buf = io.StringIO()
    buf.write("T,f,h\n")
    for q in quotes:
        buf.write(f"{q.T!r},{q.price!r},{q.deterministic_part!r}\n")
    return buf.getvalue()


def average_forward(
    model: SpotModel,
    state: MarketState,
    T1: float,
    T2: float,
    nodes: int = DEFAULT_NODES,
) -> float:
    """Expected average spot over the delivery period [T1, T2].

    By linearity of the conditional expectation this is the time average of the
    instantaneous forward curve, integrated with composite Simpson on ``nodes``
    equally spaced points (odd, at least 3).
    """
    if not state.t <= T1 < T2:
        raise TimeOrderViolation(f"need t <= T1 < T2, got t={state.t}, T1={T1}, T2={T2}")
    if nodes < 3 or nodes % 2 == 0:
        raise BadNodeCount(f"Simpson needs an odd node count >= 3, got {nodes}")
    u = np.linspace(T1, T2, nodes)
    f = np.exp(_log_forward(model, state, u))
    return float(simpson(f, x=u) / (T2 - T1))
