"""Shared scenario builders for the test suite."""

from __future__ import annotations

import math

import numpy as np

from mrspot import (
    FactorSelection,
    MarketState,
    MeanRevertingFactor,
    OptionSpec,
    Seasonality,
    SpotModel,
    Strike,
)

EPS = np.finfo(float).eps


def example(T: float = 25.0, delta: float = 1.0):
    model = SpotModel(
        Seasonality.constant(10.0),
        mu=0.0,
        sigma=0.01,
        factors=(MeanRevertingFactor(0.3466, 0.01), MeanRevertingFactor(0.0495, 0.01)),
    )
    state = MarketState(0.0, 0.0, (0.0, 0.0))
    spec = OptionSpec(10.0, T, Strike.moneyness(delta), 0.0)
    return model, state, spec, FactorSelection((1,)), FactorSelection((1, 2))


def random_scenarios(count: int, seed: int = 2024):
    """Random r = 0 scenarios: beta in [0.01, 1], sigma_i in [0.001, 0.05], delta in [0.5, 2].

    The long-term part follows the worked example (sigma = 0.01, mu = 0,
    tau = 10, Lambda = 10); factor levels Y_i(t) are drawn around zero so both
    sign sets are exercised, and J is a random proper subset.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(2, 5))
        factors = tuple(
            MeanRevertingFactor(float(b), float(s))
            for b, s in zip(rng.uniform(0.01, 1.0, n), rng.uniform(0.001, 0.05, n))
        )
        model = SpotModel(Seasonality.constant(10.0), 0.0, 0.01, factors)
        state = MarketState(0.0, float(rng.normal(0, 0.05)), tuple(float(v) for v in rng.normal(0, 0.05, n)))
        keep = rng.random(n) < 0.5
        keep[int(rng.integers(n))] = False
        J = FactorSelection(tuple(int(i) + 1 for i in np.flatnonzero(keep)))
        spec = OptionSpec(10.0, 11.0, Strike.moneyness(float(rng.uniform(0.5, 2.0))), 0.0)
        out.append((model, state, spec, J))
    return out


def grid(spec: OptionSpec, count: int = 70):
    return [spec.tau + k for k in range(1, count + 1)]


def price_tol(model, state, spec) -> float:
    """Rounding allowance for C_I - C_J: both prices carry a few ulp of f(t,T)."""
    from mrspot import forward_price

    return 4.0 * EPS * forward_price(model, state, spec.T).price


def sqrt_ulp(x: float) -> float:
    return math.ulp(x)
