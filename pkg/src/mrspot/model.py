"""Domain types for the geometric multi-factor spot model.

Spot price::

    S(t) = Lambda(t) * exp(X(t) + sum_i Y_i(t))
    dX   = mu dt + sigma dB
    dY_i = -beta_i Y_i dt + sigma_i dB_i

Units: time is measured in DAYS, so ``mu``, ``beta`` and the option rate ``r``
are per day and volatilities are per sqrt(day). Nothing converts to year
fractions implicitly. Factor indices are 1-based throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyHorizon,
    InvalidStrike,
    InvalidSubset,
    NegativeRate,
    NegativeSigma,
    NonFiniteValue,
    NonPositiveBeta,
    NonPositiveHalfLife,
    NonPositiveSigmaFactor,
    SeasonalityNotPositive,
    StateLengthMismatch,
    TimeOrderViolation,
)

LN2 = math.log(2.0)


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise NonFiniteValue(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class Seasonality:
    """Deterministic, bounded, strictly positive price level Lambda(t).

    ``kind`` is ``"constant"`` (uses ``value``) or ``"tabulated"`` (piecewise
    linear through ``knots`` with flat extrapolation).
    """

    kind: str
    value: float | None = None
    knots: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.kind == "constant":
            if self.value is None:
                raise SeasonalityNotPositive("constant seasonality needs a value")
            v = _finite("seasonality value", self.value)
            if v <= 0.0:
                raise SeasonalityNotPositive(f"seasonality level must be > 0, got {v}")
            object.__setattr__(self, "value", v)
        elif self.kind == "tabulated":
            if not self.knots:
                raise SeasonalityNotPositive("tabulated seasonality needs at least one knot")
            knots = tuple((_finite("knot time", t), _finite("knot level", v)) for t, v in self.knots)
            times = [k[0] for k in knots]
            if any(b <= a for a, b in zip(times, times[1:])):
                raise SeasonalityNotPositive("seasonality knot times must be strictly increasing")
            if any(v <= 0.0 for _, v in knots):
                raise SeasonalityNotPositive("seasonality levels must all be > 0")
            object.__setattr__(self, "knots", knots)
        else:
            raise SeasonalityNotPositive(f"unknown seasonality kind {self.kind!r}")

    @classmethod
    def constant(cls, value: float) -> Seasonality:
        return cls("constant", value=value)

    @classmethod
    def tabulated(cls, knots: Iterable[Sequence[float]]) -> Seasonality:
        return cls("tabulated", knots=tuple((float(t), float(v)) for t, v in knots))

    def __call__(self, t):
        """Evaluate Lambda at a time or an array of times (days)."""
        if self.kind == "constant":
            if np.ndim(t) == 0:
                return self.value
            return np.full(np.shape(t), self.value)
        times = [k[0] for k in self.knots]
        levels = [k[1] for k in self.knots]
        out = np.interp(t, times, levels)
        return float(out) if np.ndim(t) == 0 else out


@dataclass(frozen=True)
class MeanRevertingFactor:
    beta: float
    sigma: float

    def __post_init__(self) -> None:
        beta = _finite("beta", self.beta)
        sigma = _finite("sigma", self.sigma)
        if beta <= 0.0:
            raise NonPositiveBeta(f"mean-reversion rate beta must be > 0, got {beta}")
        if sigma <= 0.0:
            raise NonPositiveSigmaFactor(f"factor volatility sigma must be > 0, got {sigma}")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "sigma", sigma)

    @property
    def half_life(self) -> float:
        return LN2 / self.beta

    @property
    def stationary_variance(self) -> float:
        return self.sigma**2 / (2.0 * self.beta)


@dataclass(frozen=True)
class SpotModel:
    seasonality: Seasonality
    mu: float
    sigma: float
    factors: tuple[MeanRevertingFactor, ...] = ()

    def __post_init__(self) -> None:
        mu = _finite("mu", self.mu)
        sigma = _finite("sigma", self.sigma)
        if sigma < 0.0:
            raise NegativeSigma(f"long-term volatility sigma must be >= 0, got {sigma}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def n(self) -> int:
        return len(self.factors)

    @property
    def betas(self) -> np.ndarray:
        return np.array([f.beta for f in self.factors], dtype=float)

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([f.sigma for f in self.factors], dtype=float)

    @property
    def growth_rate(self) -> float:
        """b = mu + sigma^2/2, the exponential growth rate of the initial curve."""
        return self.mu + 0.5 * self.sigma**2

    def restrict(self, selection: FactorSelection) -> SpotModel:
        """The reduced model keeping only the selected factors."""
        selection.check(self.n)
        return SpotModel(
            self.seasonality,
            self.mu,
            self.sigma,
            tuple(self.factors[i - 1] for i in selection.indices),
        )


@dataclass(frozen=True)
class MarketState:
    t: float
    x: float
    y: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "t", _finite("t", self.t))
        object.__setattr__(self, "x", _finite("x", self.x))
        object.__setattr__(self, "y", tuple(_finite("y", v) for v in self.y))

    def restrict(self, selection: FactorSelection) -> MarketState:
        return MarketState(self.t, self.x, tuple(self.y[i - 1] for i in selection.indices))


@dataclass(frozen=True)
class Strike:
    """Either an absolute strike ``K`` or a moneyness ``delta = f(t,T)/K``, never both."""

    K: float | None = None
    delta: float | None = None

    def __post_init__(self) -> None:
        if (self.K is None) == (self.delta is None):
            raise InvalidStrike("strike needs exactly one of K or delta")
        name, value = ("K", self.K) if self.K is not None else ("delta", self.delta)
        value = _finite(name, value)
        if value <= 0.0:
            raise InvalidStrike(f"{name} must be > 0, got {value}")
        object.__setattr__(self, name, value)

    @classmethod
    def absolute(cls, K: float) -> Strike:
        return cls(K=K)

    @classmethod
    def moneyness(cls, delta: float) -> Strike:
        return cls(delta=delta)

    def resolve(self, forward: float) -> float:
        """The strike in currency for a given initial forward price."""
        return self.K if self.K is not None else forward / self.delta

    def moneyness_for(self, forward: float) -> float:
        return self.delta if self.delta is not None else forward / self.K


@dataclass(frozen=True)
class OptionSpec:
    """European call exercised at ``tau`` on the forward delivering at ``T`` (days)."""

    tau: float
    T: float
    strike: Strike
    r: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "tau", _finite("tau", self.tau))
        object.__setattr__(self, "T", _finite("T", self.T))
        r = _finite("r", self.r)
        if r < 0.0:
            raise NegativeRate(f"rate r must be >= 0, got {r}")
        object.__setattr__(self, "r", r)
        if self.T < self.tau:
            raise TimeOrderViolation(f"delivery T={self.T} precedes exercise tau={self.tau}")

    def at(self, T: float) -> OptionSpec:
        """Same option with another delivery midpoint."""
        return OptionSpec(self.tau, T, self.strike, self.r)

    def check_times(self, t: float) -> None:
        if not t <= self.tau <= self.T:
            raise TimeOrderViolation(
                f"need t <= tau <= T, got t={t}, tau={self.tau}, T={self.T}"
            )


@dataclass(frozen=True)
class FactorSelection:
    """Subset J of the 1-based factor indices retained by an approximate model."""

    indices: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        idx = sorted(set(int(i) for i in self.indices))
        if len(idx) != len(tuple(self.indices)):
            raise InvalidSubset(f"duplicate factor indices in {list(self.indices)}")
        object.__setattr__(self, "indices", tuple(idx))

    @classmethod
    def full(cls, n: int) -> FactorSelection:
        return cls(tuple(range(1, n + 1)))

    def check(self, n: int) -> None:
        bad = [i for i in self.indices if not 1 <= i <= n]
        if bad:
            raise InvalidSubset(f"factor indices {bad} outside 1..{n}")

    def complement(self, n: int) -> tuple[int, ...]:
        self.check(n)
        return tuple(i for i in range(1, n + 1) if i not in self.indices)

    def mask(self, n: int) -> np.ndarray:
        self.check(n)
        m = np.zeros(n, dtype=bool)
        m[[i - 1 for i in self.indices]] = True
        return m

    def is_full(self, n: int) -> bool:
        return self.indices == tuple(range(1, n + 1))


@dataclass(frozen=True)
class Market:
    """A model and a state that have been checked against each other."""

    model: SpotModel
    state: MarketState


def validate(model: SpotModel, state: MarketState) -> Market:
    """Check the cross-type invariants and return the validated pair.

    The per-type invariants (beta > 0, positive seasonality, ...) are enforced at
    construction, so this only has to add the ones that relate the two objects.
    """
    if len(state.y) != model.n:
        raise StateLengthMismatch(
            f"state has {len(state.y)} factor levels but the model has {model.n} factors"
        )
    return Market(model, state)


def half_life_to_beta(half_life: float) -> float:
    """Mean-reversion rate per day for a half life given in days."""
    h = float(half_life)
    if not h > 0.0 or not math.isfinite(h):
        raise NonPositiveHalfLife(f"half life must be > 0, got {half_life}")
    return LN2 / h


def seasonality_bounds(s: Seasonality, horizon: tuple[float, float]) -> tuple[float, float]:
    """Lower and upper bound of Lambda over the closed interval ``horizon``."""
    lo, hi = float(horizon[0]), float(horizon[1])
    if not lo <= hi:
        raise EmptyHorizon(f"horizon [{lo}, {hi}] is empty")
    if s.kind == "constant":
        return s.value, s.value
    levels = [s(lo), s(hi)] + [v for t, v in s.knots if lo < t < hi]
    return min(levels), max(levels)
