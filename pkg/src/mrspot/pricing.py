"""Log-forward volatility, Black's formula on forwards, delta and vega."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from .errors import TimeOrderViolation, ValidationError, ZeroVolatility
from .forward import forward_price
from .model import FactorSelection, MarketState, MeanRevertingFactor, OptionSpec, SpotModel

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)


def std_normal_cdf(x):
    """Phi(x) through the complementary error function.

    Writing Phi(x) = erfc(-x / sqrt 2) / 2 keeps full relative accuracy in the
    lower tail; values below -38 underflow cleanly to 0.
    """
    return 0.5 * special.erfc(-np.asarray(x, dtype=float) / SQRT2)[()]


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return (np.exp(-0.5 * x * x) / SQRT2PI)[()]


def std_normal_inv(p):
    """Inverse of Phi, used to map uniforms to normals in the simulator."""
    return special.ndtri(p)


def c_coefficient(factor: MeanRevertingFactor, t: float, tau: float) -> float:
    """Variance a factor contributes to the log-forward up to exercise.

    c = sigma^2 / (2 beta) * (1 - exp(-2 beta (tau - t))).
    """
    if tau < t:
        raise TimeOrderViolation(f"exercise tau={tau} precedes valuation t={t}")
    return factor.stationary_variance * -math.expm1(-2.0 * factor.beta * (tau - t))


@dataclass(frozen=True)
class VolBreakdown:
    sigma_B: float
    c: tuple[float, ...]
    total: float
    selection: FactorSelection

    @property
    def variance(self) -> float:
        return self.total**2

    @property
    def cap(self) -> float:
        """sqrt(sigma_B^2 + sum of all c_i), the T-independent upper bound."""
        return math.sqrt(self.sigma_B**2 + sum(self.c))


def _variance_terms(model: SpotModel, t: float, tau: float, T: float) -> tuple[float, np.ndarray, np.ndarray]:
    if not t <= tau <= T:
        raise TimeOrderViolation(f"need t <= tau <= T, got t={t}, tau={tau}, T={T}")
    sigma_b2 = model.sigma**2 * (tau - t)
    c = np.array([c_coefficient(f, t, tau) for f in model.factors], dtype=float)
    damped = c * np.exp(-2.0 * model.betas * (T - tau)) if model.n else c
    return sigma_b2, c, damped


def total_vol(
    model: SpotModel, t: float, tau: float, T: float, selection: FactorSelection
) -> VolBreakdown:
    """Standard deviation of log f(tau,T) - log f(t,T) keeping only ``selection``."""
    sigma_b2, c, damped = _variance_terms(model, t, tau, T)
    mask = selection.mask(model.n)
    var = sigma_b2 + float(np.sum(damped[mask]))
    return VolBreakdown(math.sqrt(sigma_b2), tuple(float(v) for v in c), math.sqrt(var), selection)


def vol_table(
    model: SpotModel,
    t: float,
    tau: float,
    grid: Sequence[float],
    selection: FactorSelection,
) -> list[tuple[float, float, float, float]]:
    """Rows (T, sigma_I, sigma_J, sigma_B) over a delivery grid."""
    full = FactorSelection.full(model.n)
    rows = []
    for T in grid:
        vi = total_vol(model, t, tau, T, full)
        vj = total_vol(model, t, tau, T, selection)
        rows.append((float(T), vi.total, vj.total, vi.sigma_B))
    return rows


def vol_table_to_csv(rows) -> str:
    buf = io.StringIO()
    buf.write("T,sigma_I,sigma_J,sigma_B\n")
    for T, si, sj, sb in rows:
        buf.write(f"{T!r},{si!r},{sj!r},{sb!r}\n")
    return buf.getvalue()


@dataclass(frozen=True)
class BlackInputs:
    f: float
    K: float
    total_std: float
    discount: float = 1.0

    def __post_init__(self) -> None:
        for name in ("f", "K", "total_std", "discount"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.f > 0.0 and self.K > 0.0):
            raise ValidationError(f"forward and strike must be > 0, got f={self.f}, K={self.K}")
        if not self.total_std >= 0.0:
            raise ValidationError(f"total_std must be >= 0, got {self.total_std}")
        if not 0.0 < self.discount <= 1.0:
            raise ValidationError(f"discount factor must be in (0, 1], got {self.discount}")

    @property
    def variance(self) -> float:
        return self.total_std**2

    def with_variance(self, z: float) -> BlackInputs:
        return BlackInputs(self.f, self.K, math.sqrt(z), self.discount)


def _d1_d2(inp: BlackInputs) -> tuple[float, float]:
    s = inp.total_std
    d2 = (math.log(inp.f / inp.K) - 0.5 * s * s) / s
    return d2 + s, d2


def black_call(inp: BlackInputs) -> float:
    """Discounted Black price of a call on a forward.

    A zero total_std returns the discounted intrinsic value, the continuous limit.
    """
    if inp.total_std == 0.0:
        return inp.discount * max(inp.f - inp.K, 0.0)
    d1, d2 = _d1_d2(inp)
    return float(inp.discount * (inp.f * std_normal_cdf(d1) - inp.K * std_normal_cdf(d2)))


def black_delta(inp: BlackInputs) -> float:
    if inp.total_std == 0.0:
        if inp.f == inp.K:
            raise ZeroVolatility("delta is undefined at the money with zero volatility")
        return inp.discount * float(inp.f > inp.K)
    d1, _ = _d1_d2(inp)
    return inp.discount * float(std_normal_cdf(d1))


def vega_in_variance(inp: BlackInputs) -> float:
    """dC/dz with z the total variance: discount * f * phi(d1) / (2 sqrt z)."""
    if inp.total_std == 0.0:
        raise ZeroVolatility("vega in variance needs a positive total variance")
    d1, _ = _d1_d2(inp)
    return inp.discount * inp.f * float(std_normal_pdf(d1)) / (2.0 * inp.total_std)


def black_inputs(
    model: SpotModel,
    state: MarketState,
    spec: OptionSpec,
    selection: FactorSelection,
) -> BlackInputs:
    """Inputs for C_J: the full-model initial curve with the selection's volatility."""
    spec.check_times(state.t)
    f = forward_price(model, state, spec.T).price
    K = spec.strike.resolve(f)
    vol = total_vol(model, state.t, spec.tau, spec.T, selection)
    return BlackInputs(f, K, vol.total, math.exp(-spec.r * (spec.tau - state.t)))


def option_price(
    model: SpotModel,
    state: MarketState,
    spec: OptionSpec,
    selection: FactorSelection | None = None,
) -> float:
    """Call price keeping the factors in ``selection`` (all of them by default).

    The initial curve always comes from the full model; only the volatility
    reflects the selection.
    """
    if selection is None:
        selection = FactorSelection.full(model.n)
    return black_call(black_inputs(model, state, spec, selection))
