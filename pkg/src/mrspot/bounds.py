"""Pricing and hedging errors from neglecting mean-reverting factors.

C_J and Delta_J use the full-model initial curve f_I(t,T) and differ from C_I
and Delta_I only through the volatility. The errors are bounded by exponential
sums over the neglected factors::

    lower/upper  = alpha/gamma * sum_{i not in J} c_i exp(-(2 beta_i - b)(T - tau))   (price)
    lower/upper  = h/g         * sum_{i not in J} c_i exp(-2 beta_i (T - tau))         (delta)

The bound operations require r = 0.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    NonzeroRateUnsupported,
    RegimeNotCovered,
    ZeroSigmaB,
    ZeroVolatility,
)
from .forward import forward_price
from .model import (
    FactorSelection,
    MarketState,
    OptionSpec,
    SpotModel,
    seasonality_bounds,
)
from .pricing import (
    SQRT2PI,
    _variance_terms,
    black_call,
    black_delta,
    black_inputs,
    vega_in_variance,
)


@dataclass(frozen=True)
class DecayTerm:
    i: int
    c: float
    rate: float


@dataclass(frozen=True)
class ErrorBoundReport:
    T: float
    exact: float
    lower: float
    upper: float
    alpha_or_h: float
    gamma_or_g: float
    b: float | None
    decay_terms: tuple[DecayTerm, ...]
    # C_J for pricing reports, Delta_J for hedging reports
    reference: float

    @property
    def relative(self) -> float:
        return self.exact / self.reference if self.reference != 0.0 else 0.0


@dataclass(frozen=True)
class RateEntry:
    i: int
    rate: float
    converges: bool


@dataclass(frozen=True)
class RateDiagnostic:
    entries: tuple[RateEntry, ...]

    @property
    def converges(self) -> bool:
        return all(e.converges for e in self.entries)


def _require_zero_rate(spec: OptionSpec) -> None:
    if spec.r != 0.0:
        raise NonzeroRateUnsupported(f"error bounds assume r = 0, got r={spec.r}")


def exact_pricing_error(
    model: SpotModel, state: MarketState, spec: OptionSpec, J: FactorSelection
) -> float:
    """C_I - C_J."""
    full = FactorSelection.full(model.n)
    J.check(model.n)
    if J.indices == full.indices:
        return 0.0
    return black_call(black_inputs(model, state, spec, full)) - black_call(
        black_inputs(model, state, spec, J)
    )


def exact_hedging_error(
    model: SpotModel, state: MarketState, spec: OptionSpec, J: FactorSelection
) -> float:
    """|Delta_I - Delta_J|."""
    full = FactorSelection.full(model.n)
    J.check(model.n)
    inp_i = black_inputs(model, state, spec, full)
    inp_j = black_inputs(model, state, spec, J)
    if inp_j.total_std == 0.0:
        raise ZeroVolatility("hedging error needs positive volatility under both selections")
    return abs(black_delta(inp_i) - black_delta(inp_j))


def rate_diagnostic(model: SpotModel, J: FactorSelection) -> RateDiagnostic:
    """Decay rate 2 beta_i - b of each neglected factor's pricing-error term."""
    b = model.growth_rate
    entries = []
    for i in J.complement(model.n):
        rate = 2.0 * model.factors[i - 1].beta - b
        entries.append(RateEntry(i, rate, rate > 0.0))
    return RateDiagnostic(tuple(entries))


def _neglected_sum(c, model, J, T, tau, shift):
    """Decay terms and their sum c_i exp(-(2 beta_i - shift)(T - tau)) over i not in J."""
    terms = []
    total = 0.0
    for i in J.complement(model.n):
        rate = 2.0 * model.factors[i - 1].beta - shift
        terms.append(DecayTerm(i, float(c[i - 1]), rate))
        total += c[i - 1] * math.exp(-rate * (T - tau))
    return tuple(terms), float(total)


def pricing_error_bounds(
    model: SpotModel,
    state: MarketState,
    spec: OptionSpec,
    J: FactorSelection,
    horizon: tuple[float, float] | None = None,
) -> ErrorBoundReport:
    """Exact pricing error and its analytic lower/upper bounds at delivery ``spec.T``.

    ``horizon`` is the time range over which the seasonality is bounded and
    defaults to [t, T].
    """
    _require_zero_rate(spec)
    spec.check_times(state.t)
    J.check(model.n)
    t, tau, T = state.t, spec.tau, spec.T
    sigma_b2, c, _ = _variance_terms(model, t, tau, T)
    if sigma_b2 == 0.0:
        raise ZeroSigmaB("sigma_B = 0 (sigma = 0 or tau = t) makes the pricing bounds singular")
    sigma_b = math.sqrt(sigma_b2)
    cap2 = sigma_b2 + float(np.sum(c))
    b = model.growth_rate
    lam_lo, lam_hi = seasonality_bounds(model.seasonality, horizon or (t, T))

    f = forward_price(model, state, T).price
    log_delta = math.log(spec.strike.moneyness_for(f))
    y = np.asarray(state.y, dtype=float)
    y_nonpos = float(np.sum(y[y <= 0.0]))
    y_pos = float(np.sum(y[y > 0.0]))
    stat_var = float(np.sum(model.sigmas**2 / (2.0 * model.betas))) if model.n else 0.0

    # phi(d1) is bounded below by its value at the largest |d1| over
    # [sigma_B^2, sigma_B^2 + sum c]; 1/(2 sqrt z) by its endpoints; f(t,T) by
    # the Lambda range and the sign split of Y(t).
    d1_max = abs(log_delta) / sigma_b + 0.5 * math.sqrt(cap2)
    alpha = (
        lam_lo
        / (2.0 * SQRT2PI * math.sqrt(cap2))
        * math.exp(b * (tau - t) - 0.5 * d1_max**2 + state.x + y_nonpos)
    )
    gamma = (
        lam_hi
        / (2.0 * SQRT2PI * sigma_b)
        * math.exp(b * (tau - t) + 0.5 * stat_var + state.x + y_pos)
    )
    terms, total = _neglected_sum(c, model, J, T, tau, b)
    reference = black_call(black_inputs(model, state, spec, J))
    return ErrorBoundReport(
        T=float(T),
        exact=exact_pricing_error(model, state, spec, J),
        lower=alpha * total,
        upper=gamma * total,
        alpha_or_h=alpha,
        gamma_or_g=gamma,
        b=b,
        decay_terms=terms,
        reference=reference,
    )


def asymptotic_error(
    model: SpotModel,
    state: MarketState,
    spec: OptionSpec,
    J: FactorSelection,
) -> float:
    """Large-T approximation of C_I - C_J (not a bound).

    Vega in variance at the floor sigma_B^2 times the variance gap
    sum_{i not in J} c_i exp(-2 beta_i (T - tau)). With a fixed moneyness the
    vega carries the exp(b (T - tau)) growth of the initial curve.
    """
    _require_zero_rate(spec)
    spec.check_times(state.t)
    J.check(model.n)
    sigma_b2, c, damped = _variance_terms(model, state.t, spec.tau, spec.T)
    if sigma_b2 == 0.0:
        raise ZeroSigmaB("sigma_B = 0 makes the asymptotic form singular")
    gap = float(np.sum(damped[~J.mask(model.n)])) if model.n else 0.0
    if gap == 0.0:
        return 0.0
    inp = black_inputs(model, state, spec, J).with_variance(sigma_b2)
    return vega_in_variance(inp) * gap


def hedging_error_bounds(
    model: SpotModel, state: MarketState, spec: OptionSpec, J: FactorSelection
) -> ErrorBoundReport:
    """Exact delta error and its analytic bounds.

    Only covers 2 ln(delta) <= sigma_B^2 or 2 ln(delta) >= sigma_B^2 + sum c_i;
    in between the sign of d(Phi(d1))/dz changes and no bound is given.
    """
    _require_zero_rate(spec)
    spec.check_times(state.t)
    J.check(model.n)
    t, tau, T = state.t, spec.tau, spec.T
    sigma_b2, c, _ = _variance_terms(model, t, tau, T)
    if sigma_b2 == 0.0:
        raise ZeroSigmaB("sigma_B = 0 (sigma = 0 or tau = t) makes the hedging bounds singular")
    sum_c = float(np.sum(c))
    cap2 = sigma_b2 + sum_c
    f = forward_price(model, state, T).price
    delta = spec.strike.moneyness_for(f)
    two_ln = 2.0 * math.log(delta)

    if two_ln <= sigma_b2:
        g_gap, h_gap = abs(cap2 - two_ln), abs(sigma_b2 - two_ln)
    elif two_ln >= cap2:
        g_gap, h_gap = abs(sigma_b2 - two_ln), abs(cap2 - two_ln)
    else:
        raise RegimeNotCovered(
            f"hedging bounds undefined for delta={delta!r}: "
            f"sigma_B^2={sigma_b2!r} < 2 ln(delta)={two_ln!r} < "
            f"sigma_B^2 + sum c_i={cap2!r} (sum c_i={sum_c!r})"
        )
    ln_d = 0.5 * two_ln
    k = math.exp(-0.5 * (ln_d**2 / sigma_b2 + abs(ln_d) + 0.25 * cap2))
    pre = 1.0 / (4.0 * SQRT2PI)
    g = pre * sigma_b2**-1.5 * g_gap
    h = k * pre * cap2**-1.5 * h_gap
    terms, total = _neglected_sum(c, model, J, T, tau, 0.0)
    reference = black_delta(black_inputs(model, state, spec, J))
    return ErrorBoundReport(
        T=float(T),
        exact=exact_hedging_error(model, state, spec, J),
        lower=h * total,
        upper=g * total,
        alpha_or_h=h,
        gamma_or_g=g,
        b=None,
        decay_terms=terms,
        reference=reference,
    )


def pricing_error_table(
    model: SpotModel,
    state: MarketState,
    spec: OptionSpec,
    J: FactorSelection,
    grid: Sequence[float],
    horizon: tuple[float, float] | None = None,
) -> list[ErrorBoundReport]:
    return [pricing_error_bounds(model, state, spec.at(T), J, horizon) for T in grid]


def hedging_error_table(
    model: SpotModel,
    state: MarketState,
    spec: OptionSpec,
    J: FactorSelection,
    grid: Sequence[float],
) -> list[ErrorBoundReport]:
    return [hedging_error_bounds(model, state, spec.at(T), J) for T in grid]


def report_to_csv(reports: Sequence[ErrorBoundReport]) -> str:
    buf = io.StringIO()
    buf.write("T,exact,lower,upper,relative\n")
    for r in reports:
        buf.write(f"{r.T!r},{r.exact!r},{r.lower!r},{r.upper!r},{r.relative!r}\n")
    return buf.getvalue()
