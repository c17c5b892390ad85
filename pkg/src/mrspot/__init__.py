"""Pricing, hedging and error bounds for options on energy forwards under a
geometric multi-factor mean-reverting spot model. Times are in days."""

from .bounds import (
    ErrorBoundReport,
    RateDiagnostic,
    asymptotic_error,
    exact_hedging_error,
    exact_pricing_error,
    hedging_error_bounds,
    pricing_error_bounds,
    rate_diagnostic,
)
from .forward import ForwardQuote, average_forward, deterministic_part, forward_curve, forward_price
from .model import (
    FactorSelection,
    MarketState,
    MeanRevertingFactor,
    OptionSpec,
    Seasonality,
    SpotModel,
    Strike,
    half_life_to_beta,
    seasonality_bounds,
    validate,
)
from .montecarlo import (
    McConfig,
    McEstimate,
    mc_average_forward,
    mc_evolved_forward,
    mc_forward,
    mc_log_return_variance,
    mc_option,
)
from .pricing import (
    BlackInputs,
    VolBreakdown,
    black_call,
    black_delta,
    c_coefficient,
    option_price,
    std_normal_cdf,
    total_vol,
    vega_in_variance,
)

__version__ = "0.1.0"
