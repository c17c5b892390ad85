import math

import numpy as np
import pytest

from helpers import example
from mrspot import (
    FactorSelection,
    MarketState,
    McConfig,
    MeanRevertingFactor,
    Seasonality,
    SpotModel,
    average_forward,
    forward_price,
    mc_average_forward,
    mc_forward,
    mc_option,
    option_price,
    total_vol,
)
from mrspot.errors import BadNodeCount, TimeOrderViolation, ValidationError
from mrspot.forward import forward_curve
from mrspot.montecarlo import (
    Z95,
    block_normals,
    mc_evolved_forward,
    mc_log_return_variance,
    simulate_terminal,
)

MILLION = McConfig(seed=42, paths=1_000_000, antithetic=True, chunks=1)
DETERMINISTIC = SpotModel(Seasonality.constant(10.0), 0.0, 0.0)


def test_config_validation():
    with pytest.raises(ValidationError):
        McConfig(seed=-1)
    with pytest.raises(ValidationError):
        McConfig(seed=1, paths=1)
    with pytest.raises(ValidationError):
        McConfig(seed=1, paths=11, antithetic=True)
    with pytest.raises(ValidationError):
        McConfig(seed=1, chunks=0)
    McConfig(seed=2**64 - 1, paths=11, antithetic=False)


def test_estimate_ci():
    model, state, *_ = example()
    est = mc_forward(model, state, 25.0, McConfig(seed=3, paths=2000))
    assert est.ci95 == (est.mean - Z95 * est.stderr, est.mean + Z95 * est.stderr)
    assert est.paths == 2000 and est.seed == 3


def test_block_normals_reproducible_and_symmetric_source():
    a = block_normals(7, 3, 100, 2)
    assert np.array_equal(a, block_normals(7, 3, 100, 2))
    assert not np.array_equal(a, block_normals(7, 4, 100, 2))
    assert np.all(np.isfinite(a))


def test_zero_step_returns_state():
    model, *_ = example()
    state = MarketState(5.0, 0.3, (0.1, -0.2))
    x, y = simulate_terminal(model, state, 5.0, np.random.default_rng(0), 10)
    assert np.all(x == 0.3)
    assert np.all(y == np.array([0.1, -0.2]))


def test_terminal_rejects_past_horizon():
    model, *_ = example()
    with pytest.raises(TimeOrderViolation):
        simulate_terminal(model, MarketState(5.0, 0.0, (0.0, 0.0)), 4.0, np.random.default_rng(0), 1)


@pytest.mark.parametrize("beta, sigma, du", [(0.3466, 0.01, 3.0), (0.0495, 0.02, 10.0), (1.0, 0.05, 0.5)])
def test_ou_transition_moments(beta, sigma, du):
    model = SpotModel(Seasonality.constant(1.0), 0.0, 0.0, (MeanRevertingFactor(beta, sigma),))
    state = MarketState(0.0, 0.0, (1.0,))
    n = 1_000_000
    _, y = simulate_terminal(model, state, du, np.random.default_rng(1), n)
    y = y[:, 0]
    mean = math.exp(-beta * du)
    var = sigma**2 / (2 * beta) * (1 - math.exp(-2 * beta * du))
    assert abs(y.mean() - mean) <= 3 * y.std(ddof=1) / math.sqrt(n)
    dev2 = (y - y.mean()) ** 2
    assert abs(dev2.mean() - var) <= 3 * dev2.std(ddof=1) / math.sqrt(n)


def test_mc_forward_covers_closed_form():
    model, state, *_ = example()
    est = mc_forward(model, state, 25.0, MILLION)
    assert est.covers(10.017863)
    assert est.covers(forward_price(model, state, 25.0).price)


def test_mc_forward_deterministic_model():
    state = MarketState(0.0, 0.0)
    est = mc_forward(DETERMINISTIC, state, 30.0, McConfig(seed=1, paths=1000))
    assert est.stderr == 0.0
    assert est.mean == forward_price(DETERMINISTIC, state, 30.0).price


def test_chunking_does_not_change_estimates():
    model, state, spec, J, I = example()
    a = mc_option(model, state, spec, J, McConfig(seed=9, paths=200_000, chunks=1))
    b = mc_option(model, state, spec, J, McConfig(seed=9, paths=200_000, chunks=4))
    assert a == b


@pytest.mark.parametrize("which", ["I", "J"])
def test_mc_option_covers_black(which):
    model, state, spec, J, I = example()
    sel = I if which == "I" else J
    est = mc_option(model, state, spec, sel, MILLION)
    assert est.covers(option_price(model, state, spec, sel))
    assert est.covers({"I": 0.135153, "J": 0.126379}[which], k=3.2)


@pytest.mark.parametrize("sel", [(1, 2), (1,), (2,), ()])
def test_martingale_of_evolved_forward(sel):
    model, state, spec, *_ = example()
    state = MarketState(0.0, 0.1, (0.2, -0.1))
    est = mc_evolved_forward(model, state, spec, FactorSelection(sel), McConfig(seed=5, paths=400_000))
    assert est.covers(forward_price(model, state, spec.T).price)


def test_log_return_variance():
    model, state, spec, J, I = example()
    est = mc_log_return_variance(model, state, spec, I, MILLION)
    assert est.covers(total_vol(model, 0.0, 10.0, 25.0, I).variance)
    est_j = mc_log_return_variance(model, state, spec, J, McConfig(seed=6, paths=400_000))
    assert est_j.covers(total_vol(model, 0.0, 10.0, 25.0, J).variance)


def test_antithetic_reduces_stderr():
    model, state, spec, J, I = example()
    plain = mc_option(model, state, spec, I, McConfig(seed=4, paths=400_000, antithetic=False))
    anti = mc_option(model, state, spec, I, McConfig(seed=4, paths=400_000, antithetic=True))
    assert anti.stderr <= plain.stderr


def test_mc_average_forward_covers_quadrature():
    model, state, *_ = example()
    est = mc_average_forward(model, state, 10.0, 40.0, 64, McConfig(seed=8, paths=100_000))
    assert est.covers(average_forward(model, state, 10.0, 40.0, 201))


def test_mc_average_forward_deterministic():
    est = mc_average_forward(DETERMINISTIC, MarketState(0.0, 0.0), 10.0, 40.0, 64, McConfig(seed=1, paths=100))
    assert est.stderr == 0.0 and est.mean == 10.0


def test_trapezoid_bias_below_noise():
    # E[trapezoid average] is the trapezoid average of the forward curve, so the
    # bias between 64 and 128 steps is deterministic and must sit below the noise.
    model, state, *_ = example()

    def trapezoid(steps):
        f = np.array([q.price for q in forward_curve(model, state, np.linspace(10.0, 40.0, steps + 1))])
        return (0.5 * (f[0] + f[-1]) + f[1:-1].sum()) / steps

    cfg = McConfig(seed=8, paths=100_000)
    coarse = mc_average_forward(model, state, 10.0, 40.0, 64, cfg)
    fine = mc_average_forward(model, state, 10.0, 40.0, 128, cfg)
    assert abs(trapezoid(64) - trapezoid(128)) < min(coarse.stderr, fine.stderr)
    assert fine.covers(average_forward(model, state, 10.0, 40.0))


def test_mc_average_forward_arguments():
    model, state, *_ = example()
    with pytest.raises(BadNodeCount):
        mc_average_forward(model, state, 10.0, 40.0, 1, McConfig(seed=1, paths=10))
    with pytest.raises(TimeOrderViolation):
        mc_average_forward(model, state, 40.0, 10.0, 8, McConfig(seed=1, paths=10))
