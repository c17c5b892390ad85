"""Monte Carlo oracle with exact Gaussian transitions.

X and every Y_i have closed-form Gaussian transition laws, so the simulator
steps straight to the target time with no discretisation error. Paths are
generated in fixed-size blocks; block ``k`` draws from its own PCG64 stream
keyed by ``(seed, k)``. Blocks are reduced in index order, so an estimate does
not depend on how many worker threads (``chunks``) computed it.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BadNodeCount, TimeOrderViolation, ValidationError
from .forward import _log_forward, forward_price
from .model import FactorSelection, MarketState, OptionSpec, SpotModel
from .pricing import std_normal_inv

Z95 = 1.959964
BLOCK = 1 << 14  # samples per RNG stream
_U_SCALE = 2.0**-52


@dataclass(frozen=True)
class McConfig:
    seed: int
    paths: int = 1_000_000
    antithetic: bool = True
    chunks: int | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.paths < 2:
            raise ValidationError(f"need at least 2 paths, got {self.paths}")
        if self.antithetic and self.paths % 2:
            raise ValidationError(f"antithetic sampling needs an even path count, got {self.paths}")
        if self.chunks is not None and self.chunks < 1:
            raise ValidationError(f"chunks must be >= 1, got {self.chunks}")

    @property
    def workers(self) -> int:
        return self.chunks or os.cpu_count() or 1


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    ci95: tuple[float, float]
    paths: int
    seed: int

    @classmethod
    def from_moments(cls, mean: float, stderr: float, cfg: McConfig) -> McEstimate:
        mean, stderr = float(mean), float(max(stderr, 0.0))
        return cls(mean, stderr, (mean - Z95 * stderr, mean + Z95 * stderr), cfg.paths, cfg.seed)

    def z_score(self, reference: float, rtol: float = 1e-12) -> float:
        """(mean - reference) / stderr; a zero stderr gives 0 on agreement, else inf."""
        diff = self.mean - reference
        if self.stderr > 0.0:
            return diff / self.stderr
        if abs(diff) <= rtol * max(1.0, abs(reference)):
            return 0.0
        return math.copysign(math.inf, diff)

    def covers(self, reference: float, k: float = 3.0) -> bool:
        return abs(self.z_score(reference)) <= k


def block_normals(seed: int, block: int, count: int, dim: int) -> np.ndarray:
    """Standard normals for one block, by inverse-CDF of open-interval uniforms."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))
    bits = rng.integers(0, 1 << 52, size=(count, dim), dtype=np.uint64)
    return std_normal_inv((bits + 0.5) * _U_SCALE)


def _block_stats(values: np.ndarray):
    v = values.reshape(len(values), -1)
    # Shifting by the first sample keeps constant samples exact.
    x0 = v[0]
    mean = x0 + (v - x0).mean(axis=0)
    dev = v - mean
    return len(v), mean, dev.T @ dev


def _combine(a, b):
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    d = mb - ma
    return n, ma + d * (nb / n), sa + sb + np.outer(d, d) * (na * nb / n)


def simulate(
    sampler: Callable[[np.ndarray], np.ndarray], dim: int, cfg: McConfig
) -> tuple[int, np.ndarray, np.ndarray]:
    """Run ``sampler`` over all blocks; return (samples, mean vector, covariance of one sample).

    With antithetic sampling one sample is the average over a pair (z, -z).
    """
    samples = cfg.paths // 2 if cfg.antithetic else cfg.paths
    sizes = [BLOCK] * (samples // BLOCK)
    if samples % BLOCK:
        sizes.append(samples % BLOCK)

    def run(k: int):
        z = block_normals(cfg.seed, k, sizes[k], dim)
        v = np.asarray(sampler(z), dtype=float)
        if cfg.antithetic:
            v = 0.5 * (v + np.asarray(sampler(-z), dtype=float))
        return _block_stats(v)

    workers = min(cfg.workers, len(sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(k) for k in range(len(sizes))]
    acc = parts[0]
    for p in parts[1:]:
        acc = _combine(acc, p)
    n, mean, m2 = acc
    return n, mean, m2 / (n - 1)


def _scalar_estimate(sampler, dim: int, cfg: McConfig) -> McEstimate:
    n, mean, cov = simulate(sampler, dim, cfg)
    return McEstimate.from_moments(mean[0], math.sqrt(cov[0, 0] / n), cfg)


def _transition(model: SpotModel, x, y, dt: float, z: np.ndarray):
    """Exact step of (X, Y) over ``dt`` days with normals z[:, 0] for X, z[:, 1:] for Y."""
    x_new = x + model.mu * dt + model.sigma * math.sqrt(dt) * z[:, 0]
    if not model.n:
        return x_new, y
    betas = model.betas
    sd = np.sqrt(model.sigmas**2 / (2.0 * betas) * -np.expm1(-2.0 * betas * dt))
    y_new = np.exp(-betas * dt) * y + sd * z[:, 1:]
    return x_new, y_new


def simulate_terminal(
    model: SpotModel, state: MarketState, u: float, rng: np.random.Generator, size: int
) -> tuple[np.ndarray, np.ndarray]:
    """Sample (X(u), Y(u)) given the state at t; Y has shape (size, n)."""
    z = rng.standard_normal((size, model.n + 1))
    return terminal_from_normals(model, state, u, z)


def terminal_from_normals(model: SpotModel, state: MarketState, u: float, z: np.ndarray):
    if u < state.t:
        raise TimeOrderViolation(f"horizon u={u} precedes t={state.t}")
    m = len(z)
    x0 = np.full(m, state.x)
    y0 = np.broadcast_to(np.asarray(state.y, dtype=float), (m, model.n))
    return _transition(model, x0, y0, u - state.t, z)


def mc_forward(model: SpotModel, state: MarketState, T: float, cfg: McConfig) -> McEstimate:
    """Estimate f(t,T) = E[S(T) | F_t]."""
    if T < state.t:
        raise TimeOrderViolation(f"delivery T={T} precedes t={state.t}")
    lam = model.seasonality(T)

    def spot(z):
        x, y = terminal_from_normals(model, state, T, z)
        return lam * np.exp(x + y.sum(axis=1))

    return _scalar_estimate(spot, model.n + 1, cfg)


def _log_return_sampler(model: SpotModel, state: MarketState, spec: OptionSpec, selection: FactorSelection):
    """Sampler of Z(t,tau,T) = log f(tau,T) - log f(t,T) driven by the selected factors.

    Simulates the reduced model's state to tau and evaluates its closed-form
    forward there; the selection's dimension is 1 + len(selection).
    """
    spec.check_times(state.t)
    reduced = model.restrict(selection)
    rstate = state.restrict(selection)
    T, tau = spec.T, spec.tau
    log_f0 = float(_log_forward(reduced, rstate, T))
    # log h(tau,T), the deterministic part at exercise
    log_h_tau = float(_log_forward(reduced, MarketState(tau, 0.0, (0.0,) * reduced.n), T))
    damp = np.exp(-reduced.betas * (T - tau))

    def log_return(z):
        x, y = terminal_from_normals(reduced, rstate, tau, z)
        log_f_tau = log_h_tau + x + (y * damp).sum(axis=1)
        return log_f_tau - log_f0

    return log_return, reduced.n + 1


def mc_option(
    model: SpotModel,
    state: MarketState,
    spec: OptionSpec,
    selection: FactorSelection | None,
    cfg: McConfig,
) -> McEstimate:
    """Estimate exp(-r(tau-t)) E[max(f(tau,T) - K, 0)].

    The initial forward and the strike always come from the full model, as for
    the closed-form C_J.
    """
    if selection is None:
        selection = FactorSelection.full(model.n)
    selection.check(model.n)
    log_return, dim = _log_return_sampler(model, state, spec, selection)
    f0 = forward_price(model, state, spec.T).price
    K = spec.strike.resolve(f0)
    disc = math.exp(-spec.r * (spec.tau - state.t))
    return _scalar_estimate(lambda z: disc * np.maximum(f0 * np.exp(log_return(z)) - K, 0.0), dim, cfg)


def mc_evolved_forward(
    model: SpotModel,
    state: MarketState,
    spec: OptionSpec,
    selection: FactorSelection | None,
    cfg: McConfig,
) -> McEstimate:
    """Estimate E[f(tau,T)]; the martingale property makes it f(t,T)."""
    if selection is None:
        selection = FactorSelection.full(model.n)
    selection.check(model.n)
    log_return, dim = _log_return_sampler(model, state, spec, selection)
    f0 = forward_price(model, state, spec.T).price
    return _scalar_estimate(lambda z: f0 * np.exp(log_return(z)), dim, cfg)


def mc_log_return_variance(
    model: SpotModel,
    state: MarketState,
    spec: OptionSpec,
    selection: FactorSelection | None,
    cfg: McConfig,
) -> McEstimate:
    """Sample variance of Z(t,tau,T), standard error by the delta method."""
    if selection is None:
        selection = FactorSelection.full(model.n)
    selection.check(model.n)
    log_return, dim = _log_return_sampler(model, state, spec, selection)

    def moments(z):
        r = log_return(z)
        return np.column_stack([r, r * r])

    n, mean, cov = simulate(moments, dim, cfg)
    m1, m2 = mean
    grad = np.array([-2.0 * m1, 1.0])
    return McEstimate.from_moments(m2 - m1 * m1, math.sqrt(max(grad @ cov @ grad, 0.0) / n), cfg)


def mc_average_forward(
    model: SpotModel,
    state: MarketState,
    T1: float,
    T2: float,
    time_steps: int,
    cfg: McConfig,
) -> McEstimate:
    """Estimate the expected average spot over [T1, T2].

    Each path is stepped exactly across a uniform grid of ``time_steps``
    intervals and averaged with the trapezoid rule, which carries an O(h^2) bias.
    """
    if not state.t <= T1 < T2:
        raise TimeOrderViolation(f"need t <= T1 < T2, got t={state.t}, T1={T1}, T2={T2}")
    if time_steps < 2:
        raise BadNodeCount(f"need at least 2 time steps, got {time_steps}")
    grid = np.linspace(T1, T2, time_steps + 1)
    lam = np.asarray(model.seasonality(grid), dtype=float)
    d = model.n + 1
    steps = np.diff(np.concatenate([[state.t], grid]))

    def average(z):
        m = len(z)
        x = np.full(m, state.x)
        y = np.broadcast_to(np.asarray(state.y, dtype=float), (m, model.n))
        total = np.zeros(m)
        for k, dt in enumerate(steps):
            x, y = _transition(model, x, y, float(dt), z[:, k * d:(k + 1) * d])
            s = lam[k] * np.exp(x + y.sum(axis=1))
            total += 0.5 * s if k in (0, time_steps) else s
        return total / time_steps

    return _scalar_estimate(average, d * (time_steps + 1), cfg)
