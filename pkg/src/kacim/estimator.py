"""Gradient-ascent estimation of the Kac independence measure.

The estimator searches for the frequency pair ``(alpha, beta)`` maximising
``|delta_n(alpha, beta)|``.  Each iteration draws a fresh mini-batch without
replacement, standardizes it, evaluates the discrepancy and its analytic
gradient, and takes one adaptive-moment ascent step.  The reported value is
``|delta_n|`` at the final frequencies on the whole (standardized) sample.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from kacim._rng import derive_seed, stream
from kacim.data import PairedSample, standardize
from kacim.ecf import (
    MODULUS_EPS,
    FrequencyPoint,
    SmoothingSpec,
    delta_from_arrays,
    delta_grad_from_arrays,
)
from kacim.optim import AdamState, optimizer_step, project_unit_sphere

MIN_PERMUTATIONS = 20


class EstimationError(ArithmeticError):
    """Numerical failure during estimation."""

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message if iteration is None else f"iteration {iteration}: {message}")
        self.iteration = iteration


@dataclass(frozen=True)
class EstimatorConfig:
    iterations: int = 1000
    batch_size: int = 1024
    learning_rate: float = 0.007
    weight_decay: float = 0.01
    unit_sphere: bool = True
    smoothing: SmoothingSpec | None = None
    freq_norm_bound: float | None = None
    seed: int = 0
    standardize_batches: bool = True
    # ascents from fresh initialisations (antithetic pairs); the best final value wins
    restarts: int = 1

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not (math.isfinite(self.learning_rate) and self.learning_rate > 0):
            raise ValueError("learning_rate must be finite and > 0")
        if not (math.isfinite(self.weight_decay) and self.weight_decay >= 0):
            raise ValueError("weight_decay must be finite and >= 0")
        if self.freq_norm_bound is not None and not (
                math.isfinite(self.freq_norm_bound) and self.freq_norm_bound > 0):
            raise ValueError("freq_norm_bound must be finite and > 0")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass(frozen=True)
class EstimateResult:
    kappa_hat: float
    argmax: FrequencyPoint
    trace: np.ndarray  # (iterations, 2): iteration index, batch objective
    full_sample_value: float
    degenerate_projections: int = 0
    restart_values: tuple = field(default=(), compare=False)


def _standardize(m: np.ndarray, enabled: bool) -> np.ndarray:
    return standardize(m)[0] if enabled else m


def _objective_and_grad(xb, yb, alpha, beta, h: float):
    g = delta_grad_from_arrays(xb, yb, alpha, beta)
    r = g.modulus
    ga, gb = g.modulus_grad()
    if h == 0:
        return r, ga, gb
    damp = math.exp(-0.5 * h * h * (float(alpha @ alpha) + float(beta @ beta)))
    if r < MODULUS_EPS:
        return damp * r, ga, gb
    # d/dgamma [damp * r] = damp * (grad r - h^2 r gamma)
    return damp * r, damp * (ga - h * h * r * alpha), damp * (gb - h * h * r * beta)


def _final_value(x, y, alpha, beta, h: float) -> float:
    r = delta_from_arrays(x, y, alpha, beta).modulus
    if h == 0:
        return r
    return math.exp(-0.5 * h * h * (float(alpha @ alpha) + float(beta @ beta))) * r


def _ascend(s: PairedSample, xs: np.ndarray, ys: np.ndarray, cfg: EstimatorConfig, restart: int):
    h = cfg.smoothing.h if cfg.smoothing is not None else 0.0
    d_x, d_y = s.d_x, s.d_y
    # restarts come in antithetic pairs: the odd one negates beta, probing the
    # opposite sign of the x-y coupling from the same alpha
    init = stream(cfg.seed, "init", restart // 2)
    alpha = init.uniform(-1.0, 1.0, d_x)
    beta = init.uniform(-1.0, 1.0, d_y) * (-1.0 if restart % 2 else 1.0)
    degenerate = 0
    if cfg.unit_sphere:
        alpha, da = project_unit_sphere(alpha)
        beta, db = project_unit_sphere(beta)
        degenerate += da + db
    batches = stream(cfg.seed, "batch", restart)
    state = AdamState.zeros(d_x + d_y)
    trace = np.empty((cfg.iterations, 2))
    full_batch = cfg.batch_size == s.n

    for it in range(cfg.iterations):
        if full_batch:
            xb, yb = xs, ys
        else:
            idx = batches.choice(s.n, cfg.batch_size, replace=False)
            xb = _standardize(s.x[idx], cfg.standardize_batches)
            yb = _standardize(s.y[idx], cfg.standardize_batches)
        value, ga, gb = _objective_and_grad(xb, yb, alpha, beta, h)
        trace[it] = (it, value)
        grad = np.concatenate([ga, gb])
        if not np.isfinite(grad).all():
            raise EstimationError("non-finite gradient", it)
        params, state = optimizer_step(np.concatenate([alpha, beta]), grad, state,
                                       cfg.learning_rate, cfg.weight_decay)
        alpha, beta = params[:d_x], params[d_x:]
        if cfg.unit_sphere:
            alpha, da = project_unit_sphere(alpha)
            beta, db = project_unit_sphere(beta)
            degenerate += da + db
        if cfg.freq_norm_bound is not None:
            norm = math.sqrt(float(alpha @ alpha) + float(beta @ beta))
            if norm > cfg.freq_norm_bound:
                alpha = alpha * (cfg.freq_norm_bound / norm)
                beta = beta * (cfg.freq_norm_bound / norm)

    value = _final_value(xs, ys, alpha, beta, h)
    if not math.isfinite(value):
        raise EstimationError("non-finite final value", cfg.iterations)
    return value, FrequencyPoint(alpha, beta), trace, degenerate


def estimate(s: PairedSample, cfg: EstimatorConfig = EstimatorConfig()) -> EstimateResult:
    """Estimate KacIM for ``s``; smoothed when ``cfg.smoothing`` is set.

    Deterministic for a given ``cfg.seed``.
    """
    if cfg.batch_size > s.n:
        raise ValueError(f"batch_size {cfg.batch_size} exceeds sample size {s.n}")
    xs = _standardize(s.x, cfg.standardize_batches)
    ys = _standardize(s.y, cfg.standardize_batches)
    best = None
    values = []
    for r in range(cfg.restarts):
        run = _ascend(s, xs, ys, cfg, r)
        values.append(run[0])
        if best is None or run[0] > best[0]:
            best = run
    value, freq, trace, degenerate = best
    return EstimateResult(value, freq, trace, value, degenerate, tuple(values))


def estimate_smoothed(s: PairedSample, cfg: EstimatorConfig) -> EstimateResult:
    """Ascend the Gaussian-smoothed discrepancy; ``cfg.smoothing`` is required."""
    if cfg.smoothing is None:
        raise ValueError("estimate_smoothed needs cfg.smoothing")
    return estimate(s, cfg)


def bandwidth_schedule(n: int, rate: float = 0.5) -> float:
    """Vanishing bandwidth ``h_n = n ** -rate`` with ``0 < rate < 1``."""
    if not 0 < rate < 1:
        raise ValueError("rate must lie in (0, 1)")
    return float(n) ** -rate


def permutation_null(s: PairedSample, cfg: EstimatorConfig, n_perm: int,
                     workers: int = 1) -> np.ndarray:
    """Estimates on ``n_perm`` seeded re-pairings of ``s``, sorted ascending.

    Each replica permutes the rows of ``y`` and runs :func:`estimate` with a
    derived seed, so replicas are independent and may run concurrently.
    """
    if n_perm < MIN_PERMUTATIONS:
        raise ValueError(f"n_perm must be >= {MIN_PERMUTATIONS}, got {n_perm}")

    def replica(k: int) -> float:
        perm = stream(cfg.seed, "null-perm", k).permutation(s.n)
        shuffled = PairedSample(s.x, s.y[perm])
        return estimate(shuffled, replace(cfg, seed=derive_seed(cfg.seed, "null-run", k))).kappa_hat

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(replica, range(n_perm)))
    else:
        values = [replica(k) for k in range(n_perm)]
    return np.sort(np.array(values))


def null_p_value(observed: float, null) -> float:
    """Permutation p-value ``(1 + #{null >= observed}) / (1 + len(null))``."""
    null = np.asarray(null)
    return float((1 + np.count_nonzero(null >= observed)) / (1 + null.size))
