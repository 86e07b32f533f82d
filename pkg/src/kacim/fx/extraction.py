"""Supervised linear feature extraction by dependence maximisation.

A projection ``W`` (k x d_x) is trained to maximise

    D(W x, onehot(y)) - ortho_lambda * |W W^T - I_k|_F^2

where ``D`` is the KacIM discrepancy modulus (with its own frequency pair
trained jointly), HSIC, or squared distance correlation.  The penalty uses the
row Gram matrix, which is attainable for ``k < d_x``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

from kacim._rng import derive_seed, stream
from kacim.baselines import distance_matrix, double_center, kernel_bandwidth
from kacim.data import LabeledDataset, SplitSpec, one_hot, split, standardize
from kacim.ecf import MODULUS_EPS, delta_grad_from_arrays
from kacim.fx.logistic import logistic_accuracy, logistic_fit
from kacim.fx.stats import RAW, ComparisonTable
from kacim.optim import AdamState, optimizer_step, project_unit_sphere

ORTHO_TOLERANCE = 0.05
MEASURES = ("kacim", "hsic", "dcor")
BASELINE_MEASURE = {"KacIM": "kacim", "HSIC": "hsic", "dCor": "dcor"}


class FeatureExtractionError(ArithmeticError):
    pass


@dataclass(frozen=True)
class FxConfig:
    iterations: int = 250
    learning_rate: float = 0.007
    weight_decay: float = 0.01
    ortho_lambda: float = 1.0
    batch_size: int = 1024
    seed: int = 0
    dimension_grid: tuple | None = None

    def __post_init__(self):
        if self.iterations < 0 or self.batch_size < 1:
            raise ValueError("iterations must be >= 0 and batch_size >= 1")
        if not (self.learning_rate > 0 and self.ortho_lambda >= 0 and self.weight_decay >= 0):
            raise ValueError("learning_rate must be > 0; ortho_lambda and weight_decay >= 0")


@dataclass(frozen=True)
class ProjectionModel:
    w: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    input_mean: np.ndarray
    input_std: np.ndarray
    measure: str = "kacim"
    trace: np.ndarray = field(default=None, compare=False)

    @property
    def k(self) -> int:
        return self.w.shape[0]

    @property
    def ortho_error(self) -> float:
        return orthogonality_error(self.w)

    @property
    def converged(self) -> bool:
        return self.ortho_error < ORTHO_TOLERANCE

    def transform(self, x) -> np.ndarray:
        return ((np.asarray(x, dtype=np.float64) - self.input_mean) / self.input_std) @ self.w.T

    def transform_dataset(self, d: LabeledDataset) -> LabeledDataset:
        return LabeledDataset(self.transform(d.x), d.labels, d.n_c, d.class_names)


def orthogonality_error(w: np.ndarray) -> float:
    """``max |W W^T - I|`` entrywise."""
    return float(np.abs(w @ w.T - np.eye(w.shape[0])).max())


def ortho_penalty(w: np.ndarray) -> tuple[float, np.ndarray]:
    """``|W W^T - I|_F^2`` and its gradient ``4 (W W^T - I) W``."""
    e = w @ w.T - np.eye(w.shape[0])
    return float((e * e).sum()), 4.0 * e @ w


def _pairwise_grad(m: np.ndarray, z: np.ndarray) -> np.ndarray:
    """``sum_j m_ij (z_i - z_j)`` for every row ``i`` (``m`` symmetric)."""
    return m.sum(axis=1)[:, None] * z - m @ z


def kacim_term(z, y, alpha, beta, standardize_features: bool = True):
    """``|delta_n|`` between projected features and targets.

    Returns ``(value, d value / d z, d/d alpha, d/d beta)``.  Batch
    standardization statistics of ``z`` are held constant in the gradient.
    """
    if standardize_features:
        zs, st = standardize(z)
        ys = standardize(y)[0]
        scale = st.std
    else:
        zs, ys, scale = z, y, np.ones(z.shape[1])
    g = delta_grad_from_arrays(zs, ys, alpha, beta)
    value = g.modulus
    ga, gb = g.modulus_grad()
    if value < MODULUS_EPS:
        return value, np.zeros_like(z), ga, gb
    n = zs.shape[0]
    u, v = zs @ alpha, ys @ beta
    w = u + v
    py = (np.cos(v).mean(), np.sin(v).mean())
    # d delta / d u_j = (i e^{i w_j} - i e^{i u_j} py) / n
    cu, su = np.cos(u), np.sin(u)
    d_re = (-np.sin(w) - (-su * py[0] - cu * py[1])) / n
    d_im = (np.cos(w) - (cu * py[0] - su * py[1])) / n
    du = (g.value.re * d_re + g.value.im * d_im) / value
    return value, np.outer(du, alpha) / scale, ga, gb


def _median_pairs(z: np.ndarray) -> list[tuple[int, int, float]]:
    """Pairs whose distance sets the median-heuristic bandwidth, with weights.

    Mirrors :func:`kernel_bandwidth`, so ``d sigma / d z`` follows by the
    chain rule through those pairwise distances (almost everywhere).
    """
    n = z.shape[0]
    d = pdist(z)
    idx = np.arange(d.size)
    if np.any(d > 0) and np.median(d) == 0:
        idx = idx[d > 0]
    if not np.any(d > 0):
        return []
    order = idx[np.argsort(d[idx], kind="stable")]
    m = order.size
    mids = [order[m // 2]] if m % 2 else [order[m // 2 - 1], order[m // 2]]
    iu, ju = np.triu_indices(n, 1)
    return [(int(iu[c]), int(ju[c]), 1.0 / len(mids)) for c in mids]


def hsic_term(z, y):
    """Biased Gaussian-kernel HSIC and its exact gradient in ``z``.

    The gradient includes the dependence of the median bandwidth on ``z``.
    """
    n = z.shape[0]
    sigma = kernel_bandwidth(z)
    d = distance_matrix(z)
    k = np.exp(-(d * d) / (2 * sigma * sigma))
    dy = distance_matrix(y)
    sy = kernel_bandwidth(y)
    lc = double_center(np.exp(-(dy * dy) / (2 * sy * sy)))
    value = float((k * lc).sum() / (n * n))
    m = lc * k
    grad = -2.0 / (n * n * sigma * sigma) * _pairwise_grad(m, z)
    d_sigma = float((m * d * d).sum()) / (n * n * sigma ** 3)
    for i, j, wt in _median_pairs(z):
        if d[i, j] > 0:
            u = wt * d_sigma * (z[i] - z[j]) / d[i, j]
            grad[i] += u
            grad[j] -= u
    return value, grad


def dcor_term(z, y):
    """Squared biased distance correlation and its gradient in ``z``."""
    n = z.shape[0]
    d = distance_matrix(z)
    a = double_center(d)
    b = double_center(distance_matrix(y))
    vxy = (a * b).mean()
    vxx = (a * a).mean()
    vyy = (b * b).mean()
    if vxx * vyy < 1e-24:
        return 0.0, np.zeros_like(z)
    root = math.sqrt(vxx * vyy)
    r2 = vxy / root
    p = (b / root - r2 * a / vxx) / (n * n)
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.where(d > 0, p / d, 0.0)
    return float(r2), 2.0 * _pairwise_grad(m, z)


def fx_objective(w, alpha, beta, x, y, ortho_lambda: float, measure: str = "kacim",
                 standardize_features: bool = True):
    """Objective value and gradients ``(value, grad_w, grad_alpha, grad_beta)``.

    ``x`` is the (n x d_x) input batch, ``y`` the one-hot targets.  For
    measures other than KacIM the frequency gradients are zero vectors.
    """
    w = np.asarray(w, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if w.shape[1] != x.shape[1] or x.shape[0] != y.shape[0]:
        raise ValueError(f"shape mismatch: W {w.shape}, x {x.shape}, y {y.shape}")
    if ortho_lambda < 0:
        raise ValueError("ortho_lambda must be >= 0")
    z = x @ w.T
    if measure == "kacim":
        alpha = np.asarray(alpha, dtype=np.float64)
        beta = np.asarray(beta, dtype=np.float64)
        if alpha.shape != (w.shape[0],) or beta.shape != (y.shape[1],):
            raise ValueError("frequency dimensions do not match W and y")
        dep, gz, ga, gb = kacim_term(z, y, alpha, beta, standardize_features)
    elif measure == "hsic":
        dep, gz = hsic_term(z, y)
        ga, gb = np.zeros(w.shape[0]), np.zeros(y.shape[1])
    elif measure == "dcor":
        dep, gz = dcor_term(z, y)
        ga, gb = np.zeros(w.shape[0]), np.zeros(y.shape[1])
    else:
        raise ValueError(f"unknown measure {measure!r}; choose from {MEASURES}")
    pen, gpen = ortho_penalty(w)
    return dep - ortho_lambda * pen, gz.T @ x - ortho_lambda * gpen, ga, gb


def train_feature_extractor(train: LabeledDataset, k: int, cfg: FxConfig = FxConfig(),
                            measure: str = "kacim") -> ProjectionModel:
    """Jointly ascend the objective in ``W`` (and the KacIM frequencies)."""
    d_x = train.d_x
    if not 1 <= k <= d_x:
        raise ValueError(f"feature dimension k={k} must lie in 1..{d_x}")
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}")
    xs, st = standardize(train.x)
    y = one_hot(train.labels, train.n_c)
    init = stream(cfg.seed, "fx-init")
    bound = 1.0 / math.sqrt(d_x)
    w = init.uniform(-bound, bound, (k, d_x))
    alpha = project_unit_sphere(init.uniform(-1.0, 1.0, k))[0]
    beta = project_unit_sphere(init.uniform(-1.0, 1.0, train.n_c))[0]
    batches = stream(cfg.seed, "fx-batch")
    nb = min(cfg.batch_size, train.n)
    state = AdamState.zeros(w.size + k + train.n_c)
    trace = np.empty(cfg.iterations)

    for it in range(cfg.iterations):
        idx = batches.choice(train.n, nb, replace=False) if nb < train.n else slice(None)
        value, gw, ga, gb = fx_objective(w, alpha, beta, xs[idx], y[idx], cfg.ortho_lambda, measure)
        grad = np.concatenate([gw.ravel(), ga, gb])
        if not (math.isfinite(value) and np.isfinite(grad).all()):
            raise FeatureExtractionError(f"iteration {it}: non-finite objective or gradient")
        trace[it] = value
        params, state = optimizer_step(np.concatenate([w.ravel(), alpha, beta]), grad, state,
                                       cfg.learning_rate, cfg.weight_decay)
        w = params[: w.size].reshape(k, d_x)
        if measure == "kacim":
            alpha = project_unit_sphere(params[w.size: w.size + k])[0]
            beta = project_unit_sphere(params[w.size + k:])[0]
    return ProjectionModel(w, alpha, beta, st.mean, st.std, measure, trace)


def dimension_grid(d_x: int) -> list[int]:
    """``10, 10 + ceil(d_x / 10), ...`` up to ``d_x``."""
    if d_x < 10:
        raise ValueError(f"dimension sweep starts at 10 but d_x = {d_x}")
    return list(range(10, d_x + 1, math.ceil(0.1 * d_x)))


def select_dimension(val_acc: dict) -> int:
    """Feature dimension with the best validation accuracy; ties go to the smaller k."""
    best = max(val_acc.values())
    return min(k for k, acc in val_acc.items() if acc == best)


@dataclass
class SweepResult:
    table: ComparisonTable
    selected_k: dict  # baseline -> list of k per run
    validation: dict  # (baseline, run) -> {k: validation accuracy}
    test_by_k: dict  # (baseline, run) -> {k: test accuracy}
    ortho_error: dict = field(default_factory=dict)  # (baseline, run) -> {k: max |W W^T - I|}


def _fx_run(data: LabeledDataset, measure: str, grid, cfg: FxConfig, run_seed: int):
    train, val, test = split(data, SplitSpec((0.48, 0.12, 0.4), run_seed))
    val_acc, test_acc, ortho = {}, {}, {}
    for k in grid:
        model = train_feature_extractor(train, k, FxConfig(
            cfg.iterations, cfg.learning_rate, cfg.weight_decay, cfg.ortho_lambda,
            cfg.batch_size, derive_seed(run_seed, "fx", k)), measure)
        clf = logistic_fit(model.transform_dataset(train))
        val_acc[k] = logistic_accuracy(clf, model.transform_dataset(val))
        test_acc[k] = logistic_accuracy(clf, model.transform_dataset(test))
        ortho[k] = model.ortho_error
    return val_acc, test_acc, ortho


def _raw_run(data: LabeledDataset, run_seed: int) -> float:
    train, _, test = split(data, SplitSpec((0.48, 0.12, 0.4), run_seed))
    return logistic_accuracy(logistic_fit(train), test)


def dimension_sweep(data: LabeledDataset, baselines, cfg: FxConfig = FxConfig(), runs: int = 1,
                    dataset_name: str = "data", table: ComparisonTable | None = None) -> SweepResult:
    """Validation-selected feature dimension and test accuracy per baseline and run.

    Run ``r`` splits the data with a seed derived from ``(cfg.seed, r)``; all
    baselines share that split.  ``RAW`` evaluates the untransformed inputs.
    """
    grid = list(cfg.dimension_grid) if cfg.dimension_grid else dimension_grid(data.d_x)
    if any(k > data.d_x or k < 1 for k in grid):
        raise ValueError(f"dimension grid {grid} exceeds d_x = {data.d_x}")
    table = table if table is not None else ComparisonTable()
    selected, validation, test_by_k, ortho = {}, {}, {}, {}
    for r in range(runs):
        run_seed = derive_seed(cfg.seed, "run", r)
        for b in baselines:
            if b == RAW:
                table.add(dataset_name, b, _raw_run(data, run_seed))
                continue
            if b not in BASELINE_MEASURE:
                raise ValueError(f"unknown baseline {b!r}; choose from {[RAW, *BASELINE_MEASURE]}")
            val_acc, test_acc, ortho[(b, r)] = _fx_run(data, BASELINE_MEASURE[b], grid, cfg, run_seed)
            k = select_dimension(val_acc)
            selected.setdefault(b, []).append(k)
            validation[(b, r)] = val_acc
            test_by_k[(b, r)] = test_acc
            table.add(dataset_name, b, test_acc[k])
    return SweepResult(table, selected, validation, test_by_k, ortho)
