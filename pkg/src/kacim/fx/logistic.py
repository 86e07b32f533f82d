"""Multinomial logistic regression trained by full-batch gradient descent."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from kacim.data import LabeledDataset, one_hot, standardize

STEP = 0.1
L2 = 1e-4
MAX_ITER = 500


@dataclass(frozen=True)
class LogisticModel:
    weights: np.ndarray  # (d + 1, n_c), last row is the bias
    mean: np.ndarray
    std: np.ndarray
    n_c: int

    def scores(self, x) -> np.ndarray:
        z = (np.asarray(x, dtype=np.float64) - self.mean) / self.std
        return z @ self.weights[:-1] + self.weights[-1]

    def predict(self, x) -> np.ndarray:
        return np.argmax(self.scores(x), axis=1)


def _softmax(s: np.ndarray) -> np.ndarray:
    s = s - s.max(axis=1, keepdims=True)
    e = np.exp(s)
    return e / e.sum(axis=1, keepdims=True)


def logistic_fit(train: LabeledDataset, l2: float = L2, max_iter: int = MAX_ITER,
                 step: float = STEP) -> LogisticModel:
    """Fit softmax regression on standardized features.

    Minimises mean cross-entropy plus ``l2/2 * |W|^2`` (bias unpenalised)
    with a fixed step, starting from zero weights.
    """
    if l2 < 0:
        raise ValueError("l2 must be >= 0")
    if not np.isfinite(train.x).all():
        raise ValueError("features must be finite")
    z, stats = standardize(train.x)
    n, d = z.shape
    t = one_hot(train.labels, train.n_c)
    w = np.zeros((d, train.n_c))
    b = np.zeros(train.n_c)
    for _ in range(max_iter):
        p = _softmax(z @ w + b)
        err = (p - t) / n
        w -= step * (z.T @ err + l2 * w)
        b -= step * err.sum(axis=0)
    return LogisticModel(np.vstack([w, b]), stats.mean, stats.std, train.n_c)


def logistic_accuracy(model: LogisticModel, test: LabeledDataset) -> float:
    if not np.isfinite(test.x).all():
        raise ValueError("features must be finite")
    return float(np.mean(model.predict(test.x) == test.labels))
