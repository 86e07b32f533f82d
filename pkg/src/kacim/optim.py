"""Adaptive-moment optimizer with decoupled weight decay, and sphere projection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, size: int) -> "AdamState":
        return cls(np.zeros(size), np.zeros(size), 0)


def optimizer_step(params, grad, state: AdamState | None, lr: float, wd: float,
                   *, maximize: bool = True, betas=(BETA1, BETA2), eps: float = EPS):
    """One decoupled-weight-decay adaptive-moment step.

    ``params <- params * (1 - lr * wd)`` is applied first, then the
    bias-corrected moment step ``lr * m_hat / (sqrt(v_hat) + eps)`` is taken
    along ``+grad`` (``maximize=True``) or ``-grad``.  Returns
    ``(new_params, new_state)``; inputs are not modified.
    """
    params = np.asarray(params, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if params.shape != grad.shape:
        raise ValueError(f"params shape {params.shape} != grad shape {grad.shape}")
    if not (np.isfinite(params).all() and np.isfinite(grad).all()):
        raise FloatingPointError("non-finite parameters or gradient")
    if state is None:
        state = AdamState(np.zeros(params.shape), np.zeros(params.shape), 0)
    b1, b2 = betas
    g = grad if maximize else -grad
    t = state.t + 1
    m = b1 * state.m + (1 - b1) * g
    v = b2 * state.v + (1 - b2) * g * g
    m_hat = m / (1 - b1 ** t)
    v_hat = v / (1 - b2 ** t)
    new = params * (1 - lr * wd)
    new = new + lr * m_hat / (np.sqrt(v_hat) + eps)
    return new, AdamState(m, v, t)


def project_unit_sphere(v) -> tuple[np.ndarray, bool]:
    """Scale ``v`` to unit Euclidean norm.

    Returns ``(unit_vector, degenerate)``; a (near-)zero input maps to the
    first basis vector with ``degenerate=True``.
    """
    v = np.asarray(v, dtype=np.float64)
    norm = float(np.linalg.norm(v))
    if norm > 1e-12:
        return v / norm, False
    e = np.zeros_like(v)
    e[0] = 1.0
    return e, True
