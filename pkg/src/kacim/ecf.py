"""Empirical characteristic functions and the joint-minus-product discrepancy.

Complex numbers are carried as explicit ``(re, im)`` pairs and every
exponential is evaluated as a ``(cos, sin)`` pair, so the summation order is
fixed by numpy's reductions and results are bit-reproducible.

For a paired sample ``(x_j, y_j)`` and a frequency pair ``(alpha, beta)``::

    joint(alpha, beta) = mean_j exp(i (alpha.x_j + beta.y_j))
    delta(alpha, beta) = joint(alpha, beta) - ecf(x, alpha) * ecf(y, beta)
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from kacim.data import PairedSample

#: Below this modulus the gradient of |delta| is defined as zero.
MODULUS_EPS = 1e-12


@dataclass(frozen=True)
class ComplexValue:
    re: float
    im: float

    @property
    def modulus(self) -> float:
        return math.hypot(self.re, self.im)

    def __abs__(self) -> float:
        return self.modulus

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    def conjugate(self) -> "ComplexValue":
        return ComplexValue(self.re, -self.im)


@dataclass(frozen=True)
class FrequencyPoint:
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.alpha, dtype=np.float64))
        b = np.atleast_1d(np.asarray(self.beta, dtype=np.float64))
        if a.ndim != 1 or b.ndim != 1:
            raise ValueError("frequencies must be vectors")
        if not (np.isfinite(a).all() and np.isfinite(b).all()):
            raise ValueError("frequencies must be finite")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def gamma(self) -> np.ndarray:
        """Stacked frequency ``(alpha, beta)``."""
        return np.concatenate([self.alpha, self.beta])

    def __neg__(self) -> "FrequencyPoint":
        return FrequencyPoint(-self.alpha, -self.beta)


@dataclass(frozen=True)
class SmoothingSpec:
    """Gaussian smoothing of the ECF at bandwidth ``h`` (``h = 0`` disables it)."""

    h: float
    kernel: str = "gaussian"

    def __post_init__(self):
        if not math.isfinite(self.h) or self.h < 0:
            raise ValueError(f"bandwidth must be finite and >= 0, got {self.h}")
        if self.kernel != "gaussian":
            raise ValueError(f"unsupported smoothing kernel {self.kernel!r}")

    def damping(self, gamma_sq_norm: float) -> float:
        """Kernel CF at ``h * gamma``: ``exp(-h^2 |gamma|^2 / 2)``."""
        return math.exp(-0.5 * self.h * self.h * gamma_sq_norm)


@dataclass(frozen=True)
class DeltaGradient:
    """``delta`` plus its complex partial derivatives w.r.t. alpha and beta.

    ``d_alpha_re``/``d_alpha_im`` are the real and imaginary parts of
    ``d delta / d alpha`` (likewise for beta).
    """

    value: ComplexValue
    d_alpha_re: np.ndarray
    d_alpha_im: np.ndarray
    d_beta_re: np.ndarray
    d_beta_im: np.ndarray

    @property
    def modulus(self) -> float:
        return self.value.modulus

    def modulus_grad(self) -> tuple[np.ndarray, np.ndarray]:
        """Gradient of ``|delta|``: ``Re(conj(delta) * grad delta) / |delta|``.

        Zero when ``|delta| < MODULUS_EPS``.
        """
        r = self.value.modulus
        if r < MODULUS_EPS:
            return np.zeros_like(self.d_alpha_re), np.zeros_like(self.d_beta_re)
        re, im = self.value.re / r, self.value.im / r
        return (re * self.d_alpha_re + im * self.d_alpha_im,
                re * self.d_beta_re + im * self.d_beta_im)


def _check_dims(m: np.ndarray, freq: np.ndarray, what: str) -> None:
    if m.shape[1] != freq.shape[0]:
        raise ValueError(f"{what}: sample has {m.shape[1]} columns but frequency has {freq.shape[0]}")


def _matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if m.shape[0] < 1:
        raise ValueError("need at least one row")
    return m


def ecf(m, freq) -> ComplexValue:
    """Empirical characteristic function of the rows of ``m`` at ``freq``."""
    m = _matrix(m)
    freq = np.atleast_1d(np.asarray(freq, dtype=np.float64))
    _check_dims(m, freq, "ecf")
    t = m @ freq
    return ComplexValue(float(np.cos(t).mean()), float(np.sin(t).mean()))


def _phases(x: np.ndarray, y: np.ndarray, f: FrequencyPoint) -> tuple[np.ndarray, np.ndarray]:
    _check_dims(x, f.alpha, "alpha")
    _check_dims(y, f.beta, "beta")
    return x @ f.alpha, y @ f.beta


def joint_ecf(s: PairedSample, f: FrequencyPoint) -> ComplexValue:
    u, v = _phases(s.x, s.y, f)
    w = u + v
    return ComplexValue(float(np.cos(w).mean()), float(np.sin(w).mean()))


def _delta_parts(u: np.ndarray, v: np.ndarray):
    cu, su = np.cos(u), np.sin(u)
    cv, sv = np.cos(v), np.sin(v)
    cw, sw = np.cos(u + v), np.sin(u + v)
    px = (cu.mean(), su.mean())
    py = (cv.mean(), sv.mean())
    joint = (cw.mean(), sw.mean())
    re = joint[0] - (px[0] * py[0] - px[1] * py[1])
    im = joint[1] - (px[0] * py[1] + px[1] * py[0])
    return (float(re), float(im)), (cu, su), (cv, sv), (cw, sw), px, py


def delta_from_arrays(x: np.ndarray, y: np.ndarray, alpha: np.ndarray, beta: np.ndarray) -> ComplexValue:
    """Unchecked fast path of :func:`delta_n` used inside optimisation loops."""
    (re, im), *_ = _delta_parts(x @ alpha, y @ beta)
    return ComplexValue(re, im)


def delta_n(s: PairedSample, f: FrequencyPoint) -> ComplexValue:
    """Joint ECF minus the product of marginal ECFs at ``f``."""
    u, v = _phases(s.x, s.y, f)
    (re, im), *_ = _delta_parts(u, v)
    return ComplexValue(re, im)


def delta_grad_from_arrays(x: np.ndarray, y: np.ndarray, alpha: np.ndarray, beta: np.ndarray) -> DeltaGradient:
    """Unchecked fast path of :func:`delta_n_grad`."""
    n = x.shape[0]
    (re, im), (cu, su), (cv, sv), (cw, sw), px, py = _delta_parts(x @ alpha, y @ beta)
    # d/dalpha mean_j e^{i w_j} = mean_j i x_j e^{i w_j} = mean_j x_j (-sin w_j, cos w_j)
    ja_re = -(x.T @ sw) / n
    ja_im = (x.T @ cw) / n
    # d/dalpha phi_x(alpha) = mean_j x_j (-sin u_j, cos u_j), times phi_y(beta)
    gx_re = -(x.T @ su) / n
    gx_im = (x.T @ cu) / n
    da_re = ja_re - (gx_re * py[0] - gx_im * py[1])
    da_im = ja_im - (gx_re * py[1] + gx_im * py[0])

    jb_re = -(y.T @ sw) / n
    jb_im = (y.T @ cw) / n
    gy_re = -(y.T @ sv) / n
    gy_im = (y.T @ cv) / n
    db_re = jb_re - (px[0] * gy_re - px[1] * gy_im)
    db_im = jb_im - (px[0] * gy_im + px[1] * gy_re)
    return DeltaGradient(ComplexValue(re, im), da_re, da_im, db_re, db_im)


def delta_n_grad(s: PairedSample, f: FrequencyPoint) -> DeltaGradient:
    """``delta_n`` together with its analytic derivatives in alpha and beta."""
    _phases(s.x, s.y, f)
    return delta_grad_from_arrays(s.x, s.y, f.alpha, f.beta)


def smoothed_delta_n(s: PairedSample, f: FrequencyPoint, sm: SmoothingSpec) -> ComplexValue:
    """Discrepancy between Gaussian-smoothed joint and product ECFs.

    Each smoothed ECF is the plain ECF times ``exp(-h^2 |freq|^2 / 2)``; the
    factor for the joint frequency equals the product of the marginal factors,
    so the smoothed discrepancy is the plain one damped by that factor.  The
    three smoothed ECFs are nevertheless formed explicitly here.
    """
    if sm.h == 0:
        return delta_n(s, f)
    u, v = _phases(s.x, s.y, f)
    a2 = float(f.alpha @ f.alpha)
    b2 = float(f.beta @ f.beta)
    kj = sm.damping(a2 + b2)
    kx = sm.damping(a2)
    ky = sm.damping(b2)
    w = u + v
    joint = (kj * np.cos(w).mean(), kj * np.sin(w).mean())
    px = (kx * np.cos(u).mean(), kx * np.sin(u).mean())
    py = (ky * np.cos(v).mean(), ky * np.sin(v).mean())
    re = joint[0] - (px[0] * py[0] - px[1] * py[1])
    im = joint[1] - (px[0] * py[1] + px[1] * py[0])
    return ComplexValue(float(re), float(im))


def delta_n_parallel(s: PairedSample, f: FrequencyPoint, workers: int = 4) -> ComplexValue:
    """``delta_n`` with the three sample means reduced over row chunks in threads.

    Agrees with the sequential version up to floating-point reassociation.
    """
    u, v = _phases(s.x, s.y, f)
    chunks = np.array_split(np.arange(s.n), max(1, min(workers, s.n)))

    def partial(idx):
        uu, vv = u[idx], v[idx]
        ww = uu + vv
        return np.array([np.cos(uu).sum(), np.sin(uu).sum(), np.cos(vv).sum(),
                         np.sin(vv).sum(), np.cos(ww).sum(), np.sin(ww).sum()])

    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        total = sum(pool.map(partial, chunks)) / s.n
    pxr, pxi, pyr, pyi, jr, ji = total
    return ComplexValue(float(jr - (pxr * pyr - pxi * pyi)), float(ji - (pxr * pyi + pxi * pyr)))
