"""Analytic KacIM for jointly Gaussian vectors via the first canonical pair."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

GRID_HALF_WIDTH = 5.0
GRID_STEP = 0.05


class CovarianceError(ValueError):
    """Covariance blocks that are not symmetric positive (semi-)definite."""


def _spd_check(m: np.ndarray, name: str) -> None:
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-10):
        raise CovarianceError(f"{name} is not symmetric")
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise CovarianceError(f"{name} is not positive definite") from None


@dataclass(frozen=True)
class GaussianSpec:
    """Covariance of a zero-mean Gaussian pair ``(X, Y)``."""

    sigma_x: np.ndarray
    sigma_y: np.ndarray
    sigma_xy: np.ndarray

    def __post_init__(self):
        sx = np.atleast_2d(np.asarray(self.sigma_x, dtype=np.float64))
        sy = np.atleast_2d(np.asarray(self.sigma_y, dtype=np.float64))
        sxy = np.atleast_2d(np.asarray(self.sigma_xy, dtype=np.float64))
        if sx.shape[0] != sx.shape[1] or sy.shape[0] != sy.shape[1]:
            raise CovarianceError("sigma_x and sigma_y must be square")
        if sxy.shape != (sx.shape[0], sy.shape[0]):
            raise CovarianceError(f"sigma_xy must have shape {(sx.shape[0], sy.shape[0])}, got {sxy.shape}")
        _spd_check(sx, "sigma_x")
        _spd_check(sy, "sigma_y")
        object.__setattr__(self, "sigma_x", sx)
        object.__setattr__(self, "sigma_y", sy)
        object.__setattr__(self, "sigma_xy", sxy)
        if np.linalg.eigvalsh(self.joint).min() < -1e-10:
            raise CovarianceError("joint covariance is not positive semi-definite")

    @property
    def joint(self) -> np.ndarray:
        return np.block([[self.sigma_x, self.sigma_xy], [self.sigma_xy.T, self.sigma_y]])

    @classmethod
    def correlated_scalars(cls, r: float) -> "GaussianSpec":
        """Two unit-variance scalars with correlation ``r``."""
        return cls(np.eye(1), np.eye(1), np.array([[r]]))


def _inv_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v / np.sqrt(w)) @ v.T


def first_canonical_pair(g: GaussianSpec) -> tuple[np.ndarray, np.ndarray, float]:
    """Leading canonical directions and canonical correlation ``rho >= 0``.

    Directions are scaled to unit variance: ``a' Sx a = b' Sy b = 1``.
    """
    wx = _inv_sqrt(g.sigma_x)
    wy = _inv_sqrt(g.sigma_y)
    u, sv, vt = np.linalg.svd(wx @ g.sigma_xy @ wy)
    rho = float(min(max(sv[0], 0.0), 1.0))
    a = wx @ u[:, 0]
    b = wy @ vt[0]
    a /= np.sqrt(a @ g.sigma_x @ a)
    b /= np.sqrt(b @ g.sigma_y @ b)
    return a, b, rho


def reduced_objective(s, t, rho: float):
    """``exp(-(s^2 + t^2)/2) * |exp(-s t rho) - 1|`` on the canonical plane."""
    return np.exp(-0.5 * (s * s + t * t)) * np.abs(np.expm1(-s * t * rho))


def gaussian_kacim(g: GaussianSpec) -> float:
    """Maximum of the Gaussian discrepancy modulus along the first canonical pair.

    Frequencies are restricted to ``(s * a, t * b)`` with ``(a, b)`` the
    first canonical pair; the two scales are found by a coarse grid over
    ``[-5, 5]^2`` followed by Nelder-Mead refinement.
    """
    rho = first_canonical_pair(g)[2]
    if rho == 0.0:
        return 0.0
    grid = np.arange(-GRID_HALF_WIDTH, GRID_HALF_WIDTH + GRID_STEP / 2, GRID_STEP)
    s, t = np.meshgrid(grid, grid, indexing="ij")
    vals = reduced_objective(s, t, rho)
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    res = optimize.minimize(lambda p: -reduced_objective(p[0], p[1], rho), x0=[grid[i], grid[j]],
                            method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 10_000})
    return float(max(-res.fun, vals[i, j]))
