"""Seeded synthetic data for the simulation experiments.

Random streams are keyed by ``(seed, role)`` (see :mod:`kacim._rng`): the
``x`` stream, the projection matrix and the noise each have their own
substream, so changing the noise scale or family leaves ``x`` and ``A``
untouched.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from kacim._rng import stream
from kacim.data import DataError, LabeledDataset, PairedSample
from kacim.gaussian import GaussianSpec

NOISE_FAMILIES = ("gaussian", "uniform", "laplace", "lognormal")


@dataclass(frozen=True)
class GeneratorSpec:
    n: int
    d_x: int
    d_y: int
    noise_scale: float = 0.2
    noise_family: str = "gaussian"
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.d_x < 1 or self.d_y < 1:
            raise DataError("n and dimensions must be >= 1")
        if not math.isfinite(self.noise_scale) or self.noise_scale < 0:
            raise DataError("noise_scale must be finite and >= 0")
        family = self.noise_family.lower()
        if family not in NOISE_FAMILIES:
            raise DataError(f"unknown noise family {self.noise_family!r}; choose from {NOISE_FAMILIES}")
        if self.seed < 0:
            raise DataError("seed must be non-negative")
        object.__setattr__(self, "noise_family", family)


def standard_noise(family: str, shape, rng: np.random.Generator) -> np.ndarray:
    """Noise of the given family with zero mean and unit variance."""
    if family == "gaussian":
        return rng.standard_normal(shape)
    if family == "uniform":
        return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), shape)
    if family == "laplace":
        return rng.laplace(0.0, 1.0 / math.sqrt(2.0), shape)
    if family == "lognormal":
        z = np.exp(rng.standard_normal(shape))
        return (z - math.exp(0.5)) / math.sqrt((math.e - 1.0) * math.e)
    raise DataError(f"unknown noise family {family!r}")


def _inputs(spec: GeneratorSpec) -> np.ndarray:
    return stream(spec.seed, "x").standard_normal((spec.n, spec.d_x))


def gen_independent(spec: GeneratorSpec) -> PairedSample:
    """Independent standard-normal ``x`` and ``y``."""
    y = stream(spec.seed, "y").standard_normal((spec.n, spec.d_y))
    return PairedSample(_inputs(spec), y)


def projection_matrix(spec: GeneratorSpec) -> np.ndarray:
    """The ``d_y x d_x`` matrix with i.i.d. U[0, 1) entries used by :func:`gen_additive`."""
    return stream(spec.seed, "A").uniform(0.0, 1.0, (spec.d_y, spec.d_x))


def gen_additive(spec: GeneratorSpec) -> tuple[PairedSample, np.ndarray]:
    """``y = sin(A x) + cos(A x) + noise_scale * eps`` with ``eps`` independent of ``x``."""
    x = _inputs(spec)
    a = projection_matrix(spec)
    z = x @ a.T
    y = np.sin(z) + np.cos(z)
    if spec.noise_scale > 0:
        eps = standard_noise(spec.noise_family, y.shape, stream(spec.seed, f"noise-{spec.noise_family}"))
        y = y + spec.noise_scale * eps
    return PairedSample(x, y), a


def gen_gaussian_pair(g: GaussianSpec, n: int, seed: int) -> PairedSample:
    """Rows from the zero-mean joint Gaussian with block covariance ``g.joint``."""
    if n < 1:
        raise DataError("n must be >= 1")
    try:
        chol = np.linalg.cholesky(g.joint)
    except np.linalg.LinAlgError:
        raise DataError("joint covariance is not positive definite") from None
    z = stream(seed, "gaussian-pair").standard_normal((n, chol.shape[0]))
    rows = z @ chol.T
    d_x = g.sigma_x.shape[0]
    return PairedSample(rows[:, :d_x], rows[:, d_x:])


def simplex_means(n_c: int, d_informative: int, separation: float, rng) -> np.ndarray:
    """``n_c`` points in ``R^d_informative`` with all pairwise distances ``separation``.

    A regular simplex is built in its own ``n_c - 1`` dimensional span and
    rotated into the informative coordinates by a random orthonormal map.
    """
    centered = np.eye(n_c) - 1.0 / n_c
    # orthonormal basis of the simplex span; columns of the reduced QR
    basis, _ = np.linalg.qr(centered[:, : n_c - 1])
    coords = centered @ basis * (separation / math.sqrt(2.0))
    q, _ = np.linalg.qr(rng.standard_normal((d_informative, n_c - 1)))
    return coords @ q.T


def gen_classification(n: int, d_x: int, n_c: int, d_informative: int, seed: int,
                       separation: float = 2.0) -> LabeledDataset:
    """Class-conditional unit-variance Gaussians.

    Class means differ only in the first ``d_informative`` coordinates, where
    they form a regular simplex with edge ``separation``; the other
    coordinates are pure noise.  Classes are balanced up to rounding.
    """
    if n_c < 2:
        raise DataError("n_c must be >= 2")
    if n < n_c:
        raise DataError("need at least one row per class")
    if not 0 <= d_informative <= d_x:
        raise DataError("d_informative must lie in 0..d_x")
    if 0 < d_informative < n_c - 1:
        raise DataError(f"{n_c} equidistant class means need d_informative >= {n_c - 1}")
    rng = stream(seed, "classification")
    labels = rng.permutation(np.arange(n) % n_c)
    x = rng.standard_normal((n, d_x))
    if d_informative > 0:
        means = simplex_means(n_c, d_informative, separation, rng)
        x[:, :d_informative] += means[labels]
    return LabeledDataset(x, labels, n_c)
