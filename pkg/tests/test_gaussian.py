import numpy as np
import pytest
from scipy import optimize

from kacim.gaussian import (CovarianceError, GaussianSpec, first_canonical_pair, gaussian_kacim,
                            reduced_objective)

# rho * (1 - rho) ** ((1 - rho) / rho), evaluated at 30 digits and frozen
CLOSED_FORM = {0.3: 0.1305218882561623, 0.6: 0.32573011399138879, 0.8: 0.53499224398113762,
               0.9: 0.69683731441301435}


@pytest.mark.parametrize("r", sorted(CLOSED_FORM))
def test_scalar_pairs_match_closed_form(r):
    assert gaussian_kacim(GaussianSpec.correlated_scalars(r)) == pytest.approx(CLOSED_FORM[r], abs=1e-9)


@pytest.mark.parametrize("r", [0.3, 0.9])
def test_dense_local_grid_agrees(r):
    """Fine 0.001 grid around the coarse argmax of the reduced objective."""
    g = np.arange(-5, 5.0001, 0.05)
    s, t = np.meshgrid(g, g, indexing="ij")
    v = reduced_objective(s, t, r)
    i, j = np.unravel_index(np.argmax(v), v.shape)
    fine = np.arange(-0.1, 0.1001, 0.001)
    fs, ft = np.meshgrid(g[i] + fine, g[j] + fine, indexing="ij")
    best = reduced_objective(fs, ft, r).max()
    assert gaussian_kacim(GaussianSpec.correlated_scalars(r)) == pytest.approx(best, abs=1e-5)
    assert gaussian_kacim(GaussianSpec.correlated_scalars(r)) >= best - 1e-12


def test_independent_blocks_give_exact_zero():
    g = GaussianSpec(np.eye(2), np.diag([1.0, 3.0]), np.zeros((2, 2)))
    assert gaussian_kacim(g) == 0.0


def test_sign_of_correlation_does_not_matter():
    a = gaussian_kacim(GaussianSpec.correlated_scalars(0.6))
    b = gaussian_kacim(GaussianSpec.correlated_scalars(-0.6))
    assert a == pytest.approx(b, abs=1e-12)


def test_nondecreasing_in_r():
    vals = [gaussian_kacim(GaussianSpec.correlated_scalars(r)) for r in np.linspace(0, 0.95, 20)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_canonical_pair_recovers_known_correlation():
    sx = np.array([[2.0, 0.3], [0.3, 1.0]])
    sy = np.array([[1.0]])
    sxy = np.array([[0.5], [0.2]])
    a, b, rho = first_canonical_pair(GaussianSpec(sx, sy, sxy))
    # independent route: max corr of a'X with Y is sqrt(sxy' sx^-1 sxy / sy)
    expect = np.sqrt(sxy.T @ np.linalg.solve(sx, sxy) / sy)[0, 0]
    assert rho == pytest.approx(expect, abs=1e-12)
    assert a @ sx @ a == pytest.approx(1.0) and b @ sy @ b == pytest.approx(1.0)


def test_multivariate_matches_direct_frequency_search():
    """Maximise the exact Gaussian discrepancy over all frequencies by multistart."""
    rng = np.random.default_rng(7)
    m = rng.normal(size=(4, 4))
    joint = m @ m.T + 0.5 * np.eye(4)
    d = np.sqrt(np.diag(joint))
    joint = joint / np.outer(d, d)
    g = GaussianSpec(joint[:2, :2], joint[2:, 2:], joint[:2, 2:])
    cx, cy = joint[:2, :2], joint[2:, 2:]

    def neg(gam):
        a, b = gam[:2], gam[2:]
        return -abs(np.exp(-0.5 * gam @ joint @ gam) - np.exp(-0.5 * (a @ cx @ a + b @ cy @ b)))

    best = max(-optimize.minimize(neg, rng.normal(size=4) * 1.5, method="Nelder-Mead",
                                  options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000}).fun
               for _ in range(40))
    assert gaussian_kacim(g) == pytest.approx(best, abs=1e-6)


@pytest.mark.parametrize("sx,sy,sxy", [
    (np.array([[1.0, 2.0], [0.0, 1.0]]), np.eye(1), np.zeros((2, 1))),
    (np.eye(1), np.eye(1), np.array([[1.5]])),
    (np.eye(1), -np.eye(1), np.zeros((1, 1))),
    (np.eye(2), np.eye(1), np.zeros((1, 1))),
])
def test_invalid_covariances(sx, sy, sxy):
    with pytest.raises(CovarianceError):
        GaussianSpec(sx, sy, sxy)
