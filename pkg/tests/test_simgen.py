import numpy as np
import pytest
from scipy.spatial.distance import pdist

from kacim.data import DataError
from kacim.gaussian import GaussianSpec
from kacim.simgen import (NOISE_FAMILIES, GeneratorSpec, gen_additive, gen_classification, gen_gaussian_pair,
                          gen_independent, simplex_means, standard_noise)


@pytest.mark.parametrize("family", NOISE_FAMILIES)
def test_noise_is_standardized(family):
    e = standard_noise(family, 400_000, np.random.default_rng(1))
    assert abs(e.mean()) < 0.01
    assert abs(e.var() - 1) < 0.03


def test_additive_model_reconstructs():
    spec = GeneratorSpec(50, 4, 3, 0.0, "gaussian", 5)
    s, a = gen_additive(spec)
    z = s.x @ a.T
    np.testing.assert_allclose(s.y, np.sin(z) + np.cos(z))
    assert a.shape == (3, 4) and (a >= 0).all() and (a < 1).all()


def test_noise_is_shared_across_scales_and_x_across_generators():
    s1, _ = gen_additive(GeneratorSpec(30, 2, 2, 0.5, seed=3))
    s2, _ = gen_additive(GeneratorSpec(30, 2, 2, 1.0, seed=3))
    clean, _ = gen_additive(GeneratorSpec(30, 2, 2, 0.0, seed=3))
    np.testing.assert_allclose((s2.y - clean.y), 2 * (s1.y - clean.y))
    np.testing.assert_array_equal(gen_independent(GeneratorSpec(30, 2, 2, seed=3)).x, s1.x)


def test_generators_are_deterministic():
    spec = GeneratorSpec(20, 3, 3, 0.2, "laplace", 11)
    assert np.array_equal(gen_additive(spec)[0].y, gen_additive(spec)[0].y)
    other = GeneratorSpec(20, 3, 3, 0.2, "laplace", 12)
    assert not np.array_equal(gen_additive(spec)[0].x, gen_additive(other)[0].x)


def test_gaussian_pair_covariance():
    s = gen_gaussian_pair(GaussianSpec.correlated_scalars(0.7), 200_000, 2)
    assert np.corrcoef(s.x[:, 0], s.y[:, 0])[0, 1] == pytest.approx(0.7, abs=0.01)


def test_simplex_means_equidistant():
    m = simplex_means(4, 6, 2.0, np.random.default_rng(0))
    np.testing.assert_allclose(pdist(m), 2.0)
    np.testing.assert_allclose(m.mean(axis=0), 0.0, atol=1e-12)


def test_classification_layout():
    d = gen_classification(3000, 20, 3, 5, 0)
    assert np.bincount(d.labels).tolist() == [1000, 1000, 1000]
    means = np.array([d.x[d.labels == c].mean(axis=0) for c in range(3)])
    assert np.abs(means[:, 5:]).max() < 0.1
    assert pdist(means[:, :5]).min() > 1.7


@pytest.mark.parametrize("kw", [dict(n_c=1), dict(d_informative=30), dict(n_c=5, d_informative=2), dict(n=2)])
def test_classification_guards(kw):
    args = dict(n=100, d_x=20, n_c=3, d_informative=5, seed=0) | kw
    with pytest.raises(DataError):
        gen_classification(**args)


@pytest.mark.parametrize("kw", [dict(n=0), dict(noise_scale=-1.0), dict(noise_family="cauchy"), dict(seed=-1)])
def test_spec_guards(kw):
    args = dict(n=10, d_x=2, d_y=2) | kw
    with pytest.raises(DataError):
        GeneratorSpec(**args)
