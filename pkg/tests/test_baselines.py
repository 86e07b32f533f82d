import numpy as np
import pytest

from kacim.baselines import (dcor_biased, dcor_unbiased, hsic_gaussian, kernel_bandwidth,
                             median_pairwise_distance)
from oracles import naive_dcor_biased, naive_dcor_unbiased, naive_hsic


def instances(n_cases=50, seed=99):
    r = np.random.default_rng(seed)
    for _ in range(n_cases):
        n = int(r.integers(5, 33))
        x = r.normal(size=(n, int(r.integers(1, 4))))
        y = x[:, :1] ** 2 + r.normal(size=(n, int(r.integers(1, 3)))) * r.uniform(0.1, 2)
        yield x, y


def test_dcor_biased_matches_loops():
    for x, y in instances():
        assert dcor_biased(x, y) == pytest.approx(naive_dcor_biased(x.tolist(), y.tolist()), abs=1e-10)


def test_dcor_unbiased_matches_loops():
    for x, y in instances():
        assert dcor_unbiased(x, y) == pytest.approx(naive_dcor_unbiased(x.tolist(), y.tolist()), abs=1e-10)


def test_hsic_matches_loops():
    for x, y in instances():
        assert hsic_gaussian(x, y) == pytest.approx(naive_hsic(x.tolist(), y.tolist()), abs=1e-10)


def test_self_dependence_is_one(rng):
    x = rng.normal(size=(40, 3))
    assert dcor_biased(x, x) == pytest.approx(1.0, abs=1e-12)
    assert dcor_unbiased(x, 2 * x + 1) == pytest.approx(1.0, abs=1e-12)


def test_constant_input_gives_zero(rng):
    assert dcor_biased(np.ones((10, 2)), rng.normal(size=(10, 1))) == 0.0


def test_small_n_guards(rng):
    with pytest.raises(ValueError):
        dcor_unbiased(rng.normal(size=(3, 1)), rng.normal(size=(3, 1)))
    with pytest.raises(ValueError):
        dcor_biased(rng.normal(size=(4, 1)), rng.normal(size=(5, 1)))


def test_median_heuristic_fallbacks():
    # three identical rows and one distinct: 3 zero distances of 6 -> median 0.5 * (0 + 2)
    m = np.array([[0.0], [0.0], [0.0], [2.0]])
    assert median_pairwise_distance(m) == 1.0
    m = np.array([[0.0], [0.0], [0.0], [0.0], [3.0]])  # 6 zeros of 10 -> median 0
    assert median_pairwise_distance(m) == 0.0
    assert kernel_bandwidth(m) == 3.0
    assert median_pairwise_distance(np.zeros((4, 2))) == 1.0
