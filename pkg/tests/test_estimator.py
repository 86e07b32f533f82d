import numpy as np
import pytest

from kacim._rng import stream
from kacim.data import PairedSample
from kacim.ecf import FrequencyPoint, SmoothingSpec, delta_n
from kacim.estimator import (EstimatorConfig, bandwidth_schedule, estimate, estimate_smoothed, null_p_value,
                             permutation_null)
from kacim.gaussian import GaussianSpec
from kacim.simgen import GeneratorSpec, gen_additive, gen_gaussian_pair, gen_independent

SMALL = EstimatorConfig(iterations=60, batch_size=128, seed=3)


def sample(n=256, dep=True, seed=0):
    spec = GeneratorSpec(n, 3, 3, 0.2, seed=seed)
    return gen_additive(spec)[0] if dep else gen_independent(spec)


def test_result_is_full_sample_value_at_argmax():
    s = sample()
    res = estimate(s, SMALL)
    std = PairedSample((s.x - s.x.mean(0)) / s.x.std(0), (s.y - s.y.mean(0)) / s.y.std(0))
    assert res.kappa_hat == pytest.approx(abs(delta_n(std, res.argmax)), abs=1e-14)
    assert 0.0 <= res.kappa_hat <= 1.0
    assert res.trace.shape == (60, 2)
    np.testing.assert_allclose(np.linalg.norm(res.argmax.alpha), 1.0)


def test_seeded_determinism():
    s = sample()
    a, b = estimate(s, SMALL), estimate(s, SMALL)
    assert a.kappa_hat == b.kappa_hat and np.array_equal(a.trace, b.trace)
    c = estimate(s, EstimatorConfig(iterations=60, batch_size=128, seed=4))
    assert c.kappa_hat != a.kappa_hat


def test_batch_larger_than_sample_rejected():
    with pytest.raises(ValueError):
        estimate(sample(n=64), EstimatorConfig(batch_size=128))


def test_zero_iterations_returns_initial_value():
    s = sample()
    res = estimate(s, EstimatorConfig(iterations=0, batch_size=64))
    assert res.trace.shape == (0, 2) and 0 <= res.kappa_hat <= 1


def test_restarts_keep_the_best():
    s = sample()
    res = estimate(s, EstimatorConfig(iterations=30, batch_size=128, restarts=3))
    assert len(res.restart_values) == 3 and res.kappa_hat == max(res.restart_values)
    single = estimate(s, EstimatorConfig(iterations=30, batch_size=128))
    assert res.restart_values[0] == single.kappa_hat


def test_frequency_bound_is_respected():
    res = estimate(sample(), EstimatorConfig(iterations=40, batch_size=128, unit_sphere=False,
                                             learning_rate=0.5, freq_norm_bound=0.3))
    assert np.linalg.norm(res.argmax.gamma) <= 0.3 + 1e-12


def test_dependence_beats_independence():
    dep = estimate(sample(n=1024), EstimatorConfig(iterations=200, batch_size=512)).kappa_hat
    ind = estimate(sample(n=1024, dep=False), EstimatorConfig(iterations=200, batch_size=512)).kappa_hat
    assert dep > ind


def test_zero_bandwidth_smoothing_is_bit_identical():
    s = sample()
    direct = estimate(s, SMALL)
    smooth = estimate_smoothed(s, EstimatorConfig(iterations=60, batch_size=128, seed=3,
                                                  smoothing=SmoothingSpec(0.0)))
    assert direct.kappa_hat == smooth.kappa_hat
    assert np.array_equal(direct.trace, smooth.trace)
    with pytest.raises(ValueError):
        estimate_smoothed(s, SMALL)


def test_smoothing_damps_the_value():
    s = sample()
    res = estimate(s, EstimatorConfig(iterations=60, batch_size=128, smoothing=SmoothingSpec(0.5)))
    std = PairedSample((s.x - s.x.mean(0)) / s.x.std(0), (s.y - s.y.mean(0)) / s.y.std(0))
    g = res.argmax.gamma
    assert res.kappa_hat == pytest.approx(np.exp(-0.125 * g @ g) * abs(delta_n(std, res.argmax)), abs=1e-14)


def test_bandwidth_schedule():
    assert bandwidth_schedule(2048) == pytest.approx(2048 ** -0.5)
    with pytest.raises(ValueError):
        bandwidth_schedule(10, 1.0)


@pytest.mark.parametrize("kw", [dict(iterations=-1), dict(batch_size=0), dict(learning_rate=0.0),
                                dict(weight_decay=-0.1), dict(freq_norm_bound=0.0), dict(restarts=0),
                                dict(seed=-2)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        EstimatorConfig(**kw)


def test_permutation_null_and_p_value():
    s = sample(n=200, dep=False)
    cfg = EstimatorConfig(iterations=20, batch_size=100)
    null = permutation_null(s, cfg, 20)
    assert null.shape == (20,) and np.all(np.diff(null) >= 0)
    np.testing.assert_array_equal(null, permutation_null(s, cfg, 20, workers=3))
    assert null_p_value(np.inf, null) == pytest.approx(1 / 21)
    assert null_p_value(-1.0, null) == 1.0
    with pytest.raises(ValueError):
        permutation_null(s, cfg, 5)


def test_gaussian_full_batch_recovers_closed_form():
    s = gen_gaussian_pair(GaussianSpec.correlated_scalars(0.6), 4000, 1)
    res = estimate(s, EstimatorConfig(iterations=600, batch_size=4000, unit_sphere=False, restarts=4))
    assert res.kappa_hat == pytest.approx(0.32573011399138879, abs=0.03)


def test_restart_pairs_are_antithetic():
    s = sample()
    res = estimate(s, EstimatorConfig(iterations=0, batch_size=64, unit_sphere=False, restarts=2))
    std = PairedSample((s.x - s.x.mean(0)) / s.x.std(0), (s.y - s.y.mean(0)) / s.y.std(0))
    init = stream(0, "init", 0)
    a, b = init.uniform(-1, 1, 3), init.uniform(-1, 1, 3)
    assert res.restart_values[0] == pytest.approx(abs(delta_n(std, FrequencyPoint(a, b))), abs=1e-14)
    assert res.restart_values[1] == pytest.approx(abs(delta_n(std, FrequencyPoint(a, -b))), abs=1e-14)
