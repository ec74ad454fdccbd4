import numpy as np
import pytest

from hsihqs import EstimatorConfig, HsiCube, build_estimator_weights, estimate
from hsihqs.estimator import PARAM_FLOOR
from hsihqs.weights import WeightStore

from _reference import ref_estimate
from conftest import random_cube


@pytest.fixture
def config():
    return EstimatorConfig(bands=4, iterations=3)


@pytest.fixture
def store(config):
    return build_estimator_weights(config, seed=42)


def params_as_matrix(p):
    return np.stack([p.alpha, p.beta, p.gamma, p.lam])


def test_zero_weights_forced_by_positivity_transform(config, small_cube):
    zeroed = WeightStore()
    for name, arr in build_estimator_weights(config, seed=0).items():
        zeroed.add(name, np.zeros_like(arr))
    params = estimate(small_cube, config.iterations, zeroed)
    expected = np.log(2.0) + PARAM_FLOOR
    np.testing.assert_allclose(params_as_matrix(params), expected, rtol=0, atol=1e-15)


def test_matches_straight_line_oracle(config, store):
    cube = HsiCube(np.ones((4, 8, 8), dtype=np.float32))
    params = estimate(cube, config.iterations, store)
    expected = ref_estimate(cube.data, store.as_float64(), config.iterations,
                            floor=PARAM_FLOOR)
    np.testing.assert_allclose(params_as_matrix(params), np.stack(expected),
                               rtol=1e-6, atol=1e-9)


def test_oracle_on_random_input(config, store, rng):
    cube = random_cube(rng, bands=4, height=8, width=8)
    params = estimate(cube, config.iterations, store)
    expected = ref_estimate(cube.data, store.as_float64(), config.iterations,
                            floor=PARAM_FLOOR)
    np.testing.assert_allclose(params_as_matrix(params), np.stack(expected),
                               rtol=1e-6, atol=1e-9)


def test_invariant_to_shift_by_stride(config, store, rng):
    # circular padding + global pooling: rolling by the conv stride (2)
    # permutes the pooled values without changing their multiset
    cube = random_cube(rng, bands=4, height=8, width=8)
    base = params_as_matrix(estimate(cube, config.iterations, store))
    for axis in (1, 2):
        rolled = HsiCube(np.roll(cube.data, shift=2, axis=axis))
        shifted = params_as_matrix(estimate(rolled, config.iterations, store))
        np.testing.assert_allclose(shifted, base, rtol=1e-6, atol=1e-9)


def test_outputs_strictly_positive_and_finite(config, store, rng):
    for _ in range(5):
        cube = HsiCube(rng.normal(0, 10, size=(4, 8, 8)).astype(np.float32))
        params = estimate(cube, config.iterations, store)
        values = params_as_matrix(params)
        assert np.all(values > 0)
        assert np.all(np.isfinite(values))


def test_deterministic_across_rebuilds(config, small_cube):
    a = build_estimator_weights(config, seed=7)
    b = build_estimator_weights(config, seed=7)
    for name in a.names():
        np.testing.assert_array_equal(a[name], b[name])
    pa = params_as_matrix(estimate(small_cube, config.iterations, a))
    pb = params_as_matrix(estimate(small_cube, config.iterations, b))
    np.testing.assert_array_equal(pa, pb)


def test_different_seed_changes_weights(config):
    a = build_estimator_weights(config, seed=7)
    b = build_estimator_weights(config, seed=8)
    assert any(not np.array_equal(a[name], b[name]) for name in a.names())


def test_band_mismatch_rejected(store, rng):
    wrong = random_cube(rng, bands=3)
    with pytest.raises(ValueError, match="bands"):
        estimate(wrong, 3, store)


def test_iteration_mismatch_rejected(store, small_cube):
    with pytest.raises(ValueError, match="4\\*K"):
        estimate(small_cube, 5, store)


def test_missing_estimator_tensors(small_cube):
    with pytest.raises(ValueError, match="no estimator"):
        estimate(small_cube, 3, WeightStore())
