import numpy as np
import pytest

from conftest import affine_spec, make_cache
from hicache.basis import IDENTITY_SIGMA, BasisConfig
from hicache.cache import cache_init, cache_update
from hicache.errors import CacheStateError, ConfigurationError, NumericOverflowError
from hicache.predictor import predict
from hicache.sim.generators import generate


def test_taylor_first_order_example():
    cache = make_cache([3.0, 5.0], [1.0, 2.0])
    prediction = predict(cache, BasisConfig.taylor(1), 1)
    np.testing.assert_array_equal(prediction.feature, [2.0, 3.0])
    assert prediction.horizon == 1
    assert prediction.order_used == 1


def test_identity_sigma_hermite_first_order_example():
    cache = make_cache([3.0, 5.0], [1.0, 2.0])
    prediction = predict(cache, BasisConfig.hermite(1, IDENTITY_SIGMA), 1)
    np.testing.assert_allclose(prediction.feature, [2.0, 3.0], rtol=1e-12)


def test_hermite_second_order_example():
    cache = make_cache([3.0, 5.0], [1.0, 2.0], [0.4, -0.2])
    prediction = predict(cache, BasisConfig.hermite(2, 0.5), 2)
    np.testing.assert_allclose(prediction.feature, [2.1, 2.95], rtol=1e-12)
    assert prediction.order_used == 2


@pytest.mark.parametrize("k", [1, 4, 9])
def test_zero_order_is_reuse(k):
    cache = make_cache([3.0, 5.0], [1.0, 2.0], [0.4, -0.2])
    for config in (BasisConfig.taylor(0), BasisConfig.hermite(0, 0.5)):
        prediction = predict(cache, config, k)
        np.testing.assert_array_equal(prediction.feature, [3.0, 5.0])
        assert prediction.order_used == 0


def test_order_is_truncated_during_warm_up():
    cache = cache_update(cache_init(4, 3), [1.0], 8)
    prediction = predict(cache, BasisConfig.taylor(3), 2)
    assert prediction.order_used == 0
    np.testing.assert_array_equal(prediction.feature, [1.0])

    cache = cache_update(cache, [2.0], 4)
    assert predict(cache, BasisConfig.taylor(3), 2).order_used == 1
    assert predict(cache, BasisConfig.taylor(0), 2).order_used == 0


def test_taylor_and_identity_hermite_agree_at_first_order():
    rng = np.random.default_rng(7)
    taylor = BasisConfig.taylor(1)
    hermite = BasisConfig.hermite(1, IDENTITY_SIGMA)
    for _ in range(1000):
        cache = make_cache(rng.normal(size=4), rng.normal(size=4), interval=8)
        k = int(rng.integers(1, 8))
        np.testing.assert_allclose(
            predict(cache, hermite, k).feature,
            predict(cache, taylor, k).feature,
            rtol=1e-12,
            atol=1e-12,
        )


@pytest.mark.parametrize("interval", range(2, 11))
def test_affine_trajectories_are_predicted_exactly(interval):
    truth = generate(affine_spec(total_steps=60, dim=8))
    anchors = [t for t in range(60, 0, -1) if t % interval == 0]
    configs = [BasisConfig.taylor(order) for order in range(1, 5)]
    configs += [BasisConfig.hermite(order, IDENTITY_SIGMA) for order in range(1, 5)]

    cache = cache_init(interval, 4)
    for anchor in anchors:
        cache = cache_update(cache, truth.feature_at(anchor), anchor)
        if cache.available_order < 1:
            continue
        for k in range(1, interval):
            if anchor - k < 1:
                break
            target = truth.feature_at(anchor - k)
            for config in configs:
                error = predict(cache, config, k).feature - target
                assert float(np.mean(error**2)) <= 1e-18


def test_predict_from_empty_cache_fails():
    with pytest.raises(CacheStateError):
        predict(cache_init(4, 2), BasisConfig.taylor(2), 1)


@pytest.mark.parametrize("k", [0, -1, 10, 11])
def test_horizon_outside_interval_is_rejected(k):
    cache = make_cache([1.0], [0.5], interval=10)
    with pytest.raises(ConfigurationError):
        predict(cache, BasisConfig.taylor(1), k)


def test_out_of_range_horizons_for_diagnostics():
    cache = make_cache([1.0], [0.5], interval=4)
    prediction = predict(cache, BasisConfig.taylor(1), 6, allow_out_of_range=True)
    np.testing.assert_array_equal(prediction.feature, [-2.0])
    # k = 0 reproduces the cached feature for Taylor only
    at_zero = predict(cache, BasisConfig.taylor(1), 0, allow_out_of_range=True)
    np.testing.assert_array_equal(at_zero.feature, [1.0])
    with pytest.raises(ConfigurationError):
        predict(cache, BasisConfig.taylor(1), -1, allow_out_of_range=True)


@pytest.mark.parametrize("sigma", [0.3, 0.5, 1.0])
def test_hermite_at_horizon_zero_differs_by_the_even_order_constant(sigma):
    cache = make_cache([3.0, 5.0], [1.0, 2.0], [0.4, -0.2])
    at_zero = predict(cache, BasisConfig.hermite(2, sigma), 0, allow_out_of_range=True)
    # H_2(0) / 2! = -1, the odd term vanishes
    np.testing.assert_allclose(
        at_zero.feature - cache.diffs[0], -(sigma**2) * cache.diffs[2], rtol=1e-12
    )


@pytest.mark.parametrize("config", [BasisConfig.taylor(3), BasisConfig.hermite(3, 0.5)])
def test_prediction_is_linear_in_the_cached_differences(config):
    rng = np.random.default_rng(11)
    first = [rng.normal(size=5) for _ in range(4)]
    second = [rng.normal(size=5) for _ in range(4)]
    alpha, beta = 1.7, -0.6
    combined = [alpha * a + beta * b for a, b in zip(first, second)]
    for k in range(1, 10):
        expected = (
            alpha * predict(make_cache(*first), config, k).feature
            + beta * predict(make_cache(*second), config, k).feature
        )
        np.testing.assert_allclose(
            predict(make_cache(*combined), config, k).feature, expected, rtol=1e-10, atol=1e-9
        )


def test_non_finite_prediction_reports_the_order():
    cache = make_cache([1e308], [1e308], interval=10)
    with pytest.raises(NumericOverflowError) as excinfo:
        predict(cache, BasisConfig.taylor(1), 5)
    assert excinfo.value.order == 1


def test_prediction_does_not_mutate_the_cache():
    cache = make_cache([3.0, 5.0], [1.0, 2.0])
    predict(cache, BasisConfig.taylor(1), 3)
    np.testing.assert_array_equal(cache.diffs[0], [3.0, 5.0])
