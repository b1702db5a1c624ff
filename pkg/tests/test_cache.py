from math import comb

import numpy as np
import pytest

from hicache.cache import cache_init, cache_update
from hicache.errors import CacheStateError, ConfigurationError, InvalidFeatureError


def test_cache_init_examples():
    cache = cache_init(6, 4)
    assert cache.is_empty
    assert cache.diffs == ()
    assert cache.available_order == -1
    assert cache.dim is None

    degenerate = cache_init(1, 0)
    assert degenerate.interval == 1 and degenerate.max_order == 0

    flux_like = cache_init(7, 2)
    assert (flux_like.interval, flux_like.max_order) == (7, 2)


@pytest.mark.parametrize("interval, max_order", [(0, 2), (-3, 1), (4, -1), (2.5, 1)])
def test_cache_init_rejects_bad_parameters(interval, max_order):
    with pytest.raises(ConfigurationError):
        cache_init(interval, max_order)


def test_update_with_signed_gap():
    cache = cache_update(cache_init(2, 2), [1.0, 1.0], 10)
    cache = cache_update(cache, [3.0, 5.0], 8)
    np.testing.assert_array_equal(cache.diffs[0], [3.0, 5.0])
    # (F(8) - F(10)) / (8 - 10)
    np.testing.assert_array_equal(cache.diffs[1], [-1.0, -2.0])
    assert cache.t_last == 8
    assert cache.activations_seen == 2


def test_constant_trajectory_has_zero_first_difference():
    cache = cache_init(3, 1)
    for t in (9, 6):
        cache = cache_update(cache, [4.0, -2.0, 0.5], t)
    np.testing.assert_array_equal(cache.diffs[1], np.zeros(3))


def test_affine_trajectory_recovers_its_slope():
    a = np.array([1.5, -0.25, 3.0])
    b = np.array([0.2, -1.0, 0.05])
    cache = cache_init(3, 2)
    for t in (12, 9, 6):
        cache = cache_update(cache, a + b * t, t)
    np.testing.assert_allclose(cache.diffs[1], b, rtol=1e-12)
    np.testing.assert_allclose(cache.diffs[2], 0.0, atol=1e-12)


def test_depth_grows_until_max_order():
    cache = cache_init(2, 2)
    orders = []
    for t in (10, 8, 6, 4):
        cache = cache_update(cache, [float(t) ** 2], t)
        orders.append(cache.available_order)
    assert orders == [0, 1, 2, 2]


def test_zero_order_cache_keeps_only_the_feature():
    cache = cache_init(1, 0)
    for t in (3, 2, 1):
        cache = cache_update(cache, [float(t)], t)
    assert len(cache.diffs) == 1
    np.testing.assert_array_equal(cache.diffs[0], [1.0])


def _direct_difference(values_by_t, t, interval, order):
    total = sum(
        (-1) ** j * comb(order, j) * values_by_t[t + j * interval] for j in range(order + 1)
    )
    return total / (-interval) ** order


def test_recursive_update_matches_direct_backward_differences():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        interval = int(rng.integers(1, 8))
        dim = int(rng.integers(1, 6))
        anchors = [interval * m for m in range(8, 0, -1)]
        values_by_t = {t: rng.normal(size=dim) for t in anchors}

        cache = cache_init(interval, 4)
        for t in anchors:
            cache = cache_update(cache, values_by_t[t], t)

        last = anchors[-1]
        for order in range(5):
            expected = _direct_difference(values_by_t, last, interval, order)
            np.testing.assert_allclose(cache.diffs[order], expected, rtol=1e-12, atol=1e-11)


def test_update_leaves_previous_cache_untouched():
    first = cache_update(cache_init(2, 1), [1.0, 2.0], 6)
    second = cache_update(first, [2.0, 4.0], 4)
    assert first.t_last == 6 and len(first.diffs) == 1
    assert second.t_last == 4 and len(second.diffs) == 2
    with pytest.raises(ValueError):
        second.diffs[0][0] = 99.0


def test_update_rejects_bad_timesteps():
    cache = cache_update(cache_init(2, 1), [1.0], 6)
    with pytest.raises(CacheStateError):
        cache_update(cache, [2.0], 6)
    with pytest.raises(CacheStateError):
        cache_update(cache, [2.0], 8)


def test_update_rejects_bad_features():
    cache = cache_update(cache_init(2, 1), [1.0, 2.0], 6)
    with pytest.raises(InvalidFeatureError):
        cache_update(cache, [1.0, 2.0, 3.0], 4)
    with pytest.raises(InvalidFeatureError):
        cache_update(cache, [1.0, float("nan")], 4)
    with pytest.raises(InvalidFeatureError):
        cache_update(cache_init(2, 1), [[1.0, 2.0]], 4)


def test_cache_is_linear_in_the_features():
    rng = np.random.default_rng(21)
    times = range(40, 0, -5)
    first = {t: rng.normal(size=3) for t in times}
    second = {t: rng.normal(size=3) for t in times}
    alpha, beta = 0.8, -2.5

    cache_a = cache_init(5, 4)
    cache_b = cache_init(5, 4)
    combined = cache_init(5, 4)
    for t in times:
        cache_a = cache_update(cache_a, first[t], t)
        cache_b = cache_update(cache_b, second[t], t)
        combined = cache_update(combined, alpha * first[t] + beta * second[t], t)
        for order in range(combined.available_order + 1):
            np.testing.assert_allclose(
                combined.diffs[order],
                alpha * cache_a.diffs[order] + beta * cache_b.diffs[order],
                rtol=1e-12,
                atol=1e-13,
            )
