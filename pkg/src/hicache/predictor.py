"""Predictor Module.

This module extrapolates a feature ``k`` steps past the last activation from a
``DerivativeCache``:

    F^(t_last - k) = diffs[0] + sum_{i=1..m} diffs[i] / i! * basis_i(-k)

with ``basis_i`` the Taylor monomial or the scaled Hermite polynomial of the configured basis and
``m = min(config.max_order, cache.available_order)``. ``m = 0`` is plain reuse of the cached
feature. Basis values are computed once per order and broadcast over the feature dimensions.
"""

from dataclasses import dataclass

import numpy as np

from hicache.basis import BasisConfig, basis_value
from hicache.cache import DerivativeCache
from hicache.errors import CacheStateError, ConfigurationError, NumericOverflowError


@dataclass(frozen=True)
class Prediction:
    """A predicted feature.

    Attributes:
        feature (np.ndarray): The extrapolated feature vector.
        horizon (int): Number of steps k past the last activation.
        order_used (int): Number of expansion terms beyond the zeroth that were summed.
    """

    feature: np.ndarray
    horizon: int
    order_used: int


def predict(
    cache: DerivativeCache,
    config: BasisConfig,
    k: int,
    allow_out_of_range: bool = False,
) -> Prediction:
    """Predicts the feature ``k`` steps after the last activation.

    Args:
        cache (DerivativeCache): A cache holding at least one activation.
        config (BasisConfig): The basis used for the expansion.
        k (int): Horizon, ``1 <= k <= cache.interval - 1``.
        allow_out_of_range (bool): Diagnostics switch that accepts any ``k >= 0``. At ``k = 0``
            the Hermite expansion differs from the cached feature by its even-order constants.

    Returns:
        Prediction: The predicted feature together with the horizon and the order used.

    Raises:
        CacheStateError: If the cache is empty.
        ConfigurationError: If ``k`` is out of range.
        NumericOverflowError: If the accumulated prediction becomes non-finite.
    """
    if cache.is_empty:
        raise CacheStateError("Cannot predict from an empty cache")
    if isinstance(k, bool) or int(k) != k:
        raise ConfigurationError(f"Horizon must be an integer, got {k!r}")
    k = int(k)
    if allow_out_of_range:
        if k < 0:
            raise ConfigurationError(f"Horizon must be non-negative, got {k}")
    elif not 1 <= k <= cache.interval - 1:
        raise ConfigurationError(
            f"Horizon {k} is outside [1, {cache.interval - 1}] for interval {cache.interval}"
        )

    order = min(config.max_order, cache.available_order)
    feature = cache.diffs[0].copy()
    factorial = 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, order + 1):
            factorial *= i
            weight = basis_value(config, i, -float(k)) / factorial
            feature += weight * cache.diffs[i]
            if not np.all(np.isfinite(feature)):
                raise NumericOverflowError(order=i)

    return Prediction(feature=feature, horizon=k, order_used=order)
