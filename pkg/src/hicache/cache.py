"""Derivative Cache Module.

This module keeps the order-indexed finite-difference approximations of a feature
trajectory, refreshed only at activation steps:

    diffs[0]   = F(t)
    diffs[k+1] = (diffs[k] - previous_diffs[k]) / (t - t_last)

``t - t_last`` is the signed gap between consecutive activation steps (negative for the
descending timesteps T, T-1, ..., 1), so ``diffs[k]`` approximates the k-th derivative of F
with respect to t. The depth grows by at most one order per activation until ``max_order`` is
reached (warm-up); the predictor truncates its expansion to what the cache can support.

The update is functional: ``cache_update`` returns a new ``DerivativeCache`` and never
modifies its argument. Stored vectors are read-only.
"""

from dataclasses import dataclass, replace
from logging import Logger
from typing import Optional

import numpy as np

from hicache.errors import CacheStateError, ConfigurationError, InvalidFeatureError
from hicache.utils import as_feature, get_logger

LOGGER: Logger = get_logger()


def _frozen(vector: np.ndarray) -> np.ndarray:
    vector.flags.writeable = False
    return vector


@dataclass(frozen=True)
class DerivativeCache:
    """Order-indexed derivative approximations anchored at the last activation step.

    Attributes:
        interval (int): Nominal gap N_interval between activation steps.
        max_order (int): Highest order N_order kept in the cache.
        diffs (tuple[np.ndarray, ...]): ``diffs[i]`` holds the i-th order approximation.
        t_last (Optional[int]): Timestep of the most recent activation, ``None`` when empty.
        activations_seen (int): Number of updates applied so far.
    """

    interval: int
    max_order: int
    diffs: tuple = ()
    t_last: Optional[int] = None
    activations_seen: int = 0

    @property
    def is_empty(self) -> bool:
        """True until the first activation."""
        return self.activations_seen == 0

    @property
    def available_order(self) -> int:
        """Highest order currently supported (``-1`` for an empty cache)."""
        return len(self.diffs) - 1

    @property
    def dim(self) -> Optional[int]:
        """Feature dimension D, ``None`` for an empty cache."""
        return self.diffs[0].shape[0] if self.diffs else None


def cache_init(interval: int, max_order: int) -> DerivativeCache:
    """Creates an empty derivative cache.

    Args:
        interval (int): Activation interval N_interval (>= 1).
        max_order (int): Highest finite-difference order N_order (>= 0).

    Returns:
        DerivativeCache: An empty cache; predicting from it is an error.

    Raises:
        ConfigurationError: If ``interval`` < 1 or ``max_order`` < 0.
    """
    if isinstance(interval, bool) or int(interval) != interval or interval < 1:
        raise ConfigurationError(f"interval must be a positive integer, got {interval!r}")
    if isinstance(max_order, bool) or int(max_order) != max_order or max_order < 0:
        raise ConfigurationError(f"max_order must be a non-negative integer, got {max_order!r}")
    return DerivativeCache(interval=int(interval), max_order=int(max_order))


def cache_update(cache: DerivativeCache, feature, t: int) -> DerivativeCache:
    """Refreshes the cache with a fully computed feature at activation step ``t``.

    Args:
        cache (DerivativeCache): The current cache (left untouched).
        feature (array-like): The D-dimensional feature F(t).
        t (int): The activation timestep; must be below ``cache.t_last``.

    Returns:
        DerivativeCache: The updated cache.

    Raises:
        InvalidFeatureError: On a malformed or non-finite feature or a dimension mismatch.
        CacheStateError: If ``t`` does not descend strictly from ``cache.t_last``.
    """
    feature = as_feature(feature)
    if not np.all(np.isfinite(feature)):
        raise InvalidFeatureError(f"Feature at t={t} contains non-finite values")

    if cache.is_empty:
        LOGGER.debug(f"Cache primed at t={t} with D={feature.shape[0]}")
        return replace(
            cache, diffs=(_frozen(feature.copy()),), t_last=int(t), activations_seen=1
        )

    if feature.shape[0] != cache.dim:
        raise InvalidFeatureError(
            f"Feature dimension {feature.shape[0]} at t={t} does not match cache dimension "
            f"{cache.dim}"
        )
    if t == cache.t_last:
        raise CacheStateError(f"Activation gap is zero: t={t} equals t_last")
    if t > cache.t_last:
        raise CacheStateError(
            f"Timesteps must descend: got t={t} after the activation at t={cache.t_last}"
        )

    dt_hist = float(t - cache.t_last)
    depth = min(cache.available_order + 1, cache.max_order)
    new_diffs = [feature.copy()]
    for k in range(depth):
        new_diffs.append((new_diffs[k] - cache.diffs[k]) / dt_hist)

    LOGGER.debug(f"Cache updated at t={t} (dt_hist={dt_hist:g}, orders 0..{depth})")
    return replace(
        cache,
        diffs=tuple(_frozen(diff) for diff in new_diffs),
        t_last=int(t),
        activations_seen=cache.activations_seen + 1,
    )
