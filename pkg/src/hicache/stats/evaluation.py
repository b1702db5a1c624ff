"""Non-cumulative prediction evaluation.

Every prediction task starts from ground truth: at each activation anchor the derivative cache
is rebuilt from the true features of that anchor and the preceding ones, the horizons
``1 .. interval - 1`` are predicted, and the squared errors against the true features are
accumulated. Errors never propagate from one task to the next, so the comparison isolates the
quality of the basis.

The relative error ratio of a candidate basis against a baseline is
``R = baseline_mse / candidate_mse``; with a Taylor baseline and a Hermite candidate, ``R > 1``
means the Hermite basis wins.
"""

from dataclasses import dataclass
from logging import Logger
from typing import Optional, Sequence

import numpy as np

from hicache.basis import BasisConfig
from hicache.cache import cache_init, cache_update
from hicache.errors import ConfigurationError, InsufficientDataError
from hicache.predictor import predict
from hicache.sim.trajectory import Trajectory
from hicache.utils import get_logger

LOGGER: Logger = get_logger()


@dataclass(frozen=True)
class ErrorReport:
    """Per-horizon MSEs of several bases on the same prediction tasks.

    Attributes:
        interval (int): Activation interval.
        configs (tuple[BasisConfig, ...]): Evaluated bases; index 0 is the ratio baseline.
        horizons (tuple[int, ...]): Horizons ``1 .. interval - 1``.
        mse (np.ndarray): Shape (len(configs), len(horizons)).
        n_anchors (int): Number of prediction tasks per horizon.
        warmup_order (int): Depth the caches were built to.
    """

    interval: int
    configs: tuple
    horizons: tuple
    mse: np.ndarray
    n_anchors: int
    warmup_order: int

    @property
    def cumulative_mse(self) -> np.ndarray:
        """Sum of the per-horizon MSEs over horizons ``1 .. k``, shape like ``mse``."""
        return np.cumsum(self.mse, axis=1)

    @staticmethod
    def _ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
        ratio = np.full(numerator.shape, np.nan)
        defined = denominator > 0.0
        ratio[defined] = numerator[defined] / denominator[defined]
        return ratio

    def ratio(self, candidate: int = 1, baseline: int = 0) -> np.ndarray:
        """Per-horizon ``R``; ``nan`` where the candidate MSE is zero (undefined)."""
        return self._ratio(self.mse[baseline], self.mse[candidate])

    def cumulative_ratio(self, candidate: int = 1, baseline: int = 0) -> np.ndarray:
        """Cumulative ``R`` over horizons ``1 .. k``; ``nan`` where undefined."""
        cumulative = self.cumulative_mse
        return self._ratio(cumulative[baseline], cumulative[candidate])

    def rows(self, baseline: int = 0) -> list[dict]:
        """Flat rows, one per (config, horizon), with undefined ratios reported as ``None``."""
        cumulative = self.cumulative_mse
        rows = []
        for index, config in enumerate(self.configs):
            ratio = self.ratio(index, baseline)
            cumulative_ratio = self.cumulative_ratio(index, baseline)
            for column, horizon in enumerate(self.horizons):
                rows.append(
                    {
                        "basis": config.kind.value,
                        "order": config.max_order,
                        "sigma": config.sigma,
                        "interval": self.interval,
                        "horizon": horizon,
                        "mse": float(self.mse[index, column]),
                        "cumulative_mse": float(cumulative[index, column]),
                        "baseline_mse": float(self.mse[baseline, column]),
                        "r": _defined(ratio[column]),
                        "r_cumulative": _defined(cumulative_ratio[column]),
                    }
                )
        return rows


def _defined(value: float) -> Optional[float]:
    return None if np.isnan(value) else float(value)


def activation_anchors(trajectory: Trajectory, interval: int) -> list[int]:
    """Timesteps of ``trajectory`` divisible by ``interval``, in descending order."""
    return [int(t) for t in trajectory.times if t % interval == 0]


def non_cumulative_eval(
    truth: Trajectory,
    interval: int,
    configs: Sequence[BasisConfig],
    warmup_order: Optional[int] = None,
) -> ErrorReport:
    """Evaluates ``configs`` on ground-truth-initialized prediction tasks.

    Args:
        truth (Trajectory): The reference trajectory.
        interval (int): Activation interval (>= 2 so that at least one horizon exists).
        configs (Sequence[BasisConfig]): Bases to evaluate; ``configs[0]`` is the baseline.
        warmup_order (Optional[int]): Number of previous anchors each task needs; defaults to
            the largest order among ``configs``. Pass a common value to evaluate different
            orders on the same tasks.

    Returns:
        ErrorReport: Per-horizon MSEs for every config.

    Raises:
        ConfigurationError: If ``interval < 2`` or ``configs`` is empty.
        InsufficientDataError: If no anchor has a complete warm-up history.
    """
    if interval < 2:
        raise ConfigurationError(f"interval must be >= 2 to leave horizons, got {interval}")
    configs = tuple(configs)
    if not configs:
        raise ConfigurationError("At least one basis configuration is required")
    warmup = max(config.max_order for config in configs) if warmup_order is None else warmup_order
    if warmup < max(config.max_order for config in configs):
        raise ConfigurationError("warmup_order must cover the largest configured order")

    anchors = activation_anchors(truth, interval)
    horizons = tuple(range(1, interval))
    squared = np.zeros((len(configs), len(horizons)))
    tasks = 0

    for position in range(warmup, len(anchors)):
        anchor = anchors[position]
        if not all(truth.covers(anchor - k) for k in horizons):
            continue
        history = anchors[position - warmup : position + 1]
        if any(earlier - later != interval for earlier, later in zip(history, history[1:])):
            continue

        cache = cache_init(interval, warmup)
        for t in history:
            cache = cache_update(cache, truth.feature_at(t), t)

        for column, k in enumerate(horizons):
            target = truth.feature_at(anchor - k)
            for row, config in enumerate(configs):
                error = predict(cache, config, k).feature - target
                squared[row, column] += float(np.mean(error**2))
        tasks += 1

    if tasks == 0:
        raise InsufficientDataError(
            f"No anchor of the trajectory (T={truth.total_steps}) has {warmup} preceding "
            f"anchors at interval {interval}"
        )

    LOGGER.debug(f"Non-cumulative evaluation: {tasks} tasks, {len(configs)} bases")
    return ErrorReport(
        interval=interval,
        configs=configs,
        horizons=horizons,
        mse=squared / tasks,
        n_anchors=tasks,
        warmup_order=warmup,
    )
