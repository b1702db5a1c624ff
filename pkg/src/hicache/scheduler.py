"""Scheduler Module.

This module drives a full sampling run of T timesteps against a feature oracle. Timesteps run
from T down to 1; a step is an activation (full oracle call, cache refresh) when
``t % interval == 0`` or when the cache is still empty, otherwise the feature is predicted
from the cache with the horizon ``t_last - t``.

The run is modelled as a SimPy process: every oracle call advances the simulated clock by
``CostModel.full_compute`` and every prediction by ``CostModel.predict_per_term`` per summed
expansion term, so a run reports a simulated latency next to its oracle-call count. The schedule
is open-loop: predicted features are recorded but never fed back into the oracle.
"""

from dataclasses import dataclass, field
from enum import Enum
from logging import Logger
from typing import Generator, Optional, Protocol

import numpy as np
import simpy

from hicache.basis import BasisConfig
from hicache.cache import DerivativeCache, cache_init, cache_update
from hicache.errors import (
    CacheStateError,
    ConfigurationError,
    InsufficientDataError,
    OracleError,
)
from hicache.predictor import predict
from hicache.sim.trajectory import Trajectory
from hicache.utils import as_feature, get_logger

LOGGER: Logger = get_logger()


class StepMode(str, Enum):
    """How the feature of a timestep was obtained."""

    FULL = "full"
    PREDICTED = "predicted"


class FeatureOracle(Protocol):
    """Anything that computes the D-dimensional feature of timestep ``t``."""

    def __call__(self, t: int) -> np.ndarray: ...


class TrajectoryOracle:
    """Oracle replaying a recorded or generated trajectory.

    Attributes:
        trajectory (Trajectory): The trajectory the features are read from.
        busy_work (int): Number of 64x64 matrix products burnt per call to emulate real compute.
        calls (int): Number of calls served so far.
    """

    def __init__(self, trajectory: Trajectory, busy_work: int = 0) -> None:
        if busy_work < 0:
            raise ConfigurationError(f"busy_work must be non-negative, got {busy_work}")
        self.trajectory: Trajectory = trajectory
        self.busy_work: int = int(busy_work)
        self.calls: int = 0
        self._scratch: np.ndarray = np.full((64, 64), 1.0 / 64.0)

    def __call__(self, t: int) -> np.ndarray:
        self.calls += 1
        product = self._scratch
        for _ in range(self.busy_work):
            product = product @ self._scratch
        return self.trajectory.feature_at(t)


@dataclass(frozen=True)
class CostModel:
    """Simulated cost of the two kinds of steps, in arbitrary time units.

    Attributes:
        full_compute (float): Cost of one oracle call.
        predict_per_term (float): Cost of one accumulated expansion term of a prediction.
    """

    full_compute: float = 1.0
    predict_per_term: float = 0.01

    def __post_init__(self) -> None:
        if self.full_compute < 0 or self.predict_per_term < 0:
            raise ConfigurationError("Simulated costs must be non-negative")


@dataclass(frozen=True)
class ScheduleConfig:
    """Configuration of one sampling run.

    Attributes:
        total_steps (int): Number of timesteps T; the run visits T, T-1, ..., 1.
        interval (int): Activation interval N_interval.
        basis (BasisConfig): Predictor basis and order.
        direction (str): Only ``"descending"`` is supported.
    """

    total_steps: int
    interval: int
    basis: BasisConfig = field(default_factory=BasisConfig)
    direction: str = "descending"

    def __post_init__(self) -> None:
        if int(self.total_steps) != self.total_steps or self.total_steps < 1:
            raise ConfigurationError(f"total_steps must be >= 1, got {self.total_steps!r}")
        if int(self.interval) != self.interval or self.interval < 1:
            raise ConfigurationError(f"interval must be >= 1, got {self.interval!r}")
        if self.direction != "descending":
            raise ConfigurationError(f"Unsupported direction {self.direction!r}")

    def as_dict(self) -> dict:
        """Serializable echo of the configuration."""
        return {
            "total_steps": self.total_steps,
            "interval": self.interval,
            "basis": self.basis.as_dict(),
            "direction": self.direction,
        }


@dataclass(frozen=True)
class StepRecord:
    """What happened at one timestep."""

    t: int
    mode: StepMode
    feature: np.ndarray
    error_vs_truth: Optional[float] = None
    horizon: Optional[int] = None
    order_used: int = 0


@dataclass
class ScheduleTrace:
    """Record of a full sampling run.

    Attributes:
        records (list[StepRecord]): One record per timestep, in visiting order (T first).
        oracle_calls (int): Number of full computations.
        simulated_latency (float): Simulated clock at the end of the run.
        baseline_latency (float): Simulated clock of the same run without caching.
    """

    records: list[StepRecord] = field(default_factory=list)
    oracle_calls: int = 0
    simulated_latency: float = 0.0
    baseline_latency: float = 0.0

    @property
    def total_steps(self) -> int:
        """Number of recorded timesteps."""
        return len(self.records)

    @property
    def skipped(self) -> int:
        """Number of predicted timesteps."""
        return self.total_steps - self.oracle_calls

    @property
    def speedup_proxy(self) -> float:
        """Call-count speedup ``T / oracle_calls``."""
        return self.total_steps / self.oracle_calls if self.oracle_calls else float("nan")

    @property
    def latency_speedup(self) -> float:
        """Simulated-latency speedup against the uncached run."""
        if self.simulated_latency == 0:
            return float("nan")
        return self.baseline_latency / self.simulated_latency

    def full_steps(self) -> list[int]:
        """Timesteps that were fully computed, in visiting order."""
        return [record.t for record in self.records if record.mode is StepMode.FULL]

    def predicted_steps(self) -> list[int]:
        """Timesteps that were predicted, in visiting order."""
        return [record.t for record in self.records if record.mode is StepMode.PREDICTED]

    def mse(self, mode: StepMode) -> Optional[float]:
        """Mean squared elementwise error of the steps of ``mode`` (``None`` if unavailable)."""
        errors = [
            record.error_vs_truth**2 / record.feature.shape[0]
            for record in self.records
            if record.mode is mode and record.error_vs_truth is not None
        ]
        return float(np.mean(errors)) if errors else None


def is_activation_step(t: int, interval: int, cache: DerivativeCache) -> bool:
    """Activation rule: aligned timesteps plus the first step of a run."""
    return cache.is_empty or t % interval == 0


def horizon_of(t: int, t_last: int) -> int:
    """Number of steps between the last activation ``t_last`` and ``t``.

    Args:
        t (int): The step being predicted.
        t_last (int): The most recent activation step.

    Returns:
        int: ``abs(t_last - t)``.

    Raises:
        CacheStateError: If ``t == t_last``.
    """
    if t == t_last:
        raise CacheStateError(f"Horizon is undefined at the activation step itself (t={t})")
    return abs(int(t_last) - int(t))


class CachedSampler:
    """Runs the cache-then-forecast schedule as a SimPy process.

    Attributes:
        config (ScheduleConfig): Run configuration.
        oracle (FeatureOracle): Source of fully computed features.
        truth (Optional[Trajectory]): Reference trajectory for per-step errors.
        cost (CostModel): Simulated step costs.
        env (simpy.Environment): The simulated clock.
    """

    def __init__(
        self,
        config: ScheduleConfig,
        oracle: FeatureOracle,
        truth: Optional[Trajectory] = None,
        cost: Optional[CostModel] = None,
    ) -> None:
        self.config: ScheduleConfig = config
        self.oracle: FeatureOracle = oracle
        self.truth: Optional[Trajectory] = truth
        self.cost: CostModel = cost or CostModel()
        self.env: simpy.Environment = simpy.Environment()
        self._trace: ScheduleTrace = ScheduleTrace()

        if truth is not None:
            missing = [t for t in range(config.total_steps, 0, -1) if not truth.covers(t)]
            if missing:
                raise InsufficientDataError(
                    f"Truth trajectory does not cover {len(missing)} of the scheduled steps "
                    f"(first missing t={missing[0]})"
                )

    def _call_oracle(self, t: int, dim: Optional[int]) -> np.ndarray:
        try:
            feature = as_feature(self.oracle(t))
        except OracleError:
            raise
        except Exception as exc:  # pylint: disable=broad-except
            raise OracleError(t, str(exc)) from exc
        if dim is not None and feature.shape[0] != dim:
            raise OracleError(t, f"feature dimension changed from {dim} to {feature.shape[0]}")
        if not np.all(np.isfinite(feature)):
            raise OracleError(t, "feature contains non-finite values")
        return feature

    def _error(self, t: int, feature: np.ndarray) -> Optional[float]:
        if self.truth is None:
            return None
        return float(np.linalg.norm(feature - self.truth.feature_at(t)))

    def _sampling_process(self) -> Generator[simpy.Event, None, None]:
        config = self.config
        cache = cache_init(config.interval, config.basis.max_order)

        for t in range(config.total_steps, 0, -1):
            if is_activation_step(t, config.interval, cache):
                feature = self._call_oracle(t, cache.dim)
                cache = cache_update(cache, feature, t)
                self._trace.oracle_calls += 1
                record = StepRecord(
                    t=t,
                    mode=StepMode.FULL,
                    feature=feature,
                    error_vs_truth=self._error(t, feature),
                )
                yield self.env.timeout(self.cost.full_compute)
            else:
                horizon = horizon_of(t, cache.t_last)
                prediction = predict(cache, config.basis, horizon)
                record = StepRecord(
                    t=t,
                    mode=StepMode.PREDICTED,
                    feature=prediction.feature,
                    error_vs_truth=self._error(t, prediction.feature),
                    horizon=horizon,
                    order_used=prediction.order_used,
                )
                yield self.env.timeout(self.cost.predict_per_term * (prediction.order_used + 1))
            self._trace.records.append(record)

    def run(self) -> ScheduleTrace:
        """Executes the whole schedule and returns its trace."""
        self.env.process(self._sampling_process())
        self.env.run()

        self._trace.simulated_latency = float(self.env.now)
        self._trace.baseline_latency = self.config.total_steps * self.cost.full_compute
        LOGGER.debug(
            f"Schedule T={self.config.total_steps} N={self.config.interval} "
            f"{self.config.basis.label()}: {self._trace.oracle_calls} oracle calls, "
            f"simulated latency {self._trace.simulated_latency:g}"
        )
        return self._trace


def run_schedule(
    config: ScheduleConfig,
    oracle: FeatureOracle,
    truth: Optional[Trajectory] = None,
    cost: Optional[CostModel] = None,
) -> ScheduleTrace:
    """Runs a full cache-then-forecast schedule.

    Args:
        config (ScheduleConfig): Steps, interval and basis.
        oracle (FeatureOracle): Computes the feature of an activation step.
        truth (Optional[Trajectory]): When given, per-step L2 errors are recorded.
        cost (Optional[CostModel]): Simulated step costs (defaults to ``CostModel()``).

    Returns:
        ScheduleTrace: One record per timestep plus call counts and simulated latency.

    Raises:
        OracleError: If the oracle fails, changes dimension or returns non-finite values.
        InsufficientDataError: If ``truth`` does not cover every scheduled step.
    """
    return CachedSampler(config, oracle, truth=truth, cost=cost).run()
