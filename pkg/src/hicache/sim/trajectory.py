"""Trajectory Module.

A trajectory is a time-indexed sequence of D-dimensional feature vectors with strictly
descending timesteps, the order in which an iterative sampler visits them (T, T-1, ..., 1).
"""

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from hicache.errors import InvalidFeatureError


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Feature trajectory.

    Attributes:
        times (np.ndarray): Strictly descending integer timesteps, shape (T,).
        values (np.ndarray): Features row by row, shape (T, D), float64, finite.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        times = np.ascontiguousarray(self.times, dtype=np.int64)
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if times.ndim != 1 or times.size == 0:
            raise InvalidFeatureError(f"times must be a non-empty 1-D array, got {times.shape}")
        if values.ndim != 2 or values.shape[0] != times.size or values.shape[1] == 0:
            raise InvalidFeatureError(
                f"values must have shape ({times.size}, D) with D >= 1, got {values.shape}"
            )
        if times.size > 1 and not np.all(np.diff(times) < 0):
            raise InvalidFeatureError("Trajectory timesteps must be strictly descending")
        if not np.all(np.isfinite(values)):
            bad_row = int(np.argwhere(~np.isfinite(values))[0][0])
            raise InvalidFeatureError(f"Non-finite feature at t={int(times[bad_row])}")
        times.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values, first_t: Optional[int] = None) -> "Trajectory":
        """Builds a trajectory on the grid ``first_t, first_t - 1, ...`` (default ``T .. 1``)."""
        values = np.asarray(values, dtype=np.float64)
        total = values.shape[0]
        start = total if first_t is None else int(first_t)
        return cls(times=np.arange(start, start - total, -1), values=values)

    @property
    def total_steps(self) -> int:
        """Number of timesteps T."""
        return int(self.times.size)

    @property
    def dim(self) -> int:
        """Feature dimension D."""
        return int(self.values.shape[1])

    @property
    def has_unit_grid(self) -> bool:
        """True when the timesteps are exactly ``T, T-1, ..., 1``."""
        return bool(
            self.times[0] == self.total_steps and np.all(np.diff(self.times) == -1)
        )

    def index_of(self, t: int) -> int:
        """Row index of timestep ``t``.

        Raises:
            KeyError: If ``t`` is not part of the trajectory.
        """
        # times are descending, search on the negated array
        index = int(np.searchsorted(-self.times, -t))
        if index >= self.total_steps or self.times[index] != t:
            raise KeyError(f"Timestep {t} is not covered by the trajectory")
        return index

    def feature_at(self, t: int) -> np.ndarray:
        """The feature at timestep ``t`` (read-only view)."""
        return self.values[self.index_of(t)]

    def covers(self, t: int) -> bool:
        """Whether timestep ``t`` is part of the trajectory."""
        try:
            self.index_of(t)
        except KeyError:
            return False
        return True

    def steps(self) -> Iterator[tuple[int, np.ndarray]]:
        """Iterates ``(t, feature)`` in descending time."""
        for t, feature in zip(self.times, self.values):
            yield int(t), feature

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return bool(
            np.array_equal(self.times, other.times) and np.array_equal(self.values, other.values)
        )

    def __hash__(self) -> int:
        return hash((self.times.tobytes(), self.values.tobytes()))
