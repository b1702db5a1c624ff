"""Synthetic trajectory generators.

Stand-ins for recorded model features whose finite differences are (or, for the
alternatives, are not) multivariate Gaussian:

- ``gp-se``: zero-mean Gaussian process with squared-exponential kernel
  ``amplitude**2 * exp(-(s - t)**2 / (2 * length_scale**2))``, sampled through a Cholesky
  factor of the dense T x T kernel matrix;
- ``ou``: Ornstein-Uhlenbeck process through its exact AR(1) discretisation
  ``x[s+1] = exp(-theta) * x[s] + noise * sqrt((1 - exp(-2 theta)) / (2 theta)) * eps``;
- ``poly``: random polynomial of the given degree in ``t / T`` plus white noise;
- ``uniform``: i.i.d. Uniform[0, 1) features, a non-Gaussian alternative.

Dimensions are independent and each one draws from its own Philox stream.
"""

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from logging import Logger

import numpy as np

from hicache.errors import ConfigurationError, SingularCovarianceError
from hicache.sim.rng import philox_streams, validate_seed
from hicache.sim.trajectory import Trajectory
from hicache.utils import get_logger

LOGGER: Logger = get_logger()

# The dense kernel path factorizes a T x T matrix; use the OU generator for longer runs.
MAX_DENSE_STEPS: int = 4096
JITTER_START: float = 1e-10
JITTER_LIMIT: float = 1e-6
MAX_POLY_DEGREE: int = 4


class GeneratorKind(str, Enum):
    """Available trajectory generators."""

    GP_SQUARED_EXPONENTIAL = "gp-se"
    ORNSTEIN_UHLENBECK = "ou"
    POLY_PLUS_NOISE = "poly"
    UNIFORM_NOISE = "uniform"


@dataclass(frozen=True)
class GeneratorSpec:
    """Full description of a synthetic trajectory; ``seed`` fixes the output bit for bit.

    Only the parameters of the selected ``kind`` are used.

    Attributes:
        kind (GeneratorKind): Generator family.
        dim (int): Feature dimension D.
        total_steps (int): Number of timesteps T (trajectory runs T, T-1, ..., 1).
        seed (int): Unsigned 64-bit seed.
        length_scale (float): GP kernel length scale in timesteps.
        amplitude (float): GP kernel amplitude.
        theta (float): OU mean-reversion rate per timestep.
        noise (float): OU diffusion scale or white-noise level of ``poly``.
        initial (float): OU starting value at t = T.
        degree (int): Polynomial degree for ``poly`` (0..4).
        coeff_scale (float): Standard deviation of the polynomial coefficients.
    """

    kind: GeneratorKind = GeneratorKind.GP_SQUARED_EXPONENTIAL
    dim: int = 16
    total_steps: int = 50
    seed: int = 0
    length_scale: float = 8.0
    amplitude: float = 1.0
    theta: float = 0.1
    noise: float = 1.0
    initial: float = 1.0
    degree: int = 1
    coeff_scale: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", GeneratorKind(self.kind))
        validate_seed(self.seed)
        if int(self.dim) != self.dim or self.dim < 1:
            raise ConfigurationError(f"dim must be a positive integer, got {self.dim!r}")
        if int(self.total_steps) != self.total_steps or self.total_steps < 1:
            raise ConfigurationError(
                f"total_steps must be a positive integer, got {self.total_steps!r}"
            )
        if self.kind is GeneratorKind.GP_SQUARED_EXPONENTIAL:
            if not self.length_scale > 0 or not self.amplitude > 0:
                raise ConfigurationError("gp-se needs length_scale > 0 and amplitude > 0")
            if self.total_steps > MAX_DENSE_STEPS:
                raise ConfigurationError(
                    f"gp-se factorizes a dense kernel and supports at most {MAX_DENSE_STEPS} "
                    f"steps, got {self.total_steps}; use the ou generator for longer runs"
                )
        elif self.kind is GeneratorKind.ORNSTEIN_UHLENBECK:
            if not self.theta > 0 or not self.noise >= 0:
                raise ConfigurationError("ou needs theta > 0 and noise >= 0")
        elif self.kind is GeneratorKind.POLY_PLUS_NOISE:
            if int(self.degree) != self.degree or not 0 <= self.degree <= MAX_POLY_DEGREE:
                raise ConfigurationError(
                    f"poly degree must be an integer in [0, {MAX_POLY_DEGREE}], got {self.degree}"
                )
            if not self.noise >= 0:
                raise ConfigurationError("poly needs noise >= 0")

    def as_dict(self) -> dict:
        """Serializable echo of the parameters that matter for ``kind``."""
        common = {
            "kind": self.kind.value,
            "dim": self.dim,
            "total_steps": self.total_steps,
            "seed": self.seed,
        }
        if self.kind is GeneratorKind.GP_SQUARED_EXPONENTIAL:
            common.update(length_scale=self.length_scale, amplitude=self.amplitude)
        elif self.kind is GeneratorKind.ORNSTEIN_UHLENBECK:
            common.update(theta=self.theta, noise=self.noise, initial=self.initial)
        elif self.kind is GeneratorKind.POLY_PLUS_NOISE:
            common.update(degree=self.degree, coeff_scale=self.coeff_scale, noise=self.noise)
        return common


def squared_exponential_kernel(times: np.ndarray, length_scale: float, amplitude: float):
    """Dense squared-exponential kernel matrix over ``times``."""
    times = np.asarray(times, dtype=np.float64)
    gaps = times[:, None] - times[None, :]
    return amplitude**2 * np.exp(-(gaps**2) / (2.0 * length_scale**2))


@lru_cache(maxsize=32)
def _kernel_factor(total_steps: int, length_scale: float, amplitude: float) -> np.ndarray:
    """Lower Cholesky factor of the kernel on ``T .. 1`` with escalating diagonal jitter."""
    times = np.arange(total_steps, 0, -1)
    kernel = squared_exponential_kernel(times, length_scale, amplitude)
    identity = np.eye(total_steps)
    jitter = JITTER_START
    while jitter <= JITTER_LIMIT * (1 + 1e-9):
        try:
            factor = np.linalg.cholesky(kernel + jitter * amplitude**2 * identity)
        except np.linalg.LinAlgError:
            LOGGER.debug(f"Kernel factorization failed with jitter {jitter:.0e}, escalating")
            jitter *= 10.0
            continue
        factor.flags.writeable = False
        return factor
    raise SingularCovarianceError(
        condition=float(np.linalg.cond(kernel)),
        message=(
            f"Squared-exponential kernel (T={total_steps}, length_scale={length_scale}) is not "
            f"positive definite even with jitter {JITTER_LIMIT:.0e}"
        ),
    )


def generate(spec: GeneratorSpec) -> Trajectory:
    """Generates the trajectory described by ``spec``.

    Args:
        spec (GeneratorSpec): Generator family, sizes, parameters and seed.

    Returns:
        Trajectory: ``spec.total_steps`` steps on the grid ``T, T-1, ..., 1``.

    Raises:
        SingularCovarianceError: If the GP kernel cannot be factorized.
    """
    total = spec.total_steps
    streams = philox_streams(spec.seed, spec.dim)
    values = np.empty((total, spec.dim), dtype=np.float64)

    if spec.kind is GeneratorKind.GP_SQUARED_EXPONENTIAL:
        factor = _kernel_factor(total, float(spec.length_scale), float(spec.amplitude))
        for column, rng in enumerate(streams):
            values[:, column] = factor @ rng.standard_normal(total)

    elif spec.kind is GeneratorKind.ORNSTEIN_UHLENBECK:
        decay = math.exp(-spec.theta)
        step_std = spec.noise * math.sqrt((1.0 - decay**2) / (2.0 * spec.theta))
        for column, rng in enumerate(streams):
            shocks = rng.standard_normal(total)
            values[0, column] = spec.initial
            for row in range(1, total):
                values[row, column] = decay * values[row - 1, column] + step_std * shocks[row]

    elif spec.kind is GeneratorKind.POLY_PLUS_NOISE:
        scaled_t = np.arange(total, 0, -1, dtype=np.float64) / total
        for column, rng in enumerate(streams):
            coeffs = rng.normal(0.0, spec.coeff_scale, size=spec.degree + 1)
            shocks = rng.standard_normal(total)
            # highest degree first for np.polyval
            values[:, column] = np.polyval(coeffs[::-1], scaled_t) + spec.noise * shocks

    else:
        for column, rng in enumerate(streams):
            values[:, column] = rng.random(total)

    LOGGER.debug(f"Generated {spec.kind.value} trajectory T={total} D={spec.dim} seed={spec.seed}")
    return Trajectory.from_values(values)
