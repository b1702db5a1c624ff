"""Energy test for multivariate normality.

The sample is whitened with its own mean and covariance and compared with a Monte-Carlo
standard-normal reference through the energy statistic

    E = n * (2 * A - B - C)

with ``A`` the mean sample-to-reference distance, ``B`` the mean distance within the reference
and ``C`` the mean distance within the sample (all ``n**2`` pairs). The p-value is obtained from
null replicates: fresh standard-normal samples of the same size pushed through the same
whitening and compared with the same reference,

    p = (1 + #{null >= observed}) / (replicates + 1).

The reference and every replicate draw from their own Philox stream derived from ``seed``.
"""

from dataclasses import dataclass
from logging import Logger

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist, pdist

from hicache.cache import cache_init, cache_update
from hicache.errors import ConfigurationError, InsufficientDataError, SingularCovarianceError
from hicache.sim.rng import philox, validate_seed
from hicache.sim.trajectory import Trajectory
from hicache.utils import get_logger

LOGGER: Logger = get_logger()

DEFAULT_MC_REFERENCE: int = 2048
DEFAULT_REPLICATES: int = 199
MIN_REPLICATES: int = 99
CONDITION_LIMIT: float = 1e12

_REFERENCE_STREAM: int = 0
_REPLICATE_STREAM: int = 1


@dataclass(frozen=True)
class EnergyTestResult:
    """Outcome of an energy test.

    Attributes:
        statistic (float): Observed energy statistic (>= 0).
        p_value (float): Monte-Carlo p-value in (0, 1].
        n_samples (int): Sample size n.
        dim (int): Sample dimension d.
        n_mc_reference (int): Size of the standard-normal reference.
        n_replicates (int): Number of null replicates.
        seed (int): Seed of the reference and replicate streams.
        condition (float): Condition-number estimate of the sample covariance.
        rank (int): Number of whitened directions kept.
    """

    statistic: float
    p_value: float
    n_samples: int
    dim: int
    n_mc_reference: int
    n_replicates: int
    seed: int
    condition: float
    rank: int

    def as_dict(self) -> dict:
        """Serializable view of the result."""
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "n_samples": self.n_samples,
            "dim": self.dim,
            "n_mc_reference": self.n_mc_reference,
            "n_replicates": self.n_replicates,
            "seed": self.seed,
            "condition": self.condition,
            "rank": self.rank,
        }


def whiten(samples: np.ndarray, allow_rank_deficient: bool = False):
    """Whitens ``samples`` with their mean and a symmetric inverse square root of the covariance.

    Eigenvalues below ``max_eigenvalue / CONDITION_LIMIT`` are dropped (pseudo-inverse). A
    dropped direction raises unless ``allow_rank_deficient`` is set, in which case the result
    lives in the retained subspace.

    Args:
        samples (np.ndarray): Shape (n, d).
        allow_rank_deficient (bool): Keep going in the retained subspace instead of raising.

    Returns:
        tuple[np.ndarray, float, int]: Whitened samples of shape (n, rank), the condition
        estimate and the rank.

    Raises:
        SingularCovarianceError: If the covariance is singular or too ill-conditioned.
    """
    centered = samples - samples.mean(axis=0)
    covariance = np.atleast_2d(np.cov(centered, rowvar=False))
    eigenvalues, eigenvectors = linalg.eigh(covariance)
    largest = float(eigenvalues[-1])
    smallest = float(eigenvalues[0])
    if largest <= 0.0:
        raise SingularCovarianceError(condition=float("inf"))
    condition = largest / smallest if smallest > 0.0 else float("inf")

    keep = eigenvalues > largest / CONDITION_LIMIT
    rank = int(np.count_nonzero(keep))
    if rank < eigenvalues.size:
        if not allow_rank_deficient:
            raise SingularCovarianceError(condition=condition)
        LOGGER.warning(
            f"Sample covariance is rank deficient ({rank}/{eigenvalues.size}), "
            f"whitening in the retained subspace"
        )
    basis = eigenvectors[:, keep] / np.sqrt(eigenvalues[keep])
    return centered @ basis, condition, rank


def mean_pair_distance(points: np.ndarray) -> float:
    """Mean Euclidean distance over all ``n**2`` ordered pairs, zero diagonal included."""
    n = points.shape[0]
    return 2.0 * float(pdist(points).sum()) / n**2


def energy_statistic(
    whitened: np.ndarray, reference: np.ndarray, reference_mean_distance: float
) -> float:
    """Energy statistic of a whitened sample against a standard-normal reference.

    ``reference_mean_distance`` must be ``mean_pair_distance(reference)``; with all three means
    taken over every pair the statistic is non-negative.
    """
    n = whitened.shape[0]
    cross = float(cdist(whitened, reference).mean())
    return n * (2.0 * cross - reference_mean_distance - mean_pair_distance(whitened))


def energy_test(
    samples,
    n_mc_reference: int = DEFAULT_MC_REFERENCE,
    n_replicates: int = DEFAULT_REPLICATES,
    seed: int = 0,
    allow_rank_deficient: bool = False,
) -> EnergyTestResult:
    """Tests whether ``samples`` come from a multivariate normal distribution.

    Args:
        samples (array-like): Shape (n, d), one sample per row.
        n_mc_reference (int): Size of the standard-normal reference.
        n_replicates (int): Number of null replicates (>= 99).
        seed (int): Seed of the reference and replicate streams.
        allow_rank_deficient (bool): Test in the retained subspace of a singular covariance.

    Returns:
        EnergyTestResult: Statistic, p-value and sampling parameters.

    Raises:
        InsufficientDataError: If ``n < d + 2``.
        ConfigurationError: If ``n_replicates < 99`` or ``n_mc_reference < 2``.
        SingularCovarianceError: If the sample covariance cannot be whitened.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1:
        samples = samples[:, None]
    n, dim = samples.shape
    if n < dim + 2:
        raise InsufficientDataError(
            f"Energy test needs at least d + 2 = {dim + 2} samples, got {n}"
        )
    if n_replicates < MIN_REPLICATES:
        raise ConfigurationError(f"n_replicates must be >= {MIN_REPLICATES}, got {n_replicates}")
    if n_mc_reference < 2:
        raise ConfigurationError(f"n_mc_reference must be >= 2, got {n_mc_reference}")
    seed = validate_seed(seed)
    if not np.all(np.isfinite(samples)):
        raise ConfigurationError("Energy test samples must be finite")

    whitened, condition, rank = whiten(samples, allow_rank_deficient=allow_rank_deficient)

    reference = philox(seed, _REFERENCE_STREAM).standard_normal((n_mc_reference, rank))
    reference_mean_distance = mean_pair_distance(reference)
    observed = energy_statistic(whitened, reference, reference_mean_distance)

    exceed = 0
    for replicate in range(n_replicates):
        null_sample = philox(seed, _REPLICATE_STREAM, replicate).standard_normal((n, rank))
        null_whitened, _, _ = whiten(null_sample)
        if energy_statistic(null_whitened, reference, reference_mean_distance) >= observed:
            exceed += 1
    p_value = (1.0 + exceed) / (n_replicates + 1.0)

    LOGGER.debug(f"Energy test n={n} d={dim}: E={observed:.6g}, p={p_value:.4f}")
    return EnergyTestResult(
        statistic=observed,
        p_value=p_value,
        n_samples=n,
        dim=dim,
        n_mc_reference=n_mc_reference,
        n_replicates=n_replicates,
        seed=seed,
        condition=condition,
        rank=rank,
    )


def difference_samples(trajectory: Trajectory, interval: int, order: int) -> np.ndarray:
    """Order-``order`` finite differences at every eligible activation anchor.

    The activation anchors are the timesteps divisible by ``interval``. The differences are the
    ones the derivative cache holds after each anchor, so each row is exactly what the predictor
    would use at that anchor.

    Args:
        trajectory (Trajectory): The trajectory to sample.
        interval (int): Activation interval.
        order (int): Difference order (0 returns the raw anchor features).

    Returns:
        np.ndarray: Shape (anchors - order, D), one row per eligible anchor in descending time.

    Raises:
        InsufficientDataError: If fewer than ``order + 1`` anchors exist.
    """
    cache = cache_init(interval, order)
    rows = []
    for t, feature in trajectory.steps():
        if t % interval != 0:
            continue
        cache = cache_update(cache, feature, t)
        if cache.available_order == order:
            rows.append(np.array(cache.diffs[order]))
    if not rows:
        raise InsufficientDataError(
            f"Trajectory has {cache.activations_seen} anchors for interval {interval}; "
            f"order {order} needs at least {order + 1}"
        )
    return np.vstack(rows)
