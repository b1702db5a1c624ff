"""Experiment campaigns.

Seed campaigns behind the ``compare``, ``ablate-sigma`` and ``gauss-test`` commands. Each seed
is an independent task (its trajectory is generated from its own seed), tasks can be fanned out
over a process pool, and the returned rows are sorted by their key columns so the output does
not depend on completion order.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from logging import Logger
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats as scipy_stats

from hicache.basis import BasisConfig, BasisKind
from hicache.errors import (
    ConfigurationError,
    InsufficientDataError,
    SingularCovarianceError,
)
from hicache.sim.generators import GeneratorSpec, generate
from hicache.sim.trajectory import Trajectory
from hicache.stats.energy import (
    DEFAULT_MC_REFERENCE,
    DEFAULT_REPLICATES,
    difference_samples,
    energy_test,
)
from hicache.stats.evaluation import non_cumulative_eval
from hicache.utils import get_logger

LOGGER: Logger = get_logger()

DEFAULT_SIGMAS: tuple = (0.4, 0.5, 0.7, 1.0)
CONFIDENCE: float = 0.95
DEGENERATE_REL_TOL: float = 1e-10


def make_basis(kind: BasisKind, order: int, sigma: float) -> BasisConfig:
    """Builds a basis config; ``sigma`` is only used by the Hermite basis."""
    if BasisKind(kind) is BasisKind.TAYLOR:
        return BasisConfig.taylor(order)
    return BasisConfig.hermite(order, sigma)


def mean_confidence_interval(values: Iterable[float]) -> tuple:
    """Mean and two-sided Student-t confidence interval, ignoring ``nan`` entries.

    Returns:
        tuple[Optional[float], Optional[float], Optional[float], int]: mean, lower, upper bound
        and the number of values used. Bounds collapse onto the mean for fewer than two values
        or zero spread.
    """
    array = np.asarray([value for value in values if not np.isnan(value)], dtype=np.float64)
    count = int(array.size)
    if count == 0:
        return None, None, None, 0
    mean = float(array.mean())
    if count < 2:
        return mean, mean, mean, count
    sem = float(scipy_stats.sem(array))
    if sem == 0.0:
        return mean, mean, mean, count
    low, high = scipy_stats.t.interval(CONFIDENCE, count - 1, loc=mean, scale=sem)
    return mean, float(low), float(high), count


def _fan_out(task: Callable, arguments: Sequence, workers: int) -> list:
    if workers <= 1 or len(arguments) <= 1:
        return [task(argument) for argument in arguments]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(task, arguments))


def _compare_task(argument: tuple) -> dict:
    spec, interval, orders, sigma, baseline, candidate = argument
    truth = generate(spec)
    warmup = max(orders)
    result = {}
    for order in orders:
        configs = [make_basis(baseline, order, sigma), make_basis(candidate, order, sigma)]
        report = non_cumulative_eval(truth, interval, configs, warmup_order=warmup)
        result[order] = (
            report.ratio(1, 0),
            report.cumulative_ratio(1, 0),
            report.mse[0],
            report.mse[1],
        )
    return result


def compare_campaign(
    spec: GeneratorSpec,
    seeds: Sequence[int],
    interval: int = 6,
    orders: Sequence[int] = (1, 2, 3, 4, 5),
    sigma: float = 0.5,
    baseline: BasisKind = BasisKind.TAYLOR,
    candidate: BasisKind = BasisKind.SCALED_HERMITE,
    workers: int = 1,
) -> list[dict]:
    """Relative error ratios ``R = baseline MSE / candidate MSE`` over a seed campaign.

    Every order is evaluated on the same prediction tasks (warm-up of the largest order).

    Args:
        spec (GeneratorSpec): Trajectory generator; its seed is replaced by each campaign seed.
        seeds (Sequence[int]): Campaign seeds.
        interval (int): Activation interval.
        orders (Sequence[int]): Expansion orders.
        sigma (float): Contraction factor of the Hermite slot(s).
        baseline (BasisKind): Basis in the numerator slot.
        candidate (BasisKind): Basis in the denominator slot.
        workers (int): Number of worker processes.

    Returns:
        list[dict]: One row per (order, horizon), sorted, with mean R and confidence bounds for
        the per-horizon and the cumulative ratios.
    """
    orders = sorted(set(int(order) for order in orders))
    arguments = [
        (replace(spec, seed=seed), interval, orders, sigma, baseline, candidate) for seed in seeds
    ]
    results = _fan_out(_compare_task, arguments, workers)

    rows = []
    for order in orders:
        for column, horizon in enumerate(range(1, interval)):
            ratio = mean_confidence_interval(result[order][0][column] for result in results)
            cumulative = mean_confidence_interval(result[order][1][column] for result in results)
            rows.append(
                {
                    "order": order,
                    "horizon": horizon,
                    "n_seeds": ratio[3],
                    "r_mean": ratio[0],
                    "r_ci_low": ratio[1],
                    "r_ci_high": ratio[2],
                    "r_cum_mean": cumulative[0],
                    "r_cum_ci_low": cumulative[1],
                    "r_cum_ci_high": cumulative[2],
                    "baseline_mse_mean": float(
                        np.mean([result[order][2][column] for result in results])
                    ),
                    "candidate_mse_mean": float(
                        np.mean([result[order][3][column] for result in results])
                    ),
                }
            )
    rows.sort(key=lambda row: (row["order"], row["horizon"]))
    LOGGER.info(
        f"Compared {baseline.value} vs {candidate.value} over {len(seeds)} seeds, "
        f"orders {orders}, interval {interval}"
    )
    return rows


def _ablation_task(argument: tuple) -> list:
    spec, interval, order, sigmas = argument
    truth = generate(spec)
    configs = (
        [BasisConfig.hermite(order, sigma) for sigma in sigmas]
        + [BasisConfig.taylor(order), BasisConfig.taylor(0)]
    )
    report = non_cumulative_eval(truth, interval, configs, warmup_order=order)
    return [float(value) for value in report.mse.mean(axis=1)]


def ablate_sigma_campaign(
    spec: GeneratorSpec,
    seeds: Sequence[int],
    interval: int = 7,
    order: int = 2,
    sigmas: Sequence[float] = DEFAULT_SIGMAS,
    workers: int = 1,
) -> list[dict]:
    """Sweeps the contraction factor at a fixed interval and order.

    The MSE of a seed is averaged over all prediction tasks and horizons. Every row carries the
    Taylor and reuse (order 0) baselines of the same tasks next to the Hermite MSE, so a sweep of
    one sigma is a one-row table.

    Returns:
        list[dict]: One row per distinct sigma, ascending.
    """
    sigmas = sorted(set(float(sigma) for sigma in sigmas))
    arguments = [(replace(spec, seed=seed), interval, order, sigmas) for seed in seeds]
    results = _fan_out(_ablation_task, arguments, workers)

    taylor_mean = mean_confidence_interval(result[len(sigmas)] for result in results)[0]
    reuse_mean = mean_confidence_interval(result[len(sigmas) + 1] for result in results)[0]
    rows = []
    for index, sigma in enumerate(sigmas):
        mean, low, high, count = mean_confidence_interval(result[index] for result in results)
        rows.append(
            {
                "sigma": sigma,
                "order": order,
                "interval": interval,
                "n_seeds": count,
                "mse_mean": mean,
                "mse_ci_low": low,
                "mse_ci_high": high,
                "taylor_mse_mean": taylor_mean,
                "reuse_mse_mean": reuse_mean,
            }
        )
    LOGGER.info(f"Sigma ablation over {len(seeds)} seeds: sigmas {sigmas}, order {order}")
    return rows


def is_degenerate(samples: np.ndarray, scale: float, rel_tol: float = DEGENERATE_REL_TOL) -> bool:
    """True when difference samples are indistinguishable from rounding noise."""
    return bool(np.max(np.abs(samples)) <= rel_tol * max(scale, np.finfo(float).tiny))


def gauss_test_campaign(
    trajectories: Sequence[Trajectory],
    interval: int = 6,
    orders: Sequence[int] = (1, 2, 3, 4, 5),
    anchors: str = "last",
    n_mc_reference: int = DEFAULT_MC_REFERENCE,
    n_replicates: int = DEFAULT_REPLICATES,
    seed: int = 0,
) -> list[dict]:
    """Energy tests of the pooled finite differences of each order.

    Args:
        trajectories (Sequence[Trajectory]): Trajectories to pool samples from.
        interval (int): Activation interval.
        orders (Sequence[int]): Difference orders to test.
        anchors (str): ``"last"`` takes one sample per trajectory (independent samples when the
            trajectories are independent); ``"all"`` takes every eligible anchor.
        n_mc_reference (int): Reference size of the energy test.
        n_replicates (int): Null replicates of the energy test.
        seed (int): Seed of the energy test streams.

    Returns:
        list[dict]: One row per order with ``status`` ``ok``, ``degenerate`` or
        ``insufficient``; statistic and p-value are ``None`` unless ``ok``.
    """
    if anchors not in ("last", "all"):
        raise ConfigurationError(f"anchors must be 'last' or 'all', got {anchors!r}")
    scale = max(float(np.max(np.abs(trajectory.values))) for trajectory in trajectories)

    rows = []
    for order in sorted(set(int(order) for order in orders)):
        row: dict = {
            "order": order,
            "interval": interval,
            "n_samples": 0,
            "dim": trajectories[0].dim,
            "statistic": None,
            "p_value": None,
            "condition": None,
            "status": "ok",
        }
        try:
            pieces = [
                difference_samples(trajectory, interval, order) for trajectory in trajectories
            ]
        except InsufficientDataError as exc:
            LOGGER.warning(f"Order {order}: {exc}")
            row["status"] = "insufficient"
            rows.append(row)
            continue

        samples = np.vstack([piece[-1:] if anchors == "last" else piece for piece in pieces])
        row["n_samples"] = int(samples.shape[0])
        if is_degenerate(samples, scale):
            LOGGER.warning(f"Order {order}: difference samples are degenerate (all ~0)")
            row["status"] = "degenerate"
            rows.append(row)
            continue

        try:
            result = energy_test(samples, n_mc_reference, n_replicates, seed)
        except SingularCovarianceError as exc:
            LOGGER.warning(f"Order {order}: {exc}")
            row["status"] = "degenerate"
            row["condition"] = exc.condition
        except InsufficientDataError as exc:
            LOGGER.warning(f"Order {order}: {exc}")
            row["status"] = "insufficient"
        else:
            row.update(
                statistic=result.statistic, p_value=result.p_value, condition=result.condition
            )
        rows.append(row)
    return rows


def campaign_trajectories(spec: GeneratorSpec, seeds: Sequence[int]) -> list[Trajectory]:
    """Generates one trajectory per seed."""
    return [generate(replace(spec, seed=seed)) for seed in seeds]


def seed_range(count: int, offset: int = 0) -> list[int]:
    """Seeds ``offset .. offset + count - 1``."""
    if count < 1:
        raise ConfigurationError(f"seed count must be >= 1, got {count}")
    return list(range(offset, offset + count))


__all__ = [
    "DEFAULT_SIGMAS",
    "ablate_sigma_campaign",
    "campaign_trajectories",
    "compare_campaign",
    "gauss_test_campaign",
    "is_degenerate",
    "make_basis",
    "mean_confidence_interval",
    "seed_range",
]
