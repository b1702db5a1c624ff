import numpy as np
import pytest

from hicache.basis import IDENTITY_SIGMA
from hicache.cache import DerivativeCache
from hicache.sim.generators import GeneratorKind, GeneratorSpec, generate
from hicache.sim.trajectory import Trajectory


def affine_spec(total_steps: int = 60, dim: int = 8, seed: int = 3) -> GeneratorSpec:
    return GeneratorSpec(
        kind=GeneratorKind.POLY_PLUS_NOISE,
        dim=dim,
        total_steps=total_steps,
        seed=seed,
        degree=1,
        noise=0.0,
    )


def gp_spec(total_steps: int = 100, dim: int = 16, seed: int = 0) -> GeneratorSpec:
    return GeneratorSpec(
        kind=GeneratorKind.GP_SQUARED_EXPONENTIAL,
        dim=dim,
        total_steps=total_steps,
        seed=seed,
        length_scale=8.0,
    )


def make_cache(*diffs, interval: int = 10, t_last: int = 20) -> DerivativeCache:
    """Cache holding the given difference vectors, as if built by cache_update."""
    arrays = tuple(np.asarray(diff, dtype=np.float64) for diff in diffs)
    return DerivativeCache(
        interval=interval,
        max_order=len(arrays) - 1,
        diffs=arrays,
        t_last=t_last,
        activations_seen=len(arrays),
    )


@pytest.fixture
def affine_trajectory() -> Trajectory:
    return generate(affine_spec())


@pytest.fixture
def gp_trajectory() -> Trajectory:
    return generate(gp_spec())


@pytest.fixture
def identity_sigma() -> float:
    return IDENTITY_SIGMA
