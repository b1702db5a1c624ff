"""HiCache: cache-then-forecast feature prediction with scaled Hermite polynomials."""

from hicache.basis import BasisConfig, BasisKind, basis_value, hermite_eval, scaled_hermite_eval
from hicache.cache import DerivativeCache, cache_init, cache_update
from hicache.predictor import Prediction, predict
from hicache.scheduler import CostModel, ScheduleConfig, ScheduleTrace, StepMode, run_schedule

__version__ = "0.1.0"

__all__ = [
    "BasisConfig",
    "BasisKind",
    "CostModel",
    "DerivativeCache",
    "Prediction",
    "ScheduleConfig",
    "ScheduleTrace",
    "StepMode",
    "basis_value",
    "cache_init",
    "cache_update",
    "hermite_eval",
    "predict",
    "run_schedule",
    "scaled_hermite_eval",
]
