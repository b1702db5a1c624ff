"""Statistics and error analysis: energy test, non-cumulative evaluation, error envelopes."""

from hicache.stats.energy import EnergyTestResult, difference_samples, energy_test
from hicache.stats.envelopes import (
    approximation_error_envelope,
    envelope_ratio,
    fit_envelope_constant,
    hermite_truncation_envelope,
    taylor_error_envelope,
)
from hicache.stats.evaluation import ErrorReport, non_cumulative_eval

__all__ = [
    "EnergyTestResult",
    "ErrorReport",
    "approximation_error_envelope",
    "difference_samples",
    "energy_test",
    "envelope_ratio",
    "fit_envelope_constant",
    "hermite_truncation_envelope",
    "non_cumulative_eval",
    "taylor_error_envelope",
]
