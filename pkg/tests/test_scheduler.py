import numpy as np
import pytest

from conftest import affine_spec, gp_spec
from hicache.basis import IDENTITY_SIGMA, BasisConfig
from hicache.cache import cache_init, cache_update
from hicache.errors import (
    CacheStateError,
    ConfigurationError,
    InsufficientDataError,
    OracleError,
)
from hicache.scheduler import (
    CostModel,
    ScheduleConfig,
    StepMode,
    TrajectoryOracle,
    horizon_of,
    is_activation_step,
    run_schedule,
)
from hicache.sim.generators import generate
from hicache.sim.trajectory import Trajectory


def _constant_oracle(dim=3):
    return lambda t: np.full(dim, float(t))


@pytest.mark.parametrize(
    "total_steps, interval, expected_calls",
    [(10, 3, 4), (50, 7, 8), (50, 9, 6), (100, 6, 17)],
)
def test_oracle_call_counts(total_steps, interval, expected_calls):
    config = ScheduleConfig(total_steps, interval, BasisConfig.hermite(2, 0.5))
    trace = run_schedule(config, _constant_oracle())
    assert trace.oracle_calls == expected_calls
    assert trace.skipped == total_steps - expected_calls
    limit = (interval - 1) / interval
    assert abs(trace.skipped / total_steps - limit) <= 1.0 / total_steps


def test_activation_pattern_with_forced_first_step():
    trace = run_schedule(ScheduleConfig(10, 3, BasisConfig.taylor(1)), _constant_oracle())
    assert trace.full_steps() == [10, 9, 6, 3]
    assert trace.predicted_steps() == [8, 7, 5, 4, 2, 1]
    assert [record.t for record in trace.records] == list(range(10, 0, -1))
    horizons = {record.t: record.horizon for record in trace.records if record.horizon}
    assert horizons == {8: 1, 7: 2, 5: 1, 4: 2, 2: 1, 1: 2}


def test_flux_like_schedule_speedup_proxy():
    trace = run_schedule(ScheduleConfig(50, 7, BasisConfig.hermite(2, 0.5)), _constant_oracle())
    assert trace.full_steps() == [50, 49, 42, 35, 28, 21, 14, 7]
    assert trace.speedup_proxy == pytest.approx(6.25)


def test_unit_interval_never_predicts():
    truth = generate(gp_spec(total_steps=20, dim=4))
    trace = run_schedule(
        ScheduleConfig(20, 1, BasisConfig.taylor(0)), TrajectoryOracle(truth), truth=truth
    )
    assert trace.oracle_calls == 20
    assert trace.predicted_steps() == []
    assert trace.mse(StepMode.PREDICTED) is None
    assert trace.mse(StepMode.FULL) == 0.0


def test_full_steps_are_exact_and_schedule_is_open_loop():
    truth = generate(gp_spec(total_steps=40, dim=5))
    oracle = TrajectoryOracle(truth)
    trace = run_schedule(ScheduleConfig(40, 5, BasisConfig.hermite(3, 0.5)), oracle, truth=truth)
    assert oracle.calls == trace.oracle_calls
    for record in trace.records:
        if record.mode is StepMode.FULL:
            assert record.error_vs_truth == 0.0
            np.testing.assert_array_equal(record.feature, truth.feature_at(record.t))
        else:
            assert record.error_vs_truth > 0.0


def test_affine_trace_is_predicted_exactly():
    truth = generate(affine_spec(total_steps=50, dim=8))
    config = ScheduleConfig(50, 7, BasisConfig.hermite(1, IDENTITY_SIGMA))
    trace = run_schedule(config, TrajectoryOracle(truth), truth=truth)
    assert trace.mse(StepMode.PREDICTED) <= 1e-18


def test_schedule_is_deterministic():
    truth = generate(gp_spec(total_steps=30, dim=3, seed=5))
    config = ScheduleConfig(30, 4, BasisConfig.hermite(2, 0.5))
    first = run_schedule(config, TrajectoryOracle(truth), truth=truth)
    second = run_schedule(config, TrajectoryOracle(truth), truth=truth)
    for left, right in zip(first.records, second.records):
        assert (left.t, left.mode, left.horizon) == (right.t, right.mode, right.horizon)
        np.testing.assert_array_equal(left.feature, right.feature)
        assert left.error_vs_truth == right.error_vs_truth


def test_simulated_latency():
    cost = CostModel(full_compute=1.0, predict_per_term=0.01)
    config = ScheduleConfig(10, 3, BasisConfig.taylor(1))
    trace = run_schedule(config, _constant_oracle(), cost=cost)
    # 4 oracle calls, 6 predictions with two summed terms each
    assert trace.simulated_latency == pytest.approx(4.12)
    assert trace.baseline_latency == pytest.approx(10.0)
    assert trace.latency_speedup == pytest.approx(10.0 / 4.12)


def test_busy_work_does_not_change_results():
    truth = generate(gp_spec(total_steps=12, dim=2))
    config = ScheduleConfig(12, 3, BasisConfig.taylor(1))
    plain = run_schedule(config, TrajectoryOracle(truth), truth=truth)
    busy = run_schedule(config, TrajectoryOracle(truth, busy_work=2), truth=truth)
    assert [r.error_vs_truth for r in plain.records] == [r.error_vs_truth for r in busy.records]


def test_horizon_of_examples():
    assert horizon_of(8, 9) == 1
    assert horizon_of(4, 6) == 2
    for k in range(1, 6):
        assert horizon_of(10 - k, 10) == k
    with pytest.raises(CacheStateError):
        horizon_of(5, 5)


def test_is_activation_step():
    empty = cache_init(3, 1)
    assert is_activation_step(10, 3, empty)
    primed = cache_update(empty, [1.0], 10)
    assert is_activation_step(9, 3, primed)
    assert not is_activation_step(8, 3, primed)


def test_oracle_failure_carries_the_timestep():
    def failing(t):
        if t == 6:
            raise RuntimeError("model crashed")
        return np.ones(2)

    with pytest.raises(OracleError) as excinfo:
        run_schedule(ScheduleConfig(10, 3, BasisConfig.taylor(1)), failing)
    assert excinfo.value.timestep == 6
    assert "model crashed" in str(excinfo.value)


def test_dimension_drift_is_an_oracle_error():
    def drifting(t):
        return np.ones(3 if t > 5 else 4)

    with pytest.raises(OracleError) as excinfo:
        run_schedule(ScheduleConfig(10, 3, BasisConfig.taylor(1)), drifting)
    assert excinfo.value.timestep == 3


def test_truth_must_cover_every_step():
    truth = Trajectory.from_values(np.zeros((5, 2)))
    with pytest.raises(InsufficientDataError):
        run_schedule(ScheduleConfig(8, 2, BasisConfig.taylor(1)), _constant_oracle(2), truth=truth)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"total_steps": 0, "interval": 2},
        {"total_steps": 10, "interval": 0},
        {"total_steps": 10, "interval": 2, "direction": "ascending"},
    ],
)
def test_schedule_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        ScheduleConfig(**kwargs)


def test_cost_model_validation():
    with pytest.raises(ConfigurationError):
        CostModel(full_compute=-1.0)
