import numpy as np
import pytest

from conftest import affine_spec, gp_spec
from hicache.basis import IDENTITY_SIGMA, BasisConfig
from hicache.errors import ConfigurationError, InsufficientDataError
from hicache.sim.generators import generate
from hicache.stats.evaluation import ErrorReport, activation_anchors, non_cumulative_eval


@pytest.mark.parametrize("interval", range(2, 11))
def test_affine_truth_is_predicted_exactly(interval):
    truth = generate(affine_spec(total_steps=60, dim=8))
    configs = [BasisConfig.taylor(order) for order in range(1, 5)]
    configs += [BasisConfig.hermite(order, IDENTITY_SIGMA) for order in range(1, 5)]
    report = non_cumulative_eval(truth, interval, configs)
    assert report.mse.shape == (8, interval - 1)
    assert np.all(report.mse <= 1e-18)


def test_identical_configs_have_unit_ratio(gp_trajectory):
    config = BasisConfig.hermite(2, 0.5)
    report = non_cumulative_eval(gp_trajectory, 6, [config, config])
    np.testing.assert_array_equal(report.ratio(1, 0), np.ones(5))
    np.testing.assert_array_equal(report.cumulative_ratio(1, 0), np.ones(5))


def test_task_count_and_horizons():
    truth = generate(gp_spec(total_steps=60, dim=3))
    assert activation_anchors(truth, 6) == list(range(60, 0, -6))
    report = non_cumulative_eval(truth, 6, [BasisConfig.taylor(2)])
    assert report.horizons == (1, 2, 3, 4, 5)
    assert report.n_anchors == 8
    assert report.warmup_order == 2


def test_common_warm_up_evaluates_the_same_tasks():
    truth = generate(gp_spec(total_steps=60, dim=3))
    low = non_cumulative_eval(truth, 6, [BasisConfig.taylor(1)], warmup_order=4)
    assert low.n_anchors == 6
    with pytest.raises(ConfigurationError):
        non_cumulative_eval(truth, 6, [BasisConfig.taylor(3)], warmup_order=2)


def test_cumulative_mse_is_the_running_sum(gp_trajectory):
    report = non_cumulative_eval(
        gp_trajectory, 6, [BasisConfig.taylor(2), BasisConfig.hermite(2, 0.5)]
    )
    for row in range(2):
        running = 0.0
        for column in range(5):
            running += report.mse[row, column]
            assert report.cumulative_mse[row, column] == pytest.approx(running, rel=1e-15)


def test_undefined_ratios_are_reported_as_none():
    report = ErrorReport(
        interval=3,
        configs=(BasisConfig.taylor(1), BasisConfig.hermite(1, 0.5)),
        horizons=(1, 2),
        mse=np.array([[0.0, 2.0], [0.0, 1.0]]),
        n_anchors=1,
        warmup_order=1,
    )
    assert np.isnan(report.ratio(1, 0)[0])
    assert report.ratio(1, 0)[1] == 2.0
    rows = report.rows()
    candidate_rows = [row for row in rows if row["basis"] == "hermite"]
    assert [row["r"] for row in candidate_rows] == [None, 2.0]
    assert [row["r_cumulative"] for row in candidate_rows] == [None, 2.0]
    assert list(rows[0]) == [
        "basis",
        "order",
        "sigma",
        "interval",
        "horizon",
        "mse",
        "cumulative_mse",
        "baseline_mse",
        "r",
        "r_cumulative",
    ]


def test_evaluation_needs_horizons_and_history():
    truth = generate(gp_spec(total_steps=20, dim=2))
    with pytest.raises(ConfigurationError):
        non_cumulative_eval(truth, 1, [BasisConfig.taylor(1)])
    with pytest.raises(ConfigurationError):
        non_cumulative_eval(truth, 6, [])
    with pytest.raises(InsufficientDataError):
        non_cumulative_eval(truth, 6, [BasisConfig.taylor(4)])


def test_contraction_helps_over_long_horizons():
    ratios = []
    for seed in range(20):
        truth = generate(gp_spec(total_steps=100, dim=16, seed=seed))
        report = non_cumulative_eval(
            truth, 6, [BasisConfig.taylor(1), BasisConfig.hermite(1, 0.5)]
        )
        ratios.append(report.cumulative_ratio(1, 0)[-1])
    assert np.mean(ratios) > 1.0
