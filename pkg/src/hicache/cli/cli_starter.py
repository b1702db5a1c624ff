"""
This module is the command-line entry point of HiCache. It ties trajectory generation,
cache-then-forecast scheduling, non-cumulative evaluation and the energy test together into
reproducible experiments with CSV/JSON outputs.

Classes:
    ExperimentRunner: Runs one parsed sub-command.

Usage:
    hicache simulate --kind gp-se --dim 16 --steps 50 --length-scale 8 --seed 7 --out a.hitr
    hicache predict --trace a.hitr --interval 5 --order 2 --basis hermite --sigma 0.5
    hicache compare --config configs/compare_gp.yml
"""

import argparse
import sys
from logging import Logger
from typing import Callable, Optional, Sequence

from hicache.basis import BasisConfig, BasisKind
from hicache.cli.config_parser import (
    ExperimentConfig,
    load_experiment_config,
    parse_float_list,
    parse_generator_spec,
    parse_int_list,
)
from hicache.cli.reporting import SCHEMA_VERSION, emit, render_csv, render_json, table_document
from hicache.errors import ConfigurationError, HiCacheError
from hicache.experiments import (
    DEFAULT_SIGMAS,
    ablate_sigma_campaign,
    campaign_trajectories,
    compare_campaign,
    gauss_test_campaign,
    seed_range,
)
from hicache.scheduler import CostModel, ScheduleConfig, StepMode, TrajectoryOracle, run_schedule
from hicache.sim.generators import GeneratorKind, generate
from hicache.sim.trace_io import TraceFormat, read_trace, write_trace
from hicache.stats.energy import DEFAULT_MC_REFERENCE, DEFAULT_REPLICATES
from hicache.utils import get_logger, set_verbose, update_log_file

LOGGER: Logger = get_logger()

# Flag destinations left out of the experiment echo.
RUNTIME_KEYS: frozenset = frozenset(
    {
        "command",
        "handler",
        "config",
        "dump_config",
        "verbose",
        "log_file",
        "workers",
        "out",
        "summary",
    }
)


class ExperimentRunner:
    """
    Runs one sub-command from its parsed arguments.

    Attributes:
        args (argparse.Namespace): Effective arguments (config file defaults already applied).
        experiment (ExperimentConfig): The reproducible part of ``args``.
    """

    def __init__(self, args: argparse.Namespace) -> None:
        self.args: argparse.Namespace = args
        self.experiment: ExperimentConfig = ExperimentConfig(
            command=args.command,
            parameters={
                key: value for key, value in vars(args).items() if key not in RUNTIME_KEYS
            },
        )

    def run(self) -> None:
        """Dispatches to the handler of the sub-command."""
        if self.args.dump_config:
            emit(self.experiment.to_yaml(), self.args.dump_config)
            LOGGER.info(f"Effective configuration written to {self.args.dump_config}")
        handler: Callable[[], None] = getattr(self, self.args.handler)
        handler()

    def _generator_spec(self, seed: Optional[int] = None):
        return parse_generator_spec(self.experiment.parameters, seed=seed)

    def _seeds(self) -> list[int]:
        return seed_range(int(self.args.seeds), int(self.args.seed))

    def _emit_table(self, rows: list[dict]) -> None:
        if self.args.format == "json":
            document = table_document(self.args.command, self.experiment.as_dict(), rows)
            emit(render_json(document), self.args.out)
        else:
            emit(render_csv(rows), self.args.out)

    def simulate(self) -> None:
        """Generates a synthetic trajectory and writes it as a trace file."""
        if not self.args.out:
            raise ConfigurationError("simulate needs --out")
        spec = self._generator_spec()
        trajectory = generate(spec)
        write_trace(trajectory, self.args.out, TraceFormat(self.args.format), self.args.precision)
        print(
            f"T={trajectory.total_steps} D={trajectory.dim} kind={spec.kind.value} "
            f"seed={spec.seed} -> {self.args.out}"
        )

    def predict(self) -> None:
        """Runs the cached schedule over a trace; per-step CSV plus a JSON summary."""
        if not self.args.trace:
            raise ConfigurationError("predict needs --trace")
        truth = read_trace(self.args.trace)
        basis = _basis_from_flag(self.args.basis, int(self.args.order), float(self.args.sigma))
        config = ScheduleConfig(
            total_steps=int(truth.times[0]), interval=int(self.args.interval), basis=basis
        )
        cost = CostModel(float(self.args.full_cost), float(self.args.predict_cost))
        oracle = TrajectoryOracle(truth, busy_work=int(self.args.busy_work))
        trace = run_schedule(config, oracle, truth=truth, cost=cost)

        if self.args.out:
            rows = [
                {
                    "t": record.t,
                    "mode": record.mode.value,
                    "l2_error": record.error_vs_truth,
                    "horizon": record.horizon,
                }
                for record in trace.records
            ]
            emit(render_csv(rows), self.args.out)

        summary = {
            "schema_version": SCHEMA_VERSION,
            "command": "predict",
            "total_steps": trace.total_steps,
            "dim": truth.dim,
            "oracle_calls": trace.oracle_calls,
            "skipped": trace.skipped,
            "mse_full": trace.mse(StepMode.FULL),
            "mse_predicted": trace.mse(StepMode.PREDICTED),
            "speedup_proxy": trace.speedup_proxy,
            "simulated_latency": trace.simulated_latency,
            "baseline_latency": trace.baseline_latency,
            "latency_speedup": trace.latency_speedup,
            "schedule": config.as_dict(),
            "config": self.experiment.as_dict(),
        }
        emit(render_json(summary), self.args.summary)
        LOGGER.info(
            f"{basis.label()}: {trace.oracle_calls}/{trace.total_steps} oracle calls, "
            f"speedup proxy {trace.speedup_proxy:.3f}"
        )

    def compare(self) -> None:
        """Error-ratio table over a seed campaign."""
        rows = compare_campaign(
            self._generator_spec(),
            self._seeds(),
            interval=int(self.args.interval),
            orders=parse_int_list(self.args.orders),
            sigma=float(self.args.sigma),
            baseline=BasisKind(self.args.baseline),
            candidate=BasisKind(self.args.candidate),
            workers=int(self.args.workers),
        )
        if not self.args.cumulative:
            rows = [
                {key: value for key, value in row.items() if "_cum_" not in key} for row in rows
            ]
        self._emit_table(rows)

    def gauss_test(self) -> None:
        """Energy tests of the finite differences of each order."""
        if self.args.trace:
            trajectories = [read_trace(self.args.trace)]
            anchors = self.args.anchors or "all"
        else:
            trajectories = campaign_trajectories(self._generator_spec(), self._seeds())
            anchors = self.args.anchors or "last"
        rows = gauss_test_campaign(
            trajectories,
            interval=int(self.args.interval),
            orders=parse_int_list(self.args.orders),
            anchors=anchors,
            n_mc_reference=int(self.args.mc_reference),
            n_replicates=int(self.args.replicates),
            seed=int(self.args.test_seed),
        )
        self._emit_table(rows)

    def ablate_sigma(self) -> None:
        """Contraction-factor sweep with Taylor and reuse baselines."""
        rows = ablate_sigma_campaign(
            self._generator_spec(),
            self._seeds(),
            interval=int(self.args.interval),
            order=int(self.args.order),
            sigmas=parse_float_list(self.args.sigmas),
            workers=int(self.args.workers),
        )
        self._emit_table(rows)


def _basis_from_flag(name: str, order: int, sigma: float) -> BasisConfig:
    if name == "reuse":
        return BasisConfig.taylor(0)
    if name == BasisKind.TAYLOR.value:
        return BasisConfig.taylor(order)
    return BasisConfig.hermite(order, sigma)


def _add_generator_arguments(
    parser: argparse.ArgumentParser, dim: int, steps: int, seed_help: str
) -> None:
    group = parser.add_argument_group("trajectory generator")
    group.add_argument("--kind", choices=[kind.value for kind in GeneratorKind], default="gp-se")
    group.add_argument("--dim", type=int, default=dim, help="Feature dimension D.")
    group.add_argument("--steps", type=int, default=steps, help="Number of timesteps T.")
    group.add_argument("--seed", type=int, default=0, help=seed_help)
    group.add_argument("--length-scale", type=float, default=8.0, help="GP kernel length scale.")
    group.add_argument("--amplitude", type=float, default=1.0, help="GP kernel amplitude.")
    group.add_argument("--theta", type=float, default=0.1, help="OU mean-reversion rate.")
    group.add_argument("--noise", type=float, default=1.0, help="OU / poly noise level.")
    group.add_argument("--initial", type=float, default=1.0, help="OU value at t = T.")
    group.add_argument("--degree", type=int, default=1, help="Polynomial degree (poly).")
    group.add_argument(
        "--coeff-scale", type=float, default=1.0, help="Polynomial coefficient scale (poly)."
    )


def _add_table_output(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=None, help="Output file (default: stdout).")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")


def build_parser() -> tuple:
    """
    Builds the argument parser.

    Returns:
        tuple[argparse.ArgumentParser, dict]: The parser and its sub-parsers by command name.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="YAML file with default flag values.")
    common.add_argument(
        "--dump-config", default=None, help="Write the effective configuration as YAML."
    )
    common.add_argument("--log-file", default=None, help="Also write log messages to this file.")
    common.add_argument("--verbose", action="store_true", help="Log debug messages.")

    parser = argparse.ArgumentParser(
        prog="hicache", description="Cache-then-forecast feature prediction experiments."
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    commands: dict = {}

    simulate = subparsers.add_parser(
        "simulate", parents=[common], help="Generate a synthetic trace file."
    )
    _add_generator_arguments(simulate, dim=16, steps=50, seed_help="Generator seed.")
    simulate.add_argument("--out", default=None, help="Trace file to write.")
    simulate.add_argument("--format", choices=[fmt.value for fmt in TraceFormat], default="binary")
    simulate.add_argument("--precision", choices=["f64", "f32"], default="f64")
    simulate.set_defaults(handler="simulate")
    commands["simulate"] = simulate

    predict = subparsers.add_parser(
        "predict", parents=[common], help="Run the cached schedule over a trace."
    )
    predict.add_argument("--trace", default=None, help="Trace file (binary or CSV).")
    predict.add_argument("--interval", type=int, default=5, help="Activation interval.")
    predict.add_argument("--order", type=int, default=2, help="Expansion order.")
    predict.add_argument("--basis", choices=["taylor", "hermite", "reuse"], default="hermite")
    predict.add_argument("--sigma", type=float, default=0.5, help="Contraction factor.")
    predict.add_argument("--full-cost", type=float, default=1.0, help="Simulated oracle cost.")
    predict.add_argument(
        "--predict-cost", type=float, default=0.01, help="Simulated cost per expansion term."
    )
    predict.add_argument("--busy-work", type=int, default=0, help="Real matmuls per oracle call.")
    predict.add_argument("--out", default=None, help="Per-step CSV file.")
    predict.add_argument("--summary", default=None, help="Summary JSON file (default: stdout).")
    predict.set_defaults(handler="predict")
    commands["predict"] = predict

    compare = subparsers.add_parser(
        "compare", parents=[common], help="Error-ratio table over a seed campaign."
    )
    _add_generator_arguments(compare, dim=16, steps=100, seed_help="First campaign seed.")
    compare.add_argument("--seeds", type=int, default=100, help="Number of campaign seeds.")
    compare.add_argument("--interval", type=int, default=6, help="Activation interval.")
    compare.add_argument("--orders", default="1..5", help="Orders, e.g. 1..5 or 1,2,4.")
    compare.add_argument("--sigma", type=float, default=0.5, help="Contraction factor.")
    compare.add_argument("--baseline", choices=[kind.value for kind in BasisKind], default="taylor")
    compare.add_argument(
        "--candidate", choices=[kind.value for kind in BasisKind], default="hermite"
    )
    compare.add_argument("--cumulative", action="store_true", help="Add cumulative columns.")
    compare.add_argument("--workers", type=int, default=1, help="Worker processes.")
    _add_table_output(compare)
    compare.set_defaults(handler="compare")
    commands["compare"] = compare

    gauss = subparsers.add_parser(
        "gauss-test", parents=[common], help="Energy test of the finite differences."
    )
    _add_generator_arguments(gauss, dim=4, steps=60, seed_help="First campaign seed.")
    gauss.add_argument("--trace", default=None, help="Test one trace instead of a campaign.")
    gauss.add_argument("--seeds", type=int, default=300, help="Number of campaign seeds.")
    gauss.add_argument("--interval", type=int, default=6, help="Activation interval.")
    gauss.add_argument("--orders", default="1..5", help="Orders, e.g. 1..5.")
    gauss.add_argument(
        "--anchors",
        choices=["last", "all"],
        default=None,
        help="Samples per trajectory (default: last for campaigns, all for --trace).",
    )
    gauss.add_argument("--mc-reference", type=int, default=DEFAULT_MC_REFERENCE)
    gauss.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES)
    gauss.add_argument("--test-seed", type=int, default=0, help="Seed of the energy test.")
    _add_table_output(gauss)
    gauss.set_defaults(handler="gauss_test")
    commands["gauss-test"] = gauss

    ablate = subparsers.add_parser(
        "ablate-sigma", parents=[common], help="Contraction-factor sweep."
    )
    _add_generator_arguments(ablate, dim=16, steps=100, seed_help="First campaign seed.")
    ablate.add_argument("--seeds", type=int, default=20, help="Number of campaign seeds.")
    ablate.add_argument("--interval", type=int, default=7, help="Activation interval.")
    ablate.add_argument("--order", type=int, default=2, help="Expansion order.")
    ablate.add_argument(
        "--sigmas", default=",".join(str(sigma) for sigma in DEFAULT_SIGMAS), help="Sigma list."
    )
    ablate.add_argument("--workers", type=int, default=1, help="Worker processes.")
    _add_table_output(ablate)
    ablate.set_defaults(handler="ablate_sigma")
    commands["ablate-sigma"] = ablate

    return parser, commands


def parse_cli_args(argv: Sequence[str]) -> argparse.Namespace:
    """
    Parses CLI arguments, applying ``--config`` file values as defaults of the sub-command.

    Args:
        argv (Sequence[str]): Arguments without the program name.

    Returns:
        argparse.Namespace: Effective arguments.

    Raises:
        ConfigurationError: If the configuration file targets another command or names
            unknown parameters.
    """
    parser, commands = build_parser()
    args = parser.parse_args(argv)
    if not args.config:
        return args

    experiment = load_experiment_config(args.config)
    if experiment.command is not None and experiment.command != args.command:
        raise ConfigurationError(
            f"{args.config} is a '{experiment.command}' configuration, not '{args.command}'"
        )
    known = set(vars(args)) - {"command", "handler", "config"}
    unknown = sorted(set(experiment.parameters) - known)
    if unknown:
        raise ConfigurationError(f"Unknown parameters for '{args.command}': {unknown}")
    commands[args.command].set_defaults(**experiment.parameters)
    return parser.parse_args(argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Runs the CLI.

    Args:
        argv (Optional[Sequence[str]]): Arguments without the program name (default: sys.argv).

    Returns:
        int: 0 on success, 1 on a failed run, 2 on usage errors.
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_cli_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (HiCacheError, OSError, ValueError) as exc:
        LOGGER.error(str(exc))
        return 1

    set_verbose(args.verbose)
    if args.log_file:
        update_log_file(args.log_file)

    try:
        ExperimentRunner(args).run()
    except (HiCacheError, OSError, ValueError) as exc:
        LOGGER.error(f"{args.command}: {exc}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
