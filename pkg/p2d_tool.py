#!/usr/bin/env python3
import argparse
import json
import logging
import sys
from dataclasses import replace
from typing import List, Optional

from cell_config import CellConfig, ConfigError, load_cell_config, validate_config
from cell_state import InadmissibleStateError, initial_state
from config_utils import ConfigFileError
from coupler import HaltTag, StepOptions, run
from current_profile import CurrentProfile, ProfileError, read_profile_csv
from kinetics import check_exponent_conditions
from mesh import MeshError, build_mesh
from potentials import SolverFailure
from report_writer import ReportWriter
from verification import SUITES, run_verification

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_HALTED = 2
EXIT_SOLVER_FAILURE = 3

MODES = ("exponential", "truncated", "truncated+linearFT")

_handler: Optional[logging.Handler] = None


def setup_logging(level: int):
    global _handler
    log_format = logging.Formatter(
        "%(asctime)s - %(module)-10s - %(levelname)-8s - %(message)s"
    )
    log = logging.getLogger("")
    log.setLevel(level)
    if _handler is not None:
        log.removeHandler(_handler)
    _handler = logging.StreamHandler(sys.stdout)
    _handler.setFormatter(log_format)
    log.addHandler(_handler)


def snapshot_cadence(value: str) -> int:
    if value == "none":
        return 0
    if value == "all":
        return 1
    try:
        cadence = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected none, all or a positive integer, got '{value}'")
    if cadence < 1:
        raise argparse.ArgumentTypeError(f"snapshot cadence must be positive, got {cadence}")
    return cadence


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="P2D lithium-ion cell simulator")
    parser.add_argument(
        "--debug",
        help="debug logging",
        action="store_const",
        dest="loglevel",
        const=logging.DEBUG,
        default=logging.INFO,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="run a simulation and write its outputs")
    simulate.add_argument("--config", help="cell configuration (yaml or json)", required=True)
    simulate.add_argument("--profile", help="current profile csv, overrides the config")
    simulate.add_argument("--out", help="output directory", required=True)
    simulate.add_argument("--dt0", help="initial time step", type=float)
    simulate.add_argument("--picard-tol", help="Picard tolerance", type=float)
    simulate.add_argument("--newton-tol", help="Newton tolerance", type=float)
    simulate.add_argument(
        "--snapshots", help="snapshot cadence: none, all or every N records", type=snapshot_cadence
    )
    simulate.add_argument("--mode", help="flux and thermal mode", choices=MODES)
    simulate.add_argument("--threads", help="particle solver threads", type=int)

    check = commands.add_parser("check-params", help="validate a configuration")
    check.add_argument("--config", help="cell configuration (yaml or json)", required=True)

    verify = commands.add_parser("verify", help="run the convergence suites")
    verify.add_argument(
        "--suite", help="suite to run", choices=list(SUITES) + ["all"], default="all"
    )
    return parser


def apply_mode(config: CellConfig, mode: Optional[str]) -> CellConfig:
    if mode is None:
        return config
    kinetics, thermal = config.kinetics, config.thermal
    if mode == "exponential":
        kinetics = replace(kinetics, flux_mode="exponential")
    else:
        if kinetics.s_inf is None:
            raise ConfigError(f"Mode '{mode}' needs 's_inf' in the 'kinetics' section")
        kinetics = replace(kinetics, flux_mode="truncated")
        if mode == "truncated+linearFT":
            thermal = replace(thermal, mode="linear-truncated")
    return replace(config, kinetics=kinetics, thermal=thermal)


def step_options(config: CellConfig, args) -> StepOptions:
    overrides = {}
    if args.dt0 is not None:
        overrides["dt0"] = args.dt0
    if args.picard_tol is not None:
        overrides["picard_tol"] = args.picard_tol
    if args.threads is not None:
        overrides["threads"] = args.threads
    if args.snapshots is not None:
        overrides["snapshot_every"] = args.snapshots
    opts = StepOptions.from_config(config, **overrides)
    if args.newton_tol is not None:
        opts = replace(opts, elliptic=replace(opts.elliptic, newton_tol=args.newton_tol))
    if opts.dt0 < opts.dt_min:
        opts = replace(opts, dt_min=opts.dt0)
    return opts


def simulate(args) -> int:
    try:
        config = apply_mode(load_cell_config(args.config), args.mode)
        profile: Optional[CurrentProfile] = (
            read_profile_csv(args.profile) if args.profile else config.profile
        )
    except (ConfigFileError, ConfigError, ProfileError, OSError) as e:
        logging.error(str(e))
        return EXIT_INVALID
    if profile is None:
        logging.error("No current profile: add a 'current' section or pass --profile")
        return EXIT_INVALID
    config = replace(config, profile=profile)

    report = validate_config(config)
    if not report.passed:
        for failure in report.failures:
            logging.error(f"{failure.name}: {failure.detail}")
        return EXIT_INVALID

    try:
        mesh = build_mesh(config.geometry, config.mesh)
        opts = step_options(config, args)
        state = initial_state(
            config, mesh, current=profile.current(0.0), mode=opts.mode, opts=opts.elliptic
        )
    except (MeshError, InadmissibleStateError, ValueError) as e:
        logging.error(str(e))
        return EXIT_INVALID
    except SolverFailure as e:
        logging.error(f"initial potential solve failed: {e}")
        return EXIT_SOLVER_FAILURE

    series = run(state, profile, config, mesh, opts)
    ReportWriter(args.out, config, mesh, opts).write_all(series)

    if series.halt is not None:
        print(json.dumps(series.halt.as_dict()))
        if series.halt.tag == HaltTag.SOLVER_FAILURE:
            logging.error(f"solver failure at t={series.halt.t:g}: {series.halt.detail}")
            return EXIT_SOLVER_FAILURE
        logging.error(f"halted at t={series.halt.t:g}: {series.halt.tag.value}")
        return EXIT_HALTED
    return EXIT_OK


def check_params(args) -> int:
    try:
        config = load_cell_config(args.config)
    except (ConfigFileError, ConfigError) as e:
        logging.error(str(e))
        return EXIT_INVALID
    report = validate_config(config)
    conditions = check_exponent_conditions(
        config.kinetics, config.transport.alpha_phie, config.thermal.T_range
    )
    print(report.as_markdown())
    print(conditions.as_markdown())
    for failure in report.failures:
        logging.error(f"{failure.name}: {failure.detail}")
    for entry in conditions.violations:
        logging.error(
            f"exponent condition {entry.condition} violated on {entry.region.value}"
            f" at T={entry.T:g}: margin {entry.margin:.3e}"
        )
    return EXIT_OK if report.passed and conditions.passed else EXIT_INVALID


def verify(args) -> int:
    suites = list(SUITES) if args.suite == "all" else [args.suite]
    report = run_verification(suites)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_INVALID


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.loglevel)
    if args.command == "simulate":
        return simulate(args)
    if args.command == "check-params":
        return check_params(args)
    return verify(args)


if __name__ == "__main__":
    sys.exit(main())
