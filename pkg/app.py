#!/usr/bin/env python3
""" SPDX-License-Identifier: MIT-0 """

import os
import sys
import json
import time
import logging
import argparse

from dataclasses import replace
from pathlib import Path
from typing import List, Optional
from aws_lambda_powertools import Logger

import constants
from components.config import ConfigError, parse_config
from components.dynamics import SolverAbort
from components.model import check_rwa, derive
from components.selftest import run_selftest
from components import experiments

# Global parameters
logger = Logger(service=constants.WORKLOAD_NAME)

SUBCOMMANDS = ("steady", "evolve", "zeta-sweep", "cat", "thermal-sweep", "check-rwa", "selftest")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcsom", description="Dissipative pair-coherent state simulator")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("config", nargs="?", default=None, help="INI scenario file")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE")
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--output", type=str, default=None)
    parser.add_argument("--long", action="store_true", help="allow multi-hour full-model runs")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _workers(flag: Optional[int]) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get(constants.WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{constants.WORKERS_ENV} must be an integer, got {env!r}")
    return 1


def _attach_log_file(path: Path):
    handler = logging.FileHandler(path)
    handler.setFormatter(logger.registered_formatter)
    logging.getLogger(constants.WORKLOAD_NAME).addHandler(handler)


def _load(args) -> experiments.Scenario:
    if args.config is None:
        raise ConfigError(f"{args.subcommand} needs a scenario file")
    path = Path(args.config)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}")
    scenario = parse_config(text, args.overrides, name=path.stem)
    if args.output is not None:
        scenario = replace(scenario, output=args.output)
    return scenario


def _short_horizon(scenario: experiments.Scenario) -> experiments.Scenario:
    horizon = 5.0 / scenario.model.gamma_a
    changes = {}
    if scenario.t_max > horizon:
        changes["t_max"] = horizon
    if scenario.steady_time > horizon:
        changes["t_ss"] = horizon
    if changes:
        logger.warning(f"Full-model run capped at t={horizon:.6g} (5/gamma_a); pass --long for "
                       f"t_max={scenario.t_max:.6g}, t_ss={scenario.steady_time:.6g}")
        return replace(scenario, **changes)
    return scenario


def _uses_full_model(subcommand: str, scenario: experiments.Scenario) -> bool:
    if subcommand == "evolve":
        return scenario.engine == "full"
    if subcommand in ("steady", "thermal-sweep"):
        return scenario.steady_engine == "full"
    if subcommand in ("zeta-sweep", "cat"):
        return scenario.engine in ("steady", "both") and scenario.steady_engine == "full"
    return False


def run(args) -> int:
    if args.subcommand == "selftest":
        passed, failed, lines = run_selftest()
        print("\n".join(lines))
        return 0 if failed == 0 else 1

    scenario = _load(args)
    if args.subcommand == "check-rwa":
        params = scenario.base_params
        report = check_rwa(params, derive(params))
        for name, ratio in report.ratios.items():
            print(f"{name:40s} {ratio:.6g}")
        print(f"max ratio {report.max_ratio:.6g} (threshold {report.threshold}): {'PASS' if report.passed else 'FAIL'}")
        return 0 if report.passed else 1

    output = Path(scenario.output)
    output.mkdir(parents=True, exist_ok=True)
    stem = output / scenario.name
    _attach_log_file(Path(f"{stem}.log"))
    logger.info(f"Arguments: {vars(args)}")
    if not args.long and _uses_full_model(args.subcommand, scenario):
        scenario = _short_horizon(scenario)
    with open(f"{stem}.resolved.json", "w") as f:
        json.dump(scenario.to_dict(), f, indent=2)

    workers = _workers(args.workers)
    if args.subcommand == "steady":
        record = experiments.run_steady(scenario)
        experiments.write_csv(experiments.records_frame([record], experiments.STEADY_COLUMNS), f"{stem}.csv")
        print(f"F = {record.F:.6f}, R_r = {record.R_r:.6f}, N = {record.N:.6f}, W_min = {record.W_min:.6g}")
    elif args.subcommand == "evolve":
        _, frame = experiments.run_fidelity_trace(scenario)
        experiments.write_csv(frame, f"{stem}.csv")
        print(f"F(t={frame['t'].iloc[-1]:.6g}) = {frame['F'].iloc[-1]:.6f}")
    elif args.subcommand == "zeta-sweep":
        records = experiments.run_zeta_sweep(scenario, workers)
        experiments.write_csv(experiments.records_frame(records, experiments.ZETA_COLUMNS), f"{stem}.csv")
    elif args.subcommand == "cat":
        records, grids = experiments.run_cat_maps(scenario, workers)
        experiments.write_csv(experiments.records_frame(records, experiments.CAT_COLUMNS), f"{stem}.csv")
        experiments.write_csv(grids, f"{stem}.wigner.csv")
    elif args.subcommand == "thermal-sweep":
        records = experiments.run_thermal_sweep(scenario, workers)
        experiments.write_csv(experiments.records_frame(records, experiments.THERMAL_COLUMNS), f"{stem}.csv")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.verbose:
        logger.setLevel("DEBUG")

    start_time = time.time()
    try:
        code = run(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SolverAbort as e:
        logger.error(f"Solver aborted at t={e.time:.6g}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 3
    logger.info(f"Done! Duration: {time.strftime('%H:%M:%S', time.gmtime(time.time() - start_time))}")
    return code


if __name__ == "__main__":
    sys.exit(main())
