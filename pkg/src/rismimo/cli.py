"""Command-line entry point.

Subcommands mirror the experiment kinds: validate, sweep-dac-bits,
sweep-ris-bits, optimize.  Exit codes: 0 on success, 2 for configuration
problems, 1 for runtime failures; errors print one machine-parsable
``<class>: <message>`` line on stderr.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .experiments import ConfigError, emit_outputs, parse_config, run_experiment

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rismimo",
        description="RIS-aided massive MIMO downlink rate experiments")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", default=None,
                        help="flat key=value config file (defaults apply when omitted)")
    common.add_argument("--out", metavar="DIR", default=None, help="output directory")
    common.add_argument("--seed", type=int, default=None, help="master seed override")
    common.add_argument("--trials", type=int, default=None,
                        help="Monte Carlo trials per grid point (0 disables MC columns)")
    common.add_argument("--pso-budget", type=int, default=None,
                        help="PSO iteration budget override (recorded in metadata)")
    common.add_argument("--fast", action="store_true",
                        help="skip PSO and use fixed random phases (validate only)")
    common.add_argument("--drops", type=int, default=None,
                        help="number of user drops to average over (default 1)")
    common.add_argument("-v", "--verbose", action="store_true", help="info-level logging")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common],
                   help="closed form vs Monte Carlo over an (N, P) grid")
    sub.add_parser("sweep-dac-bits", parents=[common],
                   help="optimized sum rate vs DAC resolution")
    sub.add_parser("sweep-ris-bits", parents=[common],
                   help="sum rate vs RIS phase resolution")
    sub.add_parser("optimize", parents=[common],
                   help="optimize phase shifts for one scenario")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    scenario_overrides = {}
    if args.seed is not None:
        scenario_overrides["seed"] = args.seed
    experiment_overrides = {"kind": args.command}
    if args.trials is not None:
        experiment_overrides["mc_trials"] = args.trials
    if args.pso_budget is not None:
        experiment_overrides["pso_budget"] = args.pso_budget
    if args.fast:
        experiment_overrides["fast"] = True
    if args.drops is not None:
        experiment_overrides["drops"] = args.drops
    if args.out is not None:
        experiment_overrides["out_dir"] = args.out

    try:
        config, spec = parse_config(args.config, scenario_overrides, experiment_overrides)
    except ConfigError as err:
        print(f"config-error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"io-error: {err}", file=sys.stderr)
        return 2

    try:
        result = run_experiment(config, spec)
        paths = emit_outputs(result, spec.out_dir)
    except ValueError as err:
        print(f"invalid-scenario: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"io-error: {err}", file=sys.stderr)
        return 1

    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
