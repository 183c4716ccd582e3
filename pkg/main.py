"""
entkit command line: detect, sweep, table, witness, moments, validate.
"""

import argparse
import json
import sys
from typing import List, Optional

from loguru import logger

from config import Config
from CLI.commands import (
    apply_tolerances,
    cmd_detect,
    cmd_families,
    cmd_moments,
    cmd_sweep,
    cmd_table,
    cmd_validate,
    cmd_witness,
    resolve_state,
)
from utils.errors import EXIT_DOMAIN, EXIT_OK, exit_code_for
from utils.logger import setup_logging


def _add_state_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--state", help="Catalog family id (see `entkit families`)")
    parser.add_argument("--file", help="State JSON written by DensityMatrix.save")
    parser.add_argument("--params", help="Family parameters, e.g. f=0.5 or p=0.1,q=0.3")
    parser.add_argument("--unchecked", action="store_true", help="Allow parameters outside the documented range")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entkit", description="Entanglement detection toolkit")
    parser.add_argument("--verbose", "-v", action="store_true", help="Log at DEBUG level")
    parser.add_argument("--tol-rank", type=float, help="Relative singular-value rank tolerance")
    parser.add_argument("--margin", type=float, help="Decision margin for Entangled verdicts")
    sub = parser.add_subparsers(dest="command", required=True)

    detect = sub.add_parser("detect", help="Run criteria on one state")
    _add_state_args(detect)
    detect.add_argument("--criteria", default="all", help="Comma list of criteria or 'all'")
    detect.add_argument("--out", help="Also write the verdicts as CSV")

    sweep = sub.add_parser("sweep", help="Sweep a family parameter and locate detection boundaries")
    sweep.add_argument("--state", required=True, help="Catalog family id")
    sweep.add_argument("--grid", action="append", required=True, help="name=start:stop:steps or name=v1,v2,... (up to two)")
    sweep.add_argument("--criteria", default="ppt,ccnr", help="Criteria, tri_genuine, m1_shots:N or witnesses such as wo, wn:3")
    sweep.add_argument("--params", help="Fixed values of the other family parameters")
    sweep.add_argument("--out", help="CSV path; boundaries go next to it as .boundaries.json")
    sweep.add_argument("--seed", type=int, default=Config.DEFAULT_SEED, help="Seed of shot-sampled columns (m1_shots)")
    sweep.add_argument("--workers", type=int, help="Process pool size (default ENTKIT_WORKERS)")
    sweep.add_argument("--plot", metavar="COLUMN", help="Write x,y plot data for one column")
    sweep.add_argument("--alpha", type=float, default=1.0, help="Choi witness alpha")
    sweep.add_argument("--beta", type=float, default=1.0, help="Choi witness beta")
    sweep.add_argument("--unchecked", action="store_true", help="Allow grid values outside the documented range")

    table = sub.add_parser("table", help="Regenerate a published table and diff against its fixture")
    table.add_argument("table_id", help="Table id or 'all'")
    table.add_argument("--fixtures", help="Fixture file (default CLI/fixtures/tables.json)")
    table.add_argument("--out", help="Write the regenerated tables as JSON")

    witness = sub.add_parser("witness", help="Build a witness on a state and evaluate it there")
    _add_state_args(witness)
    witness.add_argument("--family", required=True, help="choi, det, wo, wn or pt")
    witness.add_argument("-n", type=int, default=1, help="Order of the wn family")
    witness.add_argument("--alpha", type=float, default=1.0)
    witness.add_argument("--beta", type=float, default=1.0)
    witness.add_argument("--out", help="Save the witness operator as JSON")

    moments = sub.add_parser("moments", help="Dump moment vectors")
    _add_state_args(moments)
    moments.add_argument("--kinds", default="all", help="Comma list of pt, realign, gram, zhang or 'all'")
    moments.add_argument("-K", type=int, default=3, help="Highest moment order")
    moments.add_argument("--out", help="Also write the moments as CSV")

    validate = sub.add_parser("validate", help="Check density-matrix invariants")
    _add_state_args(validate)

    sub.add_parser("families", help="List catalog family ids")
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging("DEBUG" if args.verbose else None)
    exit_code = EXIT_OK
    try:
        apply_tolerances(args.tol_rank, args.margin)
        if args.command == "detect":
            payload = cmd_detect(resolve_state(args.state, args.file, args.params, args.unchecked), args.criteria, args.out)
        elif args.command == "sweep":
            payload = cmd_sweep(
                args.state, args.grid, args.criteria, args.params, args.out,
                seed=args.seed, unchecked=args.unchecked, workers=args.workers,
                plot=args.plot, alpha=args.alpha, beta=args.beta,
            )
        elif args.command == "table":
            payload = cmd_table(args.table_id, args.fixtures, args.out)
        elif args.command == "witness":
            rho = resolve_state(args.state, args.file, args.params, args.unchecked)
            payload = cmd_witness(rho, args.family, args.n, args.alpha, args.beta, args.out)
        elif args.command == "moments":
            payload = cmd_moments(resolve_state(args.state, args.file, args.params, args.unchecked), args.kinds, args.K, args.out)
        elif args.command == "validate":
            payload = cmd_validate(resolve_state(args.state, args.file, args.params, args.unchecked))
            if not payload["passed"]:
                exit_code = EXIT_DOMAIN
        else:
            payload = cmd_families()
    except Exception as e:
        logger.error(f"{args.command} failed: {e}")
        return exit_code_for(e)

    print(json.dumps(payload, indent=2, default=float))
    return exit_code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
