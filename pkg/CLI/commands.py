"""
Command implementations behind the entkit verbs.

Every command takes plain arguments, writes its files and returns a JSON-ready
payload; main.py handles parsing, printing and exit codes.
"""

import json
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

from loguru import logger

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import Config
from CLI.sweep import SweepAxis, SweepSpec, run_sweep
from CLI.tables import TABLES, check_table
from Criteria.criteria import CRITERIA, battery, detected_by
from Criteria.verdict import write_verdicts_csv
from Moments.moments import MomentKind, gram_moments, pt_moments, realign_moments, write_moments_csv, zhang_moments
from States.statebank import DensityMatrix, list_families, make_state, validate
from utils.errors import FixtureMismatchError, InputError
from Witness.witness import build_witness, witness_expectation

MOMENT_BUILDERS = {
    MomentKind.PT: pt_moments,
    MomentKind.REALIGN: realign_moments,
    MomentKind.GRAM: gram_moments,
    MomentKind.ZHANG: zhang_moments,
}


# =================== Argument Helpers ===================
def parse_params(text: Optional[str]) -> Dict[str, float]:
    """Parse `a=0.3,b=2` into a parameter dict."""
    if not text:
        return {}
    params = {}
    for part in text.split(","):
        if not part.strip():
            continue
        name, sep, value = part.partition("=")
        if not sep:
            raise InputError(f"Bad parameter '{part}': expected name=value")
        try:
            params[name.strip()] = float(value)
        except ValueError:
            raise InputError(f"Bad parameter value in '{part}'") from None
    return params


def parse_list(text: Optional[str], known: Sequence[str]) -> Optional[List[str]]:
    """Comma list; None or 'all' selects every known name."""
    if text is None or text.strip() == "all":
        return None
    names = [t.strip() for t in text.split(",") if t.strip()]
    if not names:
        raise InputError(f"Empty selection; choose from {', '.join(known)}")
    return names


def apply_tolerances(tol_rank: Optional[float] = None, margin: Optional[float] = None) -> None:
    """Override the rank tolerance and decision margin for this process."""
    if tol_rank is not None:
        if tol_rank <= 0:
            raise InputError(f"--tol-rank must be positive, got {tol_rank}")
        os.environ["ENTKIT_DEFAULT_TOL"] = repr(float(tol_rank))
        logger.debug(f"Rank tolerance set to {tol_rank}")
    if margin is not None:
        if margin < 0:
            raise InputError(f"--margin must be nonnegative, got {margin}")
        Config.DECISION_MARGIN = float(margin)
        os.environ["ENTKIT_MARGIN"] = repr(float(margin))
        logger.debug(f"Decision margin set to {margin}")


def resolve_state(
    state: Optional[str] = None,
    file: Optional[str] = None,
    params: Optional[str] = None,
    unchecked: bool = False,
) -> DensityMatrix:
    """A catalog state (`--state` + `--params`) or a saved state (`--file`)."""
    if bool(state) == bool(file):
        raise InputError("Give exactly one of --state or --file")
    if file:
        return DensityMatrix.load(file)
    return make_state(state, parse_params(params), unchecked=unchecked)


def _state_summary(rho: DensityMatrix) -> Dict[str, Any]:
    return {"label": rho.label, "dims": rho.dims.to_list(), "params": dict(rho.params)}


# =================== Commands ===================
def cmd_detect(rho: DensityMatrix, criteria: Optional[str] = None, out: Optional[str] = None) -> Dict[str, Any]:
    """Run the named criteria; verdicts never change the exit code."""
    names = parse_list(criteria, list(CRITERIA))
    verdicts = battery(rho, names)
    if out:
        write_verdicts_csv(verdicts, out)
        logger.info(f"Wrote {len(verdicts)} verdicts to {out}")
    return {
        "state": _state_summary(rho),
        "verdicts": [v.model_dump(mode="json") for v in verdicts],
        "detected_by": detected_by(verdicts),
    }


def cmd_sweep(
    family: str,
    grid: Sequence[str],
    criteria: Optional[str] = None,
    params: Optional[str] = None,
    out: Optional[str] = None,
    seed: int = Config.DEFAULT_SEED,
    unchecked: bool = False,
    workers: Optional[int] = None,
    plot: Optional[str] = None,
    alpha: float = 1.0,
    beta: float = 1.0,
) -> Dict[str, Any]:
    """Sweep one family over one or two axes; returns the boundary report."""
    if not grid:
        raise InputError("A sweep needs at least one --grid axis")
    selection = parse_list(criteria, list(CRITERIA))
    spec = SweepSpec(
        family=family,
        axes=[SweepAxis.parse(g) for g in grid],
        selection=selection if selection is not None else list(CRITERIA),
        fixed=parse_params(params),
        out=out,
        seed=seed,
        unchecked=unchecked,
        workers=Config.SWEEP_WORKERS if workers is None else workers,
        alpha=alpha,
        beta=beta,
    )
    result = run_sweep(spec)
    if plot:
        target = os.path.splitext(out)[0] + f".{plot}.dat" if out else f"{family}.{plot}.dat"
        result.write_plot_data(plot, target)
    return result.to_dict()


def cmd_table(table_id: str, fixtures: Optional[str] = None, out: Optional[str] = None) -> Dict[str, Any]:
    """Regenerate one table (or `all`) and diff against the fixtures.

    Raises FixtureMismatchError after every requested table has been checked.
    """
    ids = list(TABLES) if table_id == "all" else [table_id]
    artifacts, mismatches = [], []
    for tid in ids:
        try:
            artifacts.append(check_table(tid, fixtures).to_dict())
        except FixtureMismatchError as e:
            mismatches.extend({"table": e.table_id, **m} for m in e.mismatches)
    payload = {"tables": artifacts}
    if out:
        with open(out, "w") as f:
            json.dump(payload, f, indent=2)
    if mismatches:
        raise FixtureMismatchError(table_id, mismatches)
    return payload


def cmd_witness(
    rho: DensityMatrix,
    family: str,
    n: int = 1,
    alpha: float = 1.0,
    beta: float = 1.0,
    out: Optional[str] = None,
) -> Dict[str, Any]:
    """Build a witness on the state, evaluate it there and optionally save it."""
    w = build_witness(family, rho, n=n, alpha=alpha, beta=beta)
    value = witness_expectation(w, rho)
    if out:
        with open(out, "w") as f:
            json.dump(w.to_dict(), f)
        logger.info(f"Saved {family} witness to {out}")
    return {
        "state": _state_summary(rho),
        "family": w.family.value,
        "params": dict(w.params),
        "expectation": value,
        "detected": value < -Config.DECISION_MARGIN,
        "hermitian_defect": w.hermitian_defect,
        "metadata": dict(w.metadata),
    }


def cmd_moments(rho: DensityMatrix, kinds: Optional[str] = None, K: int = 3, out: Optional[str] = None) -> Dict[str, Any]:
    """Moment vectors of the requested kinds, all kinds by default."""
    names = parse_list(kinds, [k.value for k in MomentKind])
    try:
        selected = list(MomentKind) if names is None else [MomentKind(n) for n in names]
    except ValueError as e:
        raise InputError(f"{e}; known kinds: {', '.join(k.value for k in MomentKind)}") from None
    vectors = [MOMENT_BUILDERS[kind](rho, K) for kind in selected]
    for v in vectors:
        v.label = rho.label
    if out:
        write_moments_csv(vectors, out)
    return {"state": _state_summary(rho), "moments": [v.to_dict() for v in vectors]}


def cmd_validate(rho: DensityMatrix) -> Dict[str, Any]:
    report = validate(rho)
    return {"state": _state_summary(rho), **report.to_dict(), "failures": report.failures()}


def cmd_families() -> Dict[str, Any]:
    return {"families": list_families()}
