"""
Regeneration of the published detection tables and their fixture diff.

Each table id maps to a builder that recomputes the table from the catalog
states, criteria and witnesses. `check_table` compares the result against the
embedded fixture (CLI/fixtures/tables.json) and raises FixtureMismatchError on
any drift beyond the table tolerance.
"""

import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import Config
from CLI.sweep import bisect_boundary, evaluate_item
from Criteria.criteria import ccnr, correlation_tensor, de_vicente, spa_r
from Criteria.verdict import Verdict
from States.statebank import DensityMatrix, make_state
from utils.errors import FixtureMismatchError, InputError
from Witness.concurrence import concurrence_bounds

Value = Optional[float]


# =================== Data Structures ===================
@dataclass
class TableRow:
    key: str
    params: Dict[str, float] = field(default_factory=dict)
    values: Dict[str, Value] = field(default_factory=dict)
    verdicts: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"key": self.key, "params": dict(self.params), "values": dict(self.values), "verdicts": dict(self.verdicts)}


@dataclass
class TableArtifact:
    """A regenerated table: fixed row keys and value columns per table id."""

    table_id: str
    columns: List[str]
    rows: List[TableRow] = field(default_factory=list)
    tolerance: float = 1e-5
    description: str = ""

    def row(self, key: str) -> TableRow:
        for row in self.rows:
            if row.key == key:
                return row
        raise KeyError(key)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "table_id": self.table_id,
            "description": self.description,
            "columns": list(self.columns),
            "tolerance": self.tolerance,
            "rows": [r.to_dict() for r in self.rows],
        }


# =================== Range Helpers ===================
Detector = Callable[[float], bool]


def detection_interval(detected: Detector, points: Sequence[float], low_end: float, high_end: float) -> Tuple[Value, Value]:
    """Endpoints of the detected set scanned on `points`, refined by bisection.

    A detected first or last grid point extends the interval to `low_end` or
    `high_end`. Returns (None, None) when nothing on the grid is detected.
    """
    flags = [detected(x) for x in points]
    hits = [i for i, flag in enumerate(flags) if flag]
    if not hits:
        return None, None
    first, last = hits[0], hits[-1]
    if len(hits) != last - first + 1:
        logger.warning("Detected set is not contiguous on the grid; reporting its hull")
    if first == 0:
        low = low_end
    else:
        lo, hi, _ = bisect_boundary(detected, points[first - 1], points[first])
        low = 0.5 * (lo + hi)
    if last == len(points) - 1:
        high = high_end
    else:
        lo, hi, _ = bisect_boundary(detected, points[last], points[last + 1])
        high = 0.5 * (lo + hi)
    return low, high


def _state_detector(family: str, param: str, item: str, column: Optional[str] = None, **fixed) -> Detector:
    """Detection flag of one sweep selection item along one family parameter."""
    column = column or item

    def detected(x: float) -> bool:
        state = make_state(family, {**fixed, param: x})
        cell = evaluate_item(item, state).get(column)
        return cell is not None and cell.detected

    return detected


def _ct_diagonal(rho: DensityMatrix) -> bool:
    return any(correlation_tensor(rho, x, x).entangled for x in Config.CT_GRID)


def _verdict(flag: bool) -> str:
    return (Verdict.ENTANGLED if flag else Verdict.INCONCLUSIVE).value


def _range_row(key: str, detector: Detector, points: Sequence[float], low_end: float, high_end: float) -> TableRow:
    low, high = detection_interval(detector, points, low_end, high_end)
    return TableRow(key=key, values={"low": low, "high": high}, verdicts={"range": _verdict(low is not None)})


# =================== Builders ===================
def _criteria_ranges(table_id: str, family: str, param: str, points: Sequence[float], low_end: float, high_end: float) -> TableArtifact:
    def on(check: Callable[[DensityMatrix], bool]) -> Detector:
        return lambda x: check(make_state(family, {param: x}))

    detectors = [
        ("de_vicente", on(lambda s: de_vicente(s).entangled)),
        ("ccnr", on(lambda s: ccnr(s).entangled)),
        ("correlation_tensor", on(_ct_diagonal)),
        ("choi", _state_detector(family, param, "choi")),
    ]
    artifact = TableArtifact(table_id=table_id, columns=["low", "high"])
    for key, detector in detectors:
        artifact.rows.append(_range_row(key, detector, points, low_end, high_end))
    return artifact


def build_kye_ranges() -> TableArtifact:
    artifact = _criteria_ranges("kye_ranges", "kye", "r", np.linspace(0.05, 0.95, 19), 0.0, 1.0)
    artifact.description = "detection ranges on the 4x4 Kye family, 0 < r < 1"
    return artifact


def build_noisy_bes_ranges() -> TableArtifact:
    artifact = _criteria_ranges("noisy_bes_ranges", "bes4x4_noisy", "lam", np.linspace(0.0, 1.0, 21), 0.0, 1.0)
    artifact.description = "detection ranges on bes4x4 mixed with white noise"
    return artifact


def _wn_lower_ends(table_id: str, family: str, param: str, orders: Sequence[int], points: Sequence[float], high_end: float) -> TableArtifact:
    artifact = TableArtifact(table_id=table_id, columns=["low"], tolerance=1e-3)
    for n in orders:
        detector = _state_detector(family, param, f"wn:{n}", column=f"wn_{n}")
        low, _ = detection_interval(detector, points, points[0], high_end)
        artifact.rows.append(TableRow(key=str(n), params={"n": n}, values={"low": low}, verdicts={"low": _verdict(low is not None)}))
    return artifact


def build_iso3_wn() -> TableArtifact:
    artifact = _wn_lower_ends("iso3_wn", "iso3", "f", range(1, 6), np.linspace(0.3, 1.0, 15), 1.0)
    artifact.description = "lower detection end of W_n on the 3x3 isotropic state"
    return artifact


def build_horodecki_alpha_wn() -> TableArtifact:
    artifact = _wn_lower_ends("horodecki_alpha_wn", "horodecki_alpha", "alpha", range(1, 6), np.linspace(3.0, 4.0, 11), 4.0)
    artifact.tolerance = 1e-2
    artifact.description = "lower detection end of W_n on horodecki_alpha, 3 < alpha <= 4"
    return artifact


def build_horodecki_a_wn() -> TableArtifact:
    artifact = TableArtifact(table_id="horodecki_a_wn", columns=["high"], tolerance=1e-2,
                             description="upper detection end of W_n on horodecki_a, 0 < a < 1")
    points = np.linspace(0.001, 1.0, 21)
    for n in range(1, 9):
        detector = _state_detector("horodecki_a", "a", f"wn:{n}", column=f"wn_{n}")
        _, high = detection_interval(detector, points, 0.0, 1.0)
        artifact.rows.append(TableRow(key=str(n), params={"n": n}, values={"high": high}, verdicts={"high": _verdict(high is not None)}))
    return artifact


def build_horodecki_a_spa() -> TableArtifact:
    artifact = TableArtifact(table_id="horodecki_a_spa", columns=["p_high"],
                             description="largest mixing p at which the SPA realignment test still fires on horodecki_a")
    points = np.linspace(0.0, 0.05, 11)
    for a in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9):
        state = make_state("horodecki_a", {"a": a})
        _, high = detection_interval(lambda p: spa_r(state, p=p).entangled, points, 0.0, 1.0)
        artifact.rows.append(TableRow(key=f"{a:g}", params={"a": a}, values={"p_high": high}, verdicts={"p_high": _verdict(high is not None)}))
    return artifact


def _wn_bounds(table_id: str, family: str) -> TableArtifact:
    bounds = concurrence_bounds(make_state(family), n_list=range(1, 6))
    artifact = TableArtifact(table_id=table_id, columns=["phi_wn", "c_min"])
    for n, phi in bounds.phi_wn.items():
        artifact.rows.append(TableRow(
            key=str(n),
            params={"n": n},
            values={"phi_wn": phi, "c_min": bounds.c_min},
            verdicts={"phi_wn": _verdict(phi > Config.DECISION_MARGIN), "improves": str(phi > bounds.c_min)},
        ))
    return artifact


def build_upb_wn() -> TableArtifact:
    artifact = _wn_bounds("upb_wn", "upb_tiles")
    artifact.description = "concurrence lower bounds -Tr[W_n rho] against C_min for the tiles UPB state"
    return artifact


def build_bes4x4_wn() -> TableArtifact:
    artifact = _wn_bounds("bes4x4_wn", "bes4x4")
    artifact.description = "concurrence lower bounds -Tr[W_n rho] against C_min for bes4x4 at (p0, q0)"
    return artifact


TABLES: Dict[str, Callable[[], TableArtifact]] = {
    "kye_ranges": build_kye_ranges,
    "noisy_bes_ranges": build_noisy_bes_ranges,
    "iso3_wn": build_iso3_wn,
    "horodecki_a_spa": build_horodecki_a_spa,
    "horodecki_alpha_wn": build_horodecki_alpha_wn,
    "horodecki_a_wn": build_horodecki_a_wn,
    "upb_wn": build_upb_wn,
    "bes4x4_wn": build_bes4x4_wn,
}


def regenerate(table_id: str) -> TableArtifact:
    try:
        builder = TABLES[table_id]
    except KeyError:
        raise InputError(f"Unknown table '{table_id}'; known: {', '.join(TABLES)}") from None
    logger.info(f"Regenerating table {table_id}")
    return builder()


# =================== Fixtures ===================
def load_fixtures(path: Optional[str] = None) -> Dict[str, Any]:
    path = path or Config.TABLE_FIXTURES_PATH
    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"Cannot read table fixtures at {path}: {e}") from e


def _differs(expected: Value, actual: Value, tol: float) -> bool:
    if expected is None or actual is None:
        return expected is not actual
    return not math.isfinite(actual) or abs(expected - actual) > tol


def diff_table(artifact: TableArtifact, fixture: Dict[str, Any]) -> List[Dict[str, Any]]:
    """Every fixture value whose regenerated counterpart is missing or outside tolerance."""
    tolerance = float(fixture.get("tolerance", artifact.tolerance))
    mismatches = []
    expected_keys = [row["key"] for row in fixture["rows"]]
    actual_keys = [row.key for row in artifact.rows]
    if expected_keys != actual_keys:
        mismatches.append({"row": None, "column": None, "expected": expected_keys, "actual": actual_keys})
        return mismatches
    for record in fixture["rows"]:
        row = artifact.row(record["key"])
        for column, expected in record["values"].items():
            tol = float(record.get("tolerance", {}).get(column, tolerance))
            actual = row.values.get(column)
            if column not in row.values or _differs(expected, actual, tol):
                mismatches.append({
                    "row": record["key"],
                    "column": column,
                    "expected": expected,
                    "actual": actual,
                    "tolerance": tol,
                    "anchor": record.get("anchor", ""),
                })
    return mismatches


def check_table(table_id: str, fixtures_path: Optional[str] = None) -> TableArtifact:
    """Regenerate one table and diff it against its fixture.

    Raises:
        InputError: unknown table id or unreadable fixture file.
        FixtureMismatchError: at least one value drifted beyond tolerance.
    """
    artifact = regenerate(table_id)
    fixtures = load_fixtures(fixtures_path)
    if table_id not in fixtures:
        raise InputError(f"No fixture for table '{table_id}'")
    mismatches = diff_table(artifact, fixtures[table_id])
    for m in mismatches:
        logger.warning(f"{table_id}: row {m['row']} column {m['column']}: expected {m['expected']}, got {m['actual']}")
    if mismatches:
        raise FixtureMismatchError(table_id, mismatches)
    logger.info(f"Table {table_id} matches its fixture ({len(artifact.rows)} rows)")
    return artifact
