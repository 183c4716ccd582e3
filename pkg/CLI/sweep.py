"""
Parameter sweeps over catalog families.

A sweep evaluates a selection of criteria and witnesses on a one- or
two-dimensional grid of family parameters, writes the statistics in grid
order and, for one-dimensional sweeps, locates every detection boundary by
bisection on the verdict.

    spec = SweepSpec(family="iso3", axes=[SweepAxis("f", 0.0, 1.0, 21)], selection=["wo"])
    result = run_sweep(spec)
    result.write_csv("iso3_wo.csv")
"""

import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import Config
from Criteria.criteria import CRITERIA, battery, tri_genuine
from Criteria.verdict import Verdict, exceeds, falls_below
from Moments.moments import estimate_first_moment
from States.statebank import DensityMatrix, get_family, make_state
from utils.errors import DimensionError, DomainError, EntkitError, InputError, ParameterRangeError
from Witness.witness import WitnessFamily, build_witness, witness_expectation

TRI_GENUINE = "tri_genuine"
M1_SHOTS = "m1_shots"
SHOT_SIGMAS = 5.0


# =================== Data Structures ===================
@dataclass
class SweepAxis:
    """One swept parameter: either an evenly spaced grid or explicit values."""

    name: str
    start: Optional[float] = None
    stop: Optional[float] = None
    steps: int = 11
    values: Optional[List[float]] = None

    def __post_init__(self):
        if self.values is not None:
            if not self.values:
                raise InputError(f"Axis '{self.name}' has an empty value list")
            self.values = [float(v) for v in self.values]
            return
        if self.start is None or self.stop is None:
            raise InputError(f"Axis '{self.name}' needs start and stop or explicit values")
        if int(self.steps) < 1:
            raise InputError(f"Axis '{self.name}' needs steps >= 1, got {self.steps}")
        self.steps = int(self.steps)

    def points(self) -> List[float]:
        if self.values is not None:
            return list(self.values)
        if self.steps == 1:
            return [float(self.start)]
        return [float(x) for x in np.linspace(self.start, self.stop, self.steps)]

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "start": self.start, "stop": self.stop, "steps": self.steps, "values": self.values}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SweepAxis":
        return cls(
            name=data["name"],
            start=data.get("start"),
            stop=data.get("stop"),
            steps=data.get("steps", 11),
            values=data.get("values"),
        )

    @classmethod
    def parse(cls, text: str) -> "SweepAxis":
        """Parse `name=start:stop:steps` or `name=v1,v2,...`."""
        try:
            name, rest = text.split("=", 1)
            if ":" in rest:
                start, stop, steps = rest.split(":")
                return cls(name.strip(), float(start), float(stop), int(steps))
            return cls(name.strip(), values=[float(v) for v in rest.split(",") if v.strip()])
        except ValueError as e:
            raise InputError(f"Bad grid '{text}': expected name=start:stop:steps or name=v1,v2,... ({e})") from e


@dataclass
class SweepSpec:
    """What to sweep and what to evaluate at every point."""

    family: str
    axes: List[SweepAxis]
    selection: List[str] = field(default_factory=lambda: ["ppt", "ccnr"])
    fixed: Dict[str, float] = field(default_factory=dict)
    out: Optional[str] = None
    seed: int = Config.DEFAULT_SEED
    unchecked: bool = False
    workers: int = Config.SWEEP_WORKERS
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        family = get_family(self.family)
        if not 1 <= len(self.axes) <= 2:
            raise InputError(f"A sweep takes one or two axes, got {len(self.axes)}")
        names = [axis.name for axis in self.axes]
        if len(set(names)) != len(names):
            raise InputError(f"Repeated sweep axis in {names}")
        specs = {p.name: p for p in family.params}
        for axis in self.axes:
            if axis.name not in specs:
                raise InputError(f"Family '{self.family}' has no parameter '{axis.name}'; expected {family.param_names}")
            outside = [x for x in axis.points() if not specs[axis.name].contains(x)]
            if outside:
                message = f"{self.family}: grid values {outside} outside {specs[axis.name].describe()}"
                if not self.unchecked:
                    raise ParameterRangeError(message)
                logger.warning(f"Unchecked sweep: {message}")
        for item in self.selection:
            parse_selection(item)
        if int(self.workers) < 1:
            raise InputError(f"workers must be >= 1, got {self.workers}")

    def grid(self) -> List[Dict[str, float]]:
        """Grid points in row-major order over the axes."""
        if len(self.axes) == 1:
            return [{self.axes[0].name: x} for x in self.axes[0].points()]
        first, second = self.axes
        return [{first.name: x, second.name: y} for x in first.points() for y in second.points()]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "axes": [axis.to_dict() for axis in self.axes],
            "selection": list(self.selection),
            "fixed": dict(self.fixed),
            "out": self.out,
            "seed": self.seed,
            "unchecked": self.unchecked,
            "workers": self.workers,
            "alpha": self.alpha,
            "beta": self.beta,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SweepSpec":
        try:
            axes = [SweepAxis.from_dict(a) for a in data["axes"]]
            return cls(
                family=data["family"],
                axes=axes,
                selection=list(data.get("selection", ["ppt", "ccnr"])),
                fixed={k: float(v) for k, v in data.get("fixed", {}).items()},
                out=data.get("out"),
                seed=int(data.get("seed", Config.DEFAULT_SEED)),
                unchecked=bool(data.get("unchecked", False)),
                workers=int(data.get("workers", 1)),
                alpha=float(data.get("alpha", 1.0)),
                beta=float(data.get("beta", 1.0)),
            )
        except (KeyError, TypeError) as e:
            raise InputError(f"Malformed sweep spec: {e}") from e


@dataclass
class SweepCell:
    statistic: Optional[float]
    verdict: Verdict
    item: str

    @property
    def detected(self) -> bool:
        return self.verdict is Verdict.ENTANGLED

    @property
    def decided(self) -> bool:
        return self.verdict in (Verdict.ENTANGLED, Verdict.INCONCLUSIVE)


@dataclass
class SweepRow:
    point: Dict[str, float]
    cells: Dict[str, SweepCell] = field(default_factory=dict)
    note: str = ""


@dataclass
class Boundary:
    """A detection change between two grid points, narrowed by bisection."""

    column: str
    lower: float
    upper: float
    onset: bool
    iterations: int

    @property
    def estimate(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "column": self.column,
            "estimate": self.estimate,
            "lower": self.lower,
            "upper": self.upper,
            "kind": "onset" if self.onset else "offset",
            "iterations": self.iterations,
        }


@dataclass
class SweepResult:
    spec: SweepSpec
    columns: List[str]
    rows: List[SweepRow]
    boundaries: List[Boundary] = field(default_factory=list)

    def series(self, column: str) -> List[Tuple[float, Optional[float]]]:
        if len(self.spec.axes) != 1:
            raise InputError("series() needs a one-dimensional sweep")
        name = self.spec.axes[0].name
        out = []
        for row in self.rows:
            cell = row.cells.get(column)
            out.append((row.point[name], None if cell is None else cell.statistic))
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "spec": self.spec.to_dict(),
            "columns": list(self.columns),
            "boundaries": [b.to_dict() for b in self.boundaries],
        }

    def write_csv(self, path: str) -> int:
        """One row per grid point: axis values, then statistic and verdict per column."""
        axis_names = [axis.name for axis in self.spec.axes]
        header = axis_names + [c for column in self.columns for c in (column, f"{column}_verdict")] + ["note"]
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for row in self.rows:
                record = [_fmt(row.point[name]) for name in axis_names]
                for column in self.columns:
                    cell = row.cells.get(column)
                    record.append("" if cell is None else _fmt(cell.statistic))
                    record.append("" if cell is None else cell.verdict.value)
                record.append(row.note)
                writer.writerow(record)
        logger.info(f"Wrote {len(self.rows)} sweep rows to {path}")
        return len(self.rows)

    def write_plot_data(self, column: str, path: str) -> int:
        """Two-column x,y file for external plotting; undefined statistics are skipped."""
        if column not in self.columns:
            raise InputError(f"Unknown sweep column '{column}'; have {self.columns}")
        points = [(x, y) for x, y in self.series(column) if y is not None]
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["x", "y"])
            for x, y in points:
                writer.writerow([_fmt(x), _fmt(y)])
        return len(points)

    def write_boundaries(self, path: str) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


# =================== Selection ===================
def parse_selection(item: str) -> Tuple[str, str, int]:
    """Split a selection item into (kind, name, n).

    kind is "criterion", "tri", "shots" or "witness". Witness items take an
    optional order as in `wn:3`; `m1_shots:N` takes a shot count.
    """
    name, _, order = item.partition(":")
    if name in CRITERIA:
        return "criterion", name, 1
    if name == TRI_GENUINE:
        return "tri", name, 1
    if name == M1_SHOTS:
        try:
            shots = int(order) if order else Config.DEFAULT_SHOTS
        except ValueError:
            raise InputError(f"Bad shot count in '{item}'") from None
        if shots < 2:
            raise InputError(f"{M1_SHOTS} needs at least 2 shots, got {shots}")
        return "shots", name, shots
    try:
        WitnessFamily(name)
    except ValueError:
        known = ", ".join(list(CRITERIA) + [TRI_GENUINE, M1_SHOTS] + [f.value for f in WitnessFamily])
        raise InputError(f"Unknown sweep selection '{item}'; known: {known}") from None
    try:
        n = int(order) if order else 1
    except ValueError:
        raise InputError(f"Bad witness order in '{item}'") from None
    return "witness", name, n


def _witness_column(name: str, n: int) -> str:
    return f"{name}_{n}" if name == WitnessFamily.WN.value else name


def _shot_cell(item: str, state: DensityMatrix, shots: int, seed: int) -> SweepCell:
    """Sampled m1 = Tr[rho P^T_B]; Entangled once its lower 5-sigma end exceeds 1."""
    try:
        sample = estimate_first_moment(state, shots=shots, seed=seed)
    except DimensionError as e:
        logger.debug(f"{M1_SHOTS} not applicable at {state.params}: {e}")
        return SweepCell(None, Verdict.NOT_APPLICABLE, item)
    lower = sample.estimate - SHOT_SIGMAS * sample.standard_error
    verdict = Verdict.ENTANGLED if exceeds(lower, 1.0) else Verdict.INCONCLUSIVE
    return SweepCell(sample.estimate, verdict, item)


def evaluate_item(
    item: str,
    state: DensityMatrix,
    alpha: float = 1.0,
    beta: float = 1.0,
    seed: int = Config.DEFAULT_SEED,
) -> Dict[str, SweepCell]:
    """Evaluate one selection item on one state; per-state failures become verdict cells."""
    kind, name, n = parse_selection(item)
    if kind == "shots":
        if state.dims.parties != 2:
            return {name: SweepCell(None, Verdict.NOT_APPLICABLE, item)}
        return {name: _shot_cell(item, state, n, seed)}
    if kind == "tri":
        if state.dims.parties != 3:
            return {name: SweepCell(None, Verdict.NOT_APPLICABLE, item)}
        report = tri_genuine(state)
        statistic = max(v.statistic for v in report.cuts.values())
        return {name: SweepCell(statistic, Verdict.ENTANGLED if report.genuine else Verdict.INCONCLUSIVE, item)}
    if kind == "criterion":
        if state.dims.parties != 2:
            return {name: SweepCell(None, Verdict.NOT_APPLICABLE, item)}
        return {v.criterion: SweepCell(v.statistic, v.verdict, item) for v in battery(state, [name])}

    column = _witness_column(name, n)
    try:
        value = witness_expectation(build_witness(name, state, n=n, alpha=alpha, beta=beta), state)
    except (DimensionError, DomainError) as e:
        logger.debug(f"{column} not applicable at {state.params}: {e}")
        return {column: SweepCell(None, Verdict.NOT_APPLICABLE, item)}
    except EntkitError as e:
        logger.warning(f"{column} failed at {state.params}: {e}")
        return {column: SweepCell(None, Verdict.ERROR, item)}
    verdict = Verdict.ENTANGLED if falls_below(value, 0.0) else Verdict.INCONCLUSIVE
    return {column: SweepCell(value, verdict, item)}


# =================== Evaluation ===================
def _build(spec: SweepSpec, point: Dict[str, float]) -> DensityMatrix:
    params = dict(spec.fixed)
    params.update(point)
    return make_state(spec.family, params, unchecked=spec.unchecked)


def evaluate_point(spec: SweepSpec, point: Dict[str, float], items: Optional[List[str]] = None) -> SweepRow:
    """All selected items at one grid point.

    Points rejected by a family constraint (e.g. p1 + 3 p3 > 1) come back with
    no cells and the reason in `note`.
    """
    row = SweepRow(point=dict(point))
    try:
        state = _build(spec, point)
    except (ParameterRangeError, DomainError) as e:
        row.note = str(e)
        logger.debug(f"Sweep point {point} skipped: {e}")
        return row
    for item in items if items is not None else spec.selection:
        row.cells.update(evaluate_item(item, state, spec.alpha, spec.beta, seed=spec.seed))
    return row


def _tolerances() -> Dict[str, float]:
    return {"margin": Config.DECISION_MARGIN, "rank_tol": Config.rank_tol()}


def _evaluate_task(task: Tuple[Dict[str, Any], Dict[str, float], Dict[str, float]]) -> SweepRow:
    spec_data, point, tolerances = task
    # Spawned workers re-import config, so the parent's overrides travel with the task.
    Config.DECISION_MARGIN = tolerances["margin"]
    os.environ["ENTKIT_DEFAULT_TOL"] = repr(tolerances["rank_tol"])
    return evaluate_point(SweepSpec.from_dict(spec_data), point)


def evaluate_grid(spec: SweepSpec, mp_context=None) -> List[SweepRow]:
    """Rows in grid order; with workers > 1 the points run in a process pool."""
    points = spec.grid()
    if spec.workers > 1 and len(points) > 1:
        logger.info(f"Sweeping {len(points)} points of {spec.family} with {spec.workers} workers")
        tolerances = _tolerances()
        tasks = [(spec.to_dict(), point, tolerances) for point in points]
        with ProcessPoolExecutor(max_workers=spec.workers, mp_context=mp_context) as executor:
            return list(executor.map(_evaluate_task, tasks))
    logger.info(f"Sweeping {len(points)} points of {spec.family}")
    return [evaluate_point(spec, point) for point in points]


def _columns(rows: List[SweepRow]) -> List[str]:
    seen: List[str] = []
    for row in rows:
        for column in row.cells:
            if column not in seen:
                seen.append(column)
    return seen


# =================== Boundaries ===================
def bisect_boundary(
    detected: Callable[[float], bool],
    low: float,
    high: float,
    resolution: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> Tuple[float, float, int]:
    """Narrow [low, high] around the change of `detected`, whose value differs at the two ends."""
    resolution = Config.BISECTION_RESOLUTION if resolution is None else resolution
    max_iter = Config.BISECTION_MAX_ITER if max_iter is None else max_iter
    at_low = detected(low)
    iterations = 0
    while high - low > resolution and iterations < max_iter:
        mid = 0.5 * (low + high)
        if detected(mid) == at_low:
            low = mid
        else:
            high = mid
        iterations += 1
    if high - low > resolution:
        logger.warning(f"Bisection stopped after {iterations} iterations with width {high - low:.3e}")
    return low, high, iterations


def find_boundaries(spec: SweepSpec, rows: List[SweepRow], columns: List[str]) -> List[Boundary]:
    """Bisect every adjacent pair of decided grid points whose verdicts differ."""
    if len(spec.axes) != 1:
        return []
    name = spec.axes[0].name
    boundaries = []
    for column in columns:
        for left, right in zip(rows, rows[1:]):
            a, b = left.cells.get(column), right.cells.get(column)
            if a is None or b is None or not (a.decided and b.decided) or a.detected == b.detected:
                continue

            def detected(x: float, column=column, item=a.item) -> bool:
                cell = evaluate_point(spec, {name: x}, [item]).cells.get(column)
                return cell is not None and cell.detected

            low, high, iterations = bisect_boundary(detected, left.point[name], right.point[name])
            boundary = Boundary(column=column, lower=low, upper=high, onset=b.detected, iterations=iterations)
            logger.info(f"{column}: boundary near {name} = {boundary.estimate:.7g}")
            boundaries.append(boundary)
    return boundaries


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate the grid, locate boundaries and write outputs named by `spec.out`."""
    rows = evaluate_grid(spec)
    columns = _columns(rows)
    result = SweepResult(spec=spec, columns=columns, rows=rows, boundaries=find_boundaries(spec, rows, columns))
    if spec.out:
        result.write_csv(spec.out)
        result.write_boundaries(os.path.splitext(spec.out)[0] + ".boundaries.json")
    return result
