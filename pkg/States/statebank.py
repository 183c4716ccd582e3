"""
Checked construction, validation and JSON io for catalog states.

Families are addressed by a stable string id plus named real parameters:

    rho = make_state("iso3", {"f": 0.5})
    report = validate(rho)
"""

import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np
from loguru import logger

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import Config
from Kernel.matkit import ArrayLike, DimSpec, as_matrix, eig_hermitian, hermitian_defect
from States import catalog
from utils.errors import InputError, NormalizationError, ParameterRangeError


# =================== Data Structures ===================
@dataclass
class DensityMatrix:
    """A validated density matrix with its subsystem dimensions."""

    matrix: np.ndarray
    dims: DimSpec
    label: str = ""
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.dims = DimSpec.coerce(self.dims)
        self.matrix = as_matrix(self.matrix, self.label or "rho")
        self.dims.check(self.matrix, self.label or "rho")

    @property
    def order(self) -> int:
        return self.dims.order

    def to_dict(self) -> Dict[str, Any]:
        entries = [[float(z.real), float(z.imag)] for z in self.matrix.reshape(-1)]
        return {
            "label": self.label,
            "dims": self.dims.to_list(),
            "params": dict(self.params),
            "entries": entries,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DensityMatrix":
        try:
            dims = DimSpec.coerce(data["dims"])
            entries = np.asarray(data["entries"], dtype=float)
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(f"Malformed state record: {e}") from e
        if entries.ndim != 2 or entries.shape != (dims.order * dims.order, 2):
            raise InputError(
                f"State record needs {dims.order ** 2} [re, im] pairs, got shape {entries.shape}"
            )
        matrix = (entries[:, 0] + 1j * entries[:, 1]).reshape(dims.order, dims.order)
        return cls(matrix=matrix, dims=dims, label=data.get("label", ""), params=dict(data.get("params", {})))

    def to_json(self, indent: Optional[int] = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "DensityMatrix":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise InputError(f"Invalid state JSON: {e}") from e
        return cls.from_dict(data)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json(indent=2))

    @classmethod
    def load(cls, path: str) -> "DensityMatrix":
        try:
            with open(path, "r", encoding="utf-8") as f:
                return cls.from_json(f.read())
        except OSError as e:
            raise InputError(f"Cannot read state file {path}: {e}") from e


@dataclass
class ValidationReport:
    """Density-matrix invariants with their measured defects."""

    hermitian_defect: float
    trace_defect: float
    min_eigenvalue: float
    hermitian_ok: bool
    trace_ok: bool
    psd_ok: bool

    @property
    def passed(self) -> bool:
        return self.hermitian_ok and self.trace_ok and self.psd_ok

    def failures(self) -> List[str]:
        failed = []
        if not self.hermitian_ok:
            failed.append(f"hermitian defect {self.hermitian_defect:.3e}")
        if not self.trace_ok:
            failed.append(f"trace defect {self.trace_defect:.3e}")
        if not self.psd_ok:
            failed.append(f"min eigenvalue {self.min_eigenvalue:.3e}")
        return failed

    def to_dict(self) -> Dict[str, Any]:
        return {
            "hermitian_defect": self.hermitian_defect,
            "trace_defect": self.trace_defect,
            "min_eigenvalue": self.min_eigenvalue,
            "hermitian_ok": self.hermitian_ok,
            "trace_ok": self.trace_ok,
            "psd_ok": self.psd_ok,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class ParamSpec:
    """One family parameter with its documented range (endpoints inclusive unless open)."""

    name: str
    low: float
    high: float
    default: float
    low_open: bool = False
    high_open: bool = False
    integer: bool = False

    def contains(self, value: float) -> bool:
        if self.integer and float(value) != int(value):
            return False
        above = value > self.low if self.low_open else value >= self.low
        below = value < self.high if self.high_open else value <= self.high
        return above and below

    def describe(self) -> str:
        left = "(" if self.low_open else "["
        right = ")" if self.high_open else "]"
        kind = " integer" if self.integer else ""
        return f"{self.name} in {left}{self.low:g}, {self.high:g}{right}{kind}"


Params = Dict[str, float]
DimsRule = Union[Tuple[int, ...], Callable[[Params], Tuple[int, ...]]]


@dataclass(frozen=True)
class StateFamily:
    """A catalog family: builder, parameter ranges and subsystem dimensions."""

    family_id: str
    builder: Callable[..., np.ndarray]
    dims: DimsRule
    params: Tuple[ParamSpec, ...] = ()
    description: str = ""
    constraint: Optional[Callable[[Params], Optional[str]]] = None
    complete: Optional[Callable[[Params], Params]] = None

    @property
    def param_names(self) -> List[str]:
        return [p.name for p in self.params]

    def defaults(self) -> Params:
        return {p.name: p.default for p in self.params}

    def dims_for(self, params: Params) -> Tuple[int, ...]:
        return self.dims(params) if callable(self.dims) else tuple(self.dims)

    def normalize_params(self, params: Optional[Mapping[str, float]], unchecked: bool = False) -> Params:
        """Fill defaults, reject unknown names and (unless unchecked) out-of-range values."""
        given = dict(params or {})
        unknown = sorted(set(given) - set(self.param_names))
        if unknown:
            raise InputError(f"Family '{self.family_id}' has no parameter(s) {unknown}; expected {self.param_names}")
        try:
            values = {k: float(v) for k, v in given.items()}
        except (TypeError, ValueError) as e:
            raise InputError(f"Non-numeric parameter for '{self.family_id}': {e}") from e
        if self.complete is not None:
            values = self.complete(values)
        merged = self.defaults()
        merged.update(values)

        problems = [spec.describe() for spec in self.params if not spec.contains(merged[spec.name])]
        if self.constraint is not None:
            message = self.constraint(merged)
            if message:
                problems.append(message)
        if problems:
            text = f"{self.family_id}{merged}: requires " + "; ".join(problems)
            if not unchecked:
                raise ParameterRangeError(text)
            logger.warning(f"Unchecked construction outside documented range: {text}")
        for spec in self.params:
            if spec.integer:
                merged[spec.name] = int(round(merged[spec.name]))
        return merged


# =================== Constraints ===================
def _bes4x4_complete(values: Params) -> Params:
    if "p" in values and "q" not in values:
        values["q"] = (1 - 4 * values["p"]) / 2
    elif "q" in values and "p" not in values:
        values["p"] = (1 - 2 * values["q"]) / 4
    return values


def _bes4x4_constraint(v: Params) -> Optional[str]:
    if abs(4 * v["p"] + 2 * v["q"] - 1) > Config.TRACE_TOL:
        return "4p + 2q = 1"
    return None


def _two_param_constraint(v: Params) -> Optional[str]:
    n = v["n"]
    if v["alpha"] > 1 / (2 * (n - 1)):
        return "alpha <= 1/(2(n-1))"
    if 2 * (n - 2) * v["alpha"] + v["gamma"] > 1:
        return "beta = (1 - 2(n-2)alpha - gamma)/3 >= 0"
    return None


def _rudolph_constraint(v: Params) -> Optional[str]:
    if v["t"] == 0:
        return "t != 0"
    if v["t"] ** 2 > 5 * (1 - v["s"]) / 4 + Config.PSD_TOL:
        return "t^2 <= 5(1-s)/4"
    return None


def _marginals_constraint(v: Params) -> Optional[str]:
    t1, t2, t3 = v["t1"], v["t2"], v["t3"]
    if (1 - t3) ** 2 < (t1 + t2) ** 2 or (1 + t3) ** 2 < (t1 - t2) ** 2:
        return "(1-t3)^2 >= (t1+t2)^2 and (1+t3)^2 >= (t1-t2)^2"
    return None


def _eps_constraint(v: Params) -> Optional[str]:
    return "eps != 1" if v["eps"] == 1 else None


def _mub3_constraint(v: Params) -> Optional[str]:
    if 1 - v["p1"] - 3 * v["p3"] < 0:
        return "p2 = 1 - p1 - 3 p3 >= 0"
    return None


# =================== Registry ===================
_INF = math.inf
_RT_MAX = math.sqrt(5) / (2 * math.sqrt(2))

FAMILIES: Dict[str, StateFamily] = {
    f.family_id: f
    for f in [
        StateFamily("bell", catalog.bell, (2, 2), (ParamSpec("index", 0, 3, 0, integer=True),),
                    "Bell projectors phi+, phi-, psi+, psi-"),
        StateFamily("iso2", catalog.iso2, (2, 2), (ParamSpec("f", 0, 1, 0.75),),
                    "two-qubit isotropic state"),
        StateFamily("iso3", catalog.iso3, (3, 3), (ParamSpec("f", 0, 1, 0.5),),
                    "3x3 isotropic state"),
        StateFamily("iso3_beta", catalog.iso3_beta, (3, 3), (ParamSpec("beta", -1 / 8, 1, 0.5),),
                    "3x3 isotropic state, mixing parameterization"),
        StateFamily("horodecki_a", catalog.horodecki_a, (3, 3), (ParamSpec("a", 0, 1, 0.5),),
                    "3x3 bound entangled family"),
        StateFamily("horodecki_alpha", catalog.horodecki_alpha, (3, 3), (ParamSpec("alpha", 2, 5, 3.5),),
                    "3x3 family, PPT entangled for 3 < alpha <= 4"),
        StateFamily("upb_tiles", catalog.upb_tiles, (3, 3), (),
                    "bound entangled state from the tiles UPB"),
        StateFamily("upb_mixture", catalog.upb_mixture, (3, 3),
                    (ParamSpec("i", 1, 5, 1, integer=True), ParamSpec("gamma", 0, 1, 0.05)),
                    "UPB state mixed with one of its product vectors"),
        StateFamily("bes4x4", catalog.bes4x4, (4, 4),
                    (ParamSpec("p", 0, 0.25, catalog.BES4X4_P0), ParamSpec("q", 0, 0.5, catalog.BES4X4_Q0)),
                    "4x4 family, 4p + 2q = 1", constraint=_bes4x4_constraint, complete=_bes4x4_complete),
        StateFamily("bes4x4_noisy", catalog.bes4x4_noisy, (4, 4), (ParamSpec("lam", 0, 1, 0.95),),
                    "bes4x4 at (p0, q0) with white noise"),
        StateFamily("kye", catalog.kye, (4, 4), (ParamSpec("r", 0, 1, 0.5, low_open=True, high_open=True),),
                    "4x4 PPT entangled family at z = p = 1"),
        StateFamily("kye_zpr", catalog.kye_zpr, (4, 4),
                    (ParamSpec("theta", -math.pi / 4, math.pi / 4, 0.0, low_open=True, high_open=True),
                     ParamSpec("p", 0, _INF, 1.0, low_open=True, high_open=True),
                     ParamSpec("r", 0, 1, 0.5, low_open=True, high_open=True)),
                    "4x4 PPT entangled family, z = exp(i theta)"),
        StateFamily("npt3x3", catalog.npt3x3, (3, 3),
                    (ParamSpec("a", catalog.NPT3X3_A_MIN, catalog.NPT3X3_A_MAX, 0.3),),
                    "3x3 NPT family"),
        StateFamily("two_param_2xn", catalog.two_param_2xn, lambda v: (2, int(round(v["n"]))),
                    (ParamSpec("n", 2, 8, 3, integer=True), ParamSpec("alpha", 0, 0.5, 0.1),
                     ParamSpec("gamma", 0, 1, 0.5)),
                    "two-parameter 2 x n family", constraint=_two_param_constraint),
        StateFamily("rudolph_st", catalog.rudolph_st, (2, 2),
                    (ParamSpec("s", 0.25, 1, 0.5, low_open=True),
                     ParamSpec("t", -math.sqrt(15) / 4, math.sqrt(15) / 4, 0.5)),
                    "two-qubit X family", constraint=_rudolph_constraint),
        StateFamily("rho_t", catalog.rho_t, (2, 2), (ParamSpec("t", -_RT_MAX, _RT_MAX, 0.5),),
                    "two-qubit X family at s = 1/2"),
        StateFamily("qutrit_mu", catalog.qutrit_mu, (3, 3), (ParamSpec("mu", 1 / math.sqrt(2), 1, 1.0),),
                    "3x3 rank-3 family"),
        StateFamily("mixed_marginals", catalog.mixed_marginals, (2, 2),
                    (ParamSpec("t1", -1, 1, 0.0), ParamSpec("t2", -1, 1, 0.0), ParamSpec("t3", -1, 1, -0.5)),
                    "two-qubit states with maximally mixed marginals", constraint=_marginals_constraint),
        StateFamily("eps3x3", catalog.eps3x3, (3, 3),
                    (ParamSpec("eps", 0, _INF, 0.7, low_open=True, high_open=True),),
                    "3x3 family with realigned rank 8", constraint=_eps_constraint),
        StateFamily("bihalan_be", catalog.bihalan_be, (3, 3), (), "3x3 bound entangled state"),
        StateFamily("acin_abc", catalog.acin_abc, (2, 2, 2),
                    tuple(ParamSpec(n, 0, _INF, d, low_open=True, high_open=True)
                          for n, d in (("a", 2.0), ("b", 3.0), ("c", 0.5))),
                    "three-qubit bound entangled family"),
        StateFamily("mub3", catalog.mub3, (2, 2, 2),
                    (ParamSpec("p1", 0, 1, 0.6), ParamSpec("p3", 0, 1 / 3, 0.0)),
                    "three-qubit family from mutually unbiased bases", constraint=_mub3_constraint),
        StateFamily("rho12", catalog.rho12, (2, 2), (), "fixed two-qubit state"),
        StateFamily("rho12_alt", catalog.rho12_alt, (2, 2), (), "fixed two-qubit state"),
        StateFamily("maximally_mixed", catalog.maximally_mixed, lambda v: (int(round(v["d1"])), int(round(v["d2"]))),
                    (ParamSpec("d1", 2, 8, 2, integer=True), ParamSpec("d2", 2, 8, 2, integer=True)),
                    "I / (d1 d2)"),
    ]
}


def list_families() -> List[str]:
    return sorted(FAMILIES)


def get_family(family_id: str) -> StateFamily:
    try:
        return FAMILIES[family_id]
    except KeyError:
        raise InputError(f"Unknown state family '{family_id}'; known: {', '.join(list_families())}") from None


# =================== Validation ===================
def validate(rho: Union[DensityMatrix, ArrayLike]) -> ValidationReport:
    """Check Hermiticity, unit trace and positive semidefiniteness within tolerance."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else as_matrix(rho, "rho")
    defect = hermitian_defect(m)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    trace_defect = float(abs(np.trace(m) - 1.0))
    min_eig = eig_hermitian(m, symmetrize=True).min
    logger.debug(
        f"validate: hermitian tol {Config.HERMITIAN_TOL}, trace tol {Config.TRACE_TOL}, psd tol {Config.PSD_TOL}"
    )
    return ValidationReport(
        hermitian_defect=defect,
        trace_defect=trace_defect,
        min_eigenvalue=min_eig,
        hermitian_ok=defect <= Config.HERMITIAN_TOL * scale,
        trace_ok=trace_defect <= Config.TRACE_TOL,
        psd_ok=min_eig >= -Config.PSD_TOL,
    )


# =================== Construction ===================
def make_state(family: str, params: Optional[Mapping[str, float]] = None, unchecked: bool = False) -> DensityMatrix:
    """Build a catalog state.

    Args:
        family: Family id from FAMILIES.
        params: Named parameters; missing ones take the family default.
        unchecked: Allow out-of-range parameters and invalid results (logged as warnings).

    Returns:
        DensityMatrix labelled with the family id.

    Raises:
        InputError: unknown family or parameter name.
        ParameterRangeError: parameter outside the documented range.
        NormalizationError: the constructed matrix is not a density matrix.
    """
    spec = get_family(family)
    values = spec.normalize_params(params, unchecked=unchecked)
    matrix = spec.builder(**values)
    state = DensityMatrix(matrix=matrix, dims=spec.dims_for(values), label=family, params=values)
    report = validate(state)
    if not report.passed:
        message = f"{family}{values} is not a density matrix: {', '.join(report.failures())}"
        if not unchecked:
            raise NormalizationError(message)
        logger.warning(message)
    return state


def as_state(rho: Union[DensityMatrix, ArrayLike], dims=None, label: str = "") -> DensityMatrix:
    """Wrap a raw matrix; dims default to a square split (d, d)."""
    if isinstance(rho, DensityMatrix):
        return rho
    m = as_matrix(rho, label or "rho")
    if dims is None:
        d = int(round(math.sqrt(m.shape[0])))
        if d * d != m.shape[0]:
            raise InputError(f"Cannot infer a d x d split for order {m.shape[0]}; pass dims")
        dims = (d, d)
    return DensityMatrix(matrix=m, dims=DimSpec.coerce(dims), label=label)
