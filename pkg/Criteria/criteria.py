"""
Separability criteria.

Every criterion takes a state and returns a CriterionVerdict carrying the
statistic of its inequality; positive violation beyond Config.DECISION_MARGIN
means Entangled. Input errors (bad dimensions, unknown ids) raise; states for
which a criterion is undefined get NotApplicable and numerical breakdowns get
Error, so a battery over many states never stops halfway.
"""

import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
from loguru import logger

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import Config
from Criteria.verdict import CriterionVerdict, Verdict, decide, error, margin, not_applicable
from Kernel.gell_mann import bloch_correlation_tensor, correlation_matrix
from Kernel.matkit import (
    ArrayLike,
    eig_hermitian,
    kron,
    lambda_min,
    partial_trace,
    partial_transpose,
    realign,
    trace_norm,
)
from Maps.qmaps import realign_tripartite, spa_lower_p, spa_pt_qubit, spa_realign
from Moments.moments import (
    dk_product,
    first_moment_via_swap,
    gram_char_coeffs,
    gram_eigen_bounds,
    gram_moments,
    pt_moments,
    zhang_moments,
)
from States.statebank import DensityMatrix, as_state
from utils.errors import DimensionError, DomainError, EntkitError, InputError

StateLike = Union[DensityMatrix, ArrayLike]


def _labelled(verdict: CriterionVerdict, state: DensityMatrix) -> CriterionVerdict:
    verdict.label = state.label
    return verdict


def _square(state: DensityMatrix, criterion: str) -> int:
    d1, d2 = state.dims.bipartite()
    if d1 != d2:
        raise DimensionError(f"{criterion} needs a d x d state, got dims {state.dims.dims}")
    return d1


# =================== Spectral Criteria ===================
def ppt(rho: StateLike) -> CriterionVerdict:
    state = as_state(rho)
    lowest = lambda_min(partial_transpose(state.matrix, state.dims))
    return _labelled(decide("ppt", lowest, 0.0, below=True), state)


def ccnr(rho: StateLike) -> CriterionVerdict:
    state = as_state(rho)
    norm = trace_norm(realign(state.matrix, state.dims))
    return _labelled(decide("ccnr", norm, 1.0), state)


def reduction(rho: StateLike) -> CriterionVerdict:
    """-lambda_min(rho_A kron I - rho), maximized with the rho_B variant."""
    state = as_state(rho)
    d1, d2 = state.dims.bipartite()
    rho_a = partial_trace(state.matrix, state.dims, 0)
    rho_b = partial_trace(state.matrix, state.dims, 1)
    stat_a = -lambda_min(kron(rho_a, np.eye(d2)) - state.matrix)
    stat_b = -lambda_min(kron(np.eye(d1), rho_b) - state.matrix)
    side = "A" if stat_a >= stat_b else "B"
    return _labelled(decide("reduction", max(stat_a, stat_b), 0.0, notes=f"side {side}"), state)


def _prefix_excess(global_values: np.ndarray, local_values: np.ndarray) -> float:
    n = max(len(global_values), len(local_values))
    g = np.zeros(n)
    l = np.zeros(n)
    g[: len(global_values)] = np.sort(global_values)[::-1]
    l[: len(local_values)] = np.sort(local_values)[::-1]
    return float(np.max(np.cumsum(g) - np.cumsum(l)))


def majorization(rho: StateLike) -> CriterionVerdict:
    """Largest prefix-sum excess of the global spectrum over either marginal spectrum."""
    state = as_state(rho)
    spectrum = eig_hermitian(state.matrix, symmetrize=True).values
    stats = []
    for keep in (0, 1):
        marginal = partial_trace(state.matrix, state.dims, keep)
        stats.append(_prefix_excess(spectrum, eig_hermitian(marginal, symmetrize=True).values))
    return _labelled(decide("majorization", max(stats), 0.0), state)


# =================== Correlation Tensor ===================
def _ct_norm(d: int, x: float) -> float:
    return math.sqrt((d - 1 + x * x) / d)


def correlation_tensor(rho: StateLike, x: float = 1.0, y: float = 1.0) -> CriterionVerdict:
    """||D_x C D_y||_1 - N_A(x) N_B(y) with C in the orthonormal Gell-Mann bases.

    D_x scales the identity component by x; (1, 1) reproduces the realignment
    norm and (0, 0) the traceless correlation block.
    """
    if x < 0 or y < 0:
        raise InputError(f"Correlation tensor weights must be nonnegative, got ({x}, {y})")
    state = as_state(rho)
    d_a, d_b = state.dims.bipartite()
    c = correlation_matrix(state.matrix, state.dims)
    dx = np.ones(d_a * d_a)
    dx[0] = x
    dy = np.ones(d_b * d_b)
    dy[0] = y
    weighted = dx[:, None] * c * dy[None, :]
    statistic = trace_norm(weighted) - _ct_norm(d_a, x) * _ct_norm(d_b, y)
    return _labelled(decide("correlation_tensor", statistic, 0.0, notes=f"x={x:g}, y={y:g}"), state)


def correlation_tensor_best(rho: StateLike, grid: Optional[Sequence[float]] = None) -> CriterionVerdict:
    """Best correlation tensor statistic over grid x grid."""
    grid = tuple(Config.CT_GRID if grid is None else grid)
    best: Optional[CriterionVerdict] = None
    for x in grid:
        for y in grid:
            current = correlation_tensor(rho, x, y)
            if best is None or current.statistic > best.statistic:
                best = current
    logger.debug(f"correlation_tensor_best: {best.notes} over {len(grid)}^2 grid")
    return best


def de_vicente(rho: StateLike) -> CriterionVerdict:
    """||T||_1 - sqrt(d_A d_B (d_A - 1)(d_B - 1)) / 2 with T in the unnormalized Gell-Mann basis.

    The statistic is d_A d_B / 2 times `correlation_tensor(rho, 0, 0)` (8 times
    on 4 x 4), so the two columns share their sign and boundaries but not their
    values.
    """
    state = as_state(rho)
    d_a, d_b = state.dims.bipartite()
    t = bloch_correlation_tensor(state.matrix, state.dims)
    bound = math.sqrt(d_a * d_b * (d_a - 1) * (d_b - 1)) / 2
    return _labelled(decide("de_vicente", trace_norm(t) - bound, 0.0), state)


# =================== Moment Criteria ===================
def _oppt(p2: float, p3: float) -> float:
    p2 = min(p2, 1.0)
    mu = math.floor(1.0 / p2)
    x = (mu + math.sqrt(max(0.0, mu * (p2 * (mu + 1) - 1)))) / (mu * (mu + 1))
    return mu * x ** 3 + (1 - mu * x) ** 3 - p3


def pt_moment_suite(rho: StateLike) -> List[CriterionVerdict]:
    """p3-PPT, D3 and p3-OPPT statistics from the first three partial-transpose moments."""
    state = as_state(rho)
    p = pt_moments(state, 3)
    p1, p2, p3 = p[1], p[2], p[3]
    out = [
        decide("p3_ppt", p2 * p2 - p3 * p1, 0.0),
        decide("d3", 1.5 * p1 * p2 - 0.5 * p1 ** 3 - p3, 0.0),
    ]
    if p2 <= margin():
        out.append(error("p3_oppt", f"degenerate purity p2={p2:.3e}"))
    else:
        out.append(decide("p3_oppt", _oppt(p2, p3), 0.0))
    return [_labelled(v, state) for v in out]


def _hankel_min(m: Sequence[float], size: int, shift: int) -> float:
    h = np.array([[m[i + j + shift] for j in range(size)] for i in range(size)])
    return eig_hermitian(h, symmetrize=True).min


def zhang_suite(rho: StateLike, K: Optional[int] = None) -> List[CriterionVerdict]:
    """L4 = r2^2 - r3 and the Hankel test on singular-value moments.

    The Hankel test uses the sequence (1, r_2, r_3, ...), i.e. r_1 replaced by
    1; for separable states it is a Stieltjes moment sequence, so both
    [m_(i+j)] and [m_(i+j+1)] must be positive semidefinite.
    """
    state = as_state(rho)
    n = min(d * d for d in state.dims.bipartite())
    K = n if K is None else max(3, int(K))
    r = zhang_moments(state, K)
    l4 = decide("l4", r[2] ** 2 - r[3], 0.0)

    m = [1.0] + [r[k] for k in range(2, K + 1)]
    lowest = math.inf
    blocks = 0
    for size in range(2, K + 1):
        if 2 * (size - 1) < len(m):
            lowest = min(lowest, _hankel_min(m, size, 0))
            blocks += 1
        if 2 * (size - 1) + 1 < len(m):
            lowest = min(lowest, _hankel_min(m, size, 1))
            blocks += 1
    if blocks == 0:
        hankel = not_applicable("hankel", f"needs at least 3 moments, got {K}")
    else:
        hankel = decide("hankel", lowest, 0.0, below=True, notes=f"{blocks} Hankel blocks")
    return [_labelled(l4, state), _labelled(hankel, state)]


def r_moment(rho: StateLike, tol: Optional[float] = None) -> CriterionVerdict:
    """R1 = k(k-1) D_k^(1/k) + T1 - 1 with k the rank of R(rho)."""
    state = as_state(rho)
    d1, d2 = state.dims.bipartite()
    if d1 * d2 == 4:
        return _labelled(not_applicable("r_moment", "two-qubit input; use r2_two_qubit"), state)
    dk = dk_product(state, tol=tol)
    t1 = gram_moments(state, 1)[1]
    k = dk.k
    statistic = k * (k - 1) * dk.d_k ** (1.0 / k) + t1 - 1
    return _labelled(decide("r_moment", statistic, 0.0, notes=f"k={k}"), state)


def r2_two_qubit(rho: StateLike) -> CriterionVerdict:
    """R2 = sqrt(3 X^(2/3) + 2 Y - 2 T1) - 1 for two qubits."""
    state = as_state(rho)
    if state.dims.dims != (2, 2):
        raise DimensionError(f"r2_two_qubit needs a 2 x 2 state, got dims {state.dims.dims}")
    t = gram_moments(state, 3)
    t1, t2, t3 = t[1], t[2], t[3]
    _, d2, d3 = gram_char_coeffs(t1, t2, t3)
    try:
        bounds = gram_eigen_bounds(state)
    except DomainError as e:
        return _labelled(error("r2_two_qubit", str(e)), state)
    lb, ub = bounds.lambda_max_lb, bounds.lambda_max_ub
    inner = d2 - ub * t1 + lb * lb
    if inner < -margin() or d2 < -margin():
        return _labelled(error("r2_two_qubit", f"negative radicand: D2={d2:.6g}, D2 - ub T1 + lb^2={inner:.6g}"), state)
    x = lb * math.sqrt(2 * math.sqrt(max(0.0, d2)) + t1) + math.sqrt(abs(d3))
    y = t1 - ub + math.sqrt(max(0.0, inner))
    outer = 3 * x ** (2.0 / 3.0) + 2 * y - 2 * t1
    if outer < -margin():
        return _labelled(error("r2_two_qubit", f"negative outer radicand {outer:.6g}"), state)
    statistic = math.sqrt(max(0.0, outer)) - 1
    return _labelled(decide("r2_two_qubit", statistic, 0.0, notes=f"X={x:.6g}, Y={y:.6g}"), state)


# =================== SPA & SWAP Criteria ===================
def spa_r(rho: StateLike, p: Optional[float] = None) -> CriterionVerdict:
    """||R~(rho)||_1 against (p(Tr R - 1) + 1)/Tr R; p defaults to spa_lower_p."""
    state = as_state(rho)
    _square(state, "spa_r")
    p = spa_lower_p(state) if p is None else float(p)
    trace = float(np.trace(realign(state.matrix, state.dims)).real)
    statistic = trace_norm(spa_realign(state, p)) - (p * (trace - 1) + 1) / trace
    return _labelled(decide("spa_r", statistic, 0.0, notes=f"p={p:.6g}"), state)


@dataclass
class SchmidtCheck:
    symmetric: bool
    defect: float

    def to_dict(self) -> Dict[str, Any]:
        return {"symmetric": self.symmetric, "defect": self.defect}


def schmidt_symmetric_check(rho: StateLike) -> SchmidtCheck:
    """||R||_1 = Tr[R] within the decision margin."""
    state = as_state(rho)
    r = realign(state.matrix, state.dims)
    defect = trace_norm(r) - float(np.trace(r).real)
    return SchmidtCheck(symmetric=abs(defect) <= margin(), defect=defect)


def spa_error_inequality(rho: StateLike, p: Optional[float] = None) -> CriterionVerdict:
    """||R~ - R||_1 against (1 - p)(1 - Tr R)/Tr R.

    The bound holds for separable states with Tr R <= 1 - p; inside
    (1 - p, 1] it is undefined, and Schmidt-symmetric entangled states are
    excluded.
    """
    state = as_state(rho)
    _square(state, "spa_error_inequality")
    p = spa_lower_p(state) if p is None else float(p)
    r = realign(state.matrix, state.dims)
    trace = float(np.trace(r).real)
    check = schmidt_symmetric_check(state)
    if check.symmetric and trace_norm(r) > 1 + margin():
        return _labelled(not_applicable("spa_error_inequality", "Schmidt-symmetric entangled state"), state)
    if 1 - p < trace <= 1 + margin():
        return _labelled(
            not_applicable("spa_error_inequality", f"Tr[R]={trace:.6g} lies in (1 - p, 1] for p={p:.6g}"), state
        )
    statistic = trace_norm(spa_realign(state, p) - r) - (1 - p) * (1 - trace) / trace
    return _labelled(decide("spa_error_inequality", statistic, 0.0, notes=f"p={p:.6g}"), state)


def first_moment_criterion(rho: StateLike) -> CriterionVerdict:
    """t1 = Tr[rho P^T_B] <= 1 for separable states."""
    state = as_state(rho)
    _square(state, "first_moment")
    return _labelled(decide("first_moment", first_moment_via_swap(state), 1.0), state)


def swap_rank(rho: StateLike, tol: Optional[float] = None) -> CriterionVerdict:
    """t1^2/k - 1 + k(k-1) D_k^(1/k) with t1 = Tr[rho P^T_B] and k the rank of R."""
    state = as_state(rho)
    _square(state, "swap_rank")
    t1 = first_moment_via_swap(state)
    dk = dk_product(state, tol=tol)
    k = dk.k
    statistic = t1 * t1 / k - 1 + k * (k - 1) * dk.d_k ** (1.0 / k)
    return _labelled(decide("swap_rank", statistic, 0.0, notes=f"k={k}"), state)


# =================== Three Qubits ===================
@dataclass
class TripartiteReport:
    cuts: Dict[str, CriterionVerdict]
    genuine: bool
    gram_lambda_min: float
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cuts": {k: v.model_dump(mode="json") for k, v in self.cuts.items()},
            "genuine": self.genuine,
            "gram_lambda_min": self.gram_lambda_min,
        }


def tri_genuine(rho: StateLike) -> TripartiteReport:
    """Per-cut test lambda_min(G + SPA-PT_X) - lambda_min(G) - 1/10 with G = R^dagger R of the three-qubit realignment.

    A negative statistic beyond the margin in all three cuts flags genuine
    tripartite entanglement.
    """
    state = as_state(rho, dims=(2, 2, 2))
    r = realign_tripartite(state)
    gram = r.conj().T @ r
    base = eig_hermitian(gram, symmetrize=True).min
    cuts = {}
    for part in ("A", "B", "C"):
        combined = eig_hermitian(gram + spa_pt_qubit(state, part), symmetrize=True).min
        cuts[part] = _labelled(decide(f"tri_genuine_{part}", combined - base - 0.1, 0.0, below=True), state)
    genuine = all(v.verdict is Verdict.ENTANGLED for v in cuts.values())
    logger.debug(f"tri_genuine: lambda_min(G)={base:.6g}, genuine={genuine}")
    return TripartiteReport(cuts=cuts, genuine=genuine, gram_lambda_min=base)


# =================== Battery ===================
Criterion = Callable[[DensityMatrix], Union[CriterionVerdict, List[CriterionVerdict]]]

CRITERIA: Dict[str, Criterion] = {
    "ppt": ppt,
    "ccnr": ccnr,
    "correlation_tensor": correlation_tensor_best,
    "de_vicente": de_vicente,
    "reduction": reduction,
    "majorization": majorization,
    "pt_moments": pt_moment_suite,
    "zhang": zhang_suite,
    "r_moment": r_moment,
    "r2_two_qubit": r2_two_qubit,
    "spa_r": spa_r,
    "spa_error_inequality": spa_error_inequality,
    "first_moment": first_moment_criterion,
    "swap_rank": swap_rank,
}


def _run_one(name: str, fn: Criterion, state: DensityMatrix) -> List[CriterionVerdict]:
    try:
        result = fn(state)
    except (DimensionError, DomainError) as e:
        return [_labelled(not_applicable(name, str(e)), state)]
    except EntkitError as e:
        return [_labelled(error(name, str(e)), state)]
    return result if isinstance(result, list) else [result]


def battery(rho: StateLike, names: Optional[Iterable[str]] = None) -> List[CriterionVerdict]:
    """Run the named criteria (all by default) on one state.

    Three-qubit states get the per-cut genuine-entanglement test instead.
    """
    state = as_state(rho)
    if state.dims.parties == 3:
        return list(tri_genuine(state).cuts.values())
    selected = list(CRITERIA) if names is None else list(names)
    unknown = [n for n in selected if n not in CRITERIA]
    if unknown:
        raise InputError(f"Unknown criteria {unknown}; known: {', '.join(CRITERIA)}")
    out: List[CriterionVerdict] = []
    for name in selected:
        out.extend(_run_one(name, CRITERIA[name], state))
    return out


def detected_by(verdicts: Iterable[CriterionVerdict]) -> List[str]:
    return [v.criterion for v in verdicts if v.verdict is Verdict.ENTANGLED]
