"""
Linear maps built from partial transposition and realignment.

    phi_map          alpha * rho^T_B + beta * R(rho)
    choi_matrix      C = sum_ij e_ij kron Phi(e_ij) for a registered map
    spa_realign      structural physical approximation of the realignment map
    spa_pt_qubit     structural physical approximation of a single-qubit transpose
    realign_via_swap R(rho) = (rho P)^T_B P
    realign_tripartite  three-qubit realignment from 2 x 2 blocks
"""

import os
import sys
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from loguru import logger

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import Config
from Kernel.matkit import (
    ArrayLike,
    eig_hermitian,
    eigvals_general,
    is_hermitian,
    lambda_min,
    partial_transpose,
    realign,
    swap_operator,
)
from Moments.moments import descartes_psd, lambda_min_lb
from States.statebank import DensityMatrix, as_state
from utils.errors import DimensionError, DomainError, InputError, ParameterRangeError

StateLike = Union[DensityMatrix, ArrayLike]


# =================== Data Structures ===================
@dataclass
class MapParams:
    alpha: float = 1.0
    beta: float = 1.0
    p: float = 0.0

    def __post_init__(self):
        self.alpha, self.beta, self.p = float(self.alpha), float(self.beta), float(self.p)
        if self.alpha < 0 or self.beta < 0:
            raise ParameterRangeError(f"alpha and beta must be nonnegative, got ({self.alpha}, {self.beta})")
        if not 0.0 <= self.p <= 1.0:
            raise ParameterRangeError(f"Mixing probability p must lie in [0, 1], got {self.p}")

    def to_dict(self) -> Dict[str, float]:
        return {"alpha": self.alpha, "beta": self.beta, "p": self.p}


@dataclass
class ChoiMatrix:
    """Choi matrix of a map on M_n; `hermitian` is recorded, not required."""

    matrix: np.ndarray
    map_id: str
    input_dim: int
    params: Optional[MapParams] = None

    @property
    def hermitian(self) -> bool:
        return is_hermitian(self.matrix)

    def eigenvalues(self) -> np.ndarray:
        return eigvals_general(self.matrix)

    def is_cp(self, tol: Optional[float] = None) -> bool:
        """Completely positive iff every eigenvalue of the Choi matrix is real and nonnegative."""
        w = self.eigenvalues()
        tol = Config.PSD_TOL if tol is None else float(tol)
        scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
        logger.debug(f"is_cp({self.map_id}): tolerance {tol * scale:.3e}")
        return bool(np.all(w.real >= -tol * scale) and np.all(np.abs(w.imag) <= tol * scale))

    def to_dict(self) -> Dict[str, Any]:
        n = self.matrix.shape[0]
        return {
            "label": f"choi_{self.map_id}",
            "dims": [n],
            "params": self.params.to_dict() if self.params else {},
            "entries": [[float(z.real), float(z.imag)] for z in self.matrix.reshape(-1)],
        }


class PositivityCase(str, Enum):
    ALL = "all"  # positive for every alpha, beta >= 0
    GE = "ge"  # positive iff alpha/beta >= threshold
    LE = "le"  # positive iff alpha/beta <= threshold
    NONE = "none"
    NOT_APPLICABLE = "not_applicable"


@dataclass
class PositivityBound:
    case: PositivityCase
    threshold: Optional[float]
    lambda_pt: float
    lambda_r: Optional[float]
    notes: str = ""

    def admits(self, alpha: float, beta: float) -> bool:
        """Whether (alpha, beta) keeps Phi(rho) positive by the Weyl bound."""
        if self.case is PositivityCase.ALL:
            return True
        if self.case in (PositivityCase.NONE, PositivityCase.NOT_APPLICABLE):
            return False
        if beta == 0:
            return self.case is PositivityCase.GE
        ratio = alpha / beta
        return ratio >= self.threshold if self.case is PositivityCase.GE else ratio <= self.threshold

    def to_dict(self) -> Dict[str, Any]:
        return {
            "case": self.case.value,
            "threshold": self.threshold,
            "lambda_pt": self.lambda_pt,
            "lambda_r": self.lambda_r,
            "notes": self.notes,
        }


# =================== Helpers ===================
def _square_state(rho: StateLike) -> Tuple[DensityMatrix, int]:
    state = as_state(rho)
    d1, d2 = state.dims.bipartite()
    if d1 != d2:
        raise DimensionError(f"Map needs a d x d state so that R(rho) is square, got dims {state.dims.dims}")
    return state, d1


def _three_qubit(rho: StateLike) -> DensityMatrix:
    state = as_state(rho, dims=(2, 2, 2))
    if state.dims.dims != (2, 2, 2):
        raise DimensionError(f"Three-qubit operation got dims {state.dims.dims}")
    return state


def _phi_raw(a: np.ndarray, d: int, alpha: float, beta: float) -> np.ndarray:
    return alpha * partial_transpose(a, (d, d)) + beta * realign(a, (d, d))


def _realignment_trace(state: DensityMatrix) -> Tuple[np.ndarray, float]:
    r = realign(state.matrix, state.dims)
    trace = np.trace(r)
    if abs(trace.imag) > Config.HERMITIAN_TOL or trace.real <= Config.TRACE_TOL:
        raise DomainError(f"Tr[R(rho)] = {trace:.6g} is not positive; state is outside the SPA domain")
    return r, float(trace.real)


# =================== Phi(alpha, beta) ===================
def phi_map(rho: StateLike, alpha: float, beta: float) -> np.ndarray:
    state, d = _square_state(rho)
    params = MapParams(alpha, beta)
    return _phi_raw(state.matrix, d, params.alpha, params.beta)


def phi_positivity_bound(rho: StateLike) -> PositivityBound:
    """Range of alpha/beta for which Phi(rho) stays positive.

    Weyl's inequality gives lambda_min(Phi(rho)) >= alpha l_pt + beta l_r with
    l_pt = lambda_min(rho^T_B) and l_r = lambda_min(R(rho)). The signs of the
    two minima select the case; a non-Hermitian R(rho) is outside the domain.
    """
    state, d = _square_state(rho)
    lpt = lambda_min(partial_transpose(state.matrix, state.dims))
    r = realign(state.matrix, state.dims)
    if not is_hermitian(r):
        return PositivityBound(PositivityCase.NOT_APPLICABLE, None, lpt, None, "R(rho) is not Hermitian")
    lr = eig_hermitian(r).min
    tol = Config.PSD_TOL
    logger.debug(f"phi_positivity_bound: l_pt={lpt:.6g}, l_r={lr:.6g}, tolerance {tol}")
    ppt = lpt >= -tol
    r_psd = lr >= -tol
    if ppt and r_psd:
        return PositivityBound(PositivityCase.ALL, None, lpt, lr)
    if ppt:
        if lpt <= tol:
            return PositivityBound(PositivityCase.NONE, None, lpt, lr, "lambda_min(rho^T_B) vanishes")
        return PositivityBound(PositivityCase.GE, -lr / lpt, lpt, lr)
    if r_psd:
        return PositivityBound(PositivityCase.LE, lr / abs(lpt), lpt, lr)
    return PositivityBound(PositivityCase.NONE, None, lpt, lr)


# =================== Choi Matrices ===================
MapFn = Callable[[np.ndarray, int, MapParams], np.ndarray]

# map id -> (action on a matrix, input dimension from d)
MAPS: Dict[str, Tuple[MapFn, Callable[[int], int]]] = {
    "phi": (lambda a, d, mp: _phi_raw(a, d, mp.alpha, mp.beta), lambda d: d * d),
    "partial_transpose": (lambda a, d, mp: partial_transpose(a, (d, d)), lambda d: d * d),
    "realign": (lambda a, d, mp: realign(a, (d, d)), lambda d: d * d),
    "transpose": (lambda a, d, mp: a.T.copy(), lambda d: d),
    "identity": (lambda a, d, mp: a.copy(), lambda d: d),
}


def choi_matrix(map_id: str, d: int, alpha: float = 1.0, beta: float = 1.0) -> ChoiMatrix:
    """Choi matrix sum_ij e_ij kron Phi(e_ij).

    Args:
        map_id: One of MAPS. Bipartite maps act on M_(d^2); "transpose" and
            "identity" act on M_d.
        d: Local dimension.
        alpha, beta: Weights of the "phi" map.
    """
    if map_id not in MAPS:
        raise InputError(f"Unknown map '{map_id}'; known: {', '.join(sorted(MAPS))}")
    d = int(d)
    if d < 1:
        raise DimensionError(f"Map dimension must be positive, got {d}")
    action, input_dim = MAPS[map_id]
    params = MapParams(alpha, beta)
    n = input_dim(d)
    matrix = sum(np.kron(_unit(n, i, j), action(_unit(n, i, j), d, params)) for i in range(n) for j in range(n))
    return ChoiMatrix(matrix=np.asarray(matrix, dtype=np.complex128), map_id=map_id, input_dim=n, params=params)


def _unit(n: int, i: int, j: int) -> np.ndarray:
    unit = np.zeros((n, n), dtype=np.complex128)
    unit[i, j] = 1.0
    return unit


# Hand-written 8 x 8 blocks of the Phi Choi matrix on 2 x 2: (row, col, weight of alpha, weight of beta)
_PRINTED_CHOI_BLOCKS: Dict[Tuple[int, int], List[Tuple[int, int, int, int]]] = {
    (0, 0): [(0, 0, 1, 1), (0, 5, 0, 1), (1, 4, 1, 0), (4, 1, 1, 0), (4, 2, 0, 1), (4, 7, 0, 1), (5, 5, 1, 0)],
    (0, 1): [(0, 2, 1, 0), (1, 0, 0, 1), (1, 5, 0, 1), (1, 6, 1, 0), (4, 3, 1, 0), (5, 2, 0, 1), (5, 7, 1, 1)],
    (1, 0): [(2, 0, 1, 1), (2, 5, 0, 1), (3, 4, 1, 0), (6, 1, 1, 0), (6, 2, 0, 1), (6, 7, 0, 1), (7, 5, 1, 0)],
    (1, 1): [(2, 2, 1, 0), (3, 0, 0, 1), (3, 5, 0, 1), (3, 6, 1, 0), (6, 3, 1, 0), (7, 2, 0, 1), (7, 7, 1, 1)],
}


def printed_choi_matrix(alpha: float, beta: float) -> np.ndarray:
    c = np.zeros((16, 16), dtype=np.complex128)
    for (bi, bj), entries in _PRINTED_CHOI_BLOCKS.items():
        for r, col, wa, wb in entries:
            c[8 * bi + r, 8 * bj + col] = wa * alpha + wb * beta
    return c


def choi_fixture_discrepancies(alpha: float, beta: float, tol: float = 1e-12) -> List[Dict[str, Any]]:
    """Entries where the hand-written Phi Choi blocks differ from the definitional construction."""
    computed = choi_matrix("phi", 2, alpha, beta).matrix
    printed = printed_choi_matrix(alpha, beta)
    rows, cols = np.nonzero(np.abs(computed - printed) > tol)
    found = [
        {"row": int(r), "col": int(c), "printed": complex(printed[r, c]), "computed": complex(computed[r, c])}
        for r, c in zip(rows, cols)
    ]
    if found:
        logger.warning(f"Printed Choi blocks differ from the definition in {len(found)} entries")
    return found


# =================== SPA of Realignment ===================
def spa_realign(rho: StateLike, p: float) -> np.ndarray:
    """p/d^2 I + (1 - p)/Tr[R] R, a unit-trace approximation of R(rho)."""
    state, d = _square_state(rho)
    params = MapParams(p=p)
    r, trace = _realignment_trace(state)
    return params.p / (d * d) * np.eye(d * d, dtype=np.complex128) + (1 - params.p) / trace * r


def spa_lower_p(rho: StateLike, exact: bool = False) -> float:
    """Smallest mixing p that keeps spa_realign(rho, p) positive.

    Returns 0 when the Descartes test finds R(rho) positive semidefinite;
    otherwise d^2 k / (Tr[R] + d^2 k) with k = -lambda_min(R), taken from the
    two-moment lower bound or, with `exact`, from the spectrum.
    """
    state, d = _square_state(rho)
    r, trace = _realignment_trace(state)
    if descartes_psd(r).psd:
        return 0.0
    if exact:
        lowest = float(eigvals_general(r).real.min())
    else:
        lowest = lambda_min_lb(r)
    k = max(0.0, -lowest)
    logger.debug(f"spa_lower_p: lambda_min={'exact' if exact else 'lb'} {lowest:.6g}, Tr[R]={trace:.6g}")
    if k == 0.0:
        return 0.0
    return d * d * k / (trace + d * d * k)


# =================== Three Qubits ===================
def spa_pt_qubit(rho: StateLike, part: Union[int, str] = "A") -> np.ndarray:
    """I/10 + rho^T_X / 5 on three qubits."""
    state = _three_qubit(rho)
    return np.eye(8, dtype=np.complex128) / 10 + partial_transpose(state.matrix, state.dims, part) / 5


def realign_via_swap(rho: StateLike) -> np.ndarray:
    state, d = _square_state(rho)
    p = swap_operator(d)
    return partial_transpose(state.matrix @ p, (d, d)) @ p


def tripartite_permutation() -> np.ndarray:
    """Q with columns (e_1, e_3, e_5, e_7, e_2, e_4, e_6, e_8) moved to 1..8."""
    q = np.zeros((8, 8), dtype=np.complex128)
    for c in range(8):
        q[4 * (c % 2) + c // 2, c] = 1.0
    return q


def _block_transpose(x: np.ndarray, size: int = 2) -> np.ndarray:
    n = x.shape[0] // size
    return x.reshape(n, size, n, size).transpose(0, 3, 2, 1).reshape(x.shape)


def realign_tripartite(rho: StateLike, method: str = "blocks") -> np.ndarray:
    """Three-qubit realignment.

    `blocks` lays out the column-major vec of each 2 x 2 block Z_IJ, two blocks
    per row; `permutation` evaluates (rho Q)^tau with tau the blockwise
    transpose. Both give R[(a, b, a'), (b', c', c)] = rho[(a, b, c), (a', b', c')].
    """
    state = _three_qubit(rho)
    m = state.matrix
    if method == "permutation":
        return _block_transpose(m @ tripartite_permutation())
    if method != "blocks":
        raise InputError(f"Unknown tripartite realignment method '{method}'")
    out = np.zeros((8, 8), dtype=np.complex128)
    for bi in range(4):
        for bj in range(4):
            block = m[2 * bi:2 * bi + 2, 2 * bj:2 * bj + 2]
            row = 2 * bi + bj // 2
            start = 4 * (bj % 2)
            out[row, start:start + 4] = block.reshape(-1, order="F")
    return out
