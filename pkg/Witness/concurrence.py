"""
Concurrence: exact two-qubit value, pure-state value and mixed-state lower bounds.
"""

import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional, Union

import numpy as np
from loguru import logger

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import Config
from Kernel.matkit import (
    ArrayLike,
    DimSpec,
    eigvals_general,
    partial_transpose,
    realign,
    svd_values,
    trace_norm,
)
from Moments.moments import first_moment_via_swap
from States.statebank import DensityMatrix, as_state
from utils.errors import DimensionError, InputError
from Witness.witness import determinant_gap, realignment_data, witness_expectation, wn_witness

StateLike = Union[DensityMatrix, ArrayLike]

SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)


# =================== Data Structures ===================
@dataclass
class ConcurrenceBounds:
    c_min: float
    phi_wn: Dict[int, float] = field(default_factory=dict)
    phi_limit: Optional[float] = None
    swap_lb: Optional[float] = None
    k_rho: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "c_min": self.c_min,
            "phi_wn": {str(n): v for n, v in self.phi_wn.items()},
            "phi_limit": self.phi_limit,
            "swap_lb": self.swap_lb,
            "k_rho": self.k_rho,
        }


@dataclass
class SchmidtDecomposition:
    coefficients: np.ndarray
    rank: int
    left: np.ndarray
    right: np.ndarray

    @property
    def entangled(self) -> bool:
        return self.rank > 1


# =================== Lower Bounds ===================
def c_min(rho: StateLike) -> float:
    """(max(||rho^T_A||_1, ||R||_1) - 1) / (m - 1) with m = min(d1, d2)."""
    state = as_state(rho)
    m = min(state.dims.bipartite())
    pt_norm = trace_norm(partial_transpose(state.matrix, state.dims, 0))
    r_norm = trace_norm(realign(state.matrix, state.dims))
    return (max(pt_norm, r_norm) - 1.0) / (m - 1)


def phi_limit(rho: StateLike) -> float:
    """d/(d-1) (||R||_1 - 1) / (sqrt(rank) ||R||_2), the large-n limit of -Tr[W_n rho]."""
    state = as_state(rho)
    d, _ = state.dims.bipartite()
    data = realignment_data(state)
    return -d / (d - 1) * data.offset


def swap_lower_bound(rho: StateLike) -> float:
    """sqrt(2/(d(d-1))) (Tr[rho P^T_B] - 1)."""
    state = as_state(rho)
    d, _ = state.dims.bipartite()
    return math.sqrt(2.0 / (d * (d - 1))) * (first_moment_via_swap(state) - 1.0)


def concurrence_bounds(rho: StateLike, n_list: Iterable[int] = (1, 2, 3, 4, 5)) -> ConcurrenceBounds:
    """C_min for any bipartite state; the W_n, limit and SWAP bounds only for d x d states."""
    state = as_state(rho)
    d1, d2 = state.dims.bipartite()
    bounds = ConcurrenceBounds(c_min=c_min(state))
    if d1 != d2:
        logger.debug(f"concurrence_bounds: dims {state.dims.dims} are not square, only C_min computed")
        return bounds
    bounds.phi_wn = {int(n): -witness_expectation(wn_witness(n, state), state) for n in n_list}
    bounds.phi_limit = phi_limit(state)
    bounds.swap_lb = swap_lower_bound(state)
    bounds.k_rho = determinant_gap(state)
    return bounds


# =================== Exact Values ===================
def wootters_concurrence(rho: StateLike) -> float:
    """max(0, s1 - s2 - s3 - s4) with s_i the descending square roots of spec(rho rho~)."""
    state = as_state(rho)
    if state.dims.dims != (2, 2):
        raise DimensionError(f"Wootters concurrence needs a 2 x 2 state, got dims {state.dims.dims}")
    flip = np.kron(SIGMA_Y, SIGMA_Y)
    tilde = flip @ state.matrix.conj() @ flip
    w = eigvals_general(state.matrix @ tilde)
    s = np.sort(np.sqrt(np.clip(w.real, 0.0, None)))[::-1]
    return float(max(0.0, s[0] - s[1] - s[2] - s[3]))


def schmidt_decompose(psi: ArrayLike, dims) -> SchmidtDecomposition:
    """Schmidt coefficients (descending), rank and local bases of a pure bipartite vector."""
    spec = DimSpec.coerce(dims)
    d1, d2 = spec.bipartite()
    v = np.asarray(psi, dtype=np.complex128).reshape(-1)
    if v.size != spec.order:
        raise DimensionError(f"Vector of length {v.size} does not match dims {spec.dims}")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > Config.TRACE_TOL:
        raise InputError(f"Schmidt decomposition needs a normalized vector, got norm {norm:.12g}")
    u, s, vh = np.linalg.svd(v.reshape(d1, d2))
    rank = svd_values(v.reshape(d1, d2)).rank
    return SchmidtDecomposition(coefficients=s, rank=rank, left=u, right=vh.T)


def pure_concurrence(psi: ArrayLike, dims) -> float:
    """sqrt(2 (1 - Tr rho_A^2)) = sqrt(2 (1 - sum lambda_i^4)) over Schmidt coefficients."""
    coeffs = schmidt_decompose(psi, dims).coefficients
    return math.sqrt(max(0.0, 2.0 * (1.0 - float(np.sum(coeffs ** 4)))))
