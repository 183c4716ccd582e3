"""
Entanglement witnesses.

    choi   O - gamma I with O = C C^dagger of the Phi Choi matrix (4 x 4 targets)
    det    determinant witness built from one eigenvector of the target
    wo     realignment witness normalised by sigma_max(rho^T_B)
    wn     n-th power family interpolating between det and wo
    pt     partial transpose of the negative eigenprojector of rho^T_B

Every family except pt depends on the target it is built on; for a separable
target sigma, Tr[W sigma] >= 0, so Tr[W rho] < 0 on its own target flags rho
as entangled.
"""

import math
import os
import sys
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Union

import numpy as np
from loguru import logger

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import Config
from Kernel.matkit import (
    ArrayLike,
    DimSpec,
    eig_hermitian,
    eigh_pairs,
    frobenius_norm,
    hermitian_defect,
    operator_norm,
    partial_trace,
    partial_transpose,
    projector,
    realign,
    svd_values,
)
from Maps.qmaps import choi_matrix
from States.random_states import separable_mixture
from States.statebank import DensityMatrix, as_state
from utils.errors import DimensionError, DomainError, InputError, ParameterRangeError

StateLike = Union[DensityMatrix, ArrayLike]


class WitnessFamily(str, Enum):
    CHOI = "choi"
    DET = "det"
    WO = "wo"
    WN = "wn"
    PT = "pt"


# =================== Data Structures ===================
@dataclass
class WitnessOperator:
    """Hermitian operator plus the construction that produced it."""

    matrix: np.ndarray
    dims: DimSpec
    family: WitnessFamily
    params: Dict[str, float] = field(default_factory=dict)
    target_label: str = ""
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.dims = DimSpec.coerce(self.dims)
        self.family = WitnessFamily(self.family)
        self.dims.check(self.matrix, f"{self.family.value} witness")

    @property
    def hermitian_defect(self) -> float:
        return hermitian_defect(self.matrix)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family.value,
            "dims": self.dims.to_list(),
            "params": dict(self.params),
            "target_label": self.target_label,
            "metadata": dict(self.metadata),
            "entries": [[float(z.real), float(z.imag)] for z in self.matrix.reshape(-1)],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "WitnessOperator":
        try:
            dims = DimSpec.coerce(data["dims"])
            entries = np.asarray(data["entries"], dtype=float)
            family = WitnessFamily(data["family"])
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(f"Malformed witness record: {e}") from e
        if entries.shape != (dims.order * dims.order, 2):
            raise InputError(f"Witness record needs {dims.order ** 2} [re, im] pairs, got shape {entries.shape}")
        matrix = (entries[:, 0] + 1j * entries[:, 1]).reshape(dims.order, dims.order)
        return cls(
            matrix=matrix,
            dims=dims,
            family=family,
            params=dict(data.get("params", {})),
            target_label=data.get("target_label", ""),
            metadata=dict(data.get("metadata", {})),
        )


def _hermitize(w: np.ndarray, name: str) -> np.ndarray:
    """Symmetrize only when the anti-Hermitian residue exceeds Config.WITNESS_RESIDUE_TOL."""
    residue = hermitian_defect(w)
    if residue > Config.WITNESS_RESIDUE_TOL:
        logger.warning(f"{name}: anti-Hermitian residue {residue:.3e}, symmetrizing")
        return 0.5 * (w + w.conj().T)
    logger.debug(f"{name}: anti-Hermitian residue {residue:.3e}")
    return w


def _square_target(target: StateLike, name: str) -> DensityMatrix:
    state = as_state(target)
    d1, d2 = state.dims.bipartite()
    if d1 != d2:
        raise DimensionError(f"{name} needs a d x d target, got dims {state.dims.dims}")
    return state


# =================== Determinant Quantities ===================
def det_one_plus(rho: ArrayLike) -> float:
    """det(I + rho) as prod(1 + lambda_i) over the Hermitian spectrum."""
    return float(np.prod(1.0 + eig_hermitian(rho, symmetrize=True).values))


def determinant_gap(rho: StateLike) -> float:
    """k = det(I + rho) - det(I + Tr_A rho); |k| < 1 for every state, k >= 0 for PPT states."""
    state = as_state(rho)
    return det_one_plus(state.matrix) - det_one_plus(partial_trace(state.matrix, state.dims, 1))


@dataclass
class RealignmentData:
    """Realignment quantities shared by the wo and wn witnesses."""

    r_pt: np.ndarray
    sigma_max: float
    trace_norm: float
    frobenius: float
    rank: int

    @property
    def offset(self) -> float:
        """(1 - ||R||_1) / (sqrt(rank) ||R||_2)."""
        return (1.0 - self.trace_norm) / (math.sqrt(self.rank) * self.frobenius)


def realignment_data(rho: StateLike) -> RealignmentData:
    state = _square_target(rho, "realignment witness")
    r = realign(state.matrix, state.dims)
    summary = svd_values(r)
    if summary.rank == 0:
        raise DomainError("Realigned target is zero")
    sigma_max = operator_norm(partial_transpose(state.matrix, state.dims))
    logger.debug(f"realignment_data: rank {summary.rank} at tolerance {summary.tolerance:.3e}, sigma_max {sigma_max:.6g}")
    return RealignmentData(
        r_pt=partial_transpose(r, state.dims),
        sigma_max=sigma_max,
        trace_norm=float(np.sum(summary.values)),
        frobenius=frobenius_norm(r),
        rank=summary.rank,
    )


# =================== Witness Families ===================
def choi_witness(alpha: float, beta: float, target: StateLike) -> WitnessOperator:
    """W = C C^dagger - gamma I for 4 x 4 targets.

    With O = C C^dagger = [[A, B], [B^dagger, D]] and the target's upper-right
    8 x 8 block Y, gamma = 2 (Re Tr[B Y^dagger] + Tr[A] ||Y||_2).
    """
    if alpha <= 0 or beta <= 0:
        raise ParameterRangeError(f"choi witness needs alpha, beta > 0, got ({alpha}, {beta})")
    state = as_state(target)
    if state.dims.dims != (4, 4):
        raise DimensionError(f"choi witness is defined for 4 x 4 targets, got dims {state.dims.dims}")
    c = choi_matrix("phi", 2, alpha, beta).matrix
    o = c @ c.conj().T
    a, b = o[:8, :8], o[:8, 8:]
    y = state.matrix[:8, 8:]
    gamma = 2 * (float(np.trace(b @ y.conj().T).real) + float(np.trace(a).real) * frobenius_norm(y))
    logger.debug(f"choi_witness: gamma {gamma:.10g} for alpha={alpha}, beta={beta}")
    return WitnessOperator(
        matrix=_hermitize(o - gamma * np.eye(16), "choi_witness"),
        dims=(4, 4),
        family=WitnessFamily.CHOI,
        params={"alpha": float(alpha), "beta": float(beta), "gamma": gamma},
        target_label=state.label,
    )


def det_witness(target: StateLike, eigen_index: int = 0) -> WitnessOperator:
    """det(I + rho)/lambda |psi><psi| - det(I + Tr_A rho) I.

    |psi> is the eigenvector of the eigen_index-th largest eigenvalue; 0 picks
    the largest one, ties resolved by the solver's order.
    """
    state = as_state(target)
    w, v = eigh_pairs(state.matrix)
    order = np.argsort(-w, kind="stable")
    if not 0 <= eigen_index < len(order):
        raise InputError(f"eigen_index must lie in [0, {len(order) - 1}], got {eigen_index}")
    idx = int(order[eigen_index])
    lam = float(w[idx])
    tol = Config.rank_tol() * max(1.0, float(np.max(np.abs(w))))
    if lam <= tol:
        raise DomainError(f"Eigenvalue {lam:.3e} at index {eigen_index} is not positive")
    psi = v[:, idx]
    upper = det_one_plus(state.matrix)
    lower = det_one_plus(partial_trace(state.matrix, state.dims, 1))
    matrix = upper / lam * projector(psi) - lower * np.eye(state.order)
    return WitnessOperator(
        matrix=matrix,
        dims=state.dims,
        family=WitnessFamily.DET,
        params={"eigen_index": eigen_index, "eigenvalue": lam},
        target_label=state.label,
        metadata={"det_i_plus_rho": upper, "det_i_plus_rho_b": lower},
    )


def wo_witness(target: StateLike) -> WitnessOperator:
    """(1 + (1 - ||R||_1)/(sqrt(rank) ||R||_2)) I - R^T_B / sigma_max(rho^T_B)."""
    state = _square_target(target, "wo witness")
    data = realignment_data(state)
    matrix = (1.0 + data.offset) * np.eye(state.order) - data.r_pt / data.sigma_max
    return WitnessOperator(
        matrix=_hermitize(matrix, "wo_witness"),
        dims=state.dims,
        family=WitnessFamily.WO,
        params={"sigma_max": data.sigma_max, "rank": data.rank},
        target_label=state.label,
    )


def wn_witness(n: int, target: StateLike) -> WitnessOperator:
    """d/(d-1) [k^n (I - R^T_B/sigma_max) + (1 - ||R||_1)/(sqrt(rank) ||R||_2) I]."""
    if int(n) != n or n < 1:
        raise InputError(f"n must be a positive integer, got {n}")
    n = int(n)
    state = _square_target(target, "wn witness")
    d, _ = state.dims.bipartite()
    data = realignment_data(state)
    k = determinant_gap(state)
    identity = np.eye(state.order)
    matrix = d / (d - 1) * (k ** n * (identity - data.r_pt / data.sigma_max) + data.offset * identity)
    return WitnessOperator(
        matrix=_hermitize(matrix, "wn_witness"),
        dims=state.dims,
        family=WitnessFamily.WN,
        params={"n": n, "k": k, "sigma_max": data.sigma_max, "rank": data.rank},
        target_label=state.label,
    )


def pt_witness(target: StateLike) -> WitnessOperator:
    """(|v><v|)^T_B with v the eigenvector of lambda_min(rho^T_B)."""
    state = as_state(target)
    w, v = eigh_pairs(partial_transpose(state.matrix, state.dims))
    matrix = partial_transpose(projector(v[:, 0]), state.dims)
    return WitnessOperator(
        matrix=matrix,
        dims=state.dims,
        family=WitnessFamily.PT,
        params={"lambda_min": float(w[0])},
        target_label=state.label,
    )


def build_witness(family: str, target: StateLike, n: int = 1, alpha: float = 1.0, beta: float = 1.0) -> WitnessOperator:
    """Dispatch on a family id."""
    try:
        family = WitnessFamily(family)
    except ValueError:
        raise InputError(f"Unknown witness family '{family}'; known: {', '.join(f.value for f in WitnessFamily)}")
    if family is WitnessFamily.CHOI:
        return choi_witness(alpha, beta, target)
    if family is WitnessFamily.DET:
        return det_witness(target)
    if family is WitnessFamily.WO:
        return wo_witness(target)
    if family is WitnessFamily.WN:
        return wn_witness(n, target)
    return pt_witness(target)


# =================== Evaluation ===================
def witness_expectation(w: WitnessOperator, rho: StateLike) -> float:
    """Tr[W rho]."""
    state = as_state(rho, dims=w.dims.dims)
    if state.order != w.dims.order:
        raise DimensionError(f"Witness of order {w.dims.order} cannot act on a state of order {state.order}")
    value = complex(np.trace(w.matrix @ state.matrix))
    if abs(value.imag) > Config.WITNESS_RESIDUE_TOL * max(1.0, abs(value.real)):
        logger.warning(f"witness_expectation: imaginary residue {value.imag:.3e} dropped")
    return float(value.real)


def separable_floor(
    family: str,
    dims=(3, 3),
    samples: int = 50,
    rng: Optional[np.random.Generator] = None,
    n: int = 1,
    alpha: float = 1.0,
    beta: float = 1.0,
) -> float:
    """Smallest Tr[W(sigma) sigma] over random separable mixtures sigma.

    Every family except pt depends on its target, so each sample gets the
    witness built on itself.
    """
    rng = np.random.default_rng(Config.DEFAULT_SEED) if rng is None else rng
    values = []
    for _ in range(samples):
        sigma = separable_mixture(dims, terms=4, rng=rng)
        values.append(witness_expectation(build_witness(family, sigma, n=n, alpha=alpha, beta=beta), sigma))
    floor = min(values)
    logger.debug(f"separable_floor({family}): {floor:.6g} over {samples} samples")
    return floor
