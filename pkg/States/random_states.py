"""
Seeded random states for property tests and sweeps.
"""

import os
import sys
from typing import Optional, Sequence

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import Config
from Kernel.matkit import DimSpec, projector
from States.statebank import DensityMatrix
from utils.errors import InputError


def _rng(rng: Optional[np.random.Generator]) -> np.random.Generator:
    return rng if rng is not None else np.random.default_rng(Config.DEFAULT_SEED)


def haar_pure_vector(dim: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Haar-uniform unit vector: a normalized complex Gaussian."""
    rng = _rng(rng)
    psi = rng.normal(size=(dim,)) + 1j * rng.normal(size=(dim,))
    return psi / np.linalg.norm(psi)


def haar_pure_state(dims: Sequence[int], rng: Optional[np.random.Generator] = None) -> DensityMatrix:
    spec = DimSpec.coerce(dims)
    return DensityMatrix(projector(haar_pure_vector(spec.order, rng)), spec, label="haar_pure")


def ginibre_mixed_state(
    dims: Sequence[int], rank: Optional[int] = None, rng: Optional[np.random.Generator] = None
) -> DensityMatrix:
    """Induced-measure mixed state G G^dagger / Tr, with G an n x rank Ginibre matrix.

    Args:
        dims: Subsystem dimensions.
        rank: Number of Ginibre columns; full rank by default.
        rng: numpy Generator; a Config.DEFAULT_SEED generator when omitted.
    """
    spec = DimSpec.coerce(dims)
    n = spec.order
    rank = n if rank is None else int(rank)
    if not 1 <= rank <= n:
        raise InputError(f"rank must lie in [1, {n}], got {rank}")
    rng = _rng(rng)
    g = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real, spec, label="ginibre_mixed")


def separable_mixture(
    dims: Sequence[int], terms: int = 4, rng: Optional[np.random.Generator] = None
) -> DensityMatrix:
    """Convex mixture of random pure product states."""
    spec = DimSpec.coerce(dims)
    rng = _rng(rng)
    weights = rng.dirichlet(np.ones(terms))
    rho = np.zeros((spec.order, spec.order), dtype=np.complex128)
    for w in weights:
        vector = np.ones(1, dtype=np.complex128)
        for d in spec.dims:
            vector = np.kron(vector, haar_pure_vector(d, rng))
        rho += w * projector(vector)
    return DensityMatrix(rho, spec, label="separable_mixture")
