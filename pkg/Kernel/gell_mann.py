"""
Generalized Gell-Mann operator basis and correlation matrices.
"""

import os
import sys
from typing import List

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from Kernel.matkit import ArrayLike, DimSpec, as_matrix, kron
from utils.errors import InputError

SUPPORTED_DIMS = (2, 3, 4)


def _check_dim(d: int) -> int:
    d = int(d)
    if d not in SUPPORTED_DIMS:
        raise InputError(f"Gell-Mann basis supported for d in {SUPPORTED_DIMS}, got {d}")
    return d


def symmetric_gell_mann(d: int) -> List[np.ndarray]:
    mats = []
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=np.complex128)
            m[j, k] = m[k, j] = 1.0
            mats.append(m)
    return mats


def antisymmetric_gell_mann(d: int) -> List[np.ndarray]:
    mats = []
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=np.complex128)
            m[j, k] = -1j
            m[k, j] = 1j
            mats.append(m)
    return mats


def diagonal_gell_mann(d: int) -> List[np.ndarray]:
    mats = []
    for l in range(1, d):
        diag = np.zeros(d, dtype=np.complex128)
        diag[:l] = 1.0
        diag[l] = -l
        mats.append(np.sqrt(2.0 / (l * (l + 1))) * np.diag(diag))
    return mats


def gell_mann_matrices(d: int) -> List[np.ndarray]:
    """The d^2 - 1 traceless matrices with Tr[L_i L_j] = 2 delta_ij.

    Ordered symmetric, antisymmetric, diagonal. For d = 2 this is
    (sigma_x, sigma_y, sigma_z).
    """
    d = _check_dim(d)
    return symmetric_gell_mann(d) + antisymmetric_gell_mann(d) + diagonal_gell_mann(d)


def gell_mann_basis(d: int, normalized: bool = True) -> List[np.ndarray]:
    """Identity element followed by the traceless Gell-Mann matrices.

    Args:
        d: Local dimension, one of 2, 3, 4.
        normalized: If True return the orthonormal set G_0 = I/sqrt(d), G_i = L_i/sqrt(2)
            (Tr[G_i G_j] = delta_ij); otherwise I and the raw L_i.

    Returns:
        List of d^2 Hermitian d x d matrices.
    """
    traceless = gell_mann_matrices(d)
    identity = np.eye(d, dtype=np.complex128)
    if not normalized:
        return [identity] + traceless
    return [identity / np.sqrt(d)] + [m / np.sqrt(2.0) for m in traceless]


def correlation_matrix(rho: ArrayLike, dims) -> np.ndarray:
    """C_ab = Tr[rho (G_a kron G_b)] in the orthonormal bases of both parties."""
    spec = DimSpec.coerce(dims)
    d_a, d_b = spec.bipartite()
    m = as_matrix(rho, "rho")
    spec.check(m, "rho")
    basis_a = gell_mann_basis(d_a)
    basis_b = gell_mann_basis(d_b)
    c = np.zeros((d_a * d_a, d_b * d_b))
    for a, g_a in enumerate(basis_a):
        for b, g_b in enumerate(basis_b):
            c[a, b] = float(np.real(np.trace(m @ kron(g_a, g_b))))
    return c


def bloch_correlation_tensor(rho: ArrayLike, dims) -> np.ndarray:
    """t_ij with rho = (I + ... + sum t_ij L_i kron L_j) / (d_A d_B); i, j >= 1."""
    spec = DimSpec.coerce(dims)
    d_a, d_b = spec.bipartite()
    m = as_matrix(rho, "rho")
    spec.check(m, "rho")
    la = gell_mann_matrices(d_a)
    lb = gell_mann_matrices(d_b)
    t = np.zeros((len(la), len(lb)))
    for i, l_i in enumerate(la):
        for j, l_j in enumerate(lb):
            t[i, j] = d_a * d_b / 4.0 * float(np.real(np.trace(m @ kron(l_i, l_j))))
    return t
