"""
Raw constructors for the catalog of density-matrix families.

Each function returns a dense complex128 matrix and performs no range or
validity checks; `States.statebank.make_state` is the checked entry point.
"""

import os
import sys
from typing import List

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from Kernel.gell_mann import gell_mann_matrices
from Kernel.matkit import ket, kron_all, projector
from utils.errors import InputError

SQRT2 = np.sqrt(2.0)

# 4x4 family at the parameters where it is PPT and bound entangled
BES4X4_P0 = (SQRT2 - 1) / (2 * SQRT2)
BES4X4_Q0 = (SQRT2 - 1) / 2

# npt3x3 parameter interval
NPT3X3_A_MIN = (25 - np.sqrt(141)) / 50
NPT3X3_A_MAX = (25 + np.sqrt(141)) / 100


def _basis(d: int, *labels: int) -> np.ndarray:
    """Ket |l1 l2 ...> over local dimension d."""
    return ket("".join(str(l) for l in labels), d)


# =================== Qubit Pairs ===================
def bell_vector(index: int = 0) -> np.ndarray:
    """phi+, phi-, psi+, psi- for index 0..3."""
    vectors = {
        0: _basis(2, 0, 0) + _basis(2, 1, 1),
        1: _basis(2, 0, 0) - _basis(2, 1, 1),
        2: _basis(2, 0, 1) + _basis(2, 1, 0),
        3: _basis(2, 0, 1) - _basis(2, 1, 0),
    }
    if int(index) not in vectors:
        raise InputError(f"Bell index must be 0..3, got {index}")
    return vectors[int(index)] / SQRT2


def bell(index: int = 0) -> np.ndarray:
    return projector(bell_vector(index))


def iso2(f: float) -> np.ndarray:
    """Two-qubit isotropic state with singlet fraction f."""
    return (1 - f) / 3 * np.eye(4, dtype=np.complex128) + (4 * f - 1) / 3 * bell(2)


def rudolph_st(s: float, t: float) -> np.ndarray:
    rho = np.zeros((4, 4), dtype=np.complex128)
    rho[0, 0] = 5 / 8
    rho[2, 2] = (s - 0.25) / 2
    rho[3, 3] = (1 - s) / 2
    rho[0, 3] = rho[3, 0] = t / 2
    return rho


def rho_t(t: float) -> np.ndarray:
    """The s = 1/2 slice of rudolph_st."""
    return rudolph_st(0.5, t)


def mixed_marginals(t1: float, t2: float, t3: float) -> np.ndarray:
    """(I + sum_j t_j sigma_j kron sigma_j) / 4."""
    rho = np.eye(4, dtype=np.complex128)
    for t, sigma in zip((t1, t2, t3), gell_mann_matrices(2)):
        rho = rho + t * np.kron(sigma, sigma)
    return rho / 4


def rho12() -> np.ndarray:
    return np.array(
        [
            [13 / 30, 0, 0, 11 / 30],
            [0, 1 / 15, 0, 0],
            [0, 0, 1 / 15, 0],
            [11 / 30, 0, 0, 13 / 30],
        ],
        dtype=np.complex128,
    )


def rho12_alt() -> np.ndarray:
    return np.array(
        [
            [11 / 30, 0, 0, 7 / 30],
            [0, 2 / 15, 0, 0],
            [0, 0, 2 / 15, 0],
            [7 / 30, 0, 0, 11 / 30],
        ],
        dtype=np.complex128,
    )


def maximally_mixed(d1: int, d2: int) -> np.ndarray:
    n = int(d1) * int(d2)
    return np.eye(n, dtype=np.complex128) / n


def two_param_2xn(n: int, alpha: float, gamma: float) -> np.ndarray:
    """2 x n family; beta is fixed by normalization."""
    n = int(n)
    beta = (1 - 2 * (n - 2) * alpha - gamma) / 3

    def lift(v2: np.ndarray) -> np.ndarray:
        # embed a two-qubit vector into C^2 kron C^n
        out = np.zeros(2 * n, dtype=np.complex128)
        for i in range(2):
            for j in range(2):
                out[i * n + j] = v2[2 * i + j]
        return out

    rho = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    for i in range(2):
        for j in range(2, n):
            rho[i * n + j, i * n + j] = alpha
    for index in (0, 1, 2):
        rho += beta * projector(lift(bell_vector(index)))
    rho += gamma * projector(lift(bell_vector(3)))
    return rho


# =================== Qutrit Pairs ===================
def _phi_plus(d: int) -> np.ndarray:
    v = sum(_basis(d, i, i) for i in range(d))
    return v / np.sqrt(d)


def iso3(f: float) -> np.ndarray:
    """3x3 isotropic state, fidelity f with the maximally entangled state."""
    return (1 - f) / 8 * np.eye(9, dtype=np.complex128) + (9 * f - 1) / 8 * projector(_phi_plus(3))


def iso3_beta(beta: float) -> np.ndarray:
    return beta * projector(_phi_plus(3)) + (1 - beta) / 9 * np.eye(9, dtype=np.complex128)


def horodecki_a(a: float) -> np.ndarray:
    rho = np.zeros((9, 9), dtype=np.complex128)
    for i in range(9):
        rho[i, i] = a
    rho[6, 6] = rho[8, 8] = (1 + a) / 2
    for i, j in ((0, 4), (0, 8), (4, 8)):
        rho[i, j] = rho[j, i] = a
    rho[6, 8] = rho[8, 6] = np.sqrt(1 - a * a) / 2
    return rho / (8 * a + 1)


def horodecki_alpha(alpha: float) -> np.ndarray:
    sigma_plus = sum(projector(_basis(3, i, j)) for i, j in ((0, 1), (1, 2), (2, 0))) / 3
    sigma_minus = sum(projector(_basis(3, i, j)) for i, j in ((1, 0), (2, 1), (0, 2))) / 3
    return 2 / 7 * projector(_phi_plus(3)) + alpha / 7 * sigma_plus + (5 - alpha) / 7 * sigma_minus


def upb_vectors() -> List[np.ndarray]:
    """Five product vectors of the tiles unextendible product basis."""
    e = [ket(str(i), 3) for i in range(3)]
    return [
        np.kron(e[0], e[0] - e[1]) / SQRT2,
        np.kron(e[0] - e[1], e[2]) / SQRT2,
        np.kron(e[2], e[1] - e[2]) / SQRT2,
        np.kron(e[1] - e[2], e[0]) / SQRT2,
        np.kron(e[0] + e[1] + e[2], e[0] + e[1] + e[2]) / 3,
    ]


def upb_tiles() -> np.ndarray:
    rho = np.eye(9, dtype=np.complex128)
    for v in upb_vectors():
        rho -= projector(v)
    return rho / 4


def upb_mixture(i: int, gamma: float) -> np.ndarray:
    """gamma |psi_i><psi_i| + (1 - gamma) rho_UPB, i in 1..5."""
    psi = upb_vectors()[int(i) - 1]
    return gamma * projector(psi) + (1 - gamma) * upb_tiles()


def npt3x3(a: float) -> np.ndarray:
    rho = np.zeros((9, 9), dtype=np.complex128)
    rho[0, 0] = (1 - a) / 2
    rho[4, 4] = 0.5 - a
    rho[5, 5] = a
    rho[8, 8] = a / 2
    for i, j in ((0, 8), (4, 5)):
        rho[i, j] = rho[j, i] = -11 / 50
    return rho


def qutrit_mu(mu: float) -> np.ndarray:
    states = [_basis(3, 0, i) - mu * _basis(3, i, 0) for i in (1, 2)]
    states.append(sum(_basis(3, i, i) for i in range(3)))
    return sum(projector(v) for v in states) / (5 + 2 * mu * mu)


def eps3x3(eps: float) -> np.ndarray:
    diag = [1, eps ** -2, eps ** 2, eps ** 2, 1, eps ** -2, eps ** -2, eps ** 2, 1]
    rho = np.diag(np.asarray(diag, dtype=np.complex128))
    for i, j in ((0, 4), (0, 8), (4, 8), (1, 3), (2, 6), (5, 7)):
        rho[i, j] = rho[j, i] = 1.0
    return rho / (3 * (1 + eps ** 2 + eps ** -2))


def bihalan_be() -> np.ndarray:
    root5 = np.sqrt(5.0)
    den = 3 + 9 * root5
    a, b, c = (1 + root5) / den, -2 / den, (-1 + root5) / den
    rho = np.diag(np.asarray([a, c, a, a, a, c, c, a, a], dtype=np.complex128))
    for i, j in ((0, 4), (0, 8), (5, 7)):
        rho[i, j] = rho[j, i] = b
    return rho


# =================== Ququart Pairs ===================
def _omega_vectors() -> List[np.ndarray]:
    k = lambda i, j: _basis(4, i, j)  # noqa: E731
    return [
        (k(0, 1) + k(2, 3)) / SQRT2,
        (k(1, 0) + k(3, 2)) / SQRT2,
        (k(1, 1) + k(2, 2)) / SQRT2,
        (k(0, 0) - k(3, 3)) / SQRT2,
        (k(0, 3) + k(1, 2)) / 2 + k(2, 1) / SQRT2,
        (-k(0, 3) + k(1, 2)) / 2 + k(3, 0) / SQRT2,
    ]


def bes4x4(p: float, q: float) -> np.ndarray:
    """p sum_{1..4} |w_i><w_i| + q sum_{5,6} |w_i><w_i| with 4p + 2q = 1."""
    omegas = _omega_vectors()
    rho = sum(p * projector(w) for w in omegas[:4])
    return rho + sum(q * projector(w) for w in omegas[4:])


def bes4x4_noisy(lam: float) -> np.ndarray:
    return lam * bes4x4(BES4X4_P0, BES4X4_Q0) + (1 - lam) / 16 * np.eye(16, dtype=np.complex128)


def kye_zpr(theta: float, p: float, r: float) -> np.ndarray:
    """Kye-type 4x4 family at z = exp(i theta), assembled from its 4x4 blocks."""
    z = np.exp(1j * theta)
    zc = np.conj(z)
    two_re = z + zc
    blocks = [[np.zeros((4, 4), dtype=np.complex128) for _ in range(4)] for _ in range(4)]
    blocks[0][0] = np.diag([two_re, 1 / p, p, r / p + r])
    blocks[1][1] = np.diag([p, two_re, r / p + r, 1 / p])
    blocks[2][2] = np.diag([1 / p, r * p + r, two_re, p])
    blocks[3][3] = np.diag([r * p + r, p, 1 / p, two_re])
    blocks[0][1][0, 1], blocks[0][1][2, 3] = -z, -r
    blocks[0][2][0, 2], blocks[0][2][1, 3] = -zc, -r * z
    blocks[1][3][0, 2], blocks[1][3][1, 3] = -r * z, -z
    blocks[2][3][0, 1], blocks[2][3][2, 3] = -r, -zc
    for i in range(4):
        for j in range(i):
            blocks[i][j] = blocks[j][i].conj().T
    norm = 4 / p + 4 * p + 4 * r + 2 * r / p + 2 * p * r + 8 * np.real(z)
    return np.block(blocks) / norm


def kye(r: float) -> np.ndarray:
    return kye_zpr(0.0, 1.0, r)


# =================== Three Qubits ===================
def acin_abc(a: float, b: float, c: float) -> np.ndarray:
    rho = np.diag(np.asarray([1, a, b, c, 1 / c, 1 / b, 1 / a, 1], dtype=np.complex128))
    rho[0, 7] = rho[7, 0] = 1.0
    return rho / (2 + a + b + c + 1 / a + 1 / b + 1 / c)


def mub3(p1: float, p3: float) -> np.ndarray:
    """Three-qubit family with p2 = 1 - p1 - 3 p3."""
    p2 = 1 - p1 - 3 * p3
    r1 = p1 + p2 - p3
    r4 = p1 - p2 + 3 * p3
    r5 = -p1 + p2 + p3
    sx, sy, sz = gell_mann_matrices(2)
    i2 = np.eye(2, dtype=np.complex128)
    rho = kron_all([i2, i2, i2])
    rho = rho + r1 * (kron_all([sz, sz, i2]) + kron_all([sz, i2, sz]) + kron_all([i2, sz, sz]))
    rho = rho + r4 * kron_all([sx, sx, sx])
    rho = rho + r5 * (kron_all([sx, sy, sy]) + kron_all([sy, sx, sy]) + kron_all([sy, sy, sx]))
    return rho / 8


def product_ket_state(label: str, d: int = 2) -> np.ndarray:
    """Projector onto a computational basis product state such as '000'."""
    return projector(ket(label, d))
