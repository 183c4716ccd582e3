import numpy as np
import pytest

from Kernel.gell_mann import (
    bloch_correlation_tensor,
    correlation_matrix,
    gell_mann_basis,
    gell_mann_matrices,
)
from Kernel.matkit import realign, svd_values
from utils.errors import InputError


@pytest.mark.parametrize("d", [2, 3, 4])
def test_gell_mann_orthogonality(d):
    mats = gell_mann_matrices(d)
    assert len(mats) == d * d - 1
    gram = np.array([[np.trace(a @ b) for b in mats] for a in mats])
    np.testing.assert_allclose(gram, 2 * np.eye(d * d - 1), atol=1e-12)
    for m in mats:
        assert abs(np.trace(m)) < 1e-12
        np.testing.assert_allclose(m, m.conj().T)


def test_qubit_basis_is_pauli():
    sx, sy, sz = gell_mann_matrices(2)
    np.testing.assert_allclose(sx, [[0, 1], [1, 0]])
    np.testing.assert_allclose(sy, [[0, -1j], [1j, 0]])
    np.testing.assert_allclose(sz, [[1, 0], [0, -1]])


def test_unsupported_dimension():
    with pytest.raises(InputError):
        gell_mann_matrices(5)


@pytest.mark.parametrize("d", [2, 3])
def test_normalized_basis_is_orthonormal(d):
    basis = gell_mann_basis(d)
    gram = np.array([[np.trace(a @ b) for b in basis] for a in basis])
    np.testing.assert_allclose(gram, np.eye(d * d), atol=1e-12)


def test_correlation_matrix_singular_values_match_realignment(rng):
    g = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    rho = g @ g.conj().T
    rho /= np.trace(rho)
    c = correlation_matrix(rho, (3, 3))
    np.testing.assert_allclose(
        svd_values(c).values, svd_values(realign(rho, (3, 3))).values, atol=1e-12
    )


def test_bloch_tensor_of_bell_state(phi_plus):
    t = bloch_correlation_tensor(phi_plus, (2, 2))
    np.testing.assert_allclose(t, np.diag([1.0, -1.0, 1.0]), atol=1e-12)
