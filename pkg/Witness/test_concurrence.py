import math

import numpy as np
import pytest

from Kernel.matkit import kron, projector, realign, svd_values
from States import catalog
from States.random_states import ginibre_mixed_state, haar_pure_vector
from States.statebank import make_state
from utils.errors import DimensionError, InputError
from Witness.concurrence import (
    c_min,
    concurrence_bounds,
    phi_limit,
    pure_concurrence,
    schmidt_decompose,
    swap_lower_bound,
    wootters_concurrence,
)

SIGMA_Y = np.array([[0, -1j], [1j, 0]])


def brute_force_concurrence(rho):
    flip = np.kron(SIGMA_Y, SIGMA_Y)
    w = np.linalg.eigvals(rho @ flip @ rho.conj() @ flip)
    s = np.sort(np.sqrt(np.abs(w.real)))[::-1]
    return max(0.0, s[0] - s[1] - s[2] - s[3])


# =================== Wootters ===================
def test_wootters_bell_and_product(phi_plus):
    assert wootters_concurrence(phi_plus) == pytest.approx(1.0)
    assert wootters_concurrence(kron(projector([1, 0]), projector([0, 1]))) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("f", [0.2, 0.5, 0.6, 0.8, 0.95])
def test_wootters_on_iso2(f):
    rho = catalog.iso2(f)
    assert wootters_concurrence(rho) == pytest.approx(max(0.0, 2 * f - 1), abs=1e-7)
    assert wootters_concurrence(rho) == pytest.approx(brute_force_concurrence(rho), abs=1e-7)


def test_wootters_needs_two_qubits():
    with pytest.raises(DimensionError):
        wootters_concurrence(make_state("iso3"))


def test_wootters_dominates_trace_norm_bounds(rng):
    for _ in range(200):
        rho = ginibre_mixed_state((2, 2), rng=rng)
        exact = wootters_concurrence(rho)
        assert c_min(rho) <= exact + 1e-9
        assert swap_lower_bound(rho) <= exact + 1e-9


def test_entangled_two_qubit_states_have_full_realigned_rank(rng):
    checked = 0
    for _ in range(200):
        rho = ginibre_mixed_state((2, 2), rng=rng)
        if wootters_concurrence(rho) <= 0.05:
            continue
        sigma = svd_values(realign(rho.matrix, (2, 2))).values
        assert float(np.prod(sigma ** 2)) > 1e-12
        checked += 1
    assert checked > 0


# =================== Pure States ===================
def test_schmidt_of_bell_and_product(phi_plus):
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    result = schmidt_decompose(bell, (2, 2))
    np.testing.assert_allclose(result.coefficients, [1 / math.sqrt(2)] * 2)
    assert result.rank == 2 and result.entangled
    product = schmidt_decompose([1, 0, 0, 0], (2, 2))
    assert product.rank == 1 and not product.entangled


def test_schmidt_matches_amplitude_svd(rng):
    psi = haar_pure_vector(6, rng)
    result = schmidt_decompose(psi, (2, 3))
    np.testing.assert_allclose(result.coefficients, np.linalg.svd(psi.reshape(2, 3), compute_uv=False))
    assert np.sum(result.coefficients ** 2) == pytest.approx(1.0)
    rebuilt = sum(c * np.kron(result.left[:, i], result.right[:, i]) for i, c in enumerate(result.coefficients))
    np.testing.assert_allclose(rebuilt, psi, atol=1e-12)


def test_schmidt_rejects_bad_input():
    with pytest.raises(InputError):
        schmidt_decompose([1, 1, 0, 0], (2, 2))
    with pytest.raises(DimensionError):
        schmidt_decompose([1, 0, 0], (2, 2))


def test_pure_concurrence_matches_wootters(rng):
    for _ in range(20):
        psi = haar_pure_vector(4, rng)
        assert pure_concurrence(psi, (2, 2)) == pytest.approx(wootters_concurrence(projector(psi)), abs=1e-7)
    assert pure_concurrence(np.array([1, 0, 0, 1]) / np.sqrt(2), (2, 2)) == pytest.approx(1.0)


# =================== Bounds ===================
def test_bounds_on_upb():
    bounds = concurrence_bounds(make_state("upb_tiles"))
    assert bounds.k_rho == pytest.approx(71 / 768, abs=1e-12)
    assert bounds.c_min == pytest.approx(0.04, abs=5e-3)
    assert bounds.phi_limit == pytest.approx(0.107058, abs=1e-5)
    for n, phi in zip(range(1, 6), (0.00305406, 0.097443, 0.106169, 0.106976, 0.10705)):
        assert bounds.phi_wn[n] == pytest.approx(phi, abs=1e-5)


def test_bounds_on_bes4x4():
    bounds = concurrence_bounds(make_state("bes4x4"), n_list=range(1, 6))
    assert bounds.c_min == pytest.approx(0.0285955, abs=1e-6)
    assert bounds.phi_wn[1] == pytest.approx(0.01757, abs=1e-5)
    assert bounds.phi_wn[5] == pytest.approx(0.0976284, abs=1e-5)


@pytest.mark.parametrize("family", ["upb_tiles", "bes4x4"])
def test_witness_bounds_overtake_c_min(family):
    bounds = concurrence_bounds(make_state(family), n_list=range(1, 9))
    assert all(bounds.phi_wn[n] >= bounds.c_min for n in range(2, 9))


@pytest.mark.parametrize("family", ["upb_tiles", "bes4x4", "bihalan_be"])
def test_phi_wn_converges_geometrically(family):
    bounds = concurrence_bounds(make_state(family), n_list=range(1, 9))
    k = abs(bounds.k_rho)
    assert k < 1
    gap = abs(bounds.phi_wn[1] - bounds.phi_limit) / k
    for n in range(1, 9):
        assert abs(bounds.phi_wn[n] - bounds.phi_limit) <= gap * k ** n + 1e-12


@pytest.mark.parametrize("f", [0.5, 0.8, 1.0])
def test_phi_limit_on_iso3(f):
    expected = math.sqrt(2) * (3 * f - 1) / math.sqrt(1 - 2 * f + 9 * f * f)
    assert phi_limit(catalog.iso3(f)) == pytest.approx(expected, abs=1e-9)


def test_swap_bound_on_bell(phi_plus):
    assert swap_lower_bound(phi_plus) == pytest.approx(1.0)


def test_bounds_on_rectangular_state():
    bounds = concurrence_bounds(make_state("two_param_2xn"))
    assert bounds.phi_wn == {} and bounds.phi_limit is None and bounds.swap_lb is None
    assert np.isfinite(bounds.c_min)
    assert bounds.to_dict()["phi_limit"] is None
