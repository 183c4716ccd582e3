from dataclasses import replace

import numpy as np
import pytest

from Kernel.matkit import eig_hermitian, lambda_min, partial_transpose
from States import catalog
from States.random_states import ginibre_mixed_state, haar_pure_state, separable_mixture
from States.statebank import (
    FAMILIES,
    DensityMatrix,
    ParamSpec,
    as_state,
    get_family,
    list_families,
    make_state,
    validate,
)
from utils.errors import DimensionError, InputError, NormalizationError, ParameterRangeError


# =================== Catalog ===================
@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_every_family_valid_at_defaults(family):
    state = make_state(family)
    assert validate(state).passed
    assert state.label == family
    assert state.matrix.shape == (state.order, state.order)


def test_bes4x4_at_p0_q0_is_ppt():
    rho = make_state("bes4x4")
    assert lambda_min(partial_transpose(rho.matrix, rho.dims)) >= -1e-9


@pytest.mark.parametrize("q", [0.0, 0.1, 0.25, 0.4, 0.5])
def test_bes4x4_trace_one_along_constraint(q):
    rho = make_state("bes4x4", {"q": q})
    assert rho.params["p"] == pytest.approx((1 - 2 * q) / 4)
    assert np.trace(rho.matrix).real == pytest.approx(1.0)


def test_bes4x4_rejects_broken_normalization():
    with pytest.raises(ParameterRangeError):
        make_state("bes4x4", {"p": 0.1, "q": 0.1})


def test_iso3_at_one_ninth_is_maximally_mixed():
    rho = make_state("iso3", {"f": 1 / 9})
    np.testing.assert_allclose(rho.matrix, np.eye(9) / 9, atol=1e-15)


@pytest.mark.parametrize("a", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
def test_horodecki_a_is_ppt(a):
    rho = make_state("horodecki_a", {"a": a})
    assert lambda_min(partial_transpose(rho.matrix, (3, 3))) >= -1e-9


@pytest.mark.parametrize("alpha, ppt", [(2.5, True), (3.5, True), (4.0, True), (4.5, False)])
def test_horodecki_alpha_ppt_region(alpha, ppt):
    rho = make_state("horodecki_alpha", {"alpha": alpha})
    assert (lambda_min(partial_transpose(rho.matrix, (3, 3))) >= -1e-9) == ppt


@pytest.mark.parametrize("f", [0.3, 0.5, 0.75, 1.0])
def test_iso2_partial_transpose_minimum(f):
    rho = make_state("iso2", {"f": f})
    assert lambda_min(partial_transpose(rho.matrix, (2, 2))) == pytest.approx((1 - 2 * f) / 2)


def test_rho_t_is_rudolph_slice():
    np.testing.assert_allclose(catalog.rho_t(-0.4), catalog.rudolph_st(0.5, -0.4))


def test_rudolph_rejects_zero_t():
    with pytest.raises(ParameterRangeError):
        make_state("rudolph_st", {"s": 0.5, "t": 0.0})


def test_two_param_dims_follow_n():
    rho = make_state("two_param_2xn", {"n": 4, "alpha": 0.1, "gamma": 0.3})
    assert rho.dims.dims == (2, 4)
    assert np.trace(rho.matrix).real == pytest.approx(1.0)


def test_kye_normalization():
    r = 0.6
    rho = make_state("kye", {"r": r})
    assert rho.matrix[0, 0].real == pytest.approx(2 / (16 + 8 * r))
    assert rho.matrix[0, 5].real == pytest.approx(-1 / (16 + 8 * r))


def test_kye_zpr_complex_phase_is_hermitian_and_ppt():
    rho = make_state("kye_zpr", {"theta": 0.3, "p": 1.5, "r": 0.4})
    np.testing.assert_allclose(rho.matrix, rho.matrix.conj().T, atol=1e-15)
    assert lambda_min(partial_transpose(rho.matrix, (4, 4))) >= -1e-9


def test_mub3_spectrum():
    p1, p3 = 0.5, 0.1
    p2 = 1 - p1 - 3 * p3
    values = eig_hermitian(make_state("mub3", {"p1": p1, "p3": p3}).matrix).values
    np.testing.assert_allclose(values, sorted([p1, p2, p3, p3, p3, 0, 0, 0], reverse=True), atol=1e-12)


def test_mixed_marginals_validity_region():
    with pytest.raises(ParameterRangeError):
        make_state("mixed_marginals", {"t1": 1.0, "t2": 1.0, "t3": 1.0})
    singlet = make_state("mixed_marginals", {"t1": -1.0, "t2": -1.0, "t3": -1.0})
    np.testing.assert_allclose(singlet.matrix, catalog.bell(3), atol=1e-15)


# =================== Errors & Options ===================
def test_unknown_family():
    with pytest.raises(InputError):
        make_state("werner9")


def test_unknown_parameter_name():
    with pytest.raises(InputError):
        make_state("iso3", {"g": 0.2})


def test_out_of_range_rejected():
    with pytest.raises(ParameterRangeError):
        make_state("iso3", {"f": 1.2})


def test_unchecked_allows_out_of_range():
    rho = make_state("iso3", {"f": 1.2}, unchecked=True)
    assert not validate(rho).psd_ok


def test_open_endpoint():
    spec = ParamSpec("r", 0, 1, 0.5, low_open=True, high_open=True)
    assert not spec.contains(0.0)
    assert spec.contains(0.999)
    with pytest.raises(ParameterRangeError):
        make_state("kye", {"r": 1.0})


def test_normalization_error_on_invalid_matrix(monkeypatch):
    family = get_family("iso3")
    monkeypatch.setitem(FAMILIES, "iso3", replace(family, builder=lambda f: 0.9 * catalog.iso3(f)))
    with pytest.raises(NormalizationError):
        make_state("iso3")


def test_list_families_sorted():
    ids = list_families()
    assert ids == sorted(ids)
    assert "rho12_alt" in ids and "maximally_mixed" in ids


# =================== Validation ===================
def test_validate_maximally_mixed(mixed4):
    report = validate(mixed4)
    assert report.passed
    assert report.failures() == []


def test_validate_reports_trace_defect():
    report = validate(0.9 * np.eye(4) / 4)
    assert not report.trace_ok
    assert report.trace_defect == pytest.approx(0.1)
    assert not report.to_dict()["passed"]


def test_validate_reports_hermiticity():
    m = np.eye(4, dtype=complex) / 4
    m[0, 1] = 0.1
    assert not validate(m).hermitian_ok


# =================== JSON ===================
def test_json_round_trip_is_bit_exact():
    rho = make_state("kye_zpr", {"theta": 0.2, "p": 0.7, "r": 0.3})
    back = DensityMatrix.from_json(rho.to_json())
    assert np.array_equal(back.matrix, rho.matrix)
    assert back.dims == rho.dims
    assert back.label == "kye_zpr"


def test_json_file_io(tmp_path):
    rho = make_state("rho12")
    path = tmp_path / "rho12.json"
    rho.save(str(path))
    assert np.array_equal(DensityMatrix.load(str(path)).matrix, rho.matrix)


def test_from_dict_rejects_wrong_entry_count():
    with pytest.raises(InputError):
        DensityMatrix.from_dict({"dims": [2, 2], "entries": [[1.0, 0.0]] * 15})


def test_density_matrix_checks_dims():
    with pytest.raises(DimensionError):
        DensityMatrix(np.eye(4) / 4, (3, 3))


def test_as_state_infers_square_split():
    assert as_state(np.eye(9) / 9).dims.dims == (3, 3)
    with pytest.raises(InputError):
        as_state(np.eye(8) / 8)


# =================== Random States ===================
def test_random_states_are_valid(rng):
    assert validate(haar_pure_state((2, 3), rng)).passed
    assert validate(ginibre_mixed_state((3, 3), rng=rng)).passed
    rank2 = ginibre_mixed_state((2, 2), rank=2, rng=rng)
    assert eig_hermitian(rank2.matrix).rank == 2


def test_separable_mixture_is_ppt(rng):
    rho = separable_mixture((3, 3), terms=6, rng=rng)
    assert validate(rho).passed
    assert lambda_min(partial_transpose(rho.matrix, (3, 3))) >= -1e-12
