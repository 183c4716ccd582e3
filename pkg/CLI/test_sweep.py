import csv
import multiprocessing as mp

import pytest

from CLI.sweep import (
    SweepAxis,
    SweepSpec,
    bisect_boundary,
    evaluate_grid,
    evaluate_item,
    evaluate_point,
    parse_selection,
    run_sweep,
)
from config import Config
from Criteria.verdict import Verdict
from Moments.moments import estimate_first_moment
from States.statebank import make_state
from utils.errors import InputError, ParameterRangeError


def boundaries_of(result, column):
    return [b for b in result.boundaries if b.column == column]


# =================== Spec Plumbing ===================
def test_axis_parsing():
    axis = SweepAxis.parse("f=0:1:5")
    assert axis.points() == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])
    assert SweepAxis.parse("t=0.1,0.2").points() == [0.1, 0.2]
    assert SweepAxis("f", 0.3, 0.9, 1).points() == [0.3]
    with pytest.raises(InputError):
        SweepAxis.parse("f0:1:5")
    with pytest.raises(InputError):
        SweepAxis("f", 0.0, 1.0, 0)
    with pytest.raises(InputError):
        SweepAxis("f")


def test_spec_validates_ranges_and_names():
    with pytest.raises(ParameterRangeError):
        SweepSpec(family="iso3", axes=[SweepAxis("f", 0.0, 1.5, 4)])
    SweepSpec(family="iso3", axes=[SweepAxis("f", 0.0, 1.5, 4)], unchecked=True)
    with pytest.raises(InputError):
        SweepSpec(family="iso3", axes=[SweepAxis("g", 0.0, 1.0, 4)])
    with pytest.raises(InputError):
        SweepSpec(family="iso3", axes=[SweepAxis("f", 0.0, 1.0, 4)], selection=["ppt", "nonsense"])
    with pytest.raises(InputError):
        SweepSpec(family="nowhere", axes=[SweepAxis("f", 0.0, 1.0, 4)])


def test_spec_dict_reload():
    spec = SweepSpec(family="mub3", axes=[SweepAxis("p1", 0.0, 1.0, 3), SweepAxis("p3", values=[0.0, 0.1])],
                     selection=["tri_genuine"], seed=7)
    again = SweepSpec.from_dict(spec.to_dict())
    assert again.to_dict() == spec.to_dict()
    assert len(again.grid()) == 6
    assert again.grid()[1] == {"p1": 0.0, "p3": 0.1}


def test_parse_selection():
    assert parse_selection("ccnr") == ("criterion", "ccnr", 1)
    assert parse_selection("wn:3") == ("witness", "wn", 3)
    assert parse_selection("tri_genuine") == ("tri", "tri_genuine", 1)
    with pytest.raises(InputError):
        parse_selection("wn:x")
    with pytest.raises(InputError):
        parse_selection("lewenstein")
    assert parse_selection("m1_shots") == ("shots", "m1_shots", Config.DEFAULT_SHOTS)
    assert parse_selection("m1_shots:500") == ("shots", "m1_shots", 500)
    with pytest.raises(InputError):
        parse_selection("m1_shots:1")


# =================== Point Evaluation ===================
def test_evaluate_item_columns():
    cells = evaluate_item("zhang", make_state("bell"))
    assert set(cells) == {"l4", "hankel"}
    assert evaluate_item("wn:2", make_state("iso3", {"f": 0.9}))["wn_2"].detected
    assert evaluate_item("choi", make_state("iso3"))["choi"].verdict is Verdict.NOT_APPLICABLE
    assert evaluate_item("tri_genuine", make_state("bell"))["tri_genuine"].verdict is Verdict.NOT_APPLICABLE


def test_shot_column_uses_the_sweep_seed():
    state = make_state("iso2", {"f": 0.6})
    for seed in (1, 2):
        cell = evaluate_item("m1_shots:500", state, seed=seed)["m1_shots"]
        assert cell.statistic == estimate_first_moment(state, shots=500, seed=seed).estimate
    spec = SweepSpec(family="iso2", axes=[SweepAxis("f", values=[0.6])], selection=["m1_shots:500"], seed=2)
    row = evaluate_point(spec, {"f": 0.6})
    assert row.cells["m1_shots"].statistic == estimate_first_moment(state, shots=500, seed=2).estimate


def test_shot_column_verdicts():
    assert evaluate_item("m1_shots:200", make_state("bell"))["m1_shots"].verdict is Verdict.ENTANGLED
    assert evaluate_item("m1_shots:200", make_state("iso2", {"f": 0.25}))["m1_shots"].verdict is Verdict.INCONCLUSIVE
    assert evaluate_item("m1_shots", make_state("two_param_2xn"))["m1_shots"].verdict is Verdict.NOT_APPLICABLE


def test_constraint_violations_become_notes():
    spec = SweepSpec(family="mub3", axes=[SweepAxis("p1", values=[0.9]), SweepAxis("p3", values=[0.3])],
                     selection=["tri_genuine"])
    row = evaluate_point(spec, {"p1": 0.9, "p3": 0.3})
    assert row.cells == {}
    assert "p2" in row.note


# =================== Boundaries ===================
def test_bisect_boundary_on_a_step():
    low, high, iterations = bisect_boundary(lambda x: x > 0.3, 0.0, 1.0)
    assert low <= 0.3 <= high
    assert high - low <= 1e-6
    assert iterations <= 50


def test_wo_boundary_on_iso3():
    result = run_sweep(SweepSpec(family="iso3", axes=[SweepAxis("f", 0.0, 1.0, 21)], selection=["wo"]))
    found = boundaries_of(result, "wo")
    assert len(found) == 1
    assert found[0].onset
    assert found[0].estimate == pytest.approx(0.413285, abs=1e-5)


def test_moment_boundaries_on_iso2():
    spec = SweepSpec(family="iso2", axes=[SweepAxis("f", values=[0.5, 0.55, 0.6, 0.65, 0.7])],
                     selection=["pt_moments", "r2_two_qubit"])
    result = run_sweep(spec)
    assert boundaries_of(result, "d3")[0].estimate == pytest.approx(0.625, abs=1e-5)
    assert boundaries_of(result, "r2_two_qubit")[0].estimate == pytest.approx(0.608594, abs=1e-5)


def test_rho_t_boundaries():
    spec = SweepSpec(family="rho_t", axes=[SweepAxis("t", 0.05, 0.75, 15)], selection=["ccnr", "zhang"])
    result = run_sweep(spec)
    assert boundaries_of(result, "ccnr")[0].estimate == pytest.approx(0.116117, abs=1e-5)
    assert any(b.estimate == pytest.approx(0.370992, abs=1e-5) for b in boundaries_of(result, "l4"))


def test_swap_rank_windows_on_eps3x3():
    result = run_sweep(SweepSpec(family="eps3x3", axes=[SweepAxis("eps", 0.55, 1.75, 13)], selection=["swap_rank"]))
    found = boundaries_of(result, "swap_rank")
    assert [b.onset for b in found] == [True, False, True, False]
    for boundary, expected in zip(found, (0.622496, 0.780349, 1.281481, 1.606435)):
        assert boundary.estimate == pytest.approx(expected, abs=1e-4)


def test_two_axis_sweep_has_no_boundaries():
    spec = SweepSpec(family="mub3", axes=[SweepAxis("p1", values=[0.2, 0.6, 1.0]), SweepAxis("p3", values=[0.0, 0.1, 0.3])],
                     selection=["tri_genuine"])
    result = run_sweep(spec)
    assert len(result.rows) == 9
    assert result.boundaries == []
    by_point = {(r.point["p1"], r.point["p3"]): r for r in result.rows}
    assert by_point[(0.6, 0.0)].cells["tri_genuine"].detected
    assert by_point[(1.0, 0.3)].note


# =================== Output ===================
def test_csv_is_deterministic_and_in_grid_order(tmp_path):
    spec = SweepSpec(family="iso2", axes=[SweepAxis("f", 0.0, 1.0, 6)], selection=["ppt", "ccnr"])
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    run_sweep(spec).write_csv(str(first))
    run_sweep(spec).write_csv(str(second))
    assert first.read_bytes() == second.read_bytes()
    with open(first, newline="") as f:
        records = list(csv.DictReader(f))
    assert [float(r["f"]) for r in records] == pytest.approx([0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
    assert records[-1]["ppt_verdict"] == "Entangled"
    assert records[0]["ccnr_verdict"] == "Inconclusive"


def test_run_sweep_writes_outputs(tmp_path):
    out = tmp_path / "iso3.csv"
    run_sweep(SweepSpec(family="iso3", axes=[SweepAxis("f", 0.0, 1.0, 6)], selection=["ppt"], out=str(out)))
    assert out.exists()
    assert (tmp_path / "iso3.boundaries.json").exists()


def test_parallel_rows_match_serial():
    axes = [SweepAxis("f", 0.0, 1.0, 6)]
    serial = run_sweep(SweepSpec(family="iso3", axes=axes, selection=["ppt", "wo"], workers=1))
    parallel = run_sweep(SweepSpec(family="iso3", axes=axes, selection=["ppt", "wo"], workers=2))
    assert [r.point for r in parallel.rows] == [r.point for r in serial.rows]
    for a, b in zip(serial.rows, parallel.rows):
        assert list(a.cells) == list(b.cells)
        for column, cell in a.cells.items():
            other = b.cells[column]
            assert cell.verdict is other.verdict
            if cell.statistic is None:
                assert other.statistic is None
            else:
                assert other.statistic == pytest.approx(cell.statistic, abs=1e-12)


def test_spawned_workers_keep_the_decision_margin(monkeypatch):
    monkeypatch.setattr(Config, "DECISION_MARGIN", 0.6)
    axes = [SweepAxis("f", values=[0.9, 1.0])]
    serial = evaluate_grid(SweepSpec(family="iso2", axes=axes, selection=["ppt"], workers=1))
    pooled = evaluate_grid(SweepSpec(family="iso2", axes=axes, selection=["ppt"], workers=2),
                           mp_context=mp.get_context("spawn"))
    assert [r.cells["ppt"].verdict for r in serial] == [Verdict.INCONCLUSIVE, Verdict.INCONCLUSIVE]
    assert [r.cells["ppt"].verdict for r in pooled] == [r.cells["ppt"].verdict for r in serial]


def test_plot_data(tmp_path):
    result = run_sweep(SweepSpec(family="iso2", axes=[SweepAxis("f", 0.0, 1.0, 5)], selection=["ppt"]))
    path = tmp_path / "ppt.dat"
    assert result.write_plot_data("ppt", str(path)) == 5
    lines = path.read_text().splitlines()
    assert lines[0] == "x,y"
    assert float(lines[-1].split(",")[1]) == pytest.approx(-0.5)
    with pytest.raises(InputError):
        result.write_plot_data("ccnr", str(path))
