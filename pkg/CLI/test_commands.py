import csv
import json
import os

import pytest

from CLI.commands import apply_tolerances, parse_list, parse_params, resolve_state
from config import Config
from main import run
from Moments.moments import estimate_first_moment
from States.statebank import make_state
from utils.errors import InputError
from Witness.witness import WitnessOperator


@pytest.fixture(autouse=True)
def restore_tolerances(monkeypatch):
    monkeypatch.setattr(Config, "DECISION_MARGIN", Config.DECISION_MARGIN)
    monkeypatch.setenv("ENTKIT_DEFAULT_TOL", repr(Config.DEFAULT_RANK_TOL))
    monkeypatch.setenv("ENTKIT_MARGIN", repr(Config.DECISION_MARGIN))


def run_json(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def verdicts_by_name(payload):
    return {v["criterion"]: v for v in payload["verdicts"]}


# =================== Helpers ===================
def test_parse_params_and_lists():
    assert parse_params("p=0.1, q=0.3") == {"p": 0.1, "q": 0.3}
    assert parse_params(None) == {}
    with pytest.raises(InputError):
        parse_params("p0.1")
    with pytest.raises(InputError):
        parse_params("p=abc")
    assert parse_list("all", ["ppt"]) is None
    assert parse_list("ppt, ccnr", ["ppt", "ccnr"]) == ["ppt", "ccnr"]


def test_resolve_state_needs_one_source(tmp_path):
    with pytest.raises(InputError):
        resolve_state()
    path = tmp_path / "s.json"
    make_state("iso3").save(str(path))
    with pytest.raises(InputError):
        resolve_state("iso3", str(path))
    assert resolve_state(file=str(path)).label == "iso3"


def test_apply_tolerances():
    apply_tolerances(tol_rank=1e-8, margin=1e-7)
    assert Config.rank_tol() == pytest.approx(1e-8)
    assert Config.DECISION_MARGIN == pytest.approx(1e-7)
    assert float(os.environ["ENTKIT_MARGIN"]) == pytest.approx(1e-7)
    with pytest.raises(InputError):
        apply_tolerances(margin=-1.0)


# =================== detect ===================
def test_detect_bes4x4(capsys):
    code, payload = run_json(capsys, ["detect", "--state", "bes4x4", "--criteria", "ppt,ccnr,r_moment"])
    assert code == 0
    verdicts = verdicts_by_name(payload)
    assert verdicts["ppt"]["verdict"] == "Inconclusive"
    assert verdicts["ccnr"]["statistic"] == pytest.approx(1.08579, abs=1e-5)
    assert verdicts["ccnr"]["verdict"] == "Entangled"
    assert verdicts["r_moment"]["statistic"] == pytest.approx(0.02082, abs=1e-4)
    assert payload["detected_by"] == ["ccnr", "r_moment"]


def test_detect_separable_iso2(capsys):
    code, payload = run_json(capsys, ["detect", "--state", "iso2", "--params", "f=0.4", "--criteria", "ppt"])
    assert code == 0
    assert payload["verdicts"][0]["verdict"] == "Inconclusive"


def test_detect_from_file_runs_the_battery(capsys, tmp_path):
    path = tmp_path / "state.json"
    make_state("iso3", {"f": 0.8}).save(str(path))
    out = tmp_path / "verdicts.csv"
    code, payload = run_json(capsys, ["detect", "--file", str(path), "--criteria", "all", "--out", str(out)])
    assert code == 0
    assert payload["state"]["label"] == "iso3"
    assert len(payload["verdicts"]) > 10
    assert "ppt" in payload["detected_by"]
    with open(out, newline="") as f:
        assert len(list(csv.DictReader(f))) == len(payload["verdicts"])


@pytest.mark.parametrize("argv", [
    ["detect", "--state", "nowhere"],
    ["detect", "--state", "iso2", "--params", "f=1.5"],
    ["detect", "--state", "iso2", "--criteria", "ppt,nonsense"],
    ["detect"],
])
def test_detect_input_errors_exit_2(capsys, argv):
    assert run(argv) == 2


def test_margin_flag_changes_verdicts(capsys):
    _, payload = run_json(capsys, ["--margin", "0.6", "detect", "--state", "bell", "--criteria", "ppt"])
    assert payload["verdicts"][0]["verdict"] == "Inconclusive"


# =================== validate ===================
def test_validate(capsys):
    code, payload = run_json(capsys, ["validate", "--state", "iso3"])
    assert code == 0 and payload["passed"]
    code, payload = run_json(capsys, ["validate", "--state", "iso2", "--params", "f=1.5", "--unchecked"])
    assert code == 3
    assert not payload["psd_ok"]


# =================== witness & moments ===================
def test_witness_command(capsys, tmp_path):
    out = tmp_path / "w.json"
    code, payload = run_json(capsys, ["witness", "--state", "rho12_alt", "--family", "wo", "--out", str(out)])
    assert code == 0
    assert payload["expectation"] == pytest.approx(-0.0585731, abs=1e-6)
    assert payload["detected"] is True
    w = WitnessOperator.from_dict(json.loads(out.read_text()))
    assert w.family.value == "wo"


def test_witness_input_errors_exit_2(capsys):
    assert run(["witness", "--state", "bell", "--family", "choi"]) == 2
    assert run(["witness", "--state", "iso3", "--family", "lewenstein"]) == 2


def test_moments_command(capsys, tmp_path):
    out = tmp_path / "m.csv"
    code, payload = run_json(capsys, ["moments", "--state", "bell", "--kinds", "pt,zhang", "-K", "3", "--out", str(out)])
    assert code == 0
    assert [m["kind"] for m in payload["moments"]] == ["pt", "zhang"]
    with open(out, newline="") as f:
        assert len(list(csv.DictReader(f))) == 6
    assert run(["moments", "--state", "bell", "--kinds", "cumulant"]) == 2


# =================== sweep & table ===================
def test_sweep_command_is_deterministic(capsys, tmp_path):
    outputs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        code, payload = run_json(capsys, ["sweep", "--state", "iso3", "--grid", "f=0:1:21", "--criteria", "wo",
                                          "--out", str(out), "--plot", "wo"])
        assert code == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
    assert payload["boundaries"][0]["estimate"] == pytest.approx(0.413285, abs=1e-5)
    assert (tmp_path / "b.wo.dat").exists()
    assert (tmp_path / "b.boundaries.json").exists()


def test_sweep_seed_drives_shot_columns(capsys, tmp_path):
    out = tmp_path / "m1.csv"
    code, _ = run_json(capsys, ["sweep", "--state", "iso2", "--grid", "f=0.6", "--criteria", "m1_shots:400",
                                "--seed", "11", "--out", str(out)])
    assert code == 0
    with open(out, newline="") as f:
        record = next(csv.DictReader(f))
    expected = estimate_first_moment(make_state("iso2", {"f": 0.6}), shots=400, seed=11).estimate
    assert float(record["m1_shots"]) == expected


def test_sweep_range_error_exit_2(capsys):
    assert run(["sweep", "--state", "iso3", "--grid", "f=0:2:5"]) == 2


def test_table_command(capsys, tmp_path):
    code, payload = run_json(capsys, ["table", "upb_wn"])
    assert code == 0
    assert len(payload["tables"][0]["rows"]) == 5

    broken = json.loads(open(Config.TABLE_FIXTURES_PATH).read())
    broken["upb_wn"]["rows"][0]["values"]["phi_wn"] = 0.5
    path = tmp_path / "tables.json"
    path.write_text(json.dumps(broken))
    assert run(["table", "upb_wn", "--fixtures", str(path)]) == 4
    assert run(["table", "table9"]) == 2


def test_families_command(capsys):
    code, payload = run_json(capsys, ["families"])
    assert code == 0
    assert "bes4x4" in payload["families"]
