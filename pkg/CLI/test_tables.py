import copy
import json

import pytest

from CLI.tables import TABLES, check_table, detection_interval, diff_table, load_fixtures, regenerate
from utils.errors import FixtureMismatchError, InputError, exit_code_for


@pytest.fixture(scope="module")
def fixtures():
    return load_fixtures()


def test_every_table_has_a_fixture(fixtures):
    assert set(fixtures) == set(TABLES)
    for table in fixtures.values():
        for row in table["rows"]:
            assert row["anchor"]


@pytest.mark.parametrize("table_id", sorted(TABLES))
def test_table_matches_fixture(table_id, fixtures):
    artifact = check_table(table_id)
    assert [r.key for r in artifact.rows] == [r["key"] for r in fixtures[table_id]["rows"]]
    assert artifact.to_dict()["table_id"] == table_id


def test_upb_values_improve_on_c_min():
    artifact = regenerate("upb_wn")
    assert artifact.row("1").verdicts["improves"] == "False"
    assert all(artifact.row(str(n)).verdicts["improves"] == "True" for n in range(2, 6))


def test_kye_only_choi_detects():
    artifact = regenerate("kye_ranges")
    assert artifact.row("ccnr").values == {"low": None, "high": None}
    assert artifact.row("choi").values == {"low": 0.0, "high": 1.0}


def test_drifted_fixture_is_reported(tmp_path, fixtures):
    tampered = copy.deepcopy(fixtures)
    tampered["upb_wn"]["rows"][2]["values"]["phi_wn"] = 0.2
    path = tmp_path / "tables.json"
    path.write_text(json.dumps(tampered))
    with pytest.raises(FixtureMismatchError) as info:
        check_table("upb_wn", str(path))
    assert info.value.table_id == "upb_wn"
    assert [(m["row"], m["column"]) for m in info.value.mismatches] == [("3", "phi_wn")]
    assert exit_code_for(info.value) == 4


def test_row_schema_drift(fixtures):
    artifact = regenerate("iso3_wn")
    fixture = copy.deepcopy(fixtures["iso3_wn"])
    fixture["rows"].pop()
    mismatches = diff_table(artifact, fixture)
    assert len(mismatches) == 1 and mismatches[0]["row"] is None


def test_missing_detection_must_stay_missing(fixtures):
    artifact = regenerate("horodecki_a_wn")
    fixture = copy.deepcopy(fixtures["horodecki_a_wn"])
    fixture["rows"][0]["values"]["high"] = 0.5
    assert [m["row"] for m in diff_table(artifact, fixture)] == ["1"]


def test_unknown_table():
    with pytest.raises(InputError):
        regenerate("table9")
    with pytest.raises(InputError):
        load_fixtures("/nonexistent/tables.json")


def test_detection_interval_edges():
    points = [0.0, 0.25, 0.5, 0.75, 1.0]
    low, high = detection_interval(lambda x: 0.3 < x < 0.6, points, 0.0, 1.0)
    assert low == pytest.approx(0.3, abs=1e-6)
    assert high == pytest.approx(0.6, abs=1e-6)
    assert detection_interval(lambda x: x > 0.1, points, -1.0, 2.0)[1] == 2.0
    assert detection_interval(lambda x: False, points, 0.0, 1.0) == (None, None)
