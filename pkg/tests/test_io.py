import json

import numpy as np
import pytest

from encperf.fixtures import (
    PRINTED_A, PRINTED_B, batch_reactor_plant, hinf_controller, load_fixture, write_fixtures,
)
from encperf.io import SchemaError, dumps, load_system, save_system, system_from_dict, system_to_dict
from encperf.ss_core import Controller, DimensionError, Plant


def test_shipped_plant(plant):
    p = load_fixture("batch_reactor_plant")
    assert p == plant
    assert np.array_equal(p.B1, np.eye(4)) and np.array_equal(p.C1, p.C)
    assert not p.F1.any() and not p.E.any() and not p.D1.any()


def test_shipped_controller(controller):
    c = load_fixture("hinf_controller")
    assert c == controller and c.m_w == 0
    assert c.Dc[1, 0] == -3.6


def test_sampled_plant_rounds_to_printed_values(plant):
    assert np.array_equal(np.round(plant.A, 2), PRINTED_A)
    # each printed input entry is correct to its last shown decimal
    for got, shown in zip(plant.B.ravel(), PRINTED_B.ravel()):
        decimals = len(repr(float(shown)).split(".")[1])
        assert abs(got - shown) <= 0.5 * 10.0 ** -decimals + 1e-12


def test_printed_plant_fixture():
    p = load_fixture("batch_reactor_plant_printed")
    assert p == batch_reactor_plant(printed=True)
    assert np.array_equal(p.A, PRINTED_A)


def test_fixture_files_are_current(tmp_path):
    from encperf.fixtures import DATA
    for path in write_fixtures(tmp_path):
        assert path.read_text() == (DATA / path.name).read_text(), path.name


@pytest.mark.parametrize("system", [batch_reactor_plant(), hinf_controller(),
                                    Controller.static([[1.0, 2.0]])])
def test_round_trip(tmp_path, system):
    path = tmp_path / "s.json"
    save_system(system, path, name="x")
    again = load_system(path)
    assert again == system
    assert dumps(again, name="x") == path.read_text()


def test_empty_file(tmp_path):
    path = tmp_path / "e.json"
    path.write_text("  \n")
    with pytest.raises(SchemaError, match="empty"):
        load_system(path)


def test_syntax_error_location(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "format": "encperf.system/1",\n  "kind": plant\n}\n')
    with pytest.raises(SchemaError, match="line 3"):
        load_system(path)


def _doc():
    return system_to_dict(Plant([[0.5]], [[1.0]], [[1.0]]))


def test_wrong_entry_count():
    d = _doc()
    d["matrices"]["A"]["data"] = [1.0, 2.0]
    with pytest.raises(SchemaError, match=r"matrices\.A\.data"):
        system_from_dict(d)


def test_missing_required_matrix():
    d = _doc()
    del d["matrices"]["B"]
    with pytest.raises(SchemaError, match=r"matrices\.B"):
        system_from_dict(d)


def test_unknown_matrix_field():
    d = _doc()
    d["matrices"]["Q"] = {"rows": 1, "cols": 1, "data": [1.0]}
    with pytest.raises(SchemaError, match="Q"):
        system_from_dict(d)


def test_dimension_mismatch_names_fields():
    d = _doc()
    d["matrices"]["C"] = {"rows": 1, "cols": 2, "data": [1.0, 1.0]}
    with pytest.raises(DimensionError, match="C"):
        system_from_dict(d)


@pytest.mark.parametrize("key,value", [("format", "other/1"), ("kind", "observer")])
def test_header_checks(key, value):
    d = _doc()
    d[key] = value
    with pytest.raises(SchemaError, match=key):
        system_from_dict(d)


def test_non_numeric_entry():
    d = _doc()
    d["matrices"]["A"]["data"] = ["x"]
    with pytest.raises(SchemaError, match="non-numeric"):
        system_from_dict(json.loads(json.dumps(d)))
