import json
import subprocess
import sys

import pytest

from encperf.benchmark import (
    CERTIFIED_FOR, ConfigError, MethodSpec, config_from_dict, default_config, load_config,
    run_benchmark, with_overrides,
)
from encperf.cli import main
from encperf.fixtures import DATA
from encperf.ss_core import Controller, interconnect
from oracles import hinf_norm

RESET_T1 = 2.1489607203796224  # pinned after cross-checking against the frequency sweep below


def _config_doc(**kw):
    doc = {"format": "encperf.benchmark/1", "plant": "batch_reactor_plant.json",
           "controller": "hinf_controller.json"}
    doc.update(kw)
    return doc


def test_default_config_contents():
    cfg = default_config()
    assert [m.method for m in cfg.methods] == [
        "nominal", "bootstrap", "reset_robust", "reset_nominal", "fir_nominal"]
    assert all(m.period == 10 for m in cfg.methods)
    assert cfg.simulation.seeds == tuple(range(10)) and cfg.simulation.steps == 10_000
    assert set(cfg.simulation.variants) == set(CERTIFIED_FOR)


def test_empty_method_list_gives_empty_report():
    report = run_benchmark(config_from_dict(_config_doc(methods=[]), DATA))
    assert report.rows == [] and report.ok
    assert report.to_csv().count("\n") == 1


def test_reset_every_step_regression(plant, controller):
    cfg = config_from_dict(_config_doc(methods=[{"method": "reset_nominal", "period": 1}]), DATA)
    gain = run_benchmark(cfg).rows[0].gain
    flat = interconnect(plant, Controller(0 * controller.Ac, controller.Bc, controller.Cc, controller.Dc))
    assert gain == pytest.approx(hinf_norm(flat.A, flat.Bp, flat.Cp, flat.Dpp), rel=1e-3)
    assert gain == pytest.approx(RESET_T1, rel=1e-6)
    assert gain >= 1.8030


def test_failed_row_is_recorded_and_run_continues():
    cfg = config_from_dict(_config_doc(methods=[{"method": "nominal"}, {"method": "fir_nominal"}]), DATA)
    cfg.solver = "NOT_A_SOLVER"
    report = run_benchmark(cfg)
    assert [r.status for r in report.rows] == ["failed", "failed"]
    assert not report.ok


def test_csv_is_deterministic(tmp_path):
    doc = _config_doc(methods=[{"method": "nominal"}, {"method": "fir_nominal", "horizon": 3}],
                      simulation={"variants": ["reset", "bootstrap"], "steps": 500, "seeds": [0, 1]})
    cfg = config_from_dict(doc, DATA)
    assert run_benchmark(cfg).to_csv() == run_benchmark(cfg).to_csv()


@pytest.mark.parametrize("patch,match", [
    ({"format": "x"}, "format"),
    ({"plant": "missing.json"}, "not found"),
    ({"controller": "batch_reactor_plant.json"}, "controller"),
    ({"methods": [{"method": "bogus"}]}, r"methods\[0\]"),
    ({"methods": [{"method": "nominal", "period": 0}]}, "period"),
    ({"methods": [{"method": "nominal", "colour": 1}]}, "unknown"),
    ({"simulation": {"variants": ["x"]}}, "variant"),
    ({"sector_gamma": -1}, "sector_gamma"),
])
def test_config_errors(patch, match):
    with pytest.raises(ConfigError, match=match):
        config_from_dict(_config_doc(**patch), DATA)


def test_config_json_error_location(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{\n\n  bad\n}")
    with pytest.raises(ConfigError, match="line 3"):
        load_config(path)


def test_overrides():
    cfg = with_overrides(default_config(), period=4, method_names=["nominal", "reset_nominal"],
                         seeds=(3,), steps=100)
    assert [m.method for m in cfg.methods] == ["nominal", "reset_nominal"]
    assert all(m.period == 4 for m in cfg.methods) and cfg.simulation.period == 4
    assert cfg.simulation.seeds == (3,) and cfg.simulation.steps == 100


def test_cli_analyze(capsys, tmp_path):
    out = tmp_path / "a.csv"
    assert main(["analyze", "--methods", "nominal", "--csv", str(out)]) == 0
    assert "1.80807" in capsys.readouterr().out
    assert out.read_text().splitlines()[1].startswith("certified,nominal,")


def test_cli_infeasible_exit_code(tmp_path, capsys):
    plant = {"format": "encperf.system/1", "kind": "plant", "name": "unstable", "matrices": {
        "A": {"rows": 1, "cols": 1, "data": [1.5]}, "B": {"rows": 1, "cols": 1, "data": [0.0]},
        "C": {"rows": 1, "cols": 1, "data": [1.0]}, "B1": {"rows": 1, "cols": 1, "data": [1.0]},
        "C1": {"rows": 1, "cols": 1, "data": [1.0]}}}
    ctrl = {"format": "encperf.system/1", "kind": "controller", "name": "c", "matrices": {
        "Ac": {"rows": 1, "cols": 1, "data": [0.0]}, "Bc": {"rows": 1, "cols": 1, "data": [1.0]},
        "Cc": {"rows": 1, "cols": 1, "data": [1.0]}, "Dc": {"rows": 1, "cols": 1, "data": [0.0]}}}
    (tmp_path / "p.json").write_text(json.dumps(plant))
    (tmp_path / "c.json").write_text(json.dumps(ctrl))
    rc = main(["analyze", "--plant", str(tmp_path / "p.json"), "--controller", str(tmp_path / "c.json"),
               "--methods", "nominal"])
    assert rc == 1
    assert "infeasible" in capsys.readouterr().out


def test_cli_config_error_exit_code(tmp_path, capsys):
    assert main(["report", "--config", str(tmp_path / "none.json")]) == 2
    assert "configuration error" in capsys.readouterr().err
    assert main(["analyze", "--period", "0"]) == 2


def test_cli_bad_flag_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["analyze", "--methods", "bogus"])
    assert exc.value.code == 2


def test_cli_simulate_export(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["simulate", "--variant", "fir", "--steps", "200", "--export", str(out)]) == 0
    assert "status=ok" in capsys.readouterr().out
    assert len(out.read_text().splitlines()) == 201


def test_cli_simulate_abort_exit_code(capsys):
    assert main(["simulate", "--variant", "bootstrap", "--steps", "300", "--state-scale", "1"]) == 1
    assert "outside" in capsys.readouterr().out


def test_cli_report_outputs(tmp_path):
    text, table = tmp_path / "r.txt", tmp_path / "r.csv"
    rc = main(["report", "--methods", "nominal", "--variants", "nominal,integer_reform",
               "--seeds", "0-1", "--steps", "300", "--text", str(text), "--csv", str(table)])
    assert rc == 0
    lines = table.read_text().splitlines()
    assert [l.split(",")[:2] for l in lines[1:]] == [
        ["certified", "nominal"], ["simulation", "nominal"], ["simulation", "integer_reform"]]
    assert "1.80807" in text.read_text()


def test_cli_fixtures(tmp_path):
    assert main(["fixtures", "--out", str(tmp_path)]) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == sorted(["batch_reactor_plant.json", "batch_reactor_plant_printed.json",
                            "hinf_controller.json", "modulo_default.json", "benchmark_default.json"])
    cfg = load_config(tmp_path / "benchmark_default.json")
    assert len(cfg.methods) == 5


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "encperf.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for sub in ("analyze", "simulate", "report", "fixtures"):
        assert sub in proc.stdout
