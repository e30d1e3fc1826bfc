import csv
import io
import json

import pytest

from surfmatch.cli import main


def _json(capsys, argv):
    assert main(argv) == 0
    return json.loads(capsys.readouterr().out)


def test_layout(capsys):
    doc = _json(capsys, ["layout", "--d", "3"])
    assert len(doc["data_qubits"]) == 13


def test_trace_both_modes(capsys):
    doc = _json(capsys, ["trace", "--d", "3", "--p", "0.01"])
    assert len(doc["edges"]) == 13
    doc = _json(capsys, ["trace", "--d", "3", "--p", "0.01", "--mode", "fault_tolerant3d",
                         "--rounds", "2", "--basis", "Z"])
    assert doc["edges"]


def test_simulate_json_and_csv(capsys):
    argv = ["simulate", "--d", "3", "--p", "0.02", "--trials", "3000", "--seed", "5"]
    doc = _json(capsys, argv)
    assert doc["trials"] == 3000 and doc["seed"] == 5
    assert main(argv + ["--format", "csv", "--workers", "1"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert int(rows[0]["failures_x"]) == doc["failures_x"]


def test_sweep_to_file(tmp_path, capsys):
    out = tmp_path / "grid.csv"
    assert main(["sweep", "--d", "3,5", "--p", "0.01,0.02", "--trials", "1000", "--seed", "1",
                 "--decoder", "correlated", "--output", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 4 and {r["decoder"] for r in rows} == {"correlated"}


def test_analytic_census_paths(capsys):
    doc = _json(capsys, ["analytic", "--d", "4", "--p", "0.001"])
    assert doc["pl_basic"] == pytest.approx(5.333e-6, rel=1e-3)
    doc = _json(capsys, ["census", "--n", "8", "--k", "4"])
    assert doc["total"] == 70 * 16
    doc = _json(capsys, ["paths"])
    assert doc["pair_paths"] == 35 and doc["crossover"] == "1/23"


@pytest.mark.parametrize("argv", [
    ["simulate", "--d", "2", "--p", "0.01", "--trials", "10", "--seed", "1"],
    ["simulate", "--d", "3", "--p", "0.7", "--trials", "10", "--seed", "1"],
    ["simulate", "--d", "3", "--p", "0.01", "--trials", "10", "--seed", "1", "--workers", "0"],
    ["analytic", "--d", "5", "--p", "0.001"],
    ["census", "--n", "30"],
])
def test_config_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_seed_is_mandatory(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--d", "3", "--p", "0.01", "--trials", "10"])
    assert exc.value.code == 2


def test_workers_env(monkeypatch, capsys):
    monkeypatch.setenv("SURFMATCH_WORKERS", "bad")
    assert main(["simulate", "--d", "3", "--p", "0.01", "--trials", "10", "--seed", "1"]) == 2
