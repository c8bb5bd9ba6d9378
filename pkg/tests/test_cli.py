import json

import pytest
import yaml
from click.testing import CliRunner

from normalkit import __version__
from normalkit.cli.main import EXIT_COMPARE, EXIT_CONFIG, EXIT_SOLVER, cli


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def table1_json(runner, tmp_path):
    path = tmp_path / "t1.json"
    result = runner.invoke(cli, ["run", "table1", "--n", "10", "--json", str(path)])
    assert result.exit_code == 0, result.output
    return path


def write_golden(path, qr_expected):
    path.write_text(
        yaml.safe_dump(
            {
                "experiment": "table1",
                "row_label": "n",
                "column_label": "preconditioner",
                "rows": ["10"],
                "columns": ["QR", "polar-left"],
                "values": [[qr_expected, 1]],
                "defaults": {"slack_abs": 1},
            }
        )
    )
    return path


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


# =============================================================================
# Experiments
# =============================================================================


def test_experiments_list_json(runner):
    result = runner.invoke(cli, ["experiments", "list", "--json"])
    assert result.exit_code == 0
    names = [e["name"] for e in json.loads(result.output)]
    assert "table1" in names and "history" in names


def test_experiments_list_by_family(runner):
    result = runner.invoke(cli, ["experiments", "list", "--family", "fd"])
    assert result.exit_code == 0
    assert "table2" in result.output
    assert "table5" not in result.output


def test_experiments_info(runner):
    result = runner.invoke(cli, ["experiments", "info", "table5"])
    assert result.exit_code == 0
    assert json.loads(result.output)["variant"] == "rd-projected"
    missing = runner.invoke(cli, ["experiments", "info", "table99"])
    assert missing.exit_code == EXIT_CONFIG


def test_run_and_compare(runner, table1_json, tmp_path):
    data = json.loads(table1_json.read_text())
    assert data["rows"] == ["10"]
    ok = runner.invoke(cli, ["compare", str(table1_json), str(write_golden(tmp_path / "ok.yaml", 1))])
    assert ok.exit_code == 0, ok.output
    assert "PASS" in ok.output
    bad = runner.invoke(cli, ["compare", str(table1_json), str(write_golden(tmp_path / "bad.yaml", 50)), "--json"])
    assert bad.exit_code == EXIT_COMPARE
    assert json.loads(bad.output)["verdicts"][0]["passed"] is False


def test_compare_shape_mismatch(runner, table1_json):
    result = runner.invoke(cli, ["compare", str(table1_json), "table1"])
    assert result.exit_code == EXIT_COMPARE
    subset = runner.invoke(cli, ["compare", str(table1_json), "table1", "--subset"])
    assert subset.exit_code in (0, EXIT_COMPARE)
    assert "cells within slack" in subset.output


def test_run_with_golden(runner, tmp_path):
    golden = write_golden(tmp_path / "ok.yaml", 1)
    args = ["run", "table1", "--n", "10", "--golden", str(golden), "--csv", str(tmp_path / "t.csv")]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    assert (tmp_path / "t.csv").read_text().startswith("n,QR,RQ,polar-left,polar-right")


@pytest.mark.parametrize(
    "args",
    [
        ["run", "table99"],
        ["run", "table1", "--n", "10", "--golden", "no-such-golden"],
        ["run", "history"],
        ["run", "table5", "--tol", "-1"],
        ["run"],
        ["solve", "fd1d", "--precond", "bogus"],
        ["solve", "fd1d", "--precond", "direct"],
        ["solve", "fd1d", "--solver", "lsqr", "--precond", "direct"],
        ["solve", "fem2d", "--mesh", "8", "--precond", "qr-r"],
        ["solve", "fem2d", "--mesh", "8", "--variant", "rd-projected", "--precond", "gmg"],
        ["solve", "fd1d", "--n", "1"],
    ],
)
def test_bad_configuration_exits_3(runner, args):
    result = runner.invoke(cli, args)
    assert result.exit_code == EXIT_CONFIG, result.output


def test_run_history(runner, tmp_path):
    out = tmp_path / "hist"
    result = runner.invoke(cli, ["run", "history", "--out", str(out), "--mesh", "8", "--nu", "0.01"])
    assert result.exit_code == 0, result.output
    files = sorted(p.name for p in out.iterdir())
    assert files == ["fem_advection_mass_normal_eq_diagflow_0.01_8.0.csv"]


def test_run_save_and_results(runner, tmp_path, monkeypatch):
    monkeypatch.setenv("NORMALKIT_RESULTS_DIR", str(tmp_path / "store"))
    saved = runner.invoke(cli, ["run", "table1", "--n", "10", "--save"])
    assert saved.exit_code == 0, saved.output
    assert "Saved result: table1" in saved.output
    listed = runner.invoke(cli, ["results", "list"])
    assert "table1: table1" in listed.output
    shown = runner.invoke(cli, ["results", "show", "table1"])
    assert shown.exit_code == 0
    assert "polar-left" in shown.output
    assert runner.invoke(cli, ["results", "delete", "table1"]).exit_code == 0
    assert runner.invoke(cli, ["results", "delete", "table1"]).exit_code == EXIT_CONFIG
    assert runner.invoke(cli, ["results", "show", "table1"]).exit_code == EXIT_CONFIG
    assert "No saved results." in runner.invoke(cli, ["results", "list"]).output


def test_results_are_plain_json_files(runner, tmp_path):
    store = tmp_path / "store"
    help_text = runner.invoke(cli, ["results", "--help"]).output
    assert "plain JSON files" in help_text
    saved = runner.invoke(cli, ["run", "table1", "--n", "10", "--save", "--results-dir", str(store)])
    assert saved.exit_code == 0, saved.output
    assert [p.name for p in store.iterdir()] == ["table1.json"]
    assert json.loads((store / "table1.json").read_text())["experiment"] == "table1"


# =============================================================================
# Single solves
# =============================================================================


def test_solve_fd1d_with_files(runner, tmp_path):
    history, solution = tmp_path / "h.csv", tmp_path / "u.csv"
    args = ["solve", "fd1d", "--n", "50", "--scale", "h2", "-p", "qr-r"]
    result = runner.invoke(cli, [*args, "--history", str(history), "--export-solution", str(solution)])
    assert result.exit_code == 0, result.output
    assert "cgne: converged" in result.output
    assert history.read_text().splitlines()[0] == "step,res"
    rows = solution.read_text().splitlines()
    assert rows[0] == "x,u"
    assert len(rows) == 1 + 52


@pytest.mark.parametrize(
    "args",
    [
        ["--solver", "lsqr", "--scheme", "upwind", "--nu", "0.01", "--precond", "factor:trid"],
        ["--solver", "gmres", "--nu", "0.01", "--precond", "factor"],
        ["--solver", "gmres", "--scale", "h2", "--precond", "polar-left"],
        ["--solver", "lsqr", "--scale", "h2", "--tol", "1e-8"],
        ["--scheme", "upwind", "--scale", "h2", "--precond", "factor"],
    ],
)
def test_solve_fd1d_variants(runner, args):
    result = runner.invoke(cli, ["solve", "fd1d", "--n", "50", *args])
    assert result.exit_code == 0, result.output
    assert "converged" in result.output


def test_solve_fd1d_not_converged(runner):
    result = runner.invoke(cli, ["solve", "fd1d", "--max-iter", "1"])
    assert result.exit_code == EXIT_SOLVER
    assert "max-iter" in result.output


def test_solve_fd1d_events(runner, tmp_path):
    events = tmp_path / "events.jsonl"
    args = ["solve", "fd1d", "--n", "20", "--scale", "h2", "-p", "polar-left"]
    result = runner.invoke(cli, [*args, "--events", str(events)])
    assert result.exit_code == 0, result.output
    lines = [json.loads(line) for line in events.read_text().splitlines()]
    assert lines[0]["event"] == "solve:start"
    assert lines[-1]["event"] == "solve:end"


@pytest.mark.parametrize(
    "args",
    [
        [],
        ["--variant", "rd-gmg"],
        ["--precond", "gmg:omega=1.2,smooth=1"],
        ["--precond", "direct:lu", "--wind", "diag"],
        ["--variant", "rd-projected", "--precond", "inner-cg:tol=1e-8"],
        ["--variant", "rd-projected", "--precond", "direct"],
    ],
)
def test_solve_fem2d(runner, args):
    result = runner.invoke(cli, ["solve", "fem2d", "--mesh", "8", *args])
    assert result.exit_code == 0, result.output
    assert "cgne: converged" in result.output


def test_solve_fem2d_export(runner, tmp_path):
    out = tmp_path / "u.csv"
    result = runner.invoke(cli, ["solve", "fem2d", "--mesh", "4", "--export-solution", str(out)])
    assert result.exit_code == 0, result.output
    rows = out.read_text().splitlines()
    assert rows[0] == "x,y,u"
    assert len(rows) == 1 + 25


# =============================================================================
# Matrix export
# =============================================================================


@pytest.mark.parametrize(
    "system, args, size",
    [
        ("fd1d", ["--n", "12"], "12 12"),
        ("fd1d-factor", ["--n", "12"], "12 12"),
        ("fem2d-mass", ["--mesh", "4"], "9 9"),
        ("fem2d", ["--mesh", "4", "--wind", "diag"], "9 9"),
    ],
)
def test_export_mm(runner, tmp_path, system, args, size):
    out = tmp_path / f"{system}.mtx"
    result = runner.invoke(cli, ["export-mm", system, "--out", str(out), *args])
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert lines[0].startswith("%%MatrixMarket matrix coordinate real general")
    assert any(system in line for line in lines if line.startswith("%"))
    size_line = next(line for line in lines if not line.startswith("%"))
    assert size_line.startswith(size)
