import json
import time

import numpy as np
import pytest
import yaml
from pydantic import ValidationError

from normalkit.errors import ConfigError, MeshError, ShapeMismatchError
from normalkit.krylov import SolveReport, Termination
from normalkit.xprmt import (
    BREAKDOWN_MARK,
    HISTORY,
    TABLE1,
    TABLE1_COLUMNS,
    TABLE2,
    TABLE5,
    TABLE8,
    CellJob,
    CheckMode,
    ExperimentFamily,
    ExperimentRegistry,
    ExperimentSpec,
    GoldenCell,
    GoldenTable,
    ResultStore,
    TableCell,
    TableResult,
    cell_from_report,
    compare,
    format_param,
    history_filename,
    list_golden,
    load_golden,
    run_grid,
    run_history,
)


def fake_report(iterations: int, termination: Termination = Termination.RESIDUAL_TOL) -> SolveReport:
    return SolveReport(
        solver="fake",
        iterations=iterations,
        converged=termination == Termination.RESIDUAL_TOL,
        termination=termination,
        residual_history=[1.0] * (iterations + 1),
        solution=np.zeros(1),
        wall_time=0.0,
        tol_abs=1e-5,
    )


def make_table(rows, columns, values, experiment="demo") -> TableResult:
    cells = [
        TableCell(row=r, column=c, iterations=None if v == "-" else v)
        for r, vals in zip(rows, values, strict=True)
        for c, v in zip(columns, vals, strict=True)
    ]
    return TableResult(
        experiment=experiment, row_label="nu", column_label="mesh", rows=rows, columns=columns, cells=cells
    )


def make_golden(rows, columns, values, **extra) -> GoldenTable:
    return GoldenTable(
        experiment="demo", row_label="nu", column_label="mesh", rows=rows, columns=columns, values=values, **extra
    )


# =============================================================================
# Models
# =============================================================================


@pytest.mark.parametrize("value, text", [(10, "10"), (1e-2, "0.01"), (5e-5, "5e-05"), (1.0, "1")])
def test_format_param(value, text):
    assert format_param(value) == text


@pytest.mark.parametrize(
    "kwargs",
    [
        {"family": ExperimentFamily.FD},
        {"family": ExperimentFamily.FEM, "variant": "rd-direct"},
        {"family": ExperimentFamily.FEM, "meshes": [8]},
        {"family": ExperimentFamily.TABLE1, "tol_abs": 0.0},
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(ValidationError):
        ExperimentSpec(name="x", title="x", **kwargs)


def test_table_result_files(tmp_path):
    t = make_table(["0.01", "0.001"], ["8", "16"], [[3, 4], [5, "-"]])
    assert t.grid() == [["3", "4"], ["5", "-"]]
    assert t.cell("0.001", "16").dash
    with pytest.raises(KeyError):
        t.cell("1", "8")
    csv_text = t.to_csv(tmp_path / "t.csv").read_text()
    assert csv_text == "nu,8,16\n0.01,3,4\n0.001,5,-\n"
    back = TableResult.from_json(t.to_json(tmp_path / "t.json"))
    assert back == t


# =============================================================================
# Golden tables
# =============================================================================


def test_packaged_golden_tables():
    names = list_golden()
    assert names == ["table1", "table2", "table3", "table4", "table5", "table8"]
    for name in names:
        golden = load_golden(name)
        assert golden.experiment == name
        assert len(golden.cells()) == len(golden.rows) * len(golden.columns)


def test_golden_overrides_apply():
    cells = {(c.row, c.column): c for c in load_golden("table1").cells()}
    assert cells[("10", "QR")].slack == 1
    assert cells[("100", "RQ")].expected is None
    override = cells[("1000", "polar-left")]
    assert override.mode == CheckMode.AT_MOST
    assert override.slack == 0


def test_golden_from_path(tmp_path):
    path = tmp_path / "custom.yaml"
    golden = {"experiment": "demo", "row_label": "nu", "column_label": "mesh", "rows": ["1"], "columns": ["8"]}
    path.write_text(yaml.safe_dump({**golden, "values": [[3]]}))
    assert load_golden(path).values == [[3]]
    with pytest.raises(ConfigError):
        load_golden("no-such-table")


def test_golden_shape_checked():
    with pytest.raises(ValidationError):
        make_golden(["1", "2"], ["8"], [[1]])
    with pytest.raises(ValidationError):
        make_golden(["1"], ["8"], [[1]], overrides=[{"row": "2", "column": "8", "expected": 3}])


@pytest.mark.parametrize(
    "kwargs, slack",
    [
        ({"expected": 100, "slack_abs": 2, "slack_rel": 0.05}, 5),
        ({"expected": 100, "slack_abs": 7, "slack_rel": 0.05}, 7),
        ({"expected": 33, "slack_rel": 0.1}, 3),
        ({"expected": None, "slack_abs": 4}, 0),
    ],
)
def test_slack(kwargs, slack):
    assert GoldenCell(row="r", column="c", **kwargs).slack == slack


# =============================================================================
# Comparison
# =============================================================================


def test_compare_pass_and_fail():
    golden = make_golden(["0.01"], ["8", "16"], [[10, 20]], defaults={"slack_abs": 1})
    assert compare(make_table(["0.01"], ["8", "16"], [[11, 19]]), golden).passed
    report = compare(make_table(["0.01"], ["8", "16"], [[12, 20]]), golden)
    assert not report.passed
    assert [(f.row, f.column) for f in report.failures] == [("0.01", "8")]


def test_dash_is_never_absorbed_by_slack():
    golden = make_golden(["1"], ["8", "16"], [["-", 5]], defaults={"slack_abs": 100})
    assert compare(make_table(["1"], ["8", "16"], [["-", 5]]), golden).passed
    report = compare(make_table(["1"], ["8", "16"], [[999, "-"]]), golden)
    assert [f.reason for f in report.failures] == ["dash mismatch", "dash mismatch"]


def test_breakdown_never_passes_as_dash():
    golden = make_golden(["1"], ["8"], [["-"]])
    table = make_table(["1"], ["8"], [["-"]])
    table.cells[0].termination = "breakdown"
    report = compare(table, golden)
    assert not report.passed
    assert report.failures[0].reason == "solver breakdown"
    assert report.failures[0].actual == BREAKDOWN_MARK


def test_at_most_mode():
    golden = make_golden(["1"], ["8"], [[5]], defaults={"mode": "at-most"})
    assert compare(make_table(["1"], ["8"], [[1]]), golden).passed
    assert not compare(make_table(["1"], ["8"], [[6]]), golden).passed


def test_bounds_mode_like_table4():
    golden = load_golden("table4")
    ok = make_table(golden.rows, golden.columns, [[4000], [2500], [2001], [9000]])
    assert compare(ok, golden).passed
    low = make_table(golden.rows, golden.columns, [[4000], [1500], [2500], [2500]])
    assert [f.row for f in compare(low, golden).failures] == ["0.005"]
    # the near override on the first row: 4231 +- floor(0.25 * 4231)
    off = make_table(golden.rows, golden.columns, [[5300], [2500], [2500], [2500]])
    assert [f.row for f in compare(off, golden).failures] == ["0.01"]


def test_mesh_independence():
    golden = make_golden(["1"], ["8", "16", "32"], [[5, 5, 5]], defaults={"slack_abs": 3}, mesh_independence=2)
    assert compare(make_table(["1"], ["8", "16", "32"], [[4, 5, 6]]), golden).passed
    report = compare(make_table(["1"], ["8", "16", "32"], [[3, 5, 8]]), golden)
    assert report.verdicts and all(v.passed for v in report.verdicts)
    assert not report.passed
    assert report.table_checks[0].reason == "not mesh independent"


def test_shape_mismatch_and_subset():
    golden = make_golden(["1", "2"], ["8"], [[3], [4]])
    partial = make_table(["1"], ["8"], [[3]])
    with pytest.raises(ShapeMismatchError):
        compare(partial, golden)
    assert len(compare(partial, golden, allow_subset=True).verdicts) == 1
    with pytest.raises(ShapeMismatchError):
        compare(make_table(["9"], ["8"], [[3]]), golden, allow_subset=True)


# =============================================================================
# Runner
# =============================================================================


def test_cell_from_report():
    cell = cell_from_report("1", "8", fake_report(7))
    assert cell.iterations == 7
    dash = cell_from_report("1", "8", fake_report(50, Termination.MAX_ITER))
    assert dash.dash
    assert dash.reason == "max-iter"
    broken = cell_from_report("1", "8", fake_report(3, Termination.BREAKDOWN))
    assert broken.breakdown
    assert not broken.dash
    assert broken.display == BREAKDOWN_MARK
    assert broken.reason == "breakdown after 3 iterations"


@pytest.mark.parametrize("threads", [1, 3])
def test_run_grid_keeps_job_order(threads):
    def job(row, col, k):
        def run():
            time.sleep(0.001 * (5 - k))
            if k == 4:
                raise MeshError("cannot coarsen")
            return fake_report(k)

        return CellJob(row, col, run)

    events = []
    spec = TABLE1.model_copy(update={"name": "demo"})
    jobs = [job(r, c, 2 * i + j) for i, r in enumerate(["a", "b", "c"]) for j, c in enumerate(["x", "y"])]
    result = run_grid(
        spec,
        row_label="r",
        column_label="c",
        rows=["a", "b", "c"],
        columns=["x", "y"],
        jobs=jobs,
        threads=threads,
        event_callback=lambda e, d: events.append(e),
    )
    assert result.grid() == [["0", "1"], ["2", "3"], ["-", "5"]]
    failed = result.cell("c", "x")
    assert failed.termination == "error"
    assert "cannot coarsen" in failed.reason
    assert events[0] == "experiment:start"
    assert events.count("experiment:cell") == 6
    assert events[-1] == "experiment:end"
    assert result.metadata["config"]["name"] == "demo"
    assert "numpy" in result.metadata["versions"]


# =============================================================================
# Registry
# =============================================================================


def test_registry_catalog():
    reg = ExperimentRegistry()
    names = [s.name for s in reg.list_all()]
    assert names[0] == "table1"
    assert {"table2", "table3", "table4", "table5", "table6-gmg", "table7-direct", "table8", "history"} <= set(names)
    assert [s.name for s in reg.list_by_family("fd")] == ["table2", "table3"]
    assert reg.get_info("nope") is None


def test_registry_resolve():
    reg = ExperimentRegistry()
    spec = reg.resolve("table5", meshes=[8], nus=None)
    assert spec.meshes == [8]
    assert spec.nus == TABLE5.nus
    assert reg.resolve("table5") is TABLE5
    with pytest.raises(ConfigError):
        reg.resolve("nope")
    with pytest.raises(ConfigError):
        reg.resolve("table5", colour="red")
    with pytest.raises(ValidationError):
        reg.resolve("table5", tol_abs=-1.0)


def test_registry_register():
    reg = ExperimentRegistry()
    custom = TABLE5.model_copy(update={"name": "tiny", "meshes": [8], "nus": [1e-2]})
    reg.register(custom)
    assert reg.get_info("tiny") is custom
    with pytest.raises(ConfigError):
        reg.register(custom)
    with pytest.raises(ConfigError):
        reg.register(TABLE1)
    assert reg.unregister("tiny")
    assert not reg.unregister("tiny")


def test_registry_refuses_history():
    with pytest.raises(ConfigError):
        ExperimentRegistry().run(HISTORY)


# =============================================================================
# Small experiment runs
# =============================================================================


def test_small_table1():
    result = ExperimentRegistry().run(TABLE1.model_copy(update={"ns": [10]}))
    assert result.columns == TABLE1_COLUMNS
    assert all(not c.dash for c in result.cells)
    assert result.cell("10", "QR").iterations <= 2
    assert result.cell("10", "polar-left").iterations <= 2
    # A = RQ gives R^T R != A^T A, so no one-step convergence
    assert abs(result.cell("10", "RQ").iterations - 12) <= 1


def test_small_fd_table():
    spec = TABLE2.model_copy(update={"ns": [200], "nus": [1e-2]})
    result = ExperimentRegistry().run(spec, threads=2)
    counts = [result.cell("0.01", c).iterations for c in result.columns]
    assert None not in counts
    # R^T R equals P^T P up to rounding
    assert abs(counts[1] - counts[2]) <= 1


def test_small_projected_table():
    spec = ExperimentRegistry().resolve("table5", meshes=[8], nus=[1e-2])
    result = ExperimentRegistry().run(spec)
    assert result.cell("0.01", "8").iterations <= 4


def test_multigrid_needs_coarsenable_mesh():
    with pytest.raises(MeshError):
        ExperimentRegistry().run(TABLE8.model_copy(update={"meshes": [4]}))


def test_history_files(tmp_path):
    assert history_filename("diag", 0.01, 8) == "fem_advection_mass_normal_eq_diagflow_0.01_8.0.csv"
    paths = run_history(tmp_path, HISTORY.model_copy(update={"meshes": [8], "nus": [0.01]}))
    assert [p.name for p in paths] == ["fem_advection_mass_normal_eq_diagflow_0.01_8.0.csv"]
    lines = paths[0].read_text().splitlines()
    assert lines[0] == "step,res"
    assert lines[1].startswith("0,")
    assert len(lines) >= 3


# =============================================================================
# Result store
# =============================================================================


def test_result_store(tmp_path):
    store = ResultStore(tmp_path / "results")
    t = make_table(["1"], ["8"], [[3]], experiment="Table 5")
    first = store.save(t)
    second = store.save(t)
    assert first.id == "table-5"
    assert second.id == "table-5-1"
    assert store.get("table-5").table == t
    with pytest.raises(ValueError):
        store.save(t, result_id="table-5")
    assert {s.id for s in store.list_by_experiment("Table 5")} == {"table-5", "table-5-1"}
    assert store.delete("table-5-1")
    assert not store.delete("table-5-1")
    assert store.get("table-5-1") is None


def test_result_store_skips_corrupt_files(tmp_path):
    store = ResultStore(tmp_path)
    store.save(make_table(["1"], ["8"], [[3]]), result_id="good")
    (tmp_path / "bad.json").write_text("{not json")
    assert [s.id for s in store.list_all()] == ["good"]
    assert store.get("bad") is None
    assert json.loads((tmp_path / "good.json").read_text())["experiment"] == "demo"
