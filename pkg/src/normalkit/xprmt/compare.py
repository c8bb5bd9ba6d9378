"""Comparison of result tables against golden tables."""

import logging
from importlib import resources
from pathlib import Path

import yaml

from ..errors import ConfigError, ShapeMismatchError
from .models import DASH, CellVerdict, CheckMode, ComparisonReport, GoldenCell, GoldenTable, TableCell, TableResult

logger = logging.getLogger(__name__)

GOLDEN_PACKAGE = "normalkit.data.golden"


def list_golden() -> list[str]:
    """Names of the golden tables shipped with the package."""
    root = resources.files(GOLDEN_PACKAGE)
    return sorted(p.name.removesuffix(".yaml") for p in root.iterdir() if p.name.endswith(".yaml"))


def load_golden(name_or_path: str | Path) -> GoldenTable:
    """
    Load a golden table by packaged name (``table5``) or from a YAML path.

    Raises:
        ConfigError: if the table does not exist
    """
    path = Path(name_or_path)
    if path.suffix in (".yaml", ".yml") and path.exists():
        text = path.read_text(encoding="utf-8")
    else:
        resource = resources.files(GOLDEN_PACKAGE) / f"{name_or_path}.yaml"
        if not resource.is_file():
            raise ConfigError(f"no golden table '{name_or_path}' (available: {', '.join(list_golden())})")
        text = resource.read_text(encoding="utf-8")
    return GoldenTable.model_validate(yaml.safe_load(text))


def _verdict(g: GoldenCell, cell: TableCell) -> CellVerdict:
    actual = cell.iterations
    expected_text = DASH if g.expected is None else str(g.expected)
    actual_text = cell.display

    def verdict(passed: bool, reason: str = "") -> CellVerdict:
        return CellVerdict(
            row=g.row, column=g.column, expected=expected_text, actual=actual_text, passed=passed, reason=reason
        )

    if cell.breakdown:
        return verdict(False, "solver breakdown")
    # the dash sentinel is never absorbed by slack
    if g.expected is None or actual is None:
        same = g.expected is None and actual is None
        return verdict(same, "" if same else "dash mismatch")
    if g.exceeds is not None and actual <= g.exceeds:
        return verdict(False, f"expected more than {g.exceeds}")
    if g.maximum is not None and actual > g.maximum:
        return verdict(False, f"expected at most {g.maximum}")
    match g.mode:
        case CheckMode.AT_MOST:
            if actual > g.expected + g.slack:
                return verdict(False, f"expected at most {g.expected + g.slack}")
        case CheckMode.NEAR:
            if abs(actual - g.expected) > g.slack:
                return verdict(False, f"off by {actual - g.expected:+d}, slack {g.slack}")
    return verdict(True)


def compare(result: TableResult, golden: GoldenTable, *, allow_subset: bool = False) -> ComparisonReport:
    """
    Per-cell verdicts of ``result`` against ``golden``.

    With ``allow_subset`` golden cells missing from the result are skipped
    instead of raising.

    Raises:
        ShapeMismatchError: when a golden cell has no counterpart in the result
    """
    verdicts = []
    for g in golden.cells():
        if not result.has_cell(g.row, g.column):
            if allow_subset:
                continue
            raise ShapeMismatchError(f"{result.experiment}: result has no cell ({g.row}, {g.column})")
        verdicts.append(_verdict(g, result.cell(g.row, g.column)))
    if not verdicts:
        raise ShapeMismatchError(f"{result.experiment}: no cells in common with golden table {golden.experiment}")

    checks = []
    if golden.mesh_independence is not None:
        for row in golden.rows:
            counts = [
                result.cell(row, col).iterations
                for col in golden.columns
                if result.has_cell(row, col) and result.cell(row, col).iterations is not None
            ]
            if len(counts) < 2:
                continue
            spread = max(counts) - min(counts)
            checks.append(
                CellVerdict(
                    row=row,
                    column="*",
                    expected=f"spread <= {golden.mesh_independence}",
                    actual=f"spread {spread}",
                    passed=spread <= golden.mesh_independence,
                    reason="" if spread <= golden.mesh_independence else "not mesh independent",
                )
            )

    report = ComparisonReport(experiment=result.experiment, verdicts=verdicts, table_checks=checks)
    logger.info(
        f"compare {result.experiment}: {sum(v.passed for v in verdicts)}/{len(verdicts)} cells pass"
        + ("" if report.passed else f", {len(report.failures)} failure(s)")
    )
    return report
