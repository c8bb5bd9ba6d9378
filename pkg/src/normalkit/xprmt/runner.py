"""Cell-grid execution shared by every experiment family."""

import logging
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy

from .. import __version__
from ..errors import NormalkitError
from ..krylov import SolveReport, Termination
from ..protocols import EventCallback
from .models import ExperimentSpec, TableCell, TableResult

logger = logging.getLogger(__name__)

CellFn = Callable[[], SolveReport]


@dataclass(frozen=True)
class CellJob:
    row: str
    column: str
    run: CellFn


def cell_from_report(row: str, column: str, report: SolveReport) -> TableCell:
    """
    Converged runs give their iteration count. Max-iter runs are a dash; breakdowns
    keep their own termination so they never pass as a dash.
    """
    if report.termination == Termination.RESIDUAL_TOL:
        return TableCell(
            row=row,
            column=column,
            iterations=len(report.residual_history) - 1,
            termination=report.termination.value,
            final_residual=report.final_residual,
        )
    reason = report.termination.value
    if report.termination == Termination.BREAKDOWN:
        reason = f"breakdown after {report.iterations} iterations"
    return TableCell(
        row=row,
        column=column,
        iterations=None,
        termination=report.termination.value,
        final_residual=report.final_residual,
        reason=reason,
    )


def _execute(job: CellJob) -> TableCell:
    try:
        return cell_from_report(job.row, job.column, job.run())
    except NormalkitError as e:
        logger.warning(f"cell ({job.row}, {job.column}) failed: {e}")
        return TableCell(row=job.row, column=job.column, iterations=None, termination="error", reason=str(e))


def run_grid(
    spec: ExperimentSpec,
    *,
    row_label: str,
    column_label: str,
    rows: list[str],
    columns: list[str],
    jobs: list[CellJob],
    threads: int = 1,
    event_callback: EventCallback | None = None,
) -> TableResult:
    """
    Run every cell job and assemble the table.

    Cells are independent; with ``threads > 1`` they run in a thread pool and
    results are still reported in job order.
    """
    if event_callback:
        event_callback("experiment:start", {"experiment": spec.name, "config": spec.model_dump(mode="json")})
    logger.info(f"{spec.name}: {len(jobs)} cells, threads={threads}")

    def run_one(job: CellJob) -> TableCell:
        cell = _execute(job)
        logger.info(f"{spec.name}: ({job.row}, {job.column}) -> {cell.display}")
        return cell

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(run_one, jobs))
    else:
        cells = [run_one(job) for job in jobs]

    if event_callback:
        for cell in cells:
            event_callback("experiment:cell", {"experiment": spec.name, **cell.model_dump()})

    result = TableResult(
        experiment=spec.name,
        title=spec.title,
        row_label=row_label,
        column_label=column_label,
        rows=rows,
        columns=columns,
        cells=cells,
        metadata={
            "config": spec.model_dump(mode="json"),
            "versions": {"normalkit": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        },
    )
    if event_callback:
        event_callback("experiment:end", {"experiment": spec.name, "grid": result.grid()})
    return result
