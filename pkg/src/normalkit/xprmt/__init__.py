"""Experiment catalog, runner, golden comparison and result storage."""

from .compare import GOLDEN_PACKAGE, compare, list_golden, load_golden
from .fem import (
    DENSE_PROJECTED_MAX_MESH,
    HISTORY,
    RD_NUS,
    TABLE4,
    TABLE5,
    TABLE6_DIRECT,
    TABLE6_GMG,
    TABLE7_DIRECT,
    TABLE7_GMG,
    TABLE8,
    fem_choice_preconditioner,
    fem_preconditioner,
    history_filename,
    riesz_variant,
    run_fem_experiment,
    run_history,
    solve_fem,
    variant_matrix,
)
from .models import (
    BREAKDOWN_MARK,
    DASH,
    CellDefaults,
    CellOverride,
    CellVerdict,
    CheckMode,
    ComparisonReport,
    ExperimentFamily,
    ExperimentSpec,
    FemVariant,
    GoldenCell,
    GoldenTable,
    TableCell,
    TableResult,
    format_param,
)
from .registry import ExperimentRegistry
from .runner import CellJob, cell_from_report, run_grid
from .store import DEFAULT_RESULTS_DIR, ResultStore, StoredResult
from .tables import (
    CENTERED_NUS,
    FD_COLUMNS,
    TABLE1,
    TABLE1_COLUMNS,
    TABLE2,
    TABLE3,
    UPWIND_NUS,
    dense_factor_preconditioner,
    fd_preconditioner,
    run_table1,
    run_table_fd,
)

__all__ = [
    # Models
    "BREAKDOWN_MARK",
    "DASH",
    "ExperimentFamily",
    "ExperimentSpec",
    "FemVariant",
    "TableCell",
    "TableResult",
    "format_param",
    # Golden tables
    "CellDefaults",
    "CellOverride",
    "CellVerdict",
    "CheckMode",
    "ComparisonReport",
    "GoldenCell",
    "GoldenTable",
    "GOLDEN_PACKAGE",
    "compare",
    "list_golden",
    "load_golden",
    # Running
    "CellJob",
    "ExperimentRegistry",
    "cell_from_report",
    "run_grid",
    # 1D tables
    "CENTERED_NUS",
    "FD_COLUMNS",
    "TABLE1",
    "TABLE1_COLUMNS",
    "TABLE2",
    "TABLE3",
    "UPWIND_NUS",
    "dense_factor_preconditioner",
    "fd_preconditioner",
    "run_table1",
    "run_table_fd",
    # 2D tables
    "DENSE_PROJECTED_MAX_MESH",
    "HISTORY",
    "RD_NUS",
    "TABLE4",
    "TABLE5",
    "TABLE6_DIRECT",
    "TABLE6_GMG",
    "TABLE7_DIRECT",
    "TABLE7_GMG",
    "TABLE8",
    "fem_choice_preconditioner",
    "fem_preconditioner",
    "history_filename",
    "riesz_variant",
    "run_fem_experiment",
    "run_history",
    "solve_fem",
    "variant_matrix",
    # Storage
    "DEFAULT_RESULTS_DIR",
    "ResultStore",
    "StoredResult",
]
