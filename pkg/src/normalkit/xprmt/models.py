"""Pydantic models for experiments, result tables and golden tables."""

import math
from enum import Enum
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

DASH = "-"
BREAKDOWN_MARK = "!"


class ExperimentFamily(str, Enum):
    TABLE1 = "table1"  # dense factor preconditioners, 1D centered
    FD = "fd"  # GMRES(P) vs CGNE(R^T R) vs CGNE(P^T P), 1D
    FEM = "fem"  # CGNE with Riesz-weighted normal equations, 2D
    HISTORY = "history"  # per-step residual CSVs


class FemVariant(str, Enum):
    L2_ANISO = "l2-aniso"
    RD_DIRECT = "rd-direct"
    RD_PROJECTED = "rd-projected"
    RD_GMG = "rd-gmg"


def format_param(value: float | int) -> str:
    """Row/column key of a numeric parameter: integers as is, floats in %g form."""
    if isinstance(value, int):
        return str(value)
    return f"{value:g}"


class ExperimentSpec(BaseModel):
    """A named, fully specified experiment."""

    model_config = ConfigDict(frozen=True)

    name: str
    title: str
    family: ExperimentFamily
    description: str = ""
    scheme: Literal["centered", "upwind"] | None = None
    variant: FemVariant | None = None
    wind: Literal["x", "diag"] = "x"
    ns: list[int] = Field(default_factory=list)
    nus: list[float] = Field(default_factory=list)
    meshes: list[int] = Field(default_factory=list)
    delta_sd: float = 1e-4
    tol_abs: float = Field(default=1e-5, gt=0)
    max_iter: int = Field(default=10_000, ge=1)
    golden: str | None = None
    slow: bool = False

    @model_validator(mode="after")
    def _check_family(self) -> "ExperimentSpec":
        if self.family == ExperimentFamily.FD and self.scheme is None:
            raise ValueError("fd experiments need a scheme")
        if self.family in (ExperimentFamily.FEM, ExperimentFamily.HISTORY) and not self.meshes:
            raise ValueError("fem experiments need at least one mesh")
        if self.family == ExperimentFamily.FEM and self.variant is None:
            raise ValueError("fem experiments need a variant")
        return self


class TableCell(BaseModel):
    row: str
    column: str
    iterations: int | None = None  # None: no count (dash or breakdown)
    termination: str = "residual-tol"
    final_residual: float | None = None
    reason: str | None = None

    @property
    def breakdown(self) -> bool:
        return self.termination == "breakdown"

    @property
    def dash(self) -> bool:
        return self.iterations is None and not self.breakdown

    @property
    def display(self) -> str:
        if self.breakdown:
            return BREAKDOWN_MARK
        return DASH if self.iterations is None else str(self.iterations)


class TableResult(BaseModel):
    """Iteration counts on a (row parameter, column) grid plus the run's config echo."""

    experiment: str
    title: str = ""
    row_label: str
    column_label: str
    rows: list[str]
    columns: list[str]
    cells: list[TableCell]
    metadata: dict[str, Any] = Field(default_factory=dict)

    def cell(self, row: str, column: str) -> TableCell:
        for c in self.cells:
            if c.row == row and c.column == column:
                return c
        raise KeyError(f"no cell ({row}, {column}) in {self.experiment}")

    def has_cell(self, row: str, column: str) -> bool:
        return any(c.row == row and c.column == column for c in self.cells)

    def grid(self) -> list[list[str]]:
        return [[self.cell(r, c).display for c in self.columns] for r in self.rows]

    def to_csv(self, path: Path | str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [",".join([self.row_label, *self.columns])]
        lines += [",".join([r, *row]) for r, row in zip(self.rows, self.grid(), strict=True)]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def to_json(self, path: Path | str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2), encoding="utf-8")
        return path

    @classmethod
    def from_json(cls, path: Path | str) -> "TableResult":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))


# =============================================================================
# Golden tables
# =============================================================================


class CheckMode(str, Enum):
    NEAR = "near"  # |actual - expected| <= slack
    AT_MOST = "at-most"  # actual <= expected + slack
    BOUNDS = "bounds"  # only exceeds / maximum are checked


class GoldenCell(BaseModel):
    row: str
    column: str
    expected: int | None  # None: the run must not converge
    mode: CheckMode = CheckMode.NEAR
    slack_abs: int = 0
    slack_rel: float = 0.0
    exceeds: int | None = None
    maximum: int | None = None

    @property
    def slack(self) -> int:
        """Allowed deviation: the larger of the absolute and relative slack."""
        if self.expected is None:
            return 0
        return max(self.slack_abs, math.floor(self.slack_rel * self.expected + 1e-9))


class CellDefaults(BaseModel):
    mode: CheckMode = CheckMode.NEAR
    slack_abs: int = 0
    slack_rel: float = 0.0
    exceeds: int | None = None
    maximum: int | None = None


class CellOverride(CellDefaults):
    row: str
    column: str
    expected: int | Literal["-"] | None = None


class GoldenTable(BaseModel):
    """
    Expected iteration counts transcribed from published tables.

    ``values`` holds the grid (``"-"`` for a dash); ``defaults`` apply to every
    cell and ``overrides`` replace them for single cells.
    """

    experiment: str
    title: str = ""
    row_label: str
    column_label: str
    rows: list[str]
    columns: list[str]
    values: list[list[int | Literal["-"]]]
    defaults: CellDefaults = Field(default_factory=CellDefaults)
    overrides: list[CellOverride] = Field(default_factory=list)
    mesh_independence: int | None = None
    note: str = ""

    @model_validator(mode="after")
    def _check_shape(self) -> "GoldenTable":
        if len(self.values) != len(self.rows) or any(len(v) != len(self.columns) for v in self.values):
            raise ValueError(f"golden table {self.experiment}: values must be {len(self.rows)}x{len(self.columns)}")
        for o in self.overrides:
            if o.row not in self.rows or o.column not in self.columns:
                raise ValueError(f"golden table {self.experiment}: no cell ({o.row}, {o.column}) to override")
        return self

    def cells(self) -> list[GoldenCell]:
        overrides = {(o.row, o.column): o for o in self.overrides}
        cells = []
        for r, row in zip(self.rows, self.values, strict=True):
            for c, value in zip(self.columns, row, strict=True):
                base = self.defaults.model_dump()
                expected = None if value == DASH else value
                o = overrides.get((r, c))
                if o is not None:
                    base.update(o.model_dump(exclude={"row", "column", "expected"}, exclude_unset=True))
                    if o.expected is not None:
                        expected = None if o.expected == DASH else o.expected
                cells.append(GoldenCell(row=r, column=c, expected=expected, **base))
        return cells


class CellVerdict(BaseModel):
    row: str
    column: str
    expected: str
    actual: str
    passed: bool
    reason: str = ""


class ComparisonReport(BaseModel):
    experiment: str
    verdicts: list[CellVerdict]
    table_checks: list[CellVerdict] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts) and all(v.passed for v in self.table_checks)

    @property
    def failures(self) -> list[CellVerdict]:
        return [v for v in [*self.verdicts, *self.table_checks] if not v.passed]
