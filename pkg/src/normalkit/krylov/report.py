"""Solver configuration and the per-run report."""

import csv
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..errors import DimensionError

logger = logging.getLogger(__name__)


class Termination(str, Enum):
    RESIDUAL_TOL = "residual-tol"
    MAX_ITER = "max-iter"
    BREAKDOWN = "breakdown"


class Monitor(str, Enum):
    """What the stopping test looks at."""

    TRUE_RESIDUAL = "true-residual"  # ||A x_k - b||_2 recomputed every step
    RECURRENCE = "recurrence"  # GMRES only: least-squares residual estimate, checked explicitly at the end


class KrylovConfig(BaseModel):
    """Stopping rule and bookkeeping options shared by all solvers."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    tol_abs: float = Field(1e-5, gt=0, description="Stop once the monitored residual 2-norm is below this")
    max_iter: int = Field(1000, ge=1)
    monitor: Monitor = Monitor.TRUE_RESIDUAL
    x0: np.ndarray | None = Field(None, description="Initial guess (zero when omitted)")
    keep_iterates: bool = Field(False, description="Retain every iterate in SolveReport.iterates")
    max_basis: int | None = Field(None, ge=1, description="GMRES Krylov basis limit (None = unlimited)")

    def initial_guess(self, n: int) -> np.ndarray:
        if self.x0 is None:
            return np.zeros(n)
        x0 = np.array(self.x0, dtype=float)
        if x0.shape != (n,):
            raise DimensionError(f"x0 has shape {x0.shape}, expected ({n},)")
        return x0


@dataclass
class SolveReport:
    """Outcome of one Krylov solve. ``residual_history[k]`` is the residual after step k."""

    solver: str
    iterations: int
    converged: bool
    termination: Termination
    residual_history: list[float]
    solution: np.ndarray
    wall_time: float
    tol_abs: float
    extras: dict[str, Any] = field(default_factory=dict)
    iterates: list[np.ndarray] | None = None

    def __post_init__(self):
        if len(self.residual_history) != self.iterations + 1:
            raise ValueError(
                f"residual history has {len(self.residual_history)} entries for {self.iterations} iterations"
            )

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1]

    def to_csv(self, path: str | Path) -> Path:
        """Write the history as ``step,res`` rows."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["step", "res"])
            for step, res in enumerate(self.residual_history):
                writer.writerow([step, repr(float(res))])
        logger.debug(f"Wrote {len(self.residual_history)} history rows to {path}")
        return path

    def summary(self) -> dict[str, Any]:
        """JSON-friendly digest (no vectors)."""
        return {
            "solver": self.solver,
            "iterations": self.iterations,
            "converged": self.converged,
            "termination": self.termination.value,
            "final_residual": self.final_residual,
            "tol_abs": self.tol_abs,
            "wall_time": self.wall_time,
        }
