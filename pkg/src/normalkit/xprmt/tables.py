"""1D experiments: dense factor preconditioners and the advection factor P."""

import logging

import numpy as np

from ..errors import ConfigError
from ..fd1d import Problem1D, Scaling, Scheme, advection_prec, assemble
from ..krylov import KrylovConfig, SolveReport, cgne, gmres
from ..matkit import Tridiagonal, polar, qr, rq
from ..precond import (
    PreconditionerChoice,
    PreconditionerHandle,
    PreconditionerKind,
    from_factor,
    identity_preconditioner,
    right_preconditioner,
)
from ..protocols import EventCallback
from .models import ExperimentFamily, ExperimentSpec, format_param
from .runner import CellJob, run_grid

logger = logging.getLogger(__name__)

TABLE1_KINDS = {
    "QR": PreconditionerKind.QR_R,
    "RQ": PreconditionerKind.RQ_R,
    "polar-left": PreconditionerKind.POLAR_LEFT,
    "polar-right": PreconditionerKind.POLAR_RIGHT,
}
TABLE1_COLUMNS = list(TABLE1_KINDS)
FD_COLUMNS = ["GMRES(P)", "CGNE(RtR)", "CGNE(PtP)"]

TABLE1 = ExperimentSpec(
    name="table1",
    title="Dense factor preconditioners, centered 1D problem (nu = beta = 1)",
    family=ExperimentFamily.TABLE1,
    description="CGNE with G = R^T R from QR / RQ of A and with the two polar factors of A.",
    scheme="centered",
    ns=[10, 100, 1000],
    nus=[1.0],
    tol_abs=1e-10,
    max_iter=1000,
    golden="table1",
)

UPWIND_NUS = [1e-2, 5e-3, 1e-3, 5e-4, 1e-4]
CENTERED_NUS = [*UPWIND_NUS, 5e-5, 1e-5, 5e-6, 1e-6]

TABLE2 = ExperimentSpec(
    name="table2",
    title="Upwind 1D problem, P = tridiag(-beta/h, beta/h, 0), n = 10^4",
    family=ExperimentFamily.FD,
    description="GMRES right-preconditioned by P against CGNE with R^T R (R from QR of P) and P^T P.",
    scheme="upwind",
    ns=[10_000],
    nus=UPWIND_NUS,
    golden="table2",
    slow=True,
)

TABLE3 = TABLE2.model_copy(
    update={
        "name": "table3",
        "title": "Centered 1D problem, P = tridiag(-beta/h, beta/h, 0), n = 10^4",
        "scheme": "centered",
        "nus": CENTERED_NUS,
        "golden": "table3",
    }
)


def dense_factor_preconditioner(a: np.ndarray, kind: PreconditionerKind) -> PreconditionerHandle:
    """G = P^T P for P taken from a factorization of the dense matrix A."""
    match kind:
        case PreconditionerKind.IDENTITY:
            return identity_preconditioner()
        case PreconditionerKind.QR_R:
            return from_factor(qr(a))
        case PreconditionerKind.RQ_R:
            return from_factor(rq(a))
        case PreconditionerKind.POLAR_LEFT:
            return from_factor(polar(a))  # (A^T A)^{1/2}
        case PreconditionerKind.POLAR_RIGHT:
            return from_factor(polar(a.T))  # (A A^T)^{1/2}
    raise ConfigError(f"'{kind.value}' is not a dense factor preconditioner")


def fd_preconditioner(
    choice: PreconditionerChoice, a: Tridiagonal, p: Problem1D, scale: Scaling | str = Scaling.NONE
) -> PreconditionerHandle:
    """Build G for a 1D system from a config string choice."""
    if choice.kind == PreconditionerKind.FACTOR:
        return from_factor(advection_prec(p, scale=scale))
    return dense_factor_preconditioner(a.toarray(), choice.kind)


def _table1_cell(n: int, column: str, spec: ExperimentSpec, event_callback: EventCallback | None):
    def run() -> SolveReport:
        p = Problem1D(nu=1.0, beta=1.0, n=n)
        a, b = assemble(p, Scheme.CENTERED, scale=Scaling.H2)
        g = dense_factor_preconditioner(a.toarray(), TABLE1_KINDS[column])
        cfg = KrylovConfig(tol_abs=spec.tol_abs, max_iter=spec.max_iter)
        return cgne(a, b, preconditioner=g, config=cfg, event_callback=event_callback)

    return run


def run_table1(spec: ExperimentSpec = TABLE1, *, threads: int = 1, event_callback: EventCallback | None = None):
    """
    CGNE iterations on the h^2-scaled centered system for each dense factor preconditioner.

    Rows are the number of interior nodes; a dash marks no convergence within ``max_iter``.
    """
    jobs = [
        CellJob(str(n), col, _table1_cell(n, col, spec, event_callback)) for n in spec.ns for col in TABLE1_COLUMNS
    ]
    return run_grid(
        spec,
        row_label="n",
        column_label="preconditioner",
        rows=[str(n) for n in spec.ns],
        columns=TABLE1_COLUMNS,
        jobs=jobs,
        threads=threads,
        event_callback=event_callback,
    )


def _fd_cell(nu: float, column: str, spec: ExperimentSpec, event_callback: EventCallback | None):
    def run() -> SolveReport:
        p = Problem1D(nu=nu, beta=1.0, n=spec.ns[0])
        a, b = assemble(p, spec.scheme)  # type: ignore[arg-type]
        factor = advection_prec(p)
        cfg = KrylovConfig(tol_abs=spec.tol_abs, max_iter=spec.max_iter)
        if column == "GMRES(P)":
            m = right_preconditioner(factor.solve, "P^{-1}")
            return gmres(a, b, preconditioner=m, config=cfg, event_callback=event_callback)
        g = from_factor(qr(factor)) if column == "CGNE(RtR)" else from_factor(factor)
        return cgne(a, b, preconditioner=g, config=cfg, event_callback=event_callback)

    return run


def run_table_fd(
    scheme: Scheme | str = Scheme.UPWIND,
    spec: ExperimentSpec | None = None,
    *,
    threads: int = 1,
    event_callback: EventCallback | None = None,
):
    """
    GMRES(P), CGNE(R^T R) and CGNE(P^T P) iteration counts over a sweep of nu.

    R is the triangular factor of the Givens QR of P, so R^T R = P^T P up to rounding.
    """
    if spec is None:
        spec = TABLE2 if Scheme(scheme) == Scheme.UPWIND else TABLE3
    if len(spec.ns) != 1:
        raise ConfigError(f"{spec.name}: fd tables use a single n, got {spec.ns}")
    rows = [format_param(nu) for nu in spec.nus]
    jobs = [
        CellJob(format_param(nu), col, _fd_cell(nu, col, spec, event_callback)) for nu in spec.nus for col in FD_COLUMNS
    ]
    return run_grid(
        spec,
        row_label="nu",
        column_label="method",
        rows=rows,
        columns=FD_COLUMNS,
        jobs=jobs,
        threads=threads,
        event_callback=event_callback,
    )
