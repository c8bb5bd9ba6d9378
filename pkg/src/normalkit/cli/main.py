"""Main CLI entry point for normalkit."""

import json
import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

import click
import numpy as np
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from .. import __version__
from ..errors import ConfigError, NormalkitError, ShapeMismatchError
from ..events import create_jsonl_event_callback
from ..fd1d import Problem1D, Scaling, Scheme, advection_prec, assemble
from ..fem2d import (
    FemProblem2D,
    StructuredMesh,
    Wind,
    assemble_advdiff,
    assemble_anisotropic,
    assemble_mass,
    assemble_reaction_diffusion,
    assemble_stiffness,
    export_solution_csv,
)
from ..krylov import KrylovConfig, SolveReport, cgne, gmres, lsqr
from ..matkit import polar, qr, rq, write_matrix_market
from ..precond import (
    PreconditionerChoice,
    PreconditionerKind,
    factor_solver,
    parse_preconditioner,
    right_preconditioner,
)
from ..protocols import EventCallback
from ..xprmt import (
    ComparisonReport,
    ExperimentFamily,
    ExperimentRegistry,
    FemVariant,
    ResultStore,
    TableResult,
    compare,
    fd_preconditioner,
    fem_choice_preconditioner,
    load_golden,
    run_history,
    solve_fem,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_COMPARE = 2
EXIT_CONFIG = 3


class NormalkitGroup(click.Group):
    """Click group that reports usage errors with the bad-config exit code."""

    def main(self, *args, **kwargs):
        kwargs.pop("standalone_mode", None)
        try:
            return super().main(*args, standalone_mode=False, **kwargs)
        except click.UsageError as e:
            e.show()
            sys.exit(EXIT_CONFIG)
        except click.ClickException as e:
            e.show()
            sys.exit(e.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_SOLVER)


@contextmanager
def exit_on_error() -> Iterator[None]:
    """Map library exceptions to exit codes: bad config 3, everything else 1."""
    try:
        yield
    except (ConfigError, ValidationError) as e:
        click.echo(f"Configuration error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    except NormalkitError as e:
        click.echo(f"Solver failure: {e}", err=True)
        sys.exit(EXIT_SOLVER)


def _console() -> Console:
    # created per call so output follows the current sys.stdout
    return Console(file=sys.stdout, highlight=False)


def _events(target: str | None) -> EventCallback | None:
    if target is None:
        return None
    return create_jsonl_event_callback(None if target == "-" else Path(target))


@click.group(cls=NormalkitGroup)
@click.version_option(__version__, prog_name="normalkit")
@click.option("-v", "--verbose", count=True, help="-v for INFO, -vv for DEBUG logging")
def cli(verbose: int):
    """normalkit - normal preconditioning for nonsymmetric PDE systems.

    Solves A x = b by CG on (Riesz-weighted) normal equations and
    reproduces the iteration-count tables of the convection-diffusion
    experiments.
    """
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True, show_path=verbose > 1)],
        force=True,
    )


# =============================================================================
# Output helpers
# =============================================================================


def print_table(result: TableResult) -> None:
    table = Table(title=result.title or result.experiment)
    table.add_column(result.row_label, style="bold")
    for col in result.columns:
        table.add_column(col, justify="right")
    for row, values in zip(result.rows, result.grid(), strict=True):
        table.add_row(row, *(f"[dim]{v}[/dim]" if v == "-" else v for v in values))
    _console().print(table)


def print_comparison(report: ComparisonReport) -> None:
    console = _console()
    failures = report.failures
    if failures:
        table = Table(title=f"{report.experiment}: {len(failures)} failing check(s)")
        for name in ("row", "column", "expected", "actual", "reason"):
            table.add_column(name)
        for v in failures:
            table.add_row(v.row, v.column, v.expected, v.actual, v.reason)
        console.print(table)
    passed = sum(v.passed for v in report.verdicts)
    status = "[green]PASS[/green]" if report.passed else "[red]FAIL[/red]"
    console.print(f"{status} {report.experiment}: {passed}/{len(report.verdicts)} cells within slack")


def print_report(report: SolveReport) -> None:
    status = "[green]converged[/green]" if report.converged else f"[red]{report.termination.value}[/red]"
    _console().print(
        f"{report.solver}: {status} after {report.iterations} iterations, "
        f"||b - A x|| = {report.final_residual:.3e} ({report.wall_time:.2f}s)"
    )


# =============================================================================
# Experiment Commands
# =============================================================================


@cli.group()
def experiments():
    """Browse the experiment catalog."""
    pass


@experiments.command("list")
@click.option("--family", "-f", type=click.Choice([f.value for f in ExperimentFamily]), help="Filter by family")
@click.option("--json", "as_json", is_flag=True, help="Output as JSON")
def experiments_list(family: str | None, as_json: bool):
    """List runnable experiments."""
    registry = ExperimentRegistry()
    specs = registry.list_by_family(family) if family else registry.list_all()

    if as_json:
        output = [
            {"name": s.name, "family": s.family.value, "title": s.title, "golden": s.golden, "slow": s.slow}
            for s in specs
        ]
        click.echo(json.dumps(output, indent=2))
        return

    if not specs:
        click.echo("No experiments found.")
        return
    table = Table(title="Experiments")
    for name in ("name", "family", "golden", "title"):
        table.add_column(name)
    for s in specs:
        table.add_row(s.name + (" [dim](slow)[/dim]" if s.slow else ""), s.family.value, s.golden or "", s.title)
    _console().print(table)


@experiments.command("info")
@click.argument("name")
def experiments_info(name: str):
    """Show the full configuration of an experiment."""
    info = ExperimentRegistry().get_info(name)
    if not info:
        click.echo(f"Experiment not found: {name}", err=True)
        sys.exit(EXIT_CONFIG)
    click.echo(json.dumps(info.model_dump(mode="json"), indent=2))


@cli.command("run")
@click.argument("name")
@click.option("--threads", "-t", default=1, show_default=True, help="Run independent table cells in parallel")
@click.option("--mesh", "meshes", type=int, multiple=True, help="Override mesh sizes (repeatable)")
@click.option("--nu", "nus", type=float, multiple=True, help="Override diffusion coefficients (repeatable)")
@click.option("--n", "ns", type=int, multiple=True, help="Override 1D interior node counts (repeatable)")
@click.option("--tol", type=float, help="Override the absolute residual tolerance")
@click.option("--max-iter", type=int, help="Override the iteration cap")
@click.option("--json", "json_path", type=click.Path(dir_okay=False), help="Write the result table as JSON")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), help="Write the result table as CSV")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Output directory (history runs)")
@click.option("--compare", "do_compare", is_flag=True, help="Compare against the experiment's golden table")
@click.option("--golden", help="Compare against this golden table (name or YAML path)")
@click.option("--save", is_flag=True, help="Keep the result in the result store")
@click.option("--results-dir", type=click.Path(file_okay=False), envvar="NORMALKIT_RESULTS_DIR")
@click.option("--events", "-e", help="Write solver/experiment events as JSONL to a file ('-' for stdout)")
def run(
    name: str,
    threads: int,
    meshes: tuple[int, ...],
    nus: tuple[float, ...],
    ns: tuple[int, ...],
    tol: float | None,
    max_iter: int | None,
    json_path: str | None,
    csv_path: str | None,
    out_dir: str | None,
    do_compare: bool,
    golden: str | None,
    save: bool,
    results_dir: str | None,
    events: str | None,
):
    """Run a named experiment.

    Cells that fail to converge are reported as '-'. With --compare or
    --golden the exit status is 2 when any cell falls outside its slack.

    Examples:
        normalkit run table1 --compare
        normalkit run table5 --mesh 32 --mesh 64 --golden table5 --json t5.json
        normalkit run history --out histories/ --mesh 32
    """
    registry = ExperimentRegistry()
    callback = _events(events)
    with exit_on_error():
        spec = registry.resolve(
            name,
            meshes=list(meshes) or None,
            nus=list(nus) or None,
            ns=list(ns) or None,
            tol_abs=tol,
            max_iter=max_iter,
        )

        if spec.family == ExperimentFamily.HISTORY:
            if out_dir is None:
                raise ConfigError("history runs need --out")
            paths = run_history(out_dir, spec, event_callback=callback)
            for path in paths:
                click.echo(str(path))
            return

        golden_table = None
        if golden or do_compare:
            golden_name = golden or spec.golden
            if golden_name is None:
                raise ConfigError(f"experiment '{spec.name}' has no golden table; pass --golden")
            golden_table = load_golden(golden_name)

        result = registry.run(spec, threads=threads, event_callback=callback)

    print_table(result)
    if json_path:
        result.to_json(json_path)
    if csv_path:
        result.to_csv(csv_path)
    if save:
        stored = ResultStore(Path(results_dir) if results_dir else None).save(result)
        click.echo(f"Saved result: {stored.id}", err=True)

    if golden_table is not None:
        try:
            report = compare(result, golden_table, allow_subset=bool(meshes or nus or ns))
        except ShapeMismatchError as e:
            click.echo(f"Comparison failed: {e}", err=True)
            sys.exit(EXIT_COMPARE)
        print_comparison(report)
        if not report.passed:
            sys.exit(EXIT_COMPARE)
        return

    errors = [c for c in result.cells if c.termination == "error" or c.breakdown]
    if errors:
        for c in errors:
            click.echo(f"({c.row}, {c.column}): {c.reason}", err=True)
        sys.exit(EXIT_SOLVER)


@cli.command("compare")
@click.argument("result_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("golden")
@click.option("--subset", is_flag=True, help="Skip golden cells missing from the result")
@click.option("--json", "as_json", is_flag=True, help="Output the verdicts as JSON")
def compare_cmd(result_file: str, golden: str, subset: bool, as_json: bool):
    """Compare a saved result table against a golden table.

    GOLDEN is a packaged table name (table1 ... table8) or a YAML path.
    """
    with exit_on_error():
        result = TableResult.from_json(result_file)
        golden_table = load_golden(golden)
    try:
        report = compare(result, golden_table, allow_subset=subset)
    except ShapeMismatchError as e:
        click.echo(f"Comparison failed: {e}", err=True)
        sys.exit(EXIT_COMPARE)

    if as_json:
        click.echo(report.model_dump_json(indent=2))
    else:
        print_comparison(report)
    if not report.passed:
        sys.exit(EXIT_COMPARE)


# =============================================================================
# Result Store Commands
# =============================================================================


@cli.group()
@click.option("--results-dir", type=click.Path(file_okay=False), envvar="NORMALKIT_RESULTS_DIR")
@click.pass_context
def results(ctx, results_dir: str | None):
    """Manage saved experiment results.

    Results are plain JSON files, one per run, in a directory
    (~/.normalkit/results by default). There is no database or index.
    """
    ctx.obj = ResultStore(Path(results_dir) if results_dir else None)


@results.command("list")
@click.option("--experiment", help="Only results of this experiment")
@click.pass_obj
def results_list(store: ResultStore, experiment: str | None):
    """List saved results, newest first."""
    stored = store.list_by_experiment(experiment) if experiment else store.list_all()
    if not stored:
        click.echo("No saved results.")
        return
    for s in stored:
        click.echo(f"  {s.id}: {s.experiment} ({s.created_at})")


@results.command("show")
@click.argument("result_id")
@click.pass_obj
def results_show(store: ResultStore, result_id: str):
    """Print a saved result table."""
    stored = store.get(result_id)
    if stored is None:
        click.echo(f"Result not found: {result_id}", err=True)
        sys.exit(EXIT_CONFIG)
    print_table(stored.table)


@results.command("delete")
@click.argument("result_id")
@click.pass_obj
def results_delete(store: ResultStore, result_id: str):
    """Delete a saved result."""
    if not store.delete(result_id):
        click.echo(f"Result not found: {result_id}", err=True)
        sys.exit(EXIT_CONFIG)
    click.echo(f"Deleted result: {result_id}")


# =============================================================================
# Single Solves
# =============================================================================


def fd_right_factor(choice: PreconditionerChoice, a, p: Problem1D, scale: Scaling | str):
    """P as a right factor (solve / solve_transpose) for LSQR and GMRES."""
    match choice.kind:
        case PreconditionerKind.FACTOR:
            return factor_solver(advection_prec(p, scale=scale))
        case PreconditionerKind.QR_R:
            return factor_solver(qr(a.toarray()))
        case PreconditionerKind.RQ_R:
            return factor_solver(rq(a.toarray()))
        case PreconditionerKind.POLAR_LEFT:
            return factor_solver(polar(a.toarray()))
        case PreconditionerKind.POLAR_RIGHT:
            return factor_solver(polar(a.toarray().T))
    raise ConfigError(f"'{choice}' has no right factor")


@cli.group()
def solve():
    """Solve a single problem and report the iteration count."""
    pass


@solve.command("fd1d")
@click.option("--nu", type=float, default=1.0, show_default=True)
@click.option("--beta", type=float, default=1.0, show_default=True)
@click.option("--n", type=int, default=100, show_default=True, help="Number of interior nodes")
@click.option("--scheme", type=click.Choice([s.value for s in Scheme]), default="centered", show_default=True)
@click.option("--scale", type=click.Choice([s.value for s in Scaling]), default="none", show_default=True)
@click.option("--solver", type=click.Choice(["cgne", "lsqr", "gmres"]), default="cgne", show_default=True)
@click.option("--precond", "-p", default="identity", show_default=True, help="e.g. qr-r, polar-left, factor:trid")
@click.option("--tol", type=float, default=1e-10, show_default=True)
@click.option("--max-iter", type=int, default=10_000, show_default=True)
@click.option("--history", type=click.Path(dir_okay=False), help="Write the step,res history CSV")
@click.option("--export-solution", type=click.Path(dir_okay=False), help="Write x,u including boundary values")
@click.option("--events", "-e", help="Write solver events as JSONL to a file ('-' for stdout)")
def solve_fd1d(
    nu: float,
    beta: float,
    n: int,
    scheme: str,
    scale: str,
    solver: str,
    precond: str,
    tol: float,
    max_iter: int,
    history: str | None,
    export_solution: str | None,
    events: str | None,
):
    """Finite-difference 1D convection-diffusion -nu u'' + beta u' = f.

    Examples:
        normalkit solve fd1d --n 1000 --precond polar-left
        normalkit solve fd1d --nu 1e-4 --n 10000 --scheme upwind --precond factor:trid --solver lsqr
    """
    with exit_on_error():
        choice = parse_preconditioner(precond)
        p = Problem1D(nu=nu, beta=beta, n=n)
        a, b = assemble(p, scheme, scale=scale)
        cfg = KrylovConfig(tol_abs=tol, max_iter=max_iter)
        callback = _events(events)
        if solver == "cgne":
            g = fd_preconditioner(choice, a, p, scale)
            report = cgne(a, b, preconditioner=g, config=cfg, event_callback=callback)
        elif choice.kind == PreconditionerKind.IDENTITY:
            run_solver = lsqr if solver == "lsqr" else gmres
            report = run_solver(a, b, config=cfg, event_callback=callback)
        elif solver == "lsqr":
            report = lsqr(a, b, factor=fd_right_factor(choice, a, p, scale), config=cfg, event_callback=callback)
        else:
            m = right_preconditioner(fd_right_factor(choice, a, p, scale).solve, str(choice))
            report = gmres(a, b, preconditioner=m, config=cfg, event_callback=callback)

    print_report(report)
    if history:
        report.to_csv(history)
    if export_solution:
        x = np.concatenate([[p.a], p.nodes, [p.b]])
        u = np.concatenate([[p.ua], report.solution, [p.ub]])
        np.savetxt(export_solution, np.column_stack([x, u]), delimiter=",", header="x,u", comments="")
    if not report.converged:
        sys.exit(EXIT_SOLVER)


@solve.command("fem2d")
@click.option("--mesh", type=int, default=32, show_default=True, help="Cells per side of the unit square")
@click.option("--nu", type=float, default=1e-2, show_default=True)
@click.option("--wind", type=click.Choice([w.value for w in Wind]), default="x", show_default=True)
@click.option("--delta-sd", type=float, default=1e-4, show_default=True, help="Streamline-diffusion parameter")
@click.option(
    "--variant",
    type=click.Choice([v.value for v in FemVariant]),
    default="rd-direct",
    show_default=True,
    help="Riesz map and preconditioner pairing",
)
@click.option("--precond", "-p", help="Replace the variant's G: identity, direct[:lu], inner-cg, gmg:omega=1.2")
@click.option("--tol", type=float, default=1e-5, show_default=True)
@click.option("--max-iter", type=int, default=10_000, show_default=True)
@click.option("--history", type=click.Path(dir_okay=False), help="Write the step,res history CSV")
@click.option("--export-solution", type=click.Path(dir_okay=False), help="Write x,y,u on all mesh nodes")
@click.option("--events", "-e", help="Write solver events as JSONL to a file ('-' for stdout)")
def solve_fem2d(
    mesh: int,
    nu: float,
    wind: str,
    delta_sd: float,
    variant: str,
    precond: str | None,
    tol: float,
    max_iter: int,
    history: str | None,
    export_solution: str | None,
    events: str | None,
):
    """P1 finite elements for -nu Lap u + beta . grad u = 1 on the unit square.

    Examples:
        normalkit solve fem2d --mesh 64 --nu 1e-3 --wind diag
        normalkit solve fem2d --mesh 128 --variant rd-gmg --precond gmg:omega=1.2,smooth=3
    """
    with exit_on_error():
        fem_variant = FemVariant(variant)
        g = None
        if precond:
            choice = parse_preconditioner(precond)
            g = fem_choice_preconditioner(
                choice, fem_variant, StructuredMesh(mesh), FemProblem2D.with_wind(nu, wind, delta_sd)
            )
        report = solve_fem(
            fem_variant,
            mesh,
            nu,
            wind,
            delta_sd=delta_sd,
            tol_abs=tol,
            max_iter=max_iter,
            preconditioner=g,
            event_callback=_events(events),
        )

    print_report(report)
    if history:
        report.to_csv(history)
    if export_solution:
        export_solution_csv(StructuredMesh(mesh), report.solution, export_solution)
    if not report.converged:
        sys.exit(EXIT_SOLVER)


# =============================================================================
# Matrix Export
# =============================================================================

MM_SYSTEMS = ["fd1d", "fd1d-factor", "fem2d", "fem2d-rd", "fem2d-aniso", "fem2d-stiffness", "fem2d-mass"]


@cli.command("export-mm")
@click.argument("system", type=click.Choice(MM_SYSTEMS))
@click.option("--out", "-o", type=click.Path(dir_okay=False), required=True, help="Matrix Market output file")
@click.option("--nu", type=float, default=1e-2, show_default=True)
@click.option("--beta", type=float, default=1.0, show_default=True, help="1D wind speed")
@click.option("--n", type=int, default=100, show_default=True, help="1D interior nodes")
@click.option("--scheme", type=click.Choice([s.value for s in Scheme]), default="centered", show_default=True)
@click.option("--mesh", type=int, default=32, show_default=True, help="2D cells per side")
@click.option("--wind", type=click.Choice([w.value for w in Wind]), default="x", show_default=True)
@click.option("--delta-sd", type=float, default=1e-4, show_default=True)
def export_mm(
    system: str,
    out: str,
    nu: float,
    beta: float,
    n: int,
    scheme: str,
    mesh: int,
    wind: str,
    delta_sd: float,
):
    """Write a system or preconditioner matrix in Matrix Market format.

    SYSTEM selects the matrix: the 1D operator or its advection factor P, the
    stabilized 2D operator, the reaction-diffusion and anisotropic
    preconditioners, or the 2D stiffness and mass matrices.
    """
    with exit_on_error():
        if system.startswith("fd1d"):
            p = Problem1D(nu=nu, beta=beta, n=n)
            matrix = advection_prec(p) if system == "fd1d-factor" else assemble(p, scheme)[0]
            comment = f"{system} nu={nu} beta={beta} n={n} scheme={scheme}"
        else:
            m = StructuredMesh(mesh)
            problem = FemProblem2D.with_wind(nu, wind, delta_sd)
            match system:
                case "fem2d":
                    matrix = assemble_advdiff(m, problem)[0]
                case "fem2d-rd":
                    matrix = assemble_reaction_diffusion(m, nu, problem.beta)
                case "fem2d-aniso":
                    matrix = assemble_anisotropic(m, problem.beta)
                case "fem2d-stiffness":
                    matrix = assemble_stiffness(m)
                case _:
                    matrix = assemble_mass(m)
            comment = f"{system} mesh={mesh} nu={nu} wind={wind} delta_sd={delta_sd}"
        path = write_matrix_market(out, matrix, comment=comment)
    click.echo(str(path))


# =============================================================================
# Entry Point
# =============================================================================


def main():
    """Main entry point."""
    cli()


if __name__ == "__main__":
    main()
