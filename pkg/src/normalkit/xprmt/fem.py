"""2D experiments: CGNE on Riesz-weighted normal equations with PDE preconditioners."""

import logging
from pathlib import Path

from ..errors import ConfigError, MeshError
from ..fem2d import (
    FemProblem2D,
    RieszVariant,
    StructuredMesh,
    Wind,
    assemble_advdiff,
    assemble_anisotropic,
    assemble_projected_rd_dense,
    assemble_reaction_diffusion,
    projected_rd_operator,
    riesz,
)
from ..krylov import KrylovConfig, SolveReport, cgne
from ..precond import (
    DirectMethod,
    PreconditionerChoice,
    PreconditionerHandle,
    PreconditionerKind,
    default_levels,
    from_spd_matrix,
    from_spd_operator,
    gmg_build,
    gmg_vcycle_prec,
    identity_preconditioner,
)
from ..protocols import EventCallback
from .models import ExperimentFamily, ExperimentSpec, FemVariant, format_param
from .runner import CellJob, run_grid

logger = logging.getLogger(__name__)

# Largest mesh for which the projected operator is assembled densely
DENSE_PROJECTED_MAX_MESH = 64
INNER_TOL = 1e-10
INNER_MAX = 500

RD_NUS = [1e-2, 5e-3, 2.5e-3, 1.25e-3]

TABLE4 = ExperimentSpec(
    name="table4",
    title="L2 Riesz map, anisotropic diffusion preconditioner, 128x128, beta = (1, 0)",
    family=ExperimentFamily.FEM,
    description="T = M^{-1}; G = discrete -div(beta beta^T grad). Expected to need thousands of iterations.",
    variant=FemVariant.L2_ANISO,
    wind="x",
    nus=RD_NUS,
    meshes=[128],
    golden="table4",
    slow=True,
)
TABLE5 = ExperimentSpec(
    name="table5",
    title="H1 Riesz map, projected reaction-diffusion preconditioner, beta = (1, 0)",
    family=ExperimentFamily.FEM,
    description="T = nu^{-1} K^{-1}; G = nu K + nu^{-1} C K^{-1} C^T, dense LU up to 64x64, inner CG above.",
    variant=FemVariant.RD_PROJECTED,
    wind="x",
    nus=RD_NUS,
    meshes=[32, 64, 128],
    golden="table5",
    slow=True,
)
TABLE6_DIRECT = ExperimentSpec(
    name="table6-direct",
    title="H1 Riesz map, reaction-diffusion preconditioner by Cholesky, beta = (1, 0)",
    family=ExperimentFamily.FEM,
    description="T = nu^{-1} K^{-1}; G = nu K + nu^{-1} |beta|^2 M inverted exactly (stands in for AMG).",
    variant=FemVariant.RD_DIRECT,
    wind="x",
    nus=RD_NUS,
    meshes=[32, 64, 128, 256],
    slow=True,
)
TABLE6_GMG = TABLE6_DIRECT.model_copy(
    update={
        "name": "table6-gmg",
        "title": "H1 Riesz map, reaction-diffusion preconditioner by GMG, beta = (1, 0)",
        "description": "T = nu^{-1} K^{-1}; G^{-1} = one symmetric SOR V-cycle on nu K + nu^{-1} |beta|^2 M.",
        "variant": FemVariant.RD_GMG,
    }
)
TABLE7_DIRECT = TABLE6_DIRECT.model_copy(
    update={
        "name": "table7-direct",
        "title": "H1 Riesz map, reaction-diffusion preconditioner by Cholesky, diagonal wind",
        "wind": "diag",
    }
)
TABLE7_GMG = TABLE6_GMG.model_copy(
    update={
        "name": "table7-gmg",
        "title": "H1 Riesz map, reaction-diffusion preconditioner by GMG, diagonal wind",
        "wind": "diag",
    }
)
TABLE8 = TABLE7_GMG.model_copy(
    update={
        "name": "table8",
        "title": "H1 Riesz map, GMG (SOR) reaction-diffusion preconditioner, diagonal wind",
        "meshes": [32, 64, 128],
        "golden": "table8",
    }
)
HISTORY = ExperimentSpec(
    name="history",
    title="Residual histories, reaction-diffusion preconditioner, diagonal wind",
    family=ExperimentFamily.HISTORY,
    description="One step,res CSV per (mesh, nu) run.",
    variant=FemVariant.RD_DIRECT,
    wind="diag",
    nus=[1.25e-3, 2.5e-3, 1e-2],
    meshes=[32, 64, 128, 256],
    slow=True,
)


def variant_matrix(variant: FemVariant | str, mesh: StructuredMesh, problem: FemProblem2D):
    """Assembled G of a variant; dense for the projected reaction-diffusion operator."""
    variant = FemVariant(variant)
    nu, beta = problem.nu, problem.beta
    match variant:
        case FemVariant.L2_ANISO:
            return assemble_anisotropic(mesh, beta)
        case FemVariant.RD_DIRECT | FemVariant.RD_GMG:
            return assemble_reaction_diffusion(mesh, nu, beta)
        case FemVariant.RD_PROJECTED:
            return assemble_projected_rd_dense(mesh, nu, beta)
    raise ConfigError(f"unknown variant {variant}")


def _inner_cg(variant: FemVariant, mesh: StructuredMesh, problem: FemProblem2D, tol: float, max_iter: int):
    if variant == FemVariant.RD_PROJECTED:
        inner = from_spd_matrix(assemble_reaction_diffusion(mesh, problem.nu, problem.beta))
        return from_spd_operator(
            projected_rd_operator(mesh, problem.nu, problem.beta), tol, max_iter, inner_preconditioner=inner
        )
    return from_spd_operator(variant_matrix(variant, mesh, problem), tol, max_iter)


def _gmg(g, mesh: StructuredMesh, opts: dict) -> PreconditionerHandle:
    h = gmg_build(
        g,
        mesh.grid,
        levels=opts.get("levels"),
        omega=opts.get("omega", 1.0),
        nu_pre=opts.get("pre", opts.get("smooth", 2)),
        nu_post=opts.get("post", opts.get("smooth", 2)),
    )
    return gmg_vcycle_prec(h)


def fem_preconditioner(
    variant: FemVariant | str,
    mesh: StructuredMesh,
    problem: FemProblem2D,
    *,
    gmg_options: dict | None = None,
) -> PreconditionerHandle:
    """G^{-1} for one of the 2D variants."""
    variant = FemVariant(variant)
    match variant:
        case FemVariant.L2_ANISO | FemVariant.RD_DIRECT:
            return from_spd_matrix(variant_matrix(variant, mesh, problem), DirectMethod.CHOLESKY)
        case FemVariant.RD_PROJECTED:
            if mesh.mx <= DENSE_PROJECTED_MAX_MESH:
                return from_spd_matrix(variant_matrix(variant, mesh, problem), DirectMethod.BANDED_LU)
            return _inner_cg(variant, mesh, problem, INNER_TOL, INNER_MAX)
        case FemVariant.RD_GMG:
            return _gmg(variant_matrix(variant, mesh, problem), mesh, gmg_options or {})
    raise ConfigError(f"unknown variant {variant}")


def fem_choice_preconditioner(
    choice: PreconditionerChoice, variant: FemVariant | str, mesh: StructuredMesh, problem: FemProblem2D
) -> PreconditionerHandle:
    """
    G^{-1} selected by a config string, always for the variant's own G.

    ``direct`` factors the variant's assembled G, ``inner-cg`` applies it by inner CG
    and ``gmg`` runs a V-cycle on it (sparse variants only).

    Raises:
        ConfigError: for kinds without a 2D meaning, or gmg on the projected operator
    """
    variant = FemVariant(variant)
    match choice.kind:
        case PreconditionerKind.IDENTITY:
            return identity_preconditioner()
        case PreconditionerKind.DIRECT:
            return from_spd_matrix(variant_matrix(variant, mesh, problem), DirectMethod(choice.method))
        case PreconditionerKind.INNER_CG:
            return _inner_cg(variant, mesh, problem, choice.option("tol", INNER_TOL), choice.option("max", INNER_MAX))
        case PreconditionerKind.GMG:
            if variant == FemVariant.RD_PROJECTED:
                raise ConfigError("gmg needs an assembled sparse G; rd-projected has none (use direct or inner-cg)")
            return _gmg(variant_matrix(variant, mesh, problem), mesh, dict(choice.options))
    raise ConfigError(f"'{choice}' is not available for fem2d (use identity, direct, inner-cg or gmg)")


def riesz_variant(variant: FemVariant | str) -> RieszVariant:
    return RieszVariant.L2 if FemVariant(variant) == FemVariant.L2_ANISO else RieszVariant.H1


def solve_fem(
    variant: FemVariant | str,
    mesh_size: int,
    nu: float,
    wind: Wind | str,
    *,
    delta_sd: float = 1e-4,
    tol_abs: float = 1e-5,
    max_iter: int = 10_000,
    preconditioner: PreconditionerHandle | None = None,
    gmg_options: dict | None = None,
    event_callback: EventCallback | None = None,
) -> SolveReport:
    """
    One CGNE solve of the stabilized system with the variant's Riesz map.

    ``preconditioner`` replaces the variant's own G^{-1} when given.
    """
    mesh = StructuredMesh(mesh_size)
    problem = FemProblem2D.with_wind(nu, wind, delta_sd)
    a, b = assemble_advdiff(mesh, problem)
    t = riesz(mesh, riesz_variant(variant), nu)
    g = preconditioner or fem_preconditioner(variant, mesh, problem, gmg_options=gmg_options)
    cfg = KrylovConfig(tol_abs=tol_abs, max_iter=max_iter)
    return cgne(a, b, riesz=t, preconditioner=g, config=cfg, event_callback=event_callback)


def run_fem_experiment(spec: ExperimentSpec, *, threads: int = 1, event_callback: EventCallback | None = None):
    """Iteration counts over (nu, mesh) for ``spec.variant``."""
    if spec.variant is None:
        raise ConfigError(f"{spec.name}: no fem variant")
    if spec.variant == FemVariant.RD_GMG:
        for m in spec.meshes:
            if default_levels(m) < 2:
                raise MeshError(f"{spec.name}: mesh {m} cannot be coarsened for multigrid")

    def job(nu: float, m: int) -> CellJob:
        def run() -> SolveReport:
            return solve_fem(
                spec.variant,  # type: ignore[arg-type]
                m,
                nu,
                spec.wind,
                delta_sd=spec.delta_sd,
                tol_abs=spec.tol_abs,
                max_iter=spec.max_iter,
                event_callback=event_callback,
            )

        return CellJob(format_param(nu), str(m), run)

    return run_grid(
        spec,
        row_label="nu",
        column_label="mesh",
        rows=[format_param(nu) for nu in spec.nus],
        columns=[str(m) for m in spec.meshes],
        jobs=[job(nu, m) for nu in spec.nus for m in spec.meshes],
        threads=threads,
        event_callback=event_callback,
    )


def history_filename(wind: Wind | str, nu: float, mesh_size: int) -> str:
    return f"fem_advection_mass_normal_eq_{Wind(wind).tag}_{nu!r}_{float(mesh_size)!r}.csv"


def run_history(
    out_dir: Path | str,
    spec: ExperimentSpec = HISTORY,
    *,
    event_callback: EventCallback | None = None,
) -> list[Path]:
    """Write one ``step,res`` CSV per (mesh, nu) of ``spec``; returns the paths in run order."""
    out_dir = Path(out_dir)
    paths = []
    for m in spec.meshes:
        for nu in spec.nus:
            report = solve_fem(
                spec.variant or FemVariant.RD_DIRECT,
                m,
                nu,
                spec.wind,
                delta_sd=spec.delta_sd,
                tol_abs=spec.tol_abs,
                max_iter=spec.max_iter,
                event_callback=event_callback,
            )
            path = report.to_csv(out_dir / history_filename(spec.wind, nu, m))
            logger.info(f"history: {path.name} ({report.iterations} steps, {report.termination.value})")
            paths.append(path)
    return paths
