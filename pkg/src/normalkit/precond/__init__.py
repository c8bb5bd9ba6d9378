"""Normal preconditioners: the "apply G^{-1}" contract and its realizations."""

from .choice import PreconditionerChoice, PreconditionerKind, parse_preconditioner
from .handles import (
    DirectMethod,
    FactorNormalPrec,
    FactorSolver,
    InnerCgPreconditioner,
    PreconditionerHandle,
    SpdProbeResult,
    Symmetry,
    factor_solver,
    from_factor,
    from_spd_matrix,
    from_spd_operator,
    identity_preconditioner,
    normal_factor,
    probe_spd,
    right_preconditioner,
)
from .multigrid import (
    GmgHierarchy,
    GmgLevel,
    GridDescriptor,
    default_levels,
    gmg_build,
    gmg_vcycle_prec,
    prolongation,
)

__all__ = [
    # Contract
    "PreconditionerHandle",
    "Symmetry",
    "identity_preconditioner",
    "right_preconditioner",
    "probe_spd",
    "SpdProbeResult",
    # Factor-based
    "FactorSolver",
    "factor_solver",
    "FactorNormalPrec",
    "normal_factor",
    "from_factor",
    # Direct and inner solves
    "DirectMethod",
    "from_spd_matrix",
    "InnerCgPreconditioner",
    "from_spd_operator",
    # Multigrid
    "GridDescriptor",
    "GmgLevel",
    "GmgHierarchy",
    "default_levels",
    "prolongation",
    "gmg_build",
    "gmg_vcycle_prec",
    # Config strings
    "PreconditionerKind",
    "PreconditionerChoice",
    "parse_preconditioner",
]
