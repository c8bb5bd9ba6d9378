"""Krylov solvers and the convergence analysis of preconditioned normal equations."""

from .cg import as_inverse, cgne, pcg
from .gmres import gmres
from .lsqr import lsqr
from .operators import adjoint_defect, as_operator, normal_operator, product, weight_operator
from .refinement import iterative_refinement
from .report import KrylovConfig, Monitor, SolveReport, Termination
from .spectrum import TSingularSpectrum, cg_bound, matrix_squaring_example, normal_spectrum, t_singular_values

__all__ = [
    # Operators
    "as_operator",
    "product",
    "normal_operator",
    "weight_operator",
    "adjoint_defect",
    # Config / reports
    "KrylovConfig",
    "Monitor",
    "SolveReport",
    "Termination",
    # Solvers
    "pcg",
    "cgne",
    "lsqr",
    "gmres",
    "iterative_refinement",
    "as_inverse",
    # Analysis
    "TSingularSpectrum",
    "t_singular_values",
    "normal_spectrum",
    "cg_bound",
    "matrix_squaring_example",
]
