"""Exception hierarchy shared by every normalkit subpackage."""


class NormalkitError(Exception):
    """Base class for all normalkit failures."""


class DimensionError(NormalkitError, ValueError):
    """Operand shapes do not match."""


class ConfigError(NormalkitError, ValueError):
    """Invalid experiment, solver or preconditioner configuration."""


class MeshError(NormalkitError, ValueError):
    """Degenerate mesh or a grid that cannot be coarsened as requested."""


class FactorizationError(NormalkitError):
    """A matrix factorization could not be completed."""


class PivotBreakdownError(FactorizationError):
    """Elimination without pivoting met a (numerically) zero pivot."""

    def __init__(self, index: int, pivot: float):
        self.index = index
        self.pivot = pivot
        super().__init__(f"Pivot breakdown at index {index} (pivot={pivot:.3e})")


class NotPositiveDefiniteError(FactorizationError):
    """Cholesky met a nonpositive pivot."""

    def __init__(self, pivot: int):
        self.pivot = pivot
        super().__init__(f"Matrix is not positive definite: leading minor {pivot} is nonpositive")


class SingularMatrixError(FactorizationError):
    """Matrix is singular to working precision."""


class RankDeficiencyError(FactorizationError):
    """A triangular factor has a negligible diagonal entry."""

    def __init__(self, index: int, value: float, threshold: float):
        self.index = index
        super().__init__(f"Rank deficiency: |R[{index},{index}]| = {value:.3e} < {threshold:.3e}")


class AsymmetryError(FactorizationError):
    """A routine requiring a symmetric matrix received a nonsymmetric one."""

    def __init__(self, defect: float, tolerance: float):
        self.defect = defect
        super().__init__(f"Matrix is not symmetric: relative defect {defect:.3e} > {tolerance:.1e}")


class ConvergenceError(NormalkitError):
    """An inner iteration failed to reach its tolerance."""

    def __init__(self, message: str, defect: float):
        self.defect = defect
        super().__init__(f"{message} (achieved {defect:.3e})")


class RieszApplicationError(NormalkitError):
    """Applying the Riesz weight T failed inside a solver."""


class BasisLimitError(NormalkitError):
    """GMRES would exceed its configured Krylov basis limit."""


class ShapeMismatchError(NormalkitError, ValueError):
    """Two tables do not have the same rows and columns."""
