"""1D convection-diffusion test problems on an equispaced mesh.

-nu u'' + beta u' = f on (a, b) with u(a) = ua, u(b) = ub. The ``n`` unknowns
are the interior nodes x_j = a + j h, h = (b - a) / (n + 1); boundary values
are eliminated into the right-hand side.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError
from .matkit import Tridiagonal

logger = logging.getLogger(__name__)


class Scheme(str, Enum):
    CENTERED = "centered"
    UPWIND = "upwind"


class Scaling(str, Enum):
    NONE = "none"
    H2 = "h2"  # rows multiplied by h^2


@dataclass(frozen=True)
class Problem1D:
    nu: float = 1.0
    beta: float = 1.0
    n: int = 10
    a: float = 0.0
    b: float = 1.0
    ua: float = 0.0
    ub: float = 1.0
    f: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.nu < 0:
            raise ConfigError(f"nu must be >= 0, got {self.nu}")
        if self.n < 2:
            raise ConfigError(f"need at least 2 interior nodes, got n={self.n}")
        if not self.b > self.a:
            raise ConfigError(f"empty interval ({self.a}, {self.b})")

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n + 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.a + self.h * np.arange(1, self.n + 1)

    def source(self) -> np.ndarray:
        if self.f is None:
            return np.zeros(self.n)
        return np.asarray(self.f(self.nodes), dtype=float) * np.ones(self.n)

    def exact(self, x: np.ndarray) -> np.ndarray:
        """Closed-form solution for f = 0 and nu > 0."""
        if self.f is not None:
            raise ConfigError("closed form is only available for f = 0")
        if self.nu == 0:
            raise ConfigError("closed form needs nu > 0")
        x = np.asarray(x, dtype=float)
        s = (x - self.a) / (self.b - self.a)
        pe = self.beta * (self.b - self.a) / self.nu
        if pe == 0:
            shape = s
        elif pe > 0:
            shape = (np.exp(pe * (s - 1)) - np.exp(-pe)) / -np.expm1(-pe)
        else:
            shape = np.expm1(pe * s) / np.expm1(pe)
        return self.ua + (self.ub - self.ua) * shape


def _finish(p: Problem1D, t: Tridiagonal, rhs: np.ndarray, scale: Scaling | str) -> tuple[Tridiagonal, np.ndarray]:
    if Scaling(scale) == Scaling.H2:
        h2 = p.h * p.h
        return t.scaled(h2), rhs * h2
    return t, rhs


def assemble_centered(p: Problem1D, *, scale: Scaling | str = Scaling.NONE) -> tuple[Tridiagonal, np.ndarray]:
    """tridiag(-nu/h^2 - beta/2h, 2 nu/h^2, -nu/h^2 + beta/2h) with lifted boundary data."""
    h = p.h
    d, c = p.nu / h**2, p.beta / (2 * h)
    t = Tridiagonal.constant(p.n, -d - c, 2 * d, -d + c)
    rhs = p.source()
    rhs[0] += (d + c) * p.ua
    rhs[-1] += (d - c) * p.ub
    logger.debug(f"centered 1D system: n={p.n}, h={h:.3e}, mesh Peclet={mesh_peclet(p):.3e}")
    return _finish(p, t, rhs, scale)


def assemble_upwind(p: Problem1D, *, scale: Scaling | str = Scaling.NONE) -> tuple[Tridiagonal, np.ndarray]:
    """tridiag(-nu/h^2 - beta/h, 2 nu/h^2 + beta/h, -nu/h^2) with lifted boundary data."""
    if p.beta < 0:
        raise ConfigError(f"upwind scheme supports beta >= 0 only, got {p.beta}")
    h = p.h
    d, c = p.nu / h**2, p.beta / h
    t = Tridiagonal.constant(p.n, -d - c, 2 * d + c, -d)
    rhs = p.source()
    rhs[0] += (d + c) * p.ua
    rhs[-1] += d * p.ub
    logger.debug(f"upwind 1D system: n={p.n}, h={h:.3e}")
    return _finish(p, t, rhs, scale)


def assemble(p: Problem1D, scheme: Scheme | str, *, scale: Scaling | str = Scaling.NONE):
    if Scheme(scheme) == Scheme.CENTERED:
        return assemble_centered(p, scale=scale)
    return assemble_upwind(p, scale=scale)


def advection_prec(p: Problem1D, *, scale: Scaling | str = Scaling.NONE) -> Tridiagonal:
    """Pure-advection factor P = tridiag(-beta/h, beta/h, 0), lower bidiagonal."""
    if p.beta <= 0:
        raise ConfigError(f"advection preconditioner needs beta > 0, got {p.beta}")
    c = p.beta / p.h
    t = Tridiagonal.constant(p.n, -c, c, 0.0)
    return t.scaled(p.h * p.h) if Scaling(scale) == Scaling.H2 else t


def mesh_peclet(p: Problem1D) -> float:
    """|beta| h / (2 nu); centered solutions oscillate above 1."""
    if p.nu == 0:
        return float("inf")
    return abs(p.beta) * p.h / (2 * p.nu)
