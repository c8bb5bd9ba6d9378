"""Shared fixtures."""

import numpy as np
import pytest

from normalkit.fd1d import Problem1D, Scheme, assemble
from normalkit.matkit import CsrMatrix


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def spd_tridiagonal() -> CsrMatrix:
    """1D Laplacian tridiag(-1, 2, -1) of size 20."""
    n = 20
    a = 2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    return CsrMatrix.from_dense(a)


@pytest.fixture
def well_conditioned(rng) -> np.ndarray:
    """Nonsymmetric 30x30 matrix with singular values in roughly [2, 8]."""
    n = 30
    return 5.0 * np.eye(n) + rng.uniform(-1.0, 1.0, (n, n)) * (2.0 / np.sqrt(n))


@pytest.fixture
def upwind_system():
    p = Problem1D(nu=1e-2, beta=1.0, n=50)
    a, b = assemble(p, Scheme.UPWIND)
    return p, a, b
