import numpy as np
import pytest
import scipy.linalg as sla

from normalkit.fd1d import advection_prec
from normalkit.krylov import (
    KrylovConfig,
    TSingularSpectrum,
    cg_bound,
    cgne,
    gmres,
    matrix_squaring_example,
    normal_spectrum,
    t_singular_values,
)
from normalkit.matkit import as_array
from normalkit.precond import from_factor


def spd(rng, n):
    m = rng.standard_normal((n, n))
    return m @ m.T + n * np.eye(n)


def test_exact_preconditioner_has_unit_spectrum(well_conditioned):
    s = t_singular_values(well_conditioned, well_conditioned)
    np.testing.assert_allclose(s.sigma, 1.0, rtol=1e-8)
    assert s.kappa_t == pytest.approx(1.0)


def test_normal_spectrum_is_generalized_eigenproblem(upwind_system):
    p, a, _ = upwind_system
    a_d, p_d = as_array(a), as_array(advection_prec(p))
    expected = sla.eigh(a_d.T @ a_d, p_d.T @ p_d, eigvals_only=True)
    np.testing.assert_allclose(normal_spectrum(a, advection_prec(p)), expected, rtol=1e-8)


def test_weighted_spectrum(rng):
    n = 12
    a = 3.0 * np.eye(n) + rng.standard_normal((n, n)) / np.sqrt(n)
    p = np.triu(a)
    t = spd(rng, n)
    expected = sla.eigh(a.T @ t @ a, p.T @ t @ p, eigvals_only=True)
    s = t_singular_values(a, p, t)
    np.testing.assert_allclose(s.sigma**2, expected, rtol=1e-8)
    assert np.all(np.diff(s.sigma) >= 0)


@pytest.mark.parametrize(
    "sigma, k, expected",
    [
        ([1.0, 1.0], 5, 0.0),
        ([1.0, 3.0], 0, 2.0),
        ([1.0, 3.0], 2, 0.5),
        ([0.0, 3.0], 10, 2.0),
    ],
)
def test_cg_bound(sigma, k, expected):
    assert cg_bound(TSingularSpectrum(np.array(sigma)), k) == pytest.approx(expected)


def test_residual_obeys_bound(upwind_system):
    p, a, b = upwind_system
    factor = advection_prec(p)
    spectrum = t_singular_values(a, factor)
    rep = cgne(a, b, preconditioner=from_factor(factor), config=KrylovConfig(tol_abs=1e-10, max_iter=500))
    assert rep.converged
    res0 = rep.residual_history[0]
    for k, res in enumerate(rep.residual_history):
        bound = cg_bound(spectrum, k)
        if bound >= 1e-8:
            assert res <= bound * res0 * (1 + 1e-8)


class DenseWeight:
    def __init__(self, t):
        self.t = t

    def apply(self, r):
        return self.t @ r

    def apply_inverse(self, r):
        return np.linalg.solve(self.t, r)


@pytest.mark.parametrize("seed", range(20))
def test_t_energy_error_obeys_bound(seed):
    # ||x - x_k|| in the A^T T A energy norm is ||b - A x_k||_T
    rng = np.random.default_rng(seed)
    n = 15
    a = 3.0 * np.eye(n) + rng.standard_normal((n, n)) / np.sqrt(n)
    p = np.triu(a)
    weight = DenseWeight(spd(rng, n))
    b = rng.standard_normal(n)
    spectrum = t_singular_values(a, p, weight.t)
    rep = cgne(
        a,
        b,
        riesz=weight,
        preconditioner=from_factor(p, weight),
        config=KrylovConfig(tol_abs=1e-12, max_iter=200),
        record_t_norm=True,
    )
    assert rep.converged
    energy = rep.extras["t_residual_history"]
    for k, e in enumerate(energy):
        bound = cg_bound(spectrum, k)
        if bound >= 1e-8:
            assert e <= bound * energy[0] * (1 + 1e-8)


def test_matrix_squaring_example():
    a, p, b = matrix_squaring_example()
    assert t_singular_values(a, p).kappa_t > 50
    cfg = KrylovConfig(tol_abs=1e-10)
    assert gmres(a, b, config=cfg).iterations == 1
    assert cgne(a, b, config=cfg).iterations == 2
