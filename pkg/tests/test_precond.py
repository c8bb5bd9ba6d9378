import logging

import numpy as np
import pytest

from normalkit.errors import AsymmetryError, ConfigError, ConvergenceError
from normalkit.fd1d import Problem1D, advection_prec
from normalkit.matkit import CsrMatrix, qr
from normalkit.precond import (
    DirectMethod,
    PreconditionerKind,
    Symmetry,
    factor_solver,
    from_factor,
    from_spd_matrix,
    from_spd_operator,
    identity_preconditioner,
    normal_factor,
    parse_preconditioner,
    probe_spd,
    right_preconditioner,
)


class DiagonalWeight:
    def __init__(self, d):
        self.d = np.asarray(d, dtype=float)

    def apply(self, r):
        return self.d * r

    def apply_inverse(self, r):
        return r / self.d


# =============================================================================
# Factor-based
# =============================================================================


def test_from_factor_inverts_gram(well_conditioned, rng):
    g = from_factor(well_conditioned)
    r = rng.standard_normal(well_conditioned.shape[0])
    expected = np.linalg.solve(well_conditioned.T @ well_conditioned, r)
    np.testing.assert_allclose(g.apply_inverse(r), expected, rtol=1e-8)
    assert g.symmetry == Symmetry.BY_CONSTRUCTION


def test_qr_factor_gives_same_gram(well_conditioned, rng):
    r = rng.standard_normal(well_conditioned.shape[0])
    np.testing.assert_allclose(
        from_factor(qr(well_conditioned)).apply_inverse(r), from_factor(well_conditioned).apply_inverse(r), rtol=1e-8
    )


def test_weighted_factor_round_trip(rng):
    p = advection_prec(Problem1D(n=15))
    prec = normal_factor(p, DiagonalWeight(1.0 + rng.random(15)))
    x = rng.standard_normal(15)
    np.testing.assert_allclose(prec.apply_inverse(prec.apply(x)), x, rtol=1e-10)


def test_factor_solver_rejects_unknown_type():
    with pytest.raises(TypeError):
        factor_solver("not a matrix")


def test_probe_separates_symmetric_from_unsymmetric():
    p = advection_prec(Problem1D(n=25))
    assert probe_spd(from_factor(p).apply_inverse, 25).passed
    assert not probe_spd(right_preconditioner(p.solve, "P^{-1}").apply_inverse, 25).passed


def test_identity_handle():
    g = identity_preconditioner()
    r = np.arange(4.0)
    out = g(r)
    np.testing.assert_array_equal(out, r)
    assert out is not r
    assert g.symmetry == Symmetry.EXACT


# =============================================================================
# Direct and inner solves
# =============================================================================


@pytest.mark.parametrize("method", list(DirectMethod))
def test_direct_handles(spd_tridiagonal, rng, method):
    r = rng.standard_normal(spd_tridiagonal.rows)
    expected = np.linalg.solve(spd_tridiagonal.toarray(), r)
    for g in (spd_tridiagonal, spd_tridiagonal.toarray()):
        np.testing.assert_allclose(from_spd_matrix(g, method).apply_inverse(r), expected, rtol=1e-10)


def test_direct_rejects_asymmetric():
    with pytest.raises(AsymmetryError):
        from_spd_matrix(CsrMatrix.from_dense(np.array([[2.0, 1.0], [0.0, 2.0]])))


def test_inner_cg_accuracy(spd_tridiagonal, rng):
    g = from_spd_operator(spd_tridiagonal, inner_tol=1e-12)
    assert not g.reentrant
    r = rng.standard_normal(spd_tridiagonal.rows)
    np.testing.assert_allclose(g.apply_inverse(r), np.linalg.solve(spd_tridiagonal.toarray(), r), rtol=1e-9)
    np.testing.assert_array_equal(g.apply_inverse(np.zeros(spd_tridiagonal.rows)), 0.0)


def test_inner_cg_strict_raises(spd_tridiagonal):
    g = from_spd_operator(spd_tridiagonal, inner_tol=1e-12, inner_max=1, strict=True)
    with pytest.raises(ConvergenceError):
        g.apply_inverse(np.ones(spd_tridiagonal.rows))


def test_inner_cg_warns_by_default(spd_tridiagonal, caplog):
    g = from_spd_operator(spd_tridiagonal, inner_tol=1e-12, inner_max=1)
    with caplog.at_level(logging.WARNING, logger="normalkit.precond.handles"):
        g.apply_inverse(np.ones(spd_tridiagonal.rows))
    assert "inner CG stopped" in caplog.text


# =============================================================================
# Config strings
# =============================================================================


@pytest.mark.parametrize(
    "text, kind, method, options",
    [
        ("identity", PreconditionerKind.IDENTITY, None, {}),
        ("qr-r", PreconditionerKind.QR_R, None, {}),
        ("factor", PreconditionerKind.FACTOR, "trid", {}),
        ("factor:advection", PreconditionerKind.FACTOR, "advection", {}),
        ("direct:lu", PreconditionerKind.DIRECT, "lu", {}),
        ("inner-cg:tol=1e-8,max=1e3", PreconditionerKind.INNER_CG, None, {"tol": 1e-8, "max": 1000}),
        (" gmg:levels=3, omega=1.2 ", PreconditionerKind.GMG, None, {"levels": 3, "omega": 1.2}),
    ],
)
def test_parse_preconditioner(text, kind, method, options):
    choice = parse_preconditioner(text)
    assert choice.kind == kind
    assert choice.method == method
    assert choice.options == options
    assert parse_preconditioner(str(choice)) == choice


@pytest.mark.parametrize(
    "text",
    ["bogus", "qr-r:foo", "gmg:bad=1", "gmg:levels=x", "factor:trid,advection", "direct:qr"],
)
def test_parse_preconditioner_errors(text):
    with pytest.raises(ConfigError):
        parse_preconditioner(text)
