import numpy as np
import pytest

from normalkit.errors import AsymmetryError, ConvergenceError, RankDeficiencyError
from normalkit.matkit import DenseMatrix, Tridiagonal, polar, qr, rq, sym_eig


def orthogonality_defect(q: np.ndarray) -> float:
    return float(np.linalg.norm(q.T @ q - np.eye(q.shape[0])))


def test_householder_qr(well_conditioned):
    f = qr(well_conditioned)
    np.testing.assert_allclose(f.q @ f.r, well_conditioned, atol=1e-12)
    assert orthogonality_defect(f.q) < 1e-12
    assert np.all(np.diag(f.r) >= 0)
    np.testing.assert_array_equal(f.r, np.triu(f.r))


def test_qr_accepts_dense_matrix(well_conditioned):
    f = qr(DenseMatrix(well_conditioned))
    assert f.n == well_conditioned.shape[0]


def test_qr_rank_deficient():
    with pytest.raises(RankDeficiencyError):
        qr(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_givens_qr_matches_householder(rng):
    t = Tridiagonal(rng.uniform(-2, 2, 14), rng.uniform(-3, 3, 15), rng.uniform(-2, 2, 14))
    banded = qr(t)
    dense = qr(t.toarray())
    np.testing.assert_allclose(banded.r.toarray(), dense.r, atol=1e-12)
    x = rng.standard_normal(15)
    np.testing.assert_allclose(banded.apply_q(banded.r_matvec(x)), t.matvec(x), atol=1e-12)
    np.testing.assert_allclose(banded.apply_qt(banded.apply_q(x)), x, atol=1e-12)


def test_givens_r_solves(rng):
    t = Tridiagonal.constant(20, -1.0, 1.0, 0.0)
    f = qr(t)
    r = f.r.toarray()
    b = rng.standard_normal(20)
    np.testing.assert_allclose(f.r_solve(b), np.linalg.solve(r, b), rtol=1e-10)
    np.testing.assert_allclose(f.r_solve_transpose(b), np.linalg.solve(r.T, b), rtol=1e-10)


def test_givens_rank_deficient():
    with pytest.raises(RankDeficiencyError):
        qr(Tridiagonal([0.0, 0.0], [1.0, 0.0, 1.0], [0.0, 0.0]))


def test_rq(well_conditioned):
    f = rq(well_conditioned)
    np.testing.assert_allclose(f.r @ f.q, well_conditioned, atol=1e-12)
    np.testing.assert_array_equal(f.r, np.triu(f.r))
    assert np.all(np.diag(f.r) >= 0)
    assert orthogonality_defect(f.q) < 1e-12


def test_polar_factors(well_conditioned):
    f = polar(well_conditioned)
    np.testing.assert_allclose(f.q @ f.h, well_conditioned, atol=1e-10)
    assert f.defect < 1e-13
    np.testing.assert_allclose(f.h, f.h.T)
    lam, v = np.linalg.eigh(well_conditioned.T @ well_conditioned)
    np.testing.assert_allclose(f.h, (v * np.sqrt(lam)) @ v.T, rtol=1e-8, atol=1e-10)


def test_polar_of_orthogonal_is_identity(rng):
    q, _ = np.linalg.qr(rng.standard_normal((8, 8)))
    f = polar(q)
    assert f.iterations <= 1
    np.testing.assert_allclose(f.h, np.eye(8), atol=1e-12)


def test_polar_iteration_limit(well_conditioned):
    with pytest.raises(ConvergenceError):
        polar(10.0 * well_conditioned, max_iter=1)


def test_sym_eig():
    lam = sym_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
    np.testing.assert_allclose(lam, [1.0, 3.0])
    with pytest.raises(AsymmetryError):
        sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


# =============================================================================
# Random instances
# =============================================================================

SIZES = [2, 7, 30, 90, 200]
SEEDS = range(20)


def random_instance(seed: int, n: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return 3.0 * np.eye(n) + rng.standard_normal((n, n)) / np.sqrt(n)


@pytest.mark.parametrize("n", SIZES)
def test_qr_random_instances(n):
    for seed in SEEDS:
        a = random_instance(seed, n)
        f = qr(a)
        assert np.linalg.norm(a - f.q @ f.r) <= 1e-12 * np.linalg.norm(a)
        assert orthogonality_defect(f.q) <= 1e-12
        assert np.all(np.diag(f.r) > 0)
        np.testing.assert_array_equal(f.r, np.triu(f.r))


@pytest.mark.parametrize("n", SIZES)
def test_rq_random_instances(n):
    for seed in SEEDS:
        a = random_instance(seed, n)
        f = rq(a)
        assert np.linalg.norm(a - f.r @ f.q) <= 1e-12 * np.linalg.norm(a)
        assert orthogonality_defect(f.q) <= 1e-12
        assert np.all(np.diag(f.r) > 0)
        np.testing.assert_array_equal(f.r, np.triu(f.r))


@pytest.mark.parametrize("n", SIZES)
def test_polar_random_instances(n):
    for seed in SEEDS:
        a = random_instance(seed, n)
        f = polar(a)
        assert np.linalg.norm(a - f.q @ f.h) <= 1e-11 * np.linalg.norm(a)
        assert np.linalg.norm(f.h - f.h.T) <= 1e-12 * np.linalg.norm(f.h)
        assert np.linalg.eigvalsh(f.h).min() > 0


@pytest.mark.parametrize("n", SIZES)
def test_gram_factors_agree(n):
    # H^T H = R^T R = A^T A, and R is the Cholesky factor of A^T A
    for seed in SEEDS:
        a = random_instance(seed, n)
        r = qr(a).r
        h = polar(a).h
        gram = r.T @ r
        assert np.linalg.norm(h.T @ h - gram) <= 1e-10 * np.linalg.norm(gram)
        chol = np.linalg.cholesky(a.T @ a).T
        assert np.linalg.norm(chol - r) <= 1e-7 * np.linalg.cond(a) * np.linalg.norm(r)
