import numpy as np
import pytest

from normalkit.errors import ConfigError, MeshError
from normalkit.fem2d import (
    FemProblem2D,
    StructuredMesh,
    Wind,
    assemble_advdiff,
    assemble_advection,
    assemble_anisotropic,
    assemble_mass,
    assemble_projected_rd_dense,
    assemble_stiffness,
    export_solution_csv,
    projected_rd_operator,
    riesz,
)
from normalkit.krylov import KrylovConfig, cgne
from normalkit.precond import Symmetry, parse_preconditioner
from normalkit.xprmt import fem_choice_preconditioner, solve_fem, variant_matrix

# =============================================================================
# Mesh
# =============================================================================


def test_mesh_counts():
    mesh = StructuredMesh(4)
    assert mesh.n_nodes == 25
    assert mesh.triangles.shape == (32, 3)
    assert mesh.n_dofs == 9
    assert mesh.areas.sum() == pytest.approx(1.0)
    assert np.all(mesh.areas > 0)
    np.testing.assert_allclose(mesh.gradients.sum(axis=1), 0.0, atol=1e-12)


def test_mesh_validation():
    with pytest.raises(MeshError):
        StructuredMesh(1)
    with pytest.raises(MeshError):
        _ = StructuredMesh(4, 3).grid


def test_dof_map_and_extend():
    mesh = StructuredMesh(3)
    assert mesh.dof_map[mesh.interior].tolist() == [0, 1, 2, 3]
    assert np.count_nonzero(mesh.dof_map < 0) == 12
    full = mesh.extend(np.arange(1.0, 5.0))
    assert full[mesh.boundary_mask].sum() == 0.0
    np.testing.assert_array_equal(full[mesh.interior], [1.0, 2.0, 3.0, 4.0])


# =============================================================================
# Element matrices
# =============================================================================


def test_stiffness_is_five_point_laplacian():
    mesh = StructuredMesh(8)
    k = assemble_stiffness(mesh)
    np.testing.assert_allclose(k.toarray().diagonal(), 4.0)
    assert k.symmetry_defect() < 1e-14
    full = assemble_stiffness(mesh, interior_only=False).toarray()
    np.testing.assert_allclose(full.sum(axis=1), 0.0, atol=1e-12)


def test_mass_integrates_constants():
    full = assemble_mass(StructuredMesh(6), interior_only=False).toarray()
    assert full.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(full, full.T)


@pytest.mark.parametrize("wind", list(Wind))
def test_advection_is_skew_on_interior(wind):
    c = assemble_advection(StructuredMesh(8), wind.vector).toarray()
    np.testing.assert_allclose(c + c.T, 0.0, atol=1e-14)


# right triangles with legs 1/2, diagonals from (0, 0) to (1, 1); node = 3 * row + column
HAND_STIFFNESS = {
    (0, 0): 1.0,
    (2, 2): 1.0,
    (6, 6): 1.0,
    (8, 8): 1.0,
    (1, 1): 2.0,
    (4, 4): 4.0,
    (0, 1): -0.5,
    (0, 3): -0.5,
    (0, 4): 0.0,
    (1, 4): -1.0,
}
HAND_MASS = {(0, 0): 1 / 24, (2, 2): 1 / 48, (4, 4): 1 / 8, (0, 4): 1 / 48, (0, 1): 1 / 96, (0, 2): 0.0}


def test_two_by_two_element_matrices():
    mesh = StructuredMesh(2)
    k = assemble_stiffness(mesh, interior_only=False).toarray()
    m = assemble_mass(mesh, interior_only=False).toarray()
    for (i, j), value in HAND_STIFFNESS.items():
        assert k[i, j] == pytest.approx(value, abs=1e-14)
        assert k[j, i] == pytest.approx(value, abs=1e-14)
    for (i, j), value in HAND_MASS.items():
        assert m[i, j] == pytest.approx(value, abs=1e-15)
    np.testing.assert_allclose(assemble_stiffness(mesh).toarray(), [[4.0]])
    np.testing.assert_allclose(assemble_mass(mesh).toarray(), [[1 / 8]])


@pytest.mark.parametrize("wind", list(Wind))
def test_reversed_wind_is_the_adjoint(wind):
    mesh = StructuredMesh(8)
    bx, by = wind.vector
    a, _ = assemble_advdiff(mesh, FemProblem2D(nu=0.01, beta=(bx, by), delta_sd=0.0))
    reversed_a, _ = assemble_advdiff(mesh, FemProblem2D(nu=0.01, beta=(-bx, -by), delta_sd=0.0))
    a = a.toarray()
    assert np.linalg.norm(a.T - reversed_a.toarray()) <= 1e-12 * np.linalg.norm(a)


def test_system_is_sum_of_forms():
    mesh = StructuredMesh(8)
    p = FemProblem2D.with_wind(0.05, "diag", delta_sd=0.3)
    a, _ = assemble_advdiff(mesh, p)
    expected = (
        0.05 * assemble_stiffness(mesh).toarray()
        + assemble_advection(mesh, p.beta).toarray()
        + 0.3 * assemble_anisotropic(mesh, p.beta).toarray()
    )
    np.testing.assert_allclose(a.toarray(), expected, atol=1e-12)


def test_load_without_stabilization():
    mesh = StructuredMesh(8)
    _, rhs = assemble_advdiff(mesh, FemProblem2D(nu=1.0, delta_sd=0.0))
    np.testing.assert_allclose(rhs, 1.0 / 64.0)


def test_constant_boundary_data_is_reproduced():
    mesh = StructuredMesh(6)
    p = FemProblem2D(nu=0.1, beta=Wind.DIAG.vector, delta_sd=0.05, f=lambda x, y: 0.0 * x)
    a, rhs = assemble_advdiff(mesh, p, boundary=lambda x, y: np.ones_like(x))
    np.testing.assert_allclose(np.linalg.solve(a.toarray(), rhs), 1.0, rtol=1e-10)


def test_projected_operator_matches_dense():
    mesh = StructuredMesh(6)
    op = projected_rd_operator(mesh, 0.02, Wind.X.vector)
    dense = assemble_projected_rd_dense(mesh, 0.02, Wind.X.vector)
    np.testing.assert_allclose(op @ np.eye(mesh.n_dofs), dense, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [{"nu": 0.0}, {"nu": 1.0, "beta": (1.0, 1.0)}, {"nu": 1.0, "delta_sd": -1.0}],
)
def test_problem_validation(kwargs):
    with pytest.raises(ConfigError):
        FemProblem2D(**kwargs)


def test_wind_tags():
    assert Wind("x").tag == "xflow"
    assert Wind.DIAG.tag == "diagflow"
    assert np.hypot(*Wind.DIAG.vector) == pytest.approx(1.0)


# =============================================================================
# Solves
# =============================================================================


def test_projected_preconditioner_is_exact_without_stabilization():
    rep = solve_fem("rd-projected", 8, 1e-2, "x", delta_sd=0.0, tol_abs=1e-10)
    assert rep.converged
    assert rep.iterations <= 2


def test_reaction_diffusion_preconditioner_converges():
    rep = solve_fem("rd-direct", 16, 1e-2, "diag", tol_abs=1e-8)
    assert rep.converged
    assert rep.iterations < 200


def test_weighted_cgne_matches_factored_system():
    # T = C^T C: CGNE with T and plain CGNE on C A x = C b build the same iterates
    mesh = StructuredMesh(8)
    p = FemProblem2D.with_wind(1e-2, "diag")
    a, b = assemble_advdiff(mesh, p)
    t = riesz(mesh, "h1", p.nu)
    dense_t = t.to_dense()
    c = np.linalg.cholesky(0.5 * (dense_t + dense_t.T)).T
    cfg = KrylovConfig(tol_abs=1e-14, max_iter=12, keep_iterates=True)
    weighted = cgne(a, b, riesz=t, config=cfg)
    factored = cgne(c @ a.toarray(), c @ b, config=cfg)
    assert weighted.iterations == factored.iterations == 12
    for x, y in zip(weighted.iterates, factored.iterates, strict=True):
        np.testing.assert_allclose(x, y, rtol=0, atol=1e-8 * max(np.linalg.norm(y), 1.0))


def test_iteration_counts_are_reproducible():
    first = solve_fem("rd-direct", 16, 1e-2, "diag", tol_abs=1e-8)
    second = solve_fem("rd-direct", 16, 1e-2, "diag", tol_abs=1e-8)
    assert first.iterations == second.iterations
    assert first.residual_history == second.residual_history


# =============================================================================
# Preconditioner choices
# =============================================================================


def as_dense(g) -> np.ndarray:
    return g if isinstance(g, np.ndarray) else g.toarray()


@pytest.mark.parametrize("variant", ["rd-projected", "rd-direct", "l2-aniso"])
@pytest.mark.parametrize("text", ["direct", "direct:lu", "inner-cg:tol=1e-12,max=2000"])
def test_choice_applies_the_variant_inverse(variant, text, rng):
    mesh = StructuredMesh(6)
    p = FemProblem2D.with_wind(1e-2, "x")
    g = fem_choice_preconditioner(parse_preconditioner(text), variant, mesh, p)
    r = rng.standard_normal(mesh.n_dofs)
    expected = np.linalg.solve(as_dense(variant_matrix(variant, mesh, p)), r)
    np.testing.assert_allclose(g(r), expected, rtol=1e-7, atol=1e-9 * np.linalg.norm(expected))


def test_gmg_choice_needs_a_sparse_variant():
    mesh = StructuredMesh(8)
    p = FemProblem2D.with_wind(1e-2, "x")
    with pytest.raises(ConfigError):
        fem_choice_preconditioner(parse_preconditioner("gmg"), "rd-projected", mesh, p)
    gmg = fem_choice_preconditioner(parse_preconditioner("gmg"), "rd-gmg", mesh, p)
    assert gmg.symmetry == Symmetry.BY_CONSTRUCTION


def test_export_solution(tmp_path):
    mesh = StructuredMesh(4)
    path = export_solution_csv(mesh, np.full(mesh.n_dofs, 2.5), tmp_path / "out" / "u.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "x,y,u"
    assert len(lines) == 1 + mesh.n_nodes
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data[mesh.boundary_mask, 2].sum() == 0.0
    np.testing.assert_allclose(data[mesh.interior, 2], 2.5)
