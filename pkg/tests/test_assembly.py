import numpy as np
import pytest

from fracfem import oracle
from fracfem.assembly import (InvalidOrderError, apply_dirichlet, assemble_load_F,
                              assemble_load_f, assemble_mass, assemble_reaction,
                              assemble_stiffness, dump_coo, embed, riesz_coefficient)
from fracfem.mesh import Triangulation, generate_pentagon_mesh, generate_square_mesh
from fracfem.quadrature import triangle_rule
from fracfem.validate import stiffness_oracle_error, structural_report


def _reference_triangle():
    return Triangulation(np.array([[0, 0], [1, 0], [0, 1.0]]), [[0, 1, 2]], [True] * 3)


def test_mass_reference_block():
    M = assemble_mass(_reference_triangle()).toarray()
    want = np.full((3, 3), 1 / 24) + np.eye(3) / 24
    np.testing.assert_allclose(M, want, atol=1e-15)


def test_mass_total_and_symmetry():
    m = generate_pentagon_mesh(6)
    M = assemble_mass(m)
    assert M.sum() == pytest.approx(7 / 8, abs=1e-12)
    assert abs(M - M.T).max() == 0.0


def test_riesz_coefficient_negative():
    for mu in (0.55, 0.75, 0.95):
        assert riesz_coefficient(mu) < 0
    assert riesz_coefficient(1.0) == pytest.approx(-0.5)


def test_reaction_reduces_to_mass():
    m = generate_pentagon_mesh(5)
    u = np.random.default_rng(0).standard_normal(m.num_vertices)
    M = assemble_mass(m).toarray()
    D1 = assemble_reaction(m, u, lambda v: np.ones_like(v)).toarray()
    np.testing.assert_allclose(D1, M, atol=1e-12)
    D0 = assemble_reaction(m, u, lambda v: np.zeros_like(v))
    assert abs(D0).max() == 0.0
    dF = lambda v: -2.0 * v  # noqa: E731
    D2 = assemble_reaction(m, np.ones(m.num_vertices), dF).toarray()
    np.testing.assert_allclose(D2, -2 * M, atol=1e-12)
    D3 = assemble_reaction(m, u, dF)
    assert abs(D3 - D3.T).max() < 1e-15


def test_load_vectors():
    m = generate_pentagon_mesh(5)
    assert not np.any(assemble_load_f(m, lambda x, y, t: 0 * x, 0.0))
    b = assemble_load_f(m, lambda x, y, t: np.ones_like(x), 0.3)
    assert b.sum() == pytest.approx(7 / 8, abs=1e-12)
    b1 = assemble_load_F(m, np.ones(m.num_vertices), lambda u: -u * u)
    np.testing.assert_allclose(b1, -np.asarray(assemble_mass(m).sum(axis=1)).ravel(), atol=1e-12)


def test_load_uses_time():
    m = generate_square_mesh(3)
    b = assemble_load_f(m, lambda x, y, t: t + 0 * x, 2.0)
    assert b.sum() == pytest.approx(2.0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_stiffness_matches_oracle(n):
    assert stiffness_oracle_error(n, 0.75, 0.75) <= 1e-6


def test_stiffness_oracle_anisotropic():
    assert stiffness_oracle_error(3, 0.6, 0.9, 1.0, 2.0) <= 1e-6


def test_pairing_oracle_symmetry_and_entry():
    m = generate_square_mesh(2)
    rule = triangle_rule(4)
    A = assemble_stiffness(m, 0.75, 0.75, 1.0, 1.0, rule).toarray()
    c = riesz_coefficient(0.75)
    k, l = 4, 1  # centre vertex and bottom-middle vertex
    entry = 0.0
    for lower, upper in (("left", "right"), ("down", "up")):
        entry += c * (oracle.pairing_oracle(m, k, l, 0.75, (lower, upper), rule)
                      + oracle.pairing_oracle(m, k, l, 0.75, (upper, lower), rule))
    assert A[k, l] == pytest.approx(entry, rel=1e-6)
    assert A[l, k] == pytest.approx(entry, rel=1e-6)


@pytest.mark.parametrize("mesh", [generate_square_mesh(6), generate_pentagon_mesh(6)],
                         ids=["square", "pentagon"])
@pytest.mark.parametrize("orders", [(0.55, 0.55), (0.75, 0.75), (0.95, 0.6)])
def test_symmetric_positive(mesh, orders):
    sym, qmin, mmin = structural_report(mesh, *orders, kx=1.0, ky=2.0, seed=1)
    assert sym <= 1e-10
    assert qmin > 0
    assert mmin > 0


def test_band_structure():
    n = 6
    m = generate_square_mesh(n)
    A = assemble_stiffness(m, 0.8, 0.8, 1.0, 1.0).toarray()
    supports = [m.cell_points[c].reshape(-1, 2) for c in m.vertex_to_cells]
    for k in range(m.num_vertices):
        for l in range(m.num_vertices):
            xk, xl = supports[k][:, 0], supports[l][:, 0]
            yk, yl = supports[k][:, 1], supports[l][:, 1]
            x_apart = xk.max() <= xl.min() or xl.max() <= xk.min()
            y_apart = yk.max() <= yl.min() or yl.max() <= yk.min()
            if x_apart and y_apart:
                assert A[k, l] == 0.0
    # nonlocal coupling along a row: far-apart vertices in one horizontal band interact
    assert A[0 * (n + 1) + 1, 0 * (n + 1) + 5] != 0.0


def test_invalid_orders():
    m = generate_square_mesh(2)
    for a in (0.5, 1.0, 0.3):
        with pytest.raises(InvalidOrderError):
            assemble_stiffness(m, a, 0.7, 1.0, 1.0)
    with pytest.raises(ValueError):
        assemble_stiffness(m, 0.7, 0.7, 0.0, 1.0)


def test_threads_identical():
    m = generate_pentagon_mesh(6)
    A1 = assemble_stiffness(m, 0.7, 0.8, 1.0, 2.0, threads=1)
    A3 = assemble_stiffness(m, 0.7, 0.8, 1.0, 2.0, threads=3)
    assert abs(A1 - A3).max() <= 1e-12 * abs(A1).max()


def test_dirichlet_elimination():
    m = generate_square_mesh(2)
    M = assemble_mass(m)
    R = apply_dirichlet(m, M)
    assert R.shape == (1, 1)
    m5 = generate_square_mesh(5)
    Rm = apply_dirichlet(m5, assemble_mass(m5)).toarray()
    assert Rm.shape == (16, 16)
    assert np.linalg.eigvalsh(Rm).min() > 0
    v = np.arange(16.0)
    full = embed(m5, v)
    assert np.all(full[m5.boundary] == 0)
    np.testing.assert_array_equal(apply_dirichlet(m5, full), v)
    dense = assemble_mass(m5).toarray()
    np.testing.assert_array_equal(apply_dirichlet(m5, dense), Rm)


def test_dump_coo(tmp_path):
    m = generate_square_mesh(2)
    M = assemble_mass(m)
    path = tmp_path / "m.txt"
    dump_coo(M, path)
    rows = np.loadtxt(path)
    rebuilt = np.zeros(M.shape)
    for i, j, v in rows:
        rebuilt[int(i), int(j)] += v
    np.testing.assert_array_equal(rebuilt, M.toarray())
