import numpy as np
import pytest

from fracfem import oracle
from fracfem.fracpath import (DegeneratePathError, Direction, PathGeometry, influence_elements,
                              integral_path, locate_cell, path_for_point)
from fracfem.mesh import (Triangulation, generate_ellipse_mesh, generate_pentagon_mesh,
                          generate_square_mesh)


def _unit_square_two_cells():
    pts = np.array([[0, 0], [1, 0], [1, 1], [0, 1.0]])
    return Triangulation(pts, [[0, 1, 2], [0, 2, 3]], [True] * 4)


def _inside(mesh, cell, xy, tol=1e-12):
    coef = mesh.barycentric_gradients()[cell]
    lam = coef[:, 0] + coef[:, 1] * xy[0] + coef[:, 2] * xy[1]
    return lam.min() > -tol


def _random_points(mesh, count, rng):
    cells = rng.integers(mesh.num_cells, size=count)
    bary = rng.dirichlet(np.ones(3), size=count)
    return np.einsum("ij,ijk->ik", bary, mesh.cell_points[cells])


def test_two_cell_square_crosses_diagonal():
    m = _unit_square_two_cells()
    path = path_for_point(m, (2 / 3, 1 / 3), Direction.LEFT)
    np.testing.assert_allclose(path.breakpoints, [0, 1 / 3, 2 / 3], atol=1e-15)
    assert list(path.interval_cells) == [1, 0]


def test_single_interval_at_boundary_cell():
    m = generate_square_mesh(4)
    # upper-left triangle of the bottom-left square touches x=0 on its left side
    cell = next(c for c in range(m.num_cells)
                if m.cell_points[c, :, 0].min() == 0 and m.cell_points[c, :, 1].max() == 0.25
                and (m.cell_points[c, :, 0] == 0).sum() == 2)
    p = m.cell_points[cell].mean(axis=0)
    path = path_for_point(m, p, Direction.LEFT)
    assert len(path.breakpoints) == 2
    assert path.breakpoints[0] == 0.0 and path.breakpoints[-1] == pytest.approx(p[0])


def test_own_cell_in_influence_and_single_cell_mesh():
    m = generate_pentagon_mesh(5)
    for d in Direction:
        g = PathGeometry(m, d)
        for c in range(0, m.num_cells, 7):
            assert c in influence_elements(m, c, d, g)
    single = Triangulation(np.array([[0, 0], [1, 0], [0, 1.0]]), [[0, 1, 2]], [True] * 3)
    assert list(influence_elements(single, 0, Direction.LEFT)) == [0]


def test_influence_matches_bounding_box_scan():
    m = generate_square_mesh(5)
    leftmost = 0  # lower-right triangle of the bottom-left square
    got = set(influence_elements(m, leftmost, Direction.LEFT))
    ylo, yhi = m.cell_points[leftmost, :, 1].min(), m.cell_points[leftmost, :, 1].max()
    xhi = m.cell_points[leftmost, :, 0].max()
    want = {c for c in range(m.num_cells)
            if m.cell_points[c, :, 1].max() >= ylo and m.cell_points[c, :, 1].min() <= yhi
            and m.cell_points[c, :, 0].min() <= xhi}
    assert got == want
    assert all(m.cell_points[c, :, 1].min() < 0.2 + 1e-12 for c in got)


MESHES = [generate_square_mesh(5), generate_pentagon_mesh(6), generate_ellipse_mesh(0.5, 0.75, 6)]


@pytest.mark.parametrize("mesh", MESHES, ids=["square", "pentagon", "ellipse"])
@pytest.mark.parametrize("direction", list(Direction))
def test_breakpoints_match_brute_force(mesh, direction):
    rng = np.random.default_rng(hash(direction.value) % 2 ** 32)
    for p in _random_points(mesh, 25, rng):
        path = path_for_point(mesh, p, direction)
        lo, hi, hits = oracle._scanline(mesh, p, direction.axis)
        x0 = p[direction.axis]
        if direction.sign > 0:
            want = np.r_[hits[hits < x0 - 1e-12], x0]
        else:
            want = np.r_[x0, hits[hits > x0 + 1e-12]][::-1]
        np.testing.assert_allclose(path.coordinates, want, atol=1e-12)
        # coverage and ownership
        start = lo if direction.sign > 0 else hi
        assert path.lengths.sum() == pytest.approx(abs(x0 - start), abs=1e-12)
        assert np.all(path.lengths > 0)
        mids = 0.5 * (path.coordinates[:-1] + path.coordinates[1:])
        for mid, c in zip(mids, path.interval_cells):
            xy = np.array(p, dtype=float)
            xy[direction.axis] = mid
            assert _inside(mesh, c, xy)


def test_path_along_mesh_edge():
    # y = 0.4 runs along horizontal edges of the n=5 square mesh
    m = generate_square_mesh(5)
    path = path_for_point(m, (0.5, 0.4), Direction.LEFT)
    np.testing.assert_allclose(path.breakpoints, [0, 0.2, 0.4, 0.5], atol=1e-14)
    for mid, c in zip([0.1, 0.3, 0.45], path.interval_cells):
        assert _inside(m, c, (mid, 0.4))
        assert m.cell_points[c, :, 1].min() == pytest.approx(0.4)


def test_reflection_symmetry():
    m = generate_square_mesh(6)
    # this mesh is symmetric under x <-> y
    rng = np.random.default_rng(7)
    for p in _random_points(m, 10, rng):
        a = path_for_point(m, p, Direction.LEFT)
        b = path_for_point(m, p[::-1], Direction.DOWN)
        np.testing.assert_allclose(a.breakpoints, b.breakpoints, atol=1e-14)
        # point reflection (x, y) -> (1-x, 1-y) maps the mesh to itself as well
        c = path_for_point(m, 1 - p, Direction.RIGHT)
        np.testing.assert_allclose(1 + c.breakpoints, a.breakpoints, atol=1e-14)


def test_degenerate_path_detected():
    m = generate_square_mesh(4)
    p = np.array([0.6, 0.3])
    cell = locate_cell(m, p)
    with pytest.raises(DegeneratePathError):
        integral_path(m, [cell], p, Direction.LEFT)  # missing cells leave a gap
    with pytest.raises(DegeneratePathError):
        integral_path(m, [], p, Direction.LEFT)


def test_locate_outside():
    with pytest.raises(ValueError):
        locate_cell(generate_square_mesh(2), (1.5, 0.5))
