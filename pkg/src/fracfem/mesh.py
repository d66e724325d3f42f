"""Conforming triangulations of convex polygonal domains.

Generators for the unit square, the cut-corner pentagon, ellipses and disks,
plus a plain-text reader/writer.  A :class:`Triangulation` is immutable after
construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay


class MeshError(ValueError):
    """Base class for mesh construction and IO failures."""


class MeshParseError(MeshError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class NonconformingMeshError(MeshError):
    pass


def _signed_areas(points, cells):
    p0, p1, p2 = points[cells[:, 0]], points[cells[:, 1]], points[cells[:, 2]]
    d1, d2 = p1 - p0, p2 - p0
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


@dataclass(frozen=True, eq=False)
class Triangulation:
    """Triangle mesh with boundary flags.

    Parameters
    ----------
    points : (nv, 2) float array
    cells : (nc, 3) int array, vertex indices (reoriented counter-clockwise)
    boundary : (nv,) bool array, True for vertices on the domain boundary
    """

    points: np.ndarray
    cells: np.ndarray
    boundary: np.ndarray
    areas: np.ndarray = field(init=False)
    h: float = field(init=False)

    def __post_init__(self):
        points = np.ascontiguousarray(self.points, dtype=float)
        cells = np.array(self.cells, dtype=np.int64).reshape(-1, 3)
        boundary = np.asarray(self.boundary, dtype=bool)
        if points.ndim != 2 or points.shape[1] != 2:
            raise MeshError("points must have shape (nv, 2)")
        if boundary.shape != (len(points),):
            raise MeshError("boundary flags must have one entry per vertex")
        if not np.all(np.isfinite(points)):
            raise MeshError("vertex coordinates must be finite")
        if len(cells) and (cells.min() < 0 or cells.max() >= len(points)):
            raise MeshError("cell references a vertex index out of range")
        if np.any((cells[:, 0] == cells[:, 1]) | (cells[:, 1] == cells[:, 2])
                  | (cells[:, 0] == cells[:, 2])):
            raise MeshError("cell with repeated vertex")
        area = _signed_areas(points, cells)
        if np.any(area == 0.0):
            raise MeshError("degenerate cell with zero area")
        flip = area < 0
        cells[flip] = cells[flip][:, [0, 2, 1]]
        for name, value in (("points", points), ("cells", cells),
                            ("boundary", boundary)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        areas = np.abs(area)
        areas.setflags(write=False)
        object.__setattr__(self, "areas", areas)
        edges = self.cell_points[:, [1, 2, 0]] - self.cell_points
        object.__setattr__(self, "h", float(np.sqrt((edges ** 2).sum(-1)).max()))

    @property
    def num_vertices(self):
        return len(self.points)

    @property
    def num_cells(self):
        return len(self.cells)

    @property
    def cell_points(self):
        """(nc, 3, 2) array of vertex coordinates per cell."""
        return self.points[self.cells]

    @property
    def interior(self):
        """Indices of free (non-boundary) vertices in increasing order."""
        return np.flatnonzero(~self.boundary)

    @property
    def vertex_to_cells(self):
        """List of sorted cell-id arrays, one per vertex."""
        order = np.argsort(self.cells.ravel(), kind="stable")
        counts = np.bincount(self.cells.ravel(), minlength=self.num_vertices)
        return np.split(order // 3, np.cumsum(counts)[:-1])

    def edges(self):
        """Unique edges as (ne, 2) sorted vertex pairs, and the per-edge cell count."""
        e = np.sort(self.cells[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
        uniq, counts = np.unique(e, axis=0, return_counts=True)
        return uniq, counts

    def check_conforming(self):
        _, counts = self.edges()
        if np.any(counts > 2):
            raise NonconformingMeshError(
                f"{int((counts > 2).sum())} edge(s) shared by more than two cells")

    def barycentric_gradients(self):
        """Affine coefficients of the P1 basis on each cell.

        Returns ``coef`` of shape (nc, 3, 3) with
        ``lambda_j(x, y) = coef[c, j, 0] + coef[c, j, 1]*x + coef[c, j, 2]*y``.
        """
        return barycentric_coefficients(self.cell_points)


def barycentric_coefficients(cell_points):
    p = np.asarray(cell_points, dtype=float)
    x, y = p[..., 0], p[..., 1]
    det = ((x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0])
           - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0]))
    coef = np.empty(p.shape[:1] + (3, 3))
    for j in range(3):
        k, m = (j + 1) % 3, (j + 2) % 3
        coef[:, j, 0] = (x[:, k] * y[:, m] - x[:, m] * y[:, k]) / det
        coef[:, j, 1] = (y[:, k] - y[:, m]) / det
        coef[:, j, 2] = (x[:, m] - x[:, k]) / det
    return coef


def _check_n(n):
    if int(n) != n or n < 2:
        raise MeshError(f"subdivision count must be an integer >= 2, got {n!r}")
    return int(n)


def generate_square_mesh(n):
    """Structured mesh of (0,1)^2 with ``2 n^2`` cells split along one diagonal."""
    n = _check_n(n)
    t = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(t, t)
    points = np.c_[X.ravel(), Y.ravel()]
    i, j = np.meshgrid(np.arange(n), np.arange(n))
    v0 = (j * (n + 1) + i).ravel()
    v1, v2, v3 = v0 + 1, v0 + n + 2, v0 + n + 1
    cells = np.vstack([np.c_[v0, v1, v2], np.c_[v0, v2, v3]])
    ix, iy = np.divmod(np.arange(len(points)), n + 1)[::-1]
    boundary = (ix == 0) | (ix == n) | (iy == 0) | (iy == n)
    return Triangulation(points, cells, boundary)


def _polygon_boundary_distance(points, vertices):
    d = np.full(len(points), np.inf)
    for a, b in zip(vertices, np.roll(vertices, -1, axis=0)):
        ab = b - a
        s = np.clip(((points - a) @ ab) / (ab @ ab), 0.0, 1.0)
        d = np.minimum(d, np.hypot(*(points - a - s[:, None] * ab).T))
    return d


def convex_polygon_mesh(vertices, n):
    """Delaunay mesh of a convex polygon with target edge length ``1/n``.

    Boundary nodes are placed on the polygon edges so the polygon is exactly
    represented; interior nodes come from the ``1/n`` lattice.
    """
    n = _check_n(n)
    vertices = np.asarray(vertices, dtype=float)
    spacing = 1.0 / n
    boundary_pts = []
    for a, b in zip(vertices, np.roll(vertices, -1, axis=0)):
        m = max(1, int(np.ceil(np.hypot(*(b - a)) / spacing - 1e-9)))
        s = np.arange(m)[:, None] / m
        boundary_pts.append(a + s * (b - a))
    boundary_pts = np.vstack(boundary_pts)

    lo, hi = vertices.min(axis=0), vertices.max(axis=0)
    gx = np.arange(np.floor(lo[0] / spacing), np.ceil(hi[0] / spacing) + 1) * spacing
    gy = np.arange(np.floor(lo[1] / spacing), np.ceil(hi[1] / spacing) + 1) * spacing
    X, Y = np.meshgrid(gx, gy)
    grid = np.c_[X.ravel(), Y.ravel()]
    inside = np.ones(len(grid), dtype=bool)
    for a, b in zip(vertices, np.roll(vertices, -1, axis=0)):
        normal = np.array([b[1] - a[1], a[0] - b[0]])
        inside &= (grid - a) @ normal < 0  # counter-clockwise polygon
    grid = grid[inside]
    grid = grid[_polygon_boundary_distance(grid, vertices) > 0.35 * spacing]

    points = np.vstack([boundary_pts, grid])
    flags = np.r_[np.ones(len(boundary_pts), bool), np.zeros(len(grid), bool)]
    return _delaunay(points, flags)


def _delaunay(points, flags):
    tri = Delaunay(points)
    if len(tri.coplanar):
        raise MeshError("Delaunay dropped input points")
    cells = tri.simplices
    area = np.abs(_signed_areas(points, cells))
    cells = cells[area > 1e-12 * area.max()]
    mesh = Triangulation(points, cells, flags)
    mesh.check_conforming()
    return mesh


PENTAGON_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 0.5], [0.5, 1.0], [0.0, 1.0]])


def generate_pentagon_mesh(n):
    """Mesh of {(x, y) in (0,1)^2 : x + y < 1.5} with edge length about ``1/n``."""
    return convex_polygon_mesh(PENTAGON_VERTICES, n)


def generate_ellipse_mesh(a, b, n, center=(0.0, 0.0)):
    """Ring-based mesh of the ellipse ``x^2/a^2 + y^2/b^2 < 1``.

    ``n`` is the number of subdivisions per unit length; rings are equally
    spaced in the radial parameter and boundary nodes lie on the ellipse.
    """
    n = _check_n(n)
    if not (a > 0 and b > 0):
        raise MeshError("ellipse semi-axes must be positive")
    rings = max(2, int(np.ceil(max(a, b) * n - 1e-9)))
    pts = [np.zeros((1, 2))]
    for k in range(1, rings + 1):
        rho = k / rings
        # Ramanujan's perimeter approximation sets the ring node count
        perim = np.pi * rho * (3 * (a + b) - np.sqrt((3 * a + b) * (a + 3 * b)))
        m = max(6, int(np.ceil(perim * n - 1e-9)))
        theta = np.pi / 4 + 2 * np.pi * np.arange(m) / m
        pts.append(np.c_[a * rho * np.cos(theta), b * rho * np.sin(theta)])
    flags = np.zeros(sum(len(p) for p in pts), dtype=bool)
    flags[-len(pts[-1]):] = True
    points = np.vstack(pts) + np.asarray(center, dtype=float)
    return _delaunay(points, flags)


def generate_disk_mesh(cx, cy, r, n):
    if not r > 0:
        raise MeshError("disk radius must be positive")
    return generate_ellipse_mesh(r, r, n, center=(cx, cy))


def save_mesh(mesh, path):
    """Write ``nv nc`` then vertex lines ``x y flag`` and cell lines ``i j k``."""
    with open(path, "w") as fh:
        fh.write(f"{mesh.num_vertices} {mesh.num_cells}\n")
        for (x, y), flag in zip(mesh.points, mesh.boundary):
            fh.write(f"{x:.17g} {y:.17g} {int(flag)}\n")
        for i, j, k in mesh.cells:
            fh.write(f"{i} {j} {k}\n")


def load_mesh(path):
    records = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].split()
        if line:
            records.append((lineno, line))
    if not records:
        raise MeshParseError("empty mesh file", 1)

    def ints(lineno, fields, count):
        if len(fields) != count:
            raise MeshParseError(f"expected {count} fields, got {len(fields)}", lineno)
        try:
            return [int(f) for f in fields]
        except ValueError as exc:
            raise MeshParseError(str(exc), lineno) from None

    lineno, header = records[0]
    nv, nc = ints(lineno, header, 2)
    if len(records) != 1 + nv + nc:
        raise MeshParseError(
            f"header declares {nv} vertices and {nc} cells but file has "
            f"{len(records) - 1} records", records[-1][0])
    points = np.empty((nv, 2))
    flags = np.empty(nv, dtype=bool)
    for idx, (lineno, fields) in enumerate(records[1:nv + 1]):
        if len(fields) != 3:
            raise MeshParseError(f"expected 3 fields, got {len(fields)}", lineno)
        try:
            points[idx] = float(fields[0]), float(fields[1])
        except ValueError as exc:
            raise MeshParseError(str(exc), lineno) from None
        flag = ints(lineno, fields[2:], 1)[0]
        if flag not in (0, 1):
            raise MeshParseError("boundary flag must be 0 or 1", lineno)
        flags[idx] = bool(flag)
    cells = np.array([ints(lineno, fields, 3) for lineno, fields in records[nv + 1:]],
                     dtype=np.int64).reshape(-1, 3)
    dup = np.unique(np.sort(cells, axis=1), axis=0)
    if len(dup) != len(cells):
        raise NonconformingMeshError("duplicate cell in mesh file")
    mesh = Triangulation(points, cells, flags)
    mesh.check_conforming()
    return mesh
