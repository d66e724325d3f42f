"""Integral paths of axis-parallel fractional derivatives on a triangulation.

For an evaluation point the path is the segment from the domain boundary to
the point along one coordinate axis, cut at every element edge it crosses.
All four directions are reduced to the x-left case by a coordinate map:
the path coordinate ``s`` increases toward the evaluation point and ``r`` is
held fixed along the path.

==========  =======  =======
direction   s        r
==========  =======  =======
LEFT        x        y
RIGHT       -x       y
DOWN        y        x
UP          -y       x
==========  =======  =======
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class DegeneratePathError(RuntimeError):
    pass


class Direction(enum.Enum):
    """Lower limit of the Riemann-Liouville operator: a(y), b(y), c(x), d(x)."""

    LEFT = "left"
    RIGHT = "right"
    DOWN = "down"
    UP = "up"

    @property
    def axis(self):
        return 0 if self in (Direction.LEFT, Direction.RIGHT) else 1

    @property
    def sign(self):
        return 1.0 if self in (Direction.LEFT, Direction.DOWN) else -1.0

    def to_path_coords(self, xy):
        """Map physical ``(..., 2)`` coordinates to ``(s, r)``."""
        xy = np.asarray(xy, dtype=float)
        return self.sign * xy[..., self.axis], xy[..., 1 - self.axis]

    def from_path_coords(self, s, r):
        out = np.empty(np.broadcast(s, r).shape + (2,))
        out[..., self.axis] = self.sign * np.asarray(s)
        out[..., 1 - self.axis] = r
        return out


def merge_tolerance(mesh):
    lo, hi = mesh.points.min(axis=0), mesh.points.max(axis=0)
    return 1e-12 * float(np.hypot(*(hi - lo)))


@dataclass(frozen=True)
class IntegralPath:
    """Ordered breakpoints of one path.

    ``breakpoints`` are path coordinates ``s`` (strictly increasing, first on
    the boundary, last at the evaluation point); ``interval_cells[j]`` owns
    ``[breakpoints[j], breakpoints[j+1]]``.
    """

    point: tuple
    direction: Direction
    breakpoints: np.ndarray
    interval_cells: np.ndarray

    @property
    def coordinates(self):
        """Breakpoints as physical coordinates along the path axis."""
        return self.direction.sign * self.breakpoints

    @property
    def lengths(self):
        return np.diff(self.breakpoints)


class PathGeometry:
    """Per-direction cached geometry of a mesh: transformed vertices and boxes."""

    def __init__(self, mesh, direction):
        self.mesh = mesh
        self.direction = Direction(direction)
        s, r = self.direction.to_path_coords(mesh.cell_points)
        self.s, self.r = s, r  # (nc, 3) each
        self.s_min, self.s_max = s.min(axis=1), s.max(axis=1)
        self.r_min, self.r_max = r.min(axis=1), r.max(axis=1)
        self._boundary_edges = None

    @property
    def boundary_edges(self):
        """Set of sorted vertex pairs of edges owned by a single cell."""
        if self._boundary_edges is None:
            edges, counts = self.mesh.edges()
            self._boundary_edges = {tuple(e) for e in edges[counts == 1]}
        return self._boundary_edges

    def on_boundary(self, cell, s, r, tol):
        """True if path point ``(s, r)`` lies on a boundary edge or vertex of ``cell``."""
        verts = self.mesh.cells[cell]
        for j in range(3):
            if (self.mesh.boundary[verts[j]]
                    and np.hypot(self.s[cell, j] - s, self.r[cell, j] - r) <= tol):
                return True
        for j in range(3):
            a, b = j, (j + 1) % 3
            if tuple(sorted((verts[a], verts[b]))) not in self.boundary_edges:
                continue
            p = np.array([self.s[cell, a], self.r[cell, a]])
            q = np.array([self.s[cell, b], self.r[cell, b]])
            d = q - p
            t = np.clip(np.dot([s, r] - p, d) / np.dot(d, d), 0.0, 1.0)
            if np.hypot(*(p + t * d - [s, r])) <= tol:
                return True
        return False


def influence_elements(mesh, cell, direction, geometry=None):
    """Candidate cells for the paths of points inside ``cell``.

    Every cell whose bounding box meets the strip
    ``{r in [r_min, r_max] of cell, s <= s_max of cell}`` is returned, sorted.
    """
    g = geometry or PathGeometry(mesh, direction)
    mask = ((g.r_max >= g.r_min[cell]) & (g.r_min <= g.r_max[cell])
            & (g.s_min <= g.s_max[cell]))
    return np.flatnonzero(mask)


def cell_chords(s, r, r_line):
    """Intersection chords of lines ``r = r_line`` with triangles.

    Parameters
    ----------
    s, r : (ne, 3) path coordinates of candidate triangle vertices
    r_line : (nq,) fixed coordinate of each line

    Returns
    -------
    lo, hi : (nq, ne) chord end coordinates (undefined where not ``valid``)
    valid : (nq, ne) bool

    A line running along an edge is attributed only to the cell lying on the
    larger-``r`` side of that edge, so shared edges are counted once.
    """
    rl = np.asarray(r_line, dtype=float)[:, None, None]
    R, S = r[None], s[None]
    Rn, Sn = np.roll(R, -1, axis=2), np.roll(S, -1, axis=2)
    crosses = ((R - rl) * (Rn - rl) <= 0) & (R != Rn)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(crosses, (rl - R) / (Rn - R), np.nan)
    xs = S + t * (Sn - S)
    on_edge = np.where(crosses, xs, np.nan)
    with np.errstate(invalid="ignore"):
        lo = np.fmin.reduce(on_edge, axis=2)
        hi = np.fmax.reduce(on_edge, axis=2)
    rmin, rmax = r.min(axis=1)[None], r.max(axis=1)[None]
    rq = rl[..., 0]
    proper = (rmin < rq) & (rq < rmax)
    along_bottom = (rq == rmin) & ((R[..., :] == rl).sum(axis=2) == 2)
    valid = (proper | along_bottom) & np.isfinite(lo)
    return lo, hi, valid


def integral_path(mesh, influence, point, direction, geometry=None):
    """Ordered intersection points of the path ending at ``point``.

    ``influence`` is an array of candidate cell ids (see
    :func:`influence_elements`); it must contain every cell the path crosses.
    """
    direction = Direction(direction)
    g = geometry or PathGeometry(mesh, direction)
    influence = np.asarray(influence, dtype=np.int64)
    s0, r0 = direction.to_path_coords(np.asarray(point, dtype=float))
    tol = merge_tolerance(mesh)
    lo, hi, valid = cell_chords(g.s[influence], g.r[influence], np.array([r0]))
    lo, hi, valid = lo[0], hi[0], valid[0]
    end = np.minimum(hi, s0)
    keep = valid & (end - lo > tol)
    lo, end, cells = lo[keep], end[keep], influence[keep]
    order = np.lexsort((cells, lo))
    lo, end, cells = lo[order], end[order], cells[order]

    breaks, owners = [], []
    for a, b, c in zip(lo, end, cells):
        if breaks and a < breaks[-1] - tol:
            # overlapping chord: a collinear duplicate, keep the first owner
            if b <= breaks[-1] + tol:
                continue
            a = breaks[-1]
        if not breaks:
            breaks.append(a)
        elif abs(a - breaks[-1]) > tol:
            raise DegeneratePathError(f"gap in path at s={breaks[-1]!r}")
        breaks.append(b)
        owners.append(c)
    if len(breaks) < 2:
        raise DegeneratePathError(f"path to {tuple(point)} has fewer than two breakpoints")
    if not g.on_boundary(owners[0], breaks[0], r0, 1e3 * tol):
        raise DegeneratePathError(
            f"path to {tuple(point)} starts at s={breaks[0]!r}, not on the boundary")
    bp = np.array(breaks)
    bp[-1] = s0
    return IntegralPath(tuple(map(float, point)), direction, bp, np.array(owners, dtype=np.int64))


def locate_cell(mesh, point, tol=1e-12):
    """Index of a cell containing ``point`` (brute force)."""
    coef = mesh.barycentric_gradients()
    lam = coef[:, :, 0] + coef[:, :, 1] * point[0] + coef[:, :, 2] * point[1]
    inside = np.flatnonzero(lam.min(axis=1) >= -tol)
    if not len(inside):
        raise ValueError(f"point {tuple(point)} lies outside the mesh")
    return int(inside[np.argmax(lam[inside].min(axis=1))])


def path_for_point(mesh, point, direction, geometry=None):
    """Convenience wrapper: locate the cell, build its influence set, trace the path."""
    direction = Direction(direction)
    g = geometry or PathGeometry(mesh, direction)
    cell = locate_cell(mesh, point)
    return integral_path(mesh, influence_elements(mesh, cell, direction, g), point,
                         direction, g)
