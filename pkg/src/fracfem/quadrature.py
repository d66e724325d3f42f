"""Symmetric Gauss rules on triangles (barycentric points, weights summing to 1)."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class UnsupportedDegreeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TriangleRule:
    degree: int
    points: np.ndarray  # (nq, 3) barycentric coordinates
    weights: np.ndarray  # (nq,), fractions of the cell area

    def __len__(self):
        return len(self.weights)


def _orbit3(a):
    b = 1.0 - 2.0 * a
    return [(b, a, a), (a, b, a), (a, a, b)]


def _orbit6(a, b):
    c = 1.0 - a - b
    return [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]


def _rule_4():
    # Dunavant degree-4, six points
    a1, w1 = 0.44594849091596488632, 0.22338158967801146570
    a2, w2 = 0.09157621350977074346, 0.10995174365532186764
    return _orbit3(a1) + _orbit3(a2), [w1] * 3 + [w2] * 3


def _rule_5():
    # Radon's seven-point rule, closed form
    s = np.sqrt(15.0)
    a1, a2 = (6.0 - s) / 21.0, (6.0 + s) / 21.0
    w1, w2 = (155.0 - s) / 1200.0, (155.0 + s) / 1200.0
    pts = [(1 / 3, 1 / 3, 1 / 3)] + _orbit3(a1) + _orbit3(a2)
    return pts, [9.0 / 40.0] + [w1] * 3 + [w2] * 3


@lru_cache(maxsize=None)
def triangle_rule(degree=4):
    """Rule exact for polynomials of total degree ``degree`` (1 to 5).

    Degree 3 returns the degree-4 rule, since every classical 4-point
    degree-3 rule has a negative weight.
    """
    if degree == 1:
        pts, w = [(1 / 3, 1 / 3, 1 / 3)], [1.0]
    elif degree == 2:
        pts, w = _orbit3(1 / 6), [1 / 3] * 3
    elif degree in (3, 4):
        pts, w = _rule_4()
    elif degree == 5:
        pts, w = _rule_5()
    else:
        raise UnsupportedDegreeError(f"no triangle rule of degree {degree!r}")
    points = np.array(pts, dtype=float)
    weights = np.array(w, dtype=float)
    points.setflags(write=False)
    weights.setflags(write=False)
    return TriangleRule(int(degree), points, weights)


def map_rule_to_cell(rule, mesh, cell):
    """Physical points (nq, 2) and weights (nq,) of ``rule`` on one cell."""
    verts = mesh.points[mesh.cells[cell]]
    return rule.points @ verts, rule.weights * mesh.areas[cell]


def map_rule(rule, mesh):
    """Vectorised :func:`map_rule_to_cell` over all cells: (nc, nq, 2), (nc, nq)."""
    pts = np.einsum("qj,cjd->cqd", rule.points, mesh.cell_points)
    return pts, mesh.areas[:, None] * rule.weights[None, :]
