"""Riemann-Liouville derivatives of P1 basis functions along integral paths.

On each path interval a basis function is linear, so the derivative integral
has a two-term closed form.  For an interval ``[t0, t1]`` strictly left of the
evaluation coordinate ``x``::

    S = -[f(t) (x-t)^(-mu)]_{t0}^{t1} / G(1-mu) - [f' (x-t)^(1-mu)]_{t0}^{t1} / G(2-mu)

and for the terminal interval ending at ``x``::

    S = f(t0) (x-t0)^(-mu) / G(1-mu) + f' (x-t0)^(1-mu) / G(2-mu)

``1/G`` is taken from :func:`scipy.special.rgamma`, so ``mu = 1`` gives the
classical first derivative.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import rgamma

from .fracpath import (Direction, PathGeometry, cell_chords, influence_elements,
                       integral_path, locate_cell, merge_tolerance)
from .mesh import barycentric_coefficients
from .quadrature import map_rule


class FractionalDomainError(ValueError):
    pass


def check_order(mu):
    if not 0.0 < mu <= 1.0:
        raise FractionalDomainError(f"derivative order must lie in (0, 1], got {mu!r}")


@dataclass(frozen=True)
class LinearRestriction:
    t0: float
    t1: float
    value: float  # f(t0)
    slope: float


def _contributions(v0, slope, t0, t1, x, terminal, mu):
    """Vectorised interval contributions; see module docstring."""
    g1, g2 = rgamma(1.0 - mu), rgamma(2.0 - mu)
    d0 = x - t0
    term = v0 * d0 ** -mu * g1 + slope * d0 ** (1.0 - mu) * g2
    with np.errstate(divide="ignore", invalid="ignore"):
        d1 = np.where(terminal, 1.0, x - t1)
        v1 = v0 + slope * (t1 - t0)
        inner = (-(v1 * d1 ** -mu - v0 * d0 ** -mu) * g1
                 - slope * (d1 ** (1.0 - mu) - d0 ** (1.0 - mu)) * g2)
    return np.where(terminal, term, inner)


def interval_contribution(restriction, x_eval, mu, is_terminal):
    """Contribution of one path interval to the left derivative at ``x_eval``."""
    check_order(mu)
    t0, t1 = restriction.t0, restriction.t1
    if is_terminal:
        if not t0 < x_eval:
            raise FractionalDomainError("terminal interval must start left of x_eval")
    elif not t1 < x_eval:
        raise FractionalDomainError(
            f"non-terminal interval [{t0}, {t1}] must end left of x_eval={x_eval}")
    return float(_contributions(restriction.value, restriction.slope, t0, t1,
                                x_eval, is_terminal, mu))


def _path_basis(geometry, cells):
    """Barycentric coefficients of ``cells`` in path coordinates (s, r)."""
    pts = np.stack([geometry.s[cells], geometry.r[cells]], axis=-1)
    return barycentric_coefficients(pts)


def basis_derivs_along_path(mesh, path, mu):
    """Map ``vertex -> D^mu phi_vertex`` at the end point of ``path``.

    Only vertices of cells crossed by the path appear.
    """
    check_order(mu)
    g = PathGeometry(mesh, path.direction)
    cells = path.interval_cells
    coef = _path_basis(g, cells)
    _, r0 = path.direction.to_path_coords(np.asarray(path.point))
    t0, t1 = path.breakpoints[:-1], path.breakpoints[1:]
    x = path.breakpoints[-1]
    terminal = np.zeros(len(cells), dtype=bool)
    terminal[-1] = True
    out = {}
    for j in range(3):
        v0 = coef[:, j, 0] + coef[:, j, 1] * t0 + coef[:, j, 2] * r0
        vals = _contributions(v0, coef[:, j, 1], t0, t1, x, terminal, mu)
        for vid, val in zip(mesh.cells[cells, j], vals):
            out[int(vid)] = out.get(int(vid), 0.0) + float(val)
    return out


def eval_frac_deriv_of_fe_function(mesh, coeffs, point, mu, direction):
    """Directional Riemann-Liouville derivative of ``sum coeffs_l phi_l`` at ``point``."""
    direction = Direction(direction)
    g = PathGeometry(mesh, direction)
    cell = locate_cell(mesh, point)
    path = integral_path(mesh, influence_elements(mesh, cell, direction, g), point,
                         direction, g)
    derivs = basis_derivs_along_path(mesh, path, mu)
    coeffs = np.asarray(coeffs, dtype=float)
    return float(sum(coeffs[k] * v for k, v in derivs.items()))


def _cell_block(mesh, g, coef_all, cell, pts_s, pts_r, mu, tol):
    """Derivative entries for the quadrature points of one cell."""
    cand = influence_elements(mesh, cell, g.direction, g)
    lo, hi, valid = cell_chords(g.s[cand], g.r[cand], pts_r)
    x = pts_s[:, None]
    end = np.minimum(hi, x)
    keep = valid & (end - lo > tol)
    q, e = np.nonzero(keep)
    t0, t1 = lo[q, e], end[q, e]
    cells = cand[e]
    terminal = cells == cell
    coef = coef_all[cells]
    r_q = pts_r[q]
    rows, cols, vals = [], [], []
    for j in range(3):
        v0 = coef[:, j, 0] + coef[:, j, 1] * t0 + coef[:, j, 2] * r_q
        vals.append(_contributions(v0, coef[:, j, 1], t0, t1, pts_s[q], terminal, mu))
        rows.append(q)
        cols.append(mesh.cells[cells, j])
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def derivative_matrix(mesh, rule, mu, direction, threads=1, chunk=64):
    """Sparse ``G`` with ``G[c*nq + q, v] = D^mu phi_v`` at quadrature point q of cell c.

    Rows are ordered cell-major; the result is independent of ``threads``.
    """
    check_order(mu)
    direction = Direction(direction)
    g = PathGeometry(mesh, direction)
    coef_all = _path_basis(g, np.arange(mesh.num_cells))
    qp, _ = map_rule(rule, mesh)
    ps, pr = direction.to_path_coords(qp)
    nq = len(rule)
    tol = merge_tolerance(mesh)

    def work(start):
        stop = min(start + chunk, mesh.num_cells)
        parts = [_cell_block(mesh, g, coef_all, c, ps[c], pr[c], mu, tol)
                 for c in range(start, stop)]
        rows = np.concatenate([p[0] + c * nq for c, p in zip(range(start, stop), parts)])
        return rows, np.concatenate([p[1] for p in parts]), np.concatenate([p[2] for p in parts])

    starts = range(0, mesh.num_cells, chunk)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(work, starts))
    else:
        results = [work(s) for s in starts]
    rows = np.concatenate([r[0] for r in results])
    cols = np.concatenate([r[1] for r in results])
    vals = np.concatenate([r[2] for r in results])
    shape = (mesh.num_cells * nq, mesh.num_vertices)
    return sp.csr_matrix((vals, (rows, cols)), shape=shape)
