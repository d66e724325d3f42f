"""Slow reference evaluators of Riemann-Liouville derivatives.

Nothing here reuses the path or derivative code of the solver: scanlines are
intersected with every mesh edge, cells are found by brute force, and the
derivative integrals go through adaptive quadrature.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.special import gamma


class OracleConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleConfig:
    epsabs: float = 1e-12
    epsrel: float = 1e-12
    limit: int = 200


DEFAULT_CONFIG = OracleConfig()


def _quad(func, a, b, config, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, _ = quad(func, a, b, epsabs=config.epsabs, epsrel=config.epsrel,
                          limit=config.limit, **kw)
        except IntegrationWarning as exc:
            raise OracleConvergenceError(str(exc)) from None
    return val


def rl_deriv_quadrature(f, df, a, x, mu, breakpoints=(), config=DEFAULT_CONFIG):
    """Left derivative ``aD_x^mu f`` for ``0 < mu < 1``.

    Uses ``f(a)(x-a)^-mu / G(1-mu) + (1/G(1-mu)) int_a^x (x-t)^-mu f'(t) dt``
    with the integral split at ``breakpoints``.
    """
    if not 0.0 < mu < 1.0:
        raise ValueError("oracle order must lie in (0, 1)")
    knots = np.unique(np.r_[a, [p for p in breakpoints if a < p < x], x])
    total = 0.0
    for p, q in zip(knots[:-1], knots[1:]):
        if q == x:
            total += _quad(df, p, q, config, weight="alg", wvar=(0.0, -mu))
        else:
            total += _quad(lambda t: (x - t) ** -mu * df(t), p, q, config)
    return (f(a) * (x - a) ** -mu + total) / gamma(1.0 - mu)


def rl_right_deriv_quadrature(f, df, x, b, mu, breakpoints=(), config=DEFAULT_CONFIG):
    """Right derivative ``xD_b^mu f = f(b)(b-x)^-mu/G(1-mu) - (1/G(1-mu)) int_x^b (s-x)^-mu f'(s) ds``."""
    if not 0.0 < mu < 1.0:
        raise ValueError("oracle order must lie in (0, 1)")
    knots = np.unique(np.r_[x, [p for p in breakpoints if x < p < b], b])
    total = 0.0
    for p, q in zip(knots[:-1], knots[1:]):
        if p == x:
            total += _quad(df, p, q, config, weight="alg", wvar=(-mu, 0.0))
        else:
            total += _quad(lambda s: (s - x) ** -mu * df(s), p, q, config)
    return (f(b) * (b - x) ** -mu - total) / gamma(1.0 - mu)


def gl_weights(mu, n):
    w = np.empty(n + 1)
    w[0] = 1.0
    for k in range(1, n + 1):
        w[k] = w[k - 1] * (1.0 - (mu + 1.0) / k)
    return w


def gl_deriv(samples, mu, step):
    """Grunwald-Letnikov left derivative at the last sample of a uniform grid."""
    samples = np.asarray(samples, dtype=float)
    w = gl_weights(mu, len(samples) - 1)
    return float(w @ samples[::-1]) / step ** mu


# --- mesh scanlines ---------------------------------------------------------

def _all_edges(mesh):
    e = np.sort(mesh.cells[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
    return np.unique(e, axis=0)


def _scanline(mesh, point, axis):
    """Domain extent and sorted crossing coordinates of the line through ``point``.

    ``axis`` 0 scans along x (y fixed), 1 along y.
    """
    fixed = point[1 - axis]
    e = _all_edges(mesh)
    p, q = mesh.points[e[:, 0]], mesh.points[e[:, 1]]
    pf, qf = p[:, 1 - axis], q[:, 1 - axis]
    hits = []
    for i in np.flatnonzero((pf - fixed) * (qf - fixed) <= 0):
        if pf[i] == qf[i]:
            hits.extend([p[i, axis], q[i, axis]])
        else:
            s = (fixed - pf[i]) / (qf[i] - pf[i])
            hits.append(p[i, axis] + s * (q[i, axis] - p[i, axis]))
    hits = np.unique(np.array(hits))
    return hits.min(), hits.max(), hits


def _cell_of(mesh, xy, tol=1e-12):
    pts = mesh.points[mesh.cells]
    v0 = pts[:, 1] - pts[:, 0]
    v1 = pts[:, 2] - pts[:, 0]
    w = np.asarray(xy) - pts[:, 0]
    det = v0[:, 0] * v1[:, 1] - v0[:, 1] * v1[:, 0]
    l1 = (w[:, 0] * v1[:, 1] - w[:, 1] * v1[:, 0]) / det
    l2 = (v0[:, 0] * w[:, 1] - v0[:, 1] * w[:, 0]) / det
    lam = np.c_[1 - l1 - l2, l1, l2]
    c = int(np.argmax(lam.min(axis=1)))
    if lam[c].min() < -tol:
        raise ValueError(f"point {tuple(xy)} outside mesh")
    return c, lam[c]


def _basis_on_line(mesh, point, axis, t_values):
    """Values of every basis function at line points ``t_values`` (nt, nv)."""
    out = np.zeros((len(t_values), mesh.num_vertices))
    for i, t in enumerate(t_values):
        xy = np.array(point, dtype=float)
        xy[axis] = t
        c, lam = _cell_of(mesh, xy)
        out[i, mesh.cells[c]] = lam
    return out


def scanline_basis_derivatives(mesh, point, mu, direction, config=DEFAULT_CONFIG):
    """Array over vertices of ``D^mu phi_v(point)`` in one of four directions."""
    axis = 0 if direction in ("left", "right") else 1
    lo, hi, hits = _scanline(mesh, point, axis)
    x0 = point[axis]
    knots = np.unique(np.r_[hits, x0])
    vals = _basis_on_line(mesh, point, axis, knots)
    out = np.zeros(mesh.num_vertices)
    for v in np.flatnonzero(np.abs(vals).max(axis=0) > 0):
        node_vals = vals[:, v]

        def f(t, nv=node_vals):
            return float(np.interp(t, knots, nv))

        def df(t, nv=node_vals):
            j = min(max(np.searchsorted(knots, t, side="right") - 1, 0), len(knots) - 2)
            return (nv[j + 1] - nv[j]) / (knots[j + 1] - knots[j])

        if direction in ("left", "down"):
            if not np.any(node_vals[knots <= x0]):
                continue
            out[v] = rl_deriv_quadrature(f, df, lo, x0, mu, knots, config)
        else:
            if not np.any(node_vals[knots >= x0]):
                continue
            out[v] = rl_right_deriv_quadrature(f, df, x0, hi, mu, knots, config)
    return out


def _quadrature_points(mesh, rule):
    pts = np.einsum("qj,cjd->cqd", np.asarray(rule.points), mesh.points[mesh.cells])
    w = mesh.areas[:, None] * np.asarray(rule.weights)[None, :]
    return pts.reshape(-1, 2), w.ravel()


def derivative_table(mesh, rule, mu, direction, config=DEFAULT_CONFIG):
    """(npoints, nv) table of scanline derivatives at all quadrature points."""
    pts, _ = _quadrature_points(mesh, rule)
    return np.array([scanline_basis_derivatives(mesh, p, mu, direction, config)
                     for p in pts])


def pairing_oracle(mesh, k, l, mu, directions=("left", "right"), rule=None,
                   config=DEFAULT_CONFIG):
    """``(D_first^mu phi_l, D_second^mu phi_k)`` summed over the quadrature points of ``rule``."""
    if rule is None:
        from .quadrature import triangle_rule
        rule = triangle_rule(4)
    pts, w = _quadrature_points(mesh, rule)
    total = 0.0
    for p, wi in zip(pts, w):
        first = scanline_basis_derivatives(mesh, p, mu, directions[0], config)[l]
        if first == 0.0:
            continue
        total += wi * first * scanline_basis_derivatives(mesh, p, mu, directions[1], config)[k]
    return total


def stiffness_oracle(mesh, alpha, beta, kx, ky, rule=None, config=DEFAULT_CONFIG):
    """Dense fractional stiffness matrix over all vertices from scanline tables."""
    if rule is None:
        from .quadrature import triangle_rule
        rule = triangle_rule(4)
    _, w = _quadrature_points(mesh, rule)
    A = np.zeros((mesh.num_vertices,) * 2)
    for lower, upper, k, mu in (("left", "right", kx, alpha), ("down", "up", ky, beta)):
        L = derivative_table(mesh, rule, mu, lower, config)
        R = derivative_table(mesh, rule, mu, upper, config)
        P = L.T @ (w[:, None] * R)  # P[l, k] = (D_lower phi_l, D_upper phi_k)
        A += k / (2 * np.cos(mu * np.pi)) * (P + P.T)
    return A


def rl_deriv_taylor(derivs, a, x, nu, side="left", config=DEFAULT_CONFIG):
    """Riemann-Liouville derivative of order ``nu`` (non-integer, ``0 < nu < 2``) of a smooth f.

    ``derivs`` lists callables ``f, f', ..., f^(n)`` with ``n = ceil(nu)``.
    Left: ``sum_k f^(k)(a)(x-a)^(k-nu)/G(k+1-nu) + int_a^x (x-t)^(n-1-nu) f^(n)(t) dt / G(n-nu)``.
    For ``side="right"`` ``a`` is the upper limit ``b`` and the mirrored formula is used.
    """
    n = int(np.ceil(nu))
    if n == nu or not 0 < nu < 2 or len(derivs) < n + 1:
        raise ValueError("need non-integer order in (0, 2) and derivatives up to ceil(order)")
    sgn = 1.0 if side == "left" else -1.0
    dist = sgn * (x - a)
    total = sum(sgn ** k * derivs[k](a) * dist ** (k - nu) / gamma(k + 1 - nu)
                for k in range(n))
    wvar = (0.0, n - 1 - nu) if side == "left" else (n - 1 - nu, 0.0)
    lo, hi = (a, x) if side == "left" else (x, a)
    integral = _quad(derivs[n], lo, hi, config, weight="alg", wvar=wvar)
    return total + sgn ** n * integral / gamma(n - nu)
