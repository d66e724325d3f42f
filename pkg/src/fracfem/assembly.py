"""Global matrices and load vectors for the backward Euler Galerkin scheme.

The fractional stiffness matrix is built from the derivative matrices of
:mod:`fracfem.fracderiv`.  With ``G_L`` and ``G_R`` holding left and right
derivatives of every basis function at every quadrature point and ``W`` the
quadrature weights, the pairing ``(D_L phi_l, D_R phi_k)`` is entry ``(l, k)``
of ``P = G_L^T W G_R``, so the x part of the bilinear form is
``K_x c_alpha (P + P^T)``.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .fracderiv import derivative_matrix
from .fracpath import Direction
from .quadrature import map_rule, triangle_rule

DEFAULT_RULE_DEGREE = 4


class InvalidOrderError(ValueError):
    pass


def riesz_coefficient(mu):
    """``1 / (2 cos(mu pi))``; equals -1/2 at ``mu = 1``."""
    return 1.0 / (2.0 * np.cos(mu * np.pi))


def _rule(rule):
    return triangle_rule(DEFAULT_RULE_DEGREE) if rule is None else rule


def _scatter(mesh, local):
    """Sum per-cell (nc, 3, 3) blocks into a global CSR matrix."""
    rows = np.repeat(mesh.cells, 3, axis=1).ravel()
    cols = np.tile(mesh.cells, (1, 3)).ravel()
    n = mesh.num_vertices
    return sp.csr_matrix((local.ravel(), (rows, cols)), shape=(n, n))


def assemble_mass(mesh):
    """Exact P1 mass matrix (all vertices)."""
    block = (np.ones((3, 3)) + np.eye(3)) / 12.0
    return _scatter(mesh, mesh.areas[:, None, None] * block)


def _basis_at_rule(rule):
    # barycentric coordinates are the P1 shape functions
    return np.asarray(rule.points)  # (nq, 3)


def fe_values(mesh, coeffs, rule):
    """Values of the P1 function ``coeffs`` at quadrature points, shape (nc, nq)."""
    return np.asarray(coeffs, dtype=float)[mesh.cells] @ _basis_at_rule(rule).T


def assemble_reaction(mesh, u_prev, dF, rule=None):
    """``d_kl = (F'(u_prev) phi_l, phi_k)`` by quadrature."""
    rule = _rule(rule)
    _, w = map_rule(rule, mesh)
    weight = w * dF(fe_values(mesh, u_prev, rule))  # (nc, nq)
    phi = _basis_at_rule(rule)
    local = np.einsum("cq,qi,qj->cij", weight, phi, phi)
    return _scatter(mesh, local)


def _load(mesh, values, rule, w):
    phi = _basis_at_rule(rule)
    local = (w * values) @ phi  # (nc, 3)
    return np.bincount(mesh.cells.ravel(), local.ravel(), minlength=mesh.num_vertices)


def assemble_load_F(mesh, u_prev, F, rule=None):
    """``b1_k = (F(u_prev), phi_k)`` on all vertices."""
    rule = _rule(rule)
    _, w = map_rule(rule, mesh)
    return _load(mesh, F(fe_values(mesh, u_prev, rule)), rule, w)


def assemble_load_f(mesh, f, t, rule=None):
    """``b2_k = (f(., t), phi_k)`` on all vertices."""
    rule = _rule(rule)
    qp, w = map_rule(rule, mesh)
    values = np.broadcast_to(f(qp[..., 0], qp[..., 1], t), w.shape)
    return _load(mesh, values, rule, w)


def check_orders(alpha, beta, allow_classical=False):
    upper_ok = (lambda m: m <= 1.0) if allow_classical else (lambda m: m < 1.0)
    for name, m in (("alpha", alpha), ("beta", beta)):
        if not (0.5 < m and upper_ok(m)):
            raise InvalidOrderError(f"{name}={m!r} outside (1/2, 1)")


def derivative_matrices(mesh, alpha, beta, rule=None, threads=1):
    """Derivative matrices for the four directions, keyed by :class:`Direction`."""
    rule = _rule(rule)
    orders = {Direction.LEFT: alpha, Direction.RIGHT: alpha,
              Direction.DOWN: beta, Direction.UP: beta}
    return {d: derivative_matrix(mesh, rule, mu, d, threads=threads)
            for d, mu in orders.items()}


def stiffness_from_derivatives(mesh, derivs, alpha, beta, kx, ky, rule=None):
    rule = _rule(rule)
    _, w = map_rule(rule, mesh)
    W = sp.diags(w.ravel())
    A = None
    for (lower, upper, k, mu) in ((Direction.LEFT, Direction.RIGHT, kx, alpha),
                                  (Direction.DOWN, Direction.UP, ky, beta)):
        P = (derivs[lower].T @ W @ derivs[upper]).tocsr()
        part = k * riesz_coefficient(mu) * (P + P.T)
        A = part if A is None else A + part
    A = A.tocsr()
    A.sum_duplicates()
    A.eliminate_zeros()
    return A


def assemble_stiffness(mesh, alpha, beta, kx, ky, rule=None, threads=1,
                       allow_classical=False):
    """Fractional stiffness matrix ``a_kl = a(phi_l, phi_k)`` over all vertices.

    Boundary rows carry the singular boundary terms; drop them with
    :func:`apply_dirichlet` before solving.
    """
    check_orders(alpha, beta, allow_classical)
    if not (kx > 0 and ky > 0):
        raise ValueError("diffusivities must be positive")
    derivs = derivative_matrices(mesh, alpha, beta, rule, threads)
    return stiffness_from_derivatives(mesh, derivs, alpha, beta, kx, ky, rule)


def apply_dirichlet(mesh, obj):
    """Restrict a matrix or vector to free vertices (in increasing vertex order)."""
    free = mesh.interior
    if sp.issparse(obj):
        return obj.tocsr()[free][:, free].tocsr()
    obj = np.asarray(obj)
    if obj.ndim == 2:
        return obj[np.ix_(free, free)]
    return obj[free]


def embed(mesh, reduced):
    """Inverse of :func:`apply_dirichlet` for vectors: zeros on the boundary."""
    full = np.zeros(mesh.num_vertices)
    full[mesh.interior] = reduced
    return full


def dump_coo(matrix, path):
    """Write ``row col value`` lines for debugging."""
    coo = sp.coo_matrix(matrix)
    with open(path, "w") as fh:
        for i, j, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{i} {j} {v:.17g}\n")
