"""Error norms, convergence studies and result files."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from .assembly import DEFAULT_RULE_DEGREE, derivative_matrices, fe_values
from .fracpath import Direction
from .quadrature import map_rule, triangle_rule
from .timestep import Discretization, TimeGrid, begm_solve

log = logging.getLogger(__name__)


def _rule(rule):
    return triangle_rule(DEFAULT_RULE_DEGREE) if rule is None else rule


def _interpolant(mesh, u_exact, t):
    x, y = mesh.points.T
    return np.asarray(np.broadcast_to(u_exact(x, y, t), (mesh.num_vertices,)), dtype=float)


def error_l2(mesh, coeffs, u_exact, t, rule=None):
    """L2 norm of ``u_h - u(t)`` by quadrature."""
    rule = _rule(rule)
    pts, w = map_rule(rule, mesh)
    diff = fe_values(mesh, coeffs, rule) - u_exact(pts[..., 0], pts[..., 1], t)
    return float(np.sqrt(np.sum(w * diff ** 2)))


def error_linf(mesh, coeffs, u_exact, t, rule=None):
    """Max of ``|u_h - u(t)|`` over mesh nodes and quadrature points."""
    rule = _rule(rule)
    pts, _ = map_rule(rule, mesh)
    at_nodes = np.abs(np.asarray(coeffs) - _interpolant(mesh, u_exact, t))
    at_points = np.abs(fe_values(mesh, coeffs, rule) - u_exact(pts[..., 0], pts[..., 1], t))
    return float(max(at_nodes.max(), at_points.max()))


def energy_norm(mesh, coeffs, alpha, beta, kx, ky, rule=None, derivs=None):
    """``(||e||^2 + K_x ||D_x^alpha e||^2 + K_y ||D_y^beta e||^2)^(1/2)`` of a P1 function.

    The fractional parts use left-sided derivatives in x and y.  ``derivs`` may
    carry precomputed derivative matrices keyed by :class:`Direction`.
    """
    rule = _rule(rule)
    if derivs is None:
        derivs = derivative_matrices(mesh, alpha, beta, rule)
    _, w = map_rule(rule, mesh)
    w = w.ravel()
    e = np.asarray(coeffs, dtype=float)
    dx = derivs[Direction.LEFT] @ e
    dy = derivs[Direction.DOWN] @ e
    l2 = np.sum(w * fe_values(mesh, e, rule).ravel() ** 2)
    return float(np.sqrt(l2 + kx * np.sum(w * dx ** 2) + ky * np.sum(w * dy ** 2)))


def error_energy(mesh, coeffs, u_exact, t, alpha, beta, kx, ky, rule=None, derivs=None):
    """Energy norm of the discrete error ``u_h - I_h u(t)``."""
    e = np.asarray(coeffs, dtype=float) - _interpolant(mesh, u_exact, t)
    return energy_norm(mesh, e, alpha, beta, kx, ky, rule, derivs)


def error_energy_exact(mesh, coeffs, problem, t, rule=None, derivs=None):
    """Energy norm of ``u_h - u(t)`` using the exact fractional derivatives of ``problem``.

    Requires ``problem.frac_grad``.  Unlike :func:`error_energy` this does not
    compare against the interpolant, which is superclose to ``u_h``.
    """
    if problem.frac_grad is None:
        raise ValueError(f"problem {problem.name!r} has no exact fractional derivatives")
    rule = _rule(rule)
    if derivs is None:
        derivs = derivative_matrices(mesh, problem.alpha, problem.beta, rule)
    pts, w = map_rule(rule, mesh)
    x, y, w = pts[..., 0].ravel(), pts[..., 1].ravel(), w.ravel()
    ex, ey = problem.frac_grad(x, y, t)
    u = np.asarray(coeffs, dtype=float)
    l2 = np.sum(w * (fe_values(mesh, u, rule).ravel() - problem.u_exact(x, y, t)) ** 2)
    sx = np.sum(w * (derivs[Direction.LEFT] @ u - ex) ** 2)
    sy = np.sum(w * (derivs[Direction.DOWN] @ u - ey) ** 2)
    return float(np.sqrt(l2 + problem.kx * sx + problem.ky * sy))


ENERGY_REFERENCES = ("interpolant", "exact")


def excited_area(mesh, u, level=0.5, rule=None):
    """Area of ``{u_h > level}``, counting quadrature weights where the level is exceeded."""
    rule = _rule(rule)
    _, w = map_rule(rule, mesh)
    return float(np.sum(w * (fe_values(mesh, u, rule) > level)))


@dataclass
class ConvergenceRecord:
    h: float
    tau: float
    error_l2: float
    error_linf: float
    error_energy: float
    order_l2: Optional[float] = None
    order_linf: Optional[float] = None
    order_energy: Optional[float] = None


def _order(e_prev, e_curr, h_prev, h_curr):
    if e_prev <= 0 or e_curr <= 0:
        return float("nan")
    return math.log(e_prev / e_curr) / math.log(h_prev / h_curr)


def fill_orders(records):
    for prev, cur in zip(records[:-1], records[1:]):
        cur.order_l2 = _order(prev.error_l2, cur.error_l2, prev.h, cur.h)
        cur.order_linf = _order(prev.error_linf, cur.error_linf, prev.h, cur.h)
        cur.order_energy = _order(prev.error_energy, cur.error_energy, prev.h, cur.h)
    return records


def tau_for(rule, h):
    if rule == "h2":
        return h * h
    if rule == "h":
        return h
    tau = float(rule)
    if not tau > 0:
        raise ValueError("time step must be positive")
    return tau


def convergence_study(problem, ladder, tau_rule="h2", T=1.0, rule=None, threads=1,
                      energy="interpolant"):
    """Solve ``problem`` on each rung of ``ladder`` and tabulate errors at ``T``.

    ``ladder`` lists subdivision counts ``n``; the nominal mesh size is
    ``h = 1/n`` and ``tau_rule`` is ``"h2"``, ``"h"`` or a fixed step.
    ``energy`` selects the energy-norm error: ``"interpolant"`` measures
    ``u_h - I_h u``, ``"exact"`` measures ``u_h - u`` with the problem's exact
    fractional derivatives.
    """
    if energy not in ENERGY_REFERENCES:
        raise ValueError(f"energy reference must be one of {ENERGY_REFERENCES}")
    ladder = [int(n) for n in ladder]
    if len(ladder) < 3:
        raise ValueError("a convergence study needs at least three mesh sizes")
    if len(set(ladder)) != len(ladder):
        raise ValueError("duplicate mesh sizes in ladder")
    if problem.u_exact is None:
        raise ValueError(f"problem {problem.name!r} has no exact solution")
    rule = _rule(rule)
    records = []
    for n in ladder:
        h = 1.0 / n
        grid = TimeGrid.from_final_time(T, tau_for(tau_rule, h))
        mesh = problem.make_mesh(n)
        disc = Discretization.for_problem(mesh, problem, rule, threads)
        u = begm_solve(mesh, problem, grid, disc).final.u
        t = grid.T
        if energy == "exact":
            e_energy = error_energy_exact(mesh, u, problem, t, rule, disc.derivs)
        else:
            e_energy = error_energy(mesh, u, problem.u_exact, t, problem.alpha, problem.beta,
                                    problem.kx, problem.ky, rule, disc.derivs)
        rec = ConvergenceRecord(h, grid.tau, error_l2(mesh, u, problem.u_exact, t, rule),
                                error_linf(mesh, u, problem.u_exact, t, rule), e_energy)
        log.info("n=%d tau=%g l2=%.3e energy=%.3e", n, grid.tau, rec.error_l2,
                 rec.error_energy)
        records.append(rec)
    return fill_orders(records)


CSV_FIELDS = [f.name for f in fields(ConvergenceRecord)]


def write_csv(records, path):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(CSV_FIELDS)
        for rec in records:
            out.writerow(["" if v is None else f"{v:.6e}" for v in asdict(rec).values()])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [ConvergenceRecord(**{k: (None if v == "" else float(v)) for k, v in r.items()})
            for r in rows]


def write_field(mesh, coeffs, path, name="u", extra=None):
    """Legacy VTK (2.0, ASCII) unstructured grid with point scalars.

    ``extra`` maps further scalar names to vertex arrays.
    """
    fields_out = {name: coeffs, **(extra or {})}
    nv, nc = mesh.num_vertices, mesh.num_cells
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 2.0\nfracfem field\nASCII\n"
                 "DATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {nv} double\n")
        for x, y in mesh.points:
            fh.write(f"{x:.17g} {y:.17g} 0\n")
        fh.write(f"CELLS {nc} {4 * nc}\n")
        for i, j, k in mesh.cells:
            fh.write(f"3 {i} {j} {k}\n")
        fh.write(f"CELL_TYPES {nc}\n" + "5\n" * nc)
        fh.write(f"POINT_DATA {nv}\n")
        for key, vals in fields_out.items():
            vals = np.asarray(vals, dtype=float)
            if vals.shape != (nv,):
                raise ValueError(f"field {key!r} has shape {vals.shape}, expected ({nv},)")
            fh.write(f"SCALARS {key} double 1\nLOOKUP_TABLE default\n")
            fh.writelines(f"{v:.17g}\n" for v in vals)
