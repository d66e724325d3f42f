"""Backward Euler Galerkin time stepping with a linearised reaction term.

Each step solves::

    (M + tau A - tau D) u^n = (M - tau D) u^{n-1} + tau b1 + tau b2

where ``D`` and ``b1`` hold ``F'(u^{n-1})`` and ``F(u^{n-1})`` and ``b2`` the
source at ``t_n``.  ``M`` and ``A`` are assembled once per discretisation.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import assembly
from .linalg import Factorization, solve
from .quadrature import triangle_rule

log = logging.getLogger(__name__)


class StabilityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TimeGrid:
    tau: float
    n_steps: int

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("time step must be positive")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError("need at least one time step")

    @property
    def T(self):
        return self.tau * self.n_steps

    @classmethod
    def from_final_time(cls, T, tau):
        n = int(round(T / tau))
        if n < 1 or abs(n * tau - T) > 1e-12 * max(1.0, abs(T)):
            raise ValueError(f"T={T} is not an integer multiple of tau={tau}")
        return cls(T / n, n)

    def times(self):
        return self.tau * np.arange(self.n_steps + 1)


@dataclass
class SchemeState:
    n: int
    t: float
    u: np.ndarray  # all vertices, zero on the boundary
    w: Optional[np.ndarray] = None


@dataclass
class Trajectory:
    final: SchemeState
    snapshots: list = field(default_factory=list)  # list of SchemeState copies
    reports: list = field(default_factory=list)


class Discretization:
    """Mesh-dependent matrices shared by all steps of a run."""

    def __init__(self, mesh, alpha, beta, kx, ky, rule=None, threads=1,
                 allow_classical=False):
        self.mesh = mesh
        self.rule = rule or triangle_rule(assembly.DEFAULT_RULE_DEGREE)
        self.alpha, self.beta, self.kx, self.ky = alpha, beta, kx, ky
        self.M_full = assembly.assemble_mass(mesh)
        assembly.check_orders(alpha, beta, allow_classical)
        if not (kx > 0 and ky > 0):
            raise ValueError("diffusivities must be positive")
        # kept for energy-norm errors, which need the same derivative tables
        self.derivs = assembly.derivative_matrices(mesh, alpha, beta, self.rule, threads)
        self.A_full = assembly.stiffness_from_derivatives(mesh, self.derivs, alpha, beta,
                                                          kx, ky, self.rule)
        self.M = assembly.apply_dirichlet(mesh, self.M_full)
        self.A = assembly.apply_dirichlet(mesh, self.A_full)
        self.free = mesh.interior
        self._factor = {}

    @classmethod
    def for_problem(cls, mesh, problem, rule=None, threads=1):
        return cls(mesh, problem.alpha, problem.beta, problem.kx, problem.ky, rule,
                   threads, allow_classical=problem.u_exact is None)

    def preconditioner(self, tau):
        if tau not in self._factor:
            self._factor[tau] = Factorization((self.M + tau * self.A).tocsc())
        return self._factor[tau]


def begm_init(mesh, phi):
    """Nodal interpolant of ``phi`` with boundary values set to zero."""
    u = np.asarray(np.broadcast_to(phi(mesh.points[:, 0], mesh.points[:, 1]),
                                   (mesh.num_vertices,)), dtype=float).copy()
    u[mesh.boundary] = 0.0
    return SchemeState(0, 0.0, u)


def begm_step(state, disc, problem, tau, extra_load=None):
    """Advance one step; ``extra_load`` is an additional full-vertex load vector."""
    mesh, rule, free = disc.mesh, disc.rule, disc.free
    t_n = state.t + tau
    u_prev = state.u
    D = assembly.apply_dirichlet(mesh, assembly.assemble_reaction(mesh, u_prev, problem.dF, rule))
    b1 = assembly.assemble_load_F(mesh, u_prev, problem.F, rule)
    b2 = assembly.assemble_load_f(mesh, problem.f, t_n, rule)
    if extra_load is not None:
        b2 = b2 + extra_load
    up = u_prev[free]
    lhs = disc.M + tau * disc.A - tau * D
    rhs = disc.M @ up - tau * (D @ up) + tau * (b1[free] + b2[free])
    x, report = solve(lhs, rhs, preconditioner=disc.preconditioner(tau))
    u = np.zeros(mesh.num_vertices)
    u[free] = x
    return SchemeState(state.n + 1, t_n, u, state.w), report


def _check_stability(problem, u0, tau):
    m2 = float(np.max(np.abs(problem.dF(u0)))) if len(u0) else 0.0
    if 2.0 * tau * m2 >= 1.0:
        warnings.warn(f"tau={tau:g} with |F'| up to {m2:.3g} may violate the step-size "
                      "condition for stability", StabilityWarning, stacklevel=3)


def _copy(state):
    return SchemeState(state.n, state.t, state.u.copy(),
                       None if state.w is None else state.w.copy())


def _snapshot_due(n, n_steps, every):
    return every > 0 and (n % every == 0 or n == n_steps)


def begm_solve(mesh, problem, grid, disc=None, snapshot_every=0, threads=1):
    """Run ``grid.n_steps`` steps from the interpolated initial data."""
    disc = disc or Discretization.for_problem(mesh, problem, threads=threads)
    state = begm_init(mesh, problem.phi)
    _check_stability(problem, state.u, grid.tau)
    traj = Trajectory(state)
    if snapshot_every:
        traj.snapshots.append(_copy(state))
    for _ in range(grid.n_steps):
        state, report = begm_step(state, disc, problem, grid.tau)
        traj.reports.append(report)
        if _snapshot_due(state.n, grid.n_steps, snapshot_every):
            traj.snapshots.append(_copy(state))
    traj.final = state
    log.debug("begm_solve: %d steps, max residual %.2e", grid.n_steps,
              max(r.residual for r in traj.reports))
    return traj


def fhn_simulate(mesh, problem, w0, params, grid, disc=None, snapshot_every=0,
                 threads=1):
    """FitzHugh-Nagumo splitting: implicit ``u`` step with source ``-w``, then explicit ``w``.

    Returns the trajectory; states carry both ``u`` and ``w``.
    """
    disc = disc or Discretization.for_problem(mesh, problem, threads=threads)
    state = begm_init(mesh, problem.phi)
    state.w = np.asarray(np.broadcast_to(w0(mesh.points[:, 0], mesh.points[:, 1]),
                                         (mesh.num_vertices,)), dtype=float).copy()
    _check_stability(problem, state.u, grid.tau)
    traj = Trajectory(state)
    if snapshot_every:
        traj.snapshots.append(_copy(state))
    tau, p = grid.tau, params
    for _ in range(grid.n_steps):
        w_prev = state.w
        state, report = begm_step(state, disc, problem, tau,
                                  extra_load=-(disc.M_full @ w_prev))
        state.w = w_prev + tau * p.eps * (p.lam * state.u - p.gamma * w_prev - p.delta)
        traj.reports.append(report)
        if _snapshot_due(state.n, grid.n_steps, snapshot_every):
            traj.snapshots.append(_copy(state))
    traj.final = state
    return traj
