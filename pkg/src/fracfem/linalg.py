"""Sparse linear solves with an independently checked residual."""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

RESIDUAL_TOL = 1e-10
DIRECT_LIMIT = 20_000


class SolverError(RuntimeError):
    pass


class NoConvergenceError(SolverError):
    pass


class SingularMatrixError(SolverError):
    pass


@dataclass(frozen=True)
class SolveReport:
    iterations: int  # 0 for a direct solve
    residual: float  # ||b - A x|| / ||b||
    wall_time: float
    method: str


def relative_residual(A, x, b):
    nb = np.linalg.norm(b)
    r = np.linalg.norm(b - A @ x)
    return r / nb if nb > 0 else r


class Factorization:
    """Cached sparse LU, usable as a preconditioner for nearby matrices."""

    def __init__(self, A):
        with warnings.catch_warnings():
            warnings.simplefilter("error", spla.MatrixRankWarning)
            try:
                self._lu = spla.splu(sp.csc_matrix(A))
            except (RuntimeError, spla.MatrixRankWarning) as exc:
                raise SingularMatrixError(str(exc)) from None
        self.shape = A.shape

    def solve(self, b):
        return self._lu.solve(np.asarray(b, dtype=float))

    def as_operator(self):
        return spla.LinearOperator(self.shape, matvec=self.solve, dtype=float)


def _direct(A, b):
    if A.shape[0] > DIRECT_LIMIT:
        return None
    return Factorization(A).solve(b)


def _krylov(A, b, M, maxiter):
    count = [0]

    def cb(_):
        count[0] += 1

    x, info = spla.bicgstab(A, b, rtol=1e-13, atol=0.0, M=M, maxiter=maxiter,
                            callback=cb)
    return x, info, count[0]


def solve(A, b, preconditioner=None, maxiter=500):
    """Solve ``A x = b``.

    Without a preconditioner, systems up to ``DIRECT_LIMIT`` unknowns use a
    sparse LU.  With a :class:`Factorization` of a nearby matrix (or for large
    systems, a Jacobi preconditioner) BiCGSTAB is used; if it misses the
    residual contract a direct solve is attempted before giving up.
    """
    t_start = time.perf_counter()
    A = sp.csr_matrix(A)
    b = np.asarray(b, dtype=float)
    if A.shape[0] != A.shape[1] or A.shape[0] != len(b):
        raise ValueError(f"incompatible shapes {A.shape} and {b.shape}")
    if not np.any(b):
        return np.zeros_like(b), SolveReport(0, 0.0, time.perf_counter() - t_start, "trivial")

    x, iterations, method = None, 0, "direct"
    if preconditioner is not None or A.shape[0] > DIRECT_LIMIT:
        if preconditioner is None:
            d = A.diagonal()
            if np.any(d == 0):
                raise SingularMatrixError("zero on the diagonal")
            M = sp.diags(1.0 / d)
        elif isinstance(preconditioner, Factorization):
            M = preconditioner.as_operator()
        else:
            M = preconditioner
        x, info, iterations = _krylov(A, b, M, maxiter)
        method = "bicgstab"
        if info != 0 or not relative_residual(A, x, b) <= RESIDUAL_TOL:
            x = None
    if x is None:
        x = _direct(A, b)
        iterations, method = 0, "direct"
        if x is None:
            raise NoConvergenceError("Krylov solve failed and system too large for LU")
    res = relative_residual(A, x, b)
    if not np.isfinite(res):
        raise SingularMatrixError("non-finite solution")
    if res > RESIDUAL_TOL:
        raise NoConvergenceError(f"relative residual {res:.3e} exceeds {RESIDUAL_TOL:g}")
    return x, SolveReport(iterations, float(res), time.perf_counter() - t_start, method)
