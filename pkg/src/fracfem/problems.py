"""Manufactured test problems and the FitzHugh-Nagumo setup.

Each manufactured source is ``f = u_t - K_x R_x u - K_y R_y u - F(u)`` where
``R_x u = -c_alpha (D_left^{2 alpha} + D_right^{2 alpha}) u``.  The exact
solutions are polynomials along every axis-parallel chord of the domain, so
the Riemann-Liouville terms reduce to sums of power-rule terms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import gamma, rgamma

from . import mesh as meshes
from .assembly import check_orders, riesz_coefficient


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    alpha: float
    beta: float
    kx: float
    ky: float
    F: Callable
    dF: Callable
    f: Callable  # f(x, y, t)
    phi: Callable  # phi(x, y)
    u_exact: Optional[Callable] = None  # u(x, y, t)
    # (D_x^alpha u, D_y^beta u), left-sided derivatives of the exact solution
    frac_grad: Optional[Callable] = None
    domain: str = "square"
    domain_params: dict = field(default_factory=dict)

    def make_mesh(self, n):
        """Mesh of this problem's domain with about ``n`` subdivisions per unit length."""
        p = self.domain_params
        if self.domain == "square":
            return meshes.generate_square_mesh(n)
        if self.domain == "pentagon":
            return meshes.generate_pentagon_mesh(n)
        if self.domain == "ellipse":
            return meshes.generate_ellipse_mesh(p["a"], p["b"], n)
        if self.domain == "disk":
            return meshes.generate_disk_mesh(p["cx"], p["cy"], p["r"], n)
        raise ValueError(f"unknown domain {self.domain!r}")


def _quadratic_reaction():
    return (lambda u: -u * u), (lambda u: -2.0 * u)


def _power(z, k, two_mu):
    """``Gamma(k+1)/Gamma(k+1-2mu) z^(k-2mu)``: RL derivative of order 2mu of z^k."""
    return gamma(k + 1) * rgamma(k + 1 - two_mu) * np.maximum(z, 0.0) ** (k - two_mu)


def _raw(z, k, two_mu):
    """``z^(k-2mu) / Gamma(k+1-2mu)``."""
    return rgamma(k + 1 - two_mu) * np.maximum(z, 0.0) ** (k - two_mu)


def _g_example1(x, mu):
    return _power(x, 4, 2 * mu) - 2 * _power(x, 3, 2 * mu) + _power(x, 2, 2 * mu)


def example1_spec(alpha=0.8, beta=0.8, kx=1.0, ky=1.0):
    """Unit square, ``u = 10 e^-t x^2 (1-x)^2 y^2 (1-y)^2``, ``F(u) = -u^2``."""
    check_orders(alpha, beta)
    ca, cb = riesz_coefficient(alpha), riesz_coefficient(beta)
    F, dF = _quadratic_reaction()

    def bump(s):
        return s * s * (1 - s) ** 2

    def u(x, y, t):
        return 10.0 * np.exp(-t) * bump(x) * bump(y)

    def frac_grad(x, y, t):
        e = 10.0 * np.exp(-t)
        return (e * _g_example1(x, alpha / 2) * bump(y),
                e * _g_example1(y, beta / 2) * bump(x))

    def f(x, y, t):
        e = np.exp(-t)
        return (-u(x, y, t) + u(x, y, t) ** 2
                + 10 * kx * ca * e * bump(y) * (_g_example1(x, alpha) + _g_example1(1 - x, alpha))
                + 10 * ky * cb * e * bump(x) * (_g_example1(y, beta) + _g_example1(1 - y, beta)))

    return ProblemSpec("example1", alpha, beta, kx, ky, F, dF, f,
                       lambda x, y: u(x, y, 0.0), u, frac_grad, "square")


# Example 2 auxiliaries: left derivative from 0 of z^2 (1-z)^2 (z-Y)^2 and the
# right-derivative counterparts from x = 1 (g1) and from x = Y = 1.5 - y (g2).
def _poly_deriv(z, coeffs, two_mu):
    return sum(c * _power(z, k, two_mu) for k, c in coeffs.items())


def g0(z, Y, mu):
    return _poly_deriv(z, {2: Y ** 2, 3: -2 * (Y ** 2 + Y), 4: Y ** 2 + 4 * Y + 1,
                           5: -2 * (Y + 1), 6: 1.0}, 2 * mu)


def g1(z, Y, mu):
    return _poly_deriv(z, {2: (Y - 1) ** 2, 3: -2 * (Y ** 2 - 3 * Y + 2),
                           4: Y ** 2 - 6 * Y + 6, 5: 2 * (Y - 2), 6: 1.0}, 2 * mu)


def g2(z, Y, mu):
    return _poly_deriv(z, {2: (Y ** 2 - Y) ** 2, 3: -2 * (2 * Y ** 3 - 3 * Y ** 2 + Y),
                           4: 6 * Y ** 2 - 6 * Y + 1, 5: 2 * (1 - 2 * Y), 6: 1.0}, 2 * mu)


def g_pentagon(x, y, mu):
    """Sum of left and right derivatives of order 2mu along x of the Example 2 profile."""
    Y = 1.5 - y
    return g0(x, Y, mu) + np.where(y <= 0.5, g1(1 - x, Y, mu), g2(Y - x, Y, mu))


def example2_spec(alpha=0.8, beta=0.8, kx=1.0, ky=2.0):
    """Pentagon, ``u = 1000 e^-t x^2(1-x)^2 (x+y-1.5)^2 y^2(1-y)^2``."""
    check_orders(alpha, beta)
    ca, cb = riesz_coefficient(alpha), riesz_coefficient(beta)
    F, dF = _quadratic_reaction()

    def u(x, y, t):
        return (1000.0 * np.exp(-t) * x ** 2 * (1 - x) ** 2 * (x + y - 1.5) ** 2
                * y ** 2 * (1 - y) ** 2)

    def frac_grad(x, y, t):
        e = 1000.0 * np.exp(-t)
        return (e * y ** 2 * (1 - y) ** 2 * g0(x, 1.5 - y, alpha / 2),
                e * x ** 2 * (1 - x) ** 2 * g0(y, 1.5 - x, beta / 2))

    def f(x, y, t):
        e = np.exp(-t)
        return (-u(x, y, t) + u(x, y, t) ** 2
                + 1000 * kx * ca * e * y ** 2 * (1 - y) ** 2 * g_pentagon(x, y, alpha)
                + 1000 * ky * cb * e * x ** 2 * (1 - x) ** 2 * g_pentagon(y, x, beta))

    return ProblemSpec("example2", alpha, beta, kx, ky, F, dF, f,
                       lambda x, y: u(x, y, 0.0), u, frac_grad, "pentagon")


def example3_spec(alpha=0.85, beta=0.85, kx=2.0, ky=2.0, a=0.5, b=0.75):
    """Ellipse ``x^2/a^2 + y^2/b^2 < 1``, ``u = 100 e^-t (b^2 x^2 + a^2 y^2 - a^2 b^2)^2``."""
    check_orders(alpha, beta)
    if not (a > 0 and b > 0):
        raise ValueError("ellipse semi-axes must be positive")
    ca, cb = riesz_coefficient(alpha), riesz_coefficient(beta)
    F, dF = _quadratic_reaction()

    # along a chord u is a quartic in the distance z from its end point
    def h(z, s, nu=2 * alpha):
        return (8 * a ** 2 * b ** 4 * s ** 2 * _raw(z, 2, nu)
                + 24 * a * b ** 4 * s * _raw(z, 3, nu)
                + 24 * b ** 4 * _raw(z, 4, nu))

    def g(s, z, nu=2 * beta):
        return (8 * a ** 4 * b ** 2 * s ** 2 * _raw(z, 2, nu)
                + 24 * a ** 4 * b * s * _raw(z, 3, nu)
                + 24 * a ** 4 * _raw(z, 4, nu))

    def u(x, y, t):
        return 100.0 * np.exp(-t) * (b ** 2 * x ** 2 + a ** 2 * y ** 2 - a ** 2 * b ** 2) ** 2

    def frac_grad(x, y, t):
        e = 100.0 * np.exp(-t)
        sy = np.sqrt(np.maximum(1 - y ** 2 / b ** 2, 0.0))
        sx = np.sqrt(np.maximum(1 - x ** 2 / a ** 2, 0.0))
        return e * h(x + a * sy, -sy, alpha), e * g(-sx, y + b * sx, beta)

    def f(x, y, t):
        e = np.exp(-t)
        sy = np.sqrt(np.maximum(1 - y ** 2 / b ** 2, 0.0))  # half-chord in x is a*sy
        sx = np.sqrt(np.maximum(1 - x ** 2 / a ** 2, 0.0))
        return (-u(x, y, t) + u(x, y, t) ** 2
                + 100 * kx * ca * e * (h(x + a * sy, -sy) + h(a * sy - x, -sy))
                + 100 * ky * cb * e * (g(-sx, y + b * sx) + g(-sx, b * sx - y)))

    return ProblemSpec("example3", alpha, beta, kx, ky, F, dF, f,
                       lambda x, y: u(x, y, 0.0), u, frac_grad, "ellipse", {"a": a, "b": b})


@dataclass(frozen=True)
class FHNParams:
    r: float = 1.25
    mu: float = 0.1
    eps: float = 0.01
    lam: float = 0.5
    gamma: float = 0.1
    delta: float = 0.0


def fhn_spec(alpha=0.75, beta=0.75, kx=1e-4, ky=1e-4, params=FHNParams()):
    """FitzHugh-Nagumo on the disk of radius ``r`` centred at ``(r, r)``.

    Returns ``(spec, w0, params)``; ``spec.f`` is zero because the coupling
    ``-w`` is supplied by the time stepper.  ``alpha = beta = 1`` gives the
    classical (integer-order) model.
    """
    check_orders(alpha, beta, allow_classical=True)
    r, m = params.r, params.mu

    def F(u):
        return u * (1 - u) * (u - m)

    def dF(u):
        return -3 * u ** 2 + 2 * (1 + m) * u - m

    def u0(x, y):
        return np.where((x < r) & (y < r), 1.0, 0.0)

    def w0(x, y):
        return np.where(y >= r, 0.1, 0.0)

    spec = ProblemSpec("fhn", alpha, beta, kx, ky, F, dF,
                       lambda x, y, t: np.zeros(np.broadcast(x, y).shape), u0, None,
                       None, "disk", {"cx": r, "cy": r, "r": r})
    return spec, w0, params


def fhn_mesh_n(params=FHNParams(), fraction=20):
    """Smallest subdivision count whose disk mesh has ``h <= diameter / fraction``."""
    target = 2 * params.r / fraction
    n = max(1, int(np.floor(1.0 / target)))
    while meshes.generate_disk_mesh(params.r, params.r, params.r, n).h > target:
        n += 1
    return n


PROBLEMS = {"example1": example1_spec, "example2": example2_spec,
            "example3": example3_spec}
