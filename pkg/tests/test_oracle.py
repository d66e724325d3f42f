import numpy as np
import pytest
from scipy.special import gamma

from fracfem import oracle, validate


@pytest.mark.parametrize("p", range(5))
@pytest.mark.parametrize("mu", [0.3, 0.55, 0.8])
def test_power_rule(p, mu):
    x = 0.9
    f = lambda t: t ** p  # noqa: E731
    df = lambda t: p * t ** (p - 1) if p else 0.0  # noqa: E731
    want = gamma(p + 1) / gamma(p + 1 - mu) * x ** (p - mu)
    assert oracle.rl_deriv_quadrature(f, df, 0.0, x, mu) == pytest.approx(want, abs=1e-8)


def test_zero_and_additivity():
    assert oracle.rl_deriv_quadrature(lambda t: 0.0, lambda t: 0.0, 0.0, 1.0, 0.6) == 0.0
    f, df = np.sin, np.cos
    g, dg = (lambda t: t ** 3), (lambda t: 3 * t * t)
    a = oracle.rl_deriv_quadrature(f, df, 0.1, 1.2, 0.6)
    b = oracle.rl_deriv_quadrature(g, dg, 0.1, 1.2, 0.6)
    ab = oracle.rl_deriv_quadrature(lambda t: f(t) + g(t), lambda t: df(t) + dg(t),
                                    0.1, 1.2, 0.6)
    assert ab == pytest.approx(a + b, abs=1e-10)


def test_right_derivative_mirror():
    mu = 0.7
    f, df = (lambda t: (1 - t) ** 2), (lambda t: -2 * (1 - t))
    got = oracle.rl_right_deriv_quadrature(f, df, 0.3, 1.0, mu)
    want = 2 / gamma(3 - mu) * 0.7 ** (2 - mu)
    assert got == pytest.approx(want, rel=1e-10)


def test_order_checked():
    with pytest.raises(ValueError):
        oracle.rl_deriv_quadrature(np.sin, np.cos, 0, 1, 1.5)


def test_gl_first_order_convergence():
    mu, x = 0.6, 1.0
    want = x ** (1 - mu) / gamma(2 - mu)
    errs = []
    for n in (100, 200, 400, 800):
        t = np.linspace(0, x, n + 1)
        errs.append(abs(oracle.gl_deriv(t, mu, x / n) - want))
    rates = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(rates > 0.8)


def test_gl_constant_and_classical_limit():
    mu = 0.5
    t = np.linspace(0, 1, 2001)
    assert oracle.gl_deriv(np.ones_like(t), mu, 1 / 2000) == pytest.approx(
        1 / gamma(1 - mu), rel=1e-2)
    step = 1e-3
    s = np.arange(0, 1 + step / 2, step)
    assert oracle.gl_deriv(np.sin(s), 1.0, step) == pytest.approx(np.cos(1.0), abs=2 * step)


def test_gl_agrees_with_quadrature():
    name, ok, detail = validate.check_gl_agreement()
    assert ok, detail


def test_taylor_form_matches_first_order_form():
    f, df = (lambda t: np.exp(t)), (lambda t: np.exp(t))
    a = oracle.rl_deriv_quadrature(f, df, 0.0, 0.8, 0.65)
    b = oracle.rl_deriv_taylor([f, df], 0.0, 0.8, 0.65)
    assert a == pytest.approx(b, rel=1e-10)


def test_taylor_order_above_one():
    nu = 1.6
    derivs = [lambda t: t ** 3, lambda t: 3 * t ** 2, lambda t: 6 * t]
    want = 6 / gamma(4 - nu) * 0.7 ** (3 - nu)
    assert oracle.rl_deriv_taylor(derivs, 0.0, 0.7, nu) == pytest.approx(want, rel=1e-10)


def test_pairing_disjoint_is_zero():
    from fracfem.mesh import generate_square_mesh
    m = generate_square_mesh(4)
    # vertex 6 sits at (0.25, 0.25), vertex 18 at (0.75, 0.75): supports share no band
    assert oracle.pairing_oracle(m, 6, 18, 0.7, ("left", "right")) == pytest.approx(0, abs=1e-8)
    assert oracle.pairing_oracle(m, 6, 18, 0.7, ("down", "up")) == pytest.approx(0, abs=1e-8)


def test_oracle_stiffness_symmetric():
    from fracfem.mesh import generate_square_mesh
    A = oracle.stiffness_oracle(generate_square_mesh(2), 0.7, 0.8, 1.0, 1.0)
    assert np.abs(A - A.T).max() <= 1e-8
