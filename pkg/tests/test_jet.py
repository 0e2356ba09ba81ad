import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from frontal.errors import JetMismatch, NotDivisible, OrderExceeded
from frontal.jet import (Jet2, compose, divide_exact_by_v, pad, recenter, solve_graph,
                         v_residual)

U, V = sp.symbols("u v")


def sym_taylor(expr, base, order):
    """Taylor coefficients of a sympy expression, the independent oracle."""
    u0, v0 = base
    out = {}
    for i in range(order + 1):
        for j in range(order + 1 - i):
            d = sp.diff(expr, U, i, V, j) if i or j else expr
            out[i, j] = float(d.subs({U: u0, V: v0})) / (math.factorial(i) * math.factorial(j))
    return out


def jet_vars(base, order):
    return Jet2.variable("u", order, base), Jet2.variable("v", order, base)


def assert_matches(jet, oracle, rtol=1e-10):
    for (i, j), c in oracle.items():
        assert jet.coeff(i, j) == pytest.approx(c, rel=rtol, abs=rtol)


CASES = [
    (lambda u, v: u * u * v + 3 * v ** 3 - u, lambda u, v: u ** 2 * v + 3 * v ** 3 - u),
    (lambda u, v: (u * v).sin() + (v - u * u).exp(), lambda u, v: sp.sin(u * v) + sp.exp(v - u ** 2)),
    (lambda u, v: (u * u + v * v + 1.0).sqrt(), lambda u, v: sp.sqrt(u ** 2 + v ** 2 + 1)),
    (lambda u, v: (u + v * 2.0 + 3.0).reciprocal(), lambda u, v: 1 / (u + 2 * v + 3)),
    (lambda u, v: (u - v).cos() * u ** 3, lambda u, v: sp.cos(u - v) * u ** 3),
]


@pytest.mark.parametrize("case", range(len(CASES)))
@pytest.mark.parametrize("base", [(0.0, 0.0), (0.3, -0.7)])
def test_arithmetic_against_symbolic_taylor(case, base):
    fj, fs = CASES[case]
    order = 6
    jet = fj(*jet_vars(base, order))
    assert_matches(jet, sym_taylor(fs(U, V), base, order))


def test_partial_is_factorial_weighted_coefficient():
    u, v = jet_vars((0.0, 0.0), 5)
    f = u ** 2 * v ** 3
    assert f.partial(2, 3) == pytest.approx(12.0)
    assert f.coeff(2, 3) == pytest.approx(1.0)


def test_derivative_lowers_order_and_matches_oracle():
    base = (0.2, 0.1)
    u, v = jet_vars(base, 7)
    f = (u * v).exp() * v
    fu = f.d_u()
    assert fu.order == 6
    assert_matches(fu, sym_taylor(sp.diff(sp.exp(U * V) * V, U), base, 6))


def test_finite_difference_agreement():
    base = np.array([0.4, -0.2])
    u, v = jet_vars(base, 3)
    f = (u * u - v).sin() * (v + 2.0)

    def fn(x, y):
        return np.sin(x * x - y) * (y + 2.0)
    h = 1e-5
    du = (fn(base[0] + h, base[1]) - fn(base[0] - h, base[1])) / (2 * h)
    dv = (fn(base[0], base[1] + h) - fn(base[0], base[1] - h)) / (2 * h)
    assert f.gradient() == pytest.approx([du, dv], rel=1e-8)


def test_batched_evaluation_agrees_with_scalar():
    pts = np.array([[0.0, 0.0], [0.5, -0.25], [-1.0, 2.0]])
    u, v = jet_vars(pts, 4)
    f = (u * v).sin() + v ** 3
    for k, p in enumerate(pts):
        us, vs = jet_vars(p, 4)
        g = (us * vs).sin() + vs ** 3
        assert np.allclose(f.coeffs[k], g.coeffs)


def test_mismatched_bases_are_rejected():
    a = Jet2.variable("u", 3, (0.0, 0.0))
    b = Jet2.variable("u", 3, (1.0, 0.0))
    with pytest.raises(JetMismatch):
        a + b


def test_coefficient_beyond_order():
    a = Jet2.variable("u", 2, (0.0, 0.0))
    with pytest.raises(OrderExceeded):
        a.coeff(2, 1)


def test_compose_chain_rule():
    order = 6
    u, v = jet_vars((0.0, 0.0), order)
    inner_u = u + v * v
    inner_v = (u * v).sin()
    ou, ov = jet_vars((0.0, 0.0), order)
    outer = (ou * 2.0 + ov).exp() - ou * ov
    res = compose(outer, inner_u, inner_v)
    expr = sp.exp(2 * (U + V ** 2) + sp.sin(U * V)) - (U + V ** 2) * sp.sin(U * V)
    assert_matches(res, sym_taylor(expr, (0, 0), order))


def test_compose_requires_matching_base():
    u, v = jet_vars((0.0, 0.0), 3)
    outer = Jet2.variable("u", 3, (1.0, 0.0))
    with pytest.raises(JetMismatch):
        compose(outer, u, v)


def test_recenter_polynomial_is_exact():
    u, v = jet_vars((0.0, 0.0), 4)
    f = u ** 3 * v - v ** 2 + 2.0
    g = recenter(f, (0.5, -1.0))
    assert_matches(g, sym_taylor(U ** 3 * V - V ** 2 + 2, (0.5, -1.0), 4))


def test_divide_by_v():
    u, v = jet_vars((0.0, 0.0), 5)
    f = v * (u.sin() + v * v)
    q = divide_exact_by_v(f)
    assert q.order == 4
    assert_matches(q, sym_taylor(sp.sin(U) + V ** 2, (0, 0), 4))
    assert v_residual(f) < 1e-15
    with pytest.raises(NotDivisible):
        divide_exact_by_v(f + u * u)


def test_solve_graph_recovers_parabola():
    u, v = jet_vars((0.0, 0.0), 8)
    lam = u - v * v * 0.5 + v ** 3
    s = solve_graph(lam, "v")
    for k in range(8):
        expected = {2: 0.5, 3: -1.0}.get(k, 0.0)
        assert s.coeff(k, 0) == pytest.approx(expected, abs=1e-12)


def test_pad_and_truncate_roundtrip():
    u, v = jet_vars((0.0, 0.0), 3)
    f = u * v + v
    assert np.allclose(pad(f, 6).truncate(3).coeffs, f.coeffs)


coef = st.floats(-2, 2, allow_nan=False)


@given(st.lists(coef, min_size=6, max_size=6), st.lists(coef, min_size=6, max_size=6))
def test_product_is_commutative_and_distributes(a, b):
    base = (0.1, 0.2)
    u, v = jet_vars(base, 4)
    f = u * a[0] + v * a[1] + u * v * a[2] + u * u * a[3] + a[4] + v ** 3 * a[5]
    g = u * b[0] + v * b[1] + u * v * b[2] + u * u * b[3] + b[4] + v ** 3 * b[5]
    h = (u * v).sin()
    assert np.allclose((f * g).coeffs, (g * f).coeffs)
    assert np.allclose((f * (g + h)).coeffs, (f * g + f * h).coeffs, atol=1e-12)


@given(coef, coef)
def test_leibniz_rule(a, b):
    u, v = jet_vars((a, b), 6)
    f = (u * v).sin()
    g = (u - v * v).exp()
    lhs = (f * g).d_u()
    rhs = f.d_u() * g.truncate(5) + f.truncate(5) * g.d_u()
    assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-10)


@given(st.floats(0.5, 3.0), coef)
def test_reciprocal_inverts(c, d):
    u, v = jet_vars((0.0, 0.0), 5)
    f = u * d + v * v + c
    one = f * f.reciprocal()
    assert one.coeff(0, 0) == pytest.approx(1.0)
    assert np.allclose(one.coeffs[1:], 0.0, atol=1e-12)
