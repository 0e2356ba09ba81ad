import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from frontal.analysis import classify_point, identifier_lambda
from frontal.errors import NotNormalized, NotSecondKind, WrongInputForm, WrongKind
from frontal.expr import GeneratorDef, SurfaceDef, parse_file
from frontal.normal_form import (build_kth_kind, build_second_kind, expansion_coefficients,
                                 extract_coeffs, invariants_from_coeffs, invariants_general,
                                 predicted_low_degree, random_normalized_generator,
                                 surface_text, to_u_axis_form)
from frontal.surface import Reparametrized, TargetTransformed, polynomial_map, rotation_about

U, V = sp.symbols("u v")
seeds = st.integers(0, 2 ** 32 - 1)


def random_gen(seed, k=2):
    gen, a, b = random_normalized_generator(np.random.default_rng(seed), k=k)
    return gen, a, b


def symbolic_construction(g, k):
    """Component of the k-th kind construction, written out symbolically."""
    dv = [g] + [sp.diff(g, V, i) for i in range(1, k + 1)]
    out = (V ** k / sp.factorial(k) - U) * dv[k]
    for i in range(1, k + 1):
        out += V ** (k - i) * (-1) ** i / sp.factorial(k - i) * dv[k - i]
    return sp.expand(out)


def poly_coeffs(expr, n):
    p = sp.Poly(expr, U, V)
    return {(i, j): float(p.coeff_monomial(U ** i * V ** j))
            for i in range(n + 1) for j in range(n + 1 - i)}


@pytest.mark.parametrize("k", [2, 3, 4])
def test_construction_against_symbolic_formula(k):
    g_text = f"v^{k + 1}/{math.factorial(k + 1)} + u*v^2 - 2*u^2*v + u^3"
    h_text = f"u^2/2 + v^{k + 2} - 3*u*v^3"
    surf = build_kth_kind((g_text, h_text), k)
    f = surf.jets((0.0, 0.0), 6)
    g = sp.sympify(g_text.replace("^", "**"), locals={"u": U, "v": V})
    h = sp.sympify(h_text.replace("^", "**"), locals={"u": U, "v": V})
    for comp, sym in ((f.y, symbolic_construction(g, k)), (f.z, symbolic_construction(h, k))):
        for (i, j), c in poly_coeffs(sym, 6).items():
            assert comp.coeff(i, j) == pytest.approx(c, abs=1e-12)


@given(seeds, st.sampled_from([2, 3]))
def test_normal_form_contract(seed, k):
    gen, _, _ = random_gen(seed, k)
    surf = build_kth_kind(gen, k)
    f0 = surf.jets((0.0, 0.0), 1)
    assert np.array_equal(f0.d_u().value(), [1.0, 0.0, 0.0])
    for v in np.linspace(-0.3, 0.3, 7):
        p = (v ** k / math.factorial(k), v)
        lam = identifier_lambda(surf, p, 2)
        assert abs(lam.value) < 1e-10
        fv = surf.jets(p, 1).d_v().value()
        assert np.linalg.norm(fv) < 1e-10


def test_butterfly_expansion():
    # the construction yields z = (-15 u^2 - 15 u v^2 + v^5)/30
    surf = build_kth_kind(("v^4/24", "u^2/2 + v^5/120"), 3)
    f = surf.jets((0.0, 0.0), 6)
    y = {(1, 1): -1.0, (0, 4): 1 / 24}
    z = {(2, 0): -0.5, (1, 2): -0.5, (0, 5): 1 / 30}
    for comp, expect in ((f.x, {(1, 0): 1.0}), (f.y, y), (f.z, z)):
        for i in range(7):
            for j in range(7 - i):
                assert comp.coeff(i, j) == pytest.approx(expect.get((i, j), 0.0), abs=1e-12)
    assert surf.meta["front"] and classify_point(surf).k == 3


def test_swallowtail_iff_fourth_derivative():
    st_ = build_second_kind(("v^3/6", "u^2/2 + v^4/24"))
    assert st_.meta["swallowtail"] and classify_point(st_).is_front
    not_front = build_second_kind(("v^3/6", "u^2/2 + v^5/120"))
    assert not not_front.meta["swallowtail"]
    assert not classify_point(not_front).is_front


def test_not_second_kind():
    with pytest.raises(NotSecondKind):
        build_second_kind(("v^4", "u^2"))


@given(seeds)
def test_low_degree_coefficients_match_prediction(seed):
    gen, _, _ = random_gen(seed)
    surf = build_second_kind(gen)
    y, z = expansion_coefficients(surf, 4)
    py, pz = predicted_low_degree(extract_coeffs(gen))
    for i in range(5):
        for j in range(5 - i):
            if (i, j) in ((0, 0), (1, 0), (0, 1), (0, 2), (1, 0)):
                continue
            assert y[i, j] == pytest.approx(py[i, j], abs=1e-10)
            assert z[i, j] == pytest.approx(pz[i, j], abs=1e-10)


def test_reference_invariants():
    gen = GeneratorDef.from_strings("v^3/6", "u^2/2 + v^4/24")
    a = invariants_from_coeffs(extract_coeffs(gen))
    b = invariants_general(build_second_kind(gen))
    assert a.as_tuple() == pytest.approx((1.0, 1.0, 2.0))
    assert b.as_tuple() == pytest.approx((1.0, 1.0, 2.0), abs=1e-10)


@settings(max_examples=10)
@given(seeds)
def test_invariant_routes_agree(seed):
    gen, _, _ = random_gen(seed)
    a = invariants_from_coeffs(extract_coeffs(gen))
    b = invariants_general(build_second_kind(gen))
    assert np.allclose(a.as_tuple(), b.as_tuple(), rtol=1e-6, atol=1e-6)


@settings(max_examples=8)
@given(seeds, st.floats(-0.5, 0.5), st.floats(-np.pi, np.pi))
def test_general_invariants_are_geometric(seed, c, angle):
    """Unchanged by an orientation-preserving source change and a target rotation."""
    gen, _, _ = random_gen(seed)
    surf = build_second_kind(gen)
    ref = invariants_general(surf).as_tuple()
    moved = Reparametrized(surf, polynomial_map(lambda u, v: u + v * v * c, lambda u, v: v + u * c),
                           base=(0.0, 0.0))
    moved = TargetTransformed(moved, rotation_about((0.3, -1.0, 2.0), angle))
    assert np.allclose(invariants_general(moved).as_tuple(), ref, rtol=1e-6, atol=1e-6)


def test_coefficient_route_requires_normalization():
    gen = GeneratorDef.from_strings("v^3/6 + u", "u^2/2 + v^4/24")
    with pytest.raises(NotNormalized):
        invariants_from_coeffs(extract_coeffs(gen))
    with pytest.warns(UserWarning):
        surf = build_second_kind(gen)
    assert all(math.isfinite(x) for x in invariants_general(surf).as_tuple())


def test_general_route_rejects_other_kinds():
    with pytest.raises(WrongKind):
        invariants_general(SurfaceDef.from_strings("u", "v^2", "v^3"))


@given(seeds)
def test_u_axis_form(seed):
    gen, _, _ = random_gen(seed)
    ua = to_u_axis_form(build_second_kind(gen))
    for u in (-0.2, 0.05, 0.3):
        assert abs(identifier_lambda(ua, (u, 0.0), 2).value) < 1e-10
        f = ua.jets((u, 0.0), 1)
        assert np.linalg.norm(f.d_u().value() + u * f.d_v().value()) < 1e-10


def test_u_axis_form_needs_a_normal_form():
    with pytest.raises(WrongInputForm):
        to_u_axis_form(SurfaceDef.from_strings("u", "v", "0"))


def test_random_generators_are_normalized():
    for seed in range(10):
        gen, a, b = random_gen(seed)
        table = extract_coeffs(gen)
        assert table.normalized
        assert table.a[0, 3] == pytest.approx(a[0, 3])


def test_surface_text_reparses_to_the_same_jets():
    surf = build_second_kind(("v^3/6", "u^2/2 + v^4/24 + u*v^3"))
    again = parse_file(surface_text(surf))
    a, b = surf.jets((0.0, 0.0), 5), again.jets((0.0, 0.0), 5)
    for ca, cb in zip(a, b):
        assert np.allclose(ca.coeffs, cb.coeffs, atol=1e-14)
    assert classify_point(again).k == 2
