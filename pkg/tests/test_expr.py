import numpy as np
import pytest
from hypothesis import given, strategies as st

from frontal.errors import AnalysisError, DivisionByNonUnit, ParseError
from frontal.expr import (BinOp, Call, GeneratorDef, Neg, Num, Pow, SurfaceDef, Var, eval_jet,
                          eval_numeric, parse_expr, parse_file, to_text)
from frontal.jet import Jet2

leaves = st.one_of(
    st.builds(Num, st.floats(0, 1e3, allow_nan=False, allow_infinity=False)),
    st.sampled_from([Var("u"), Var("v")]),
)


def extend(children):
    return st.one_of(
        st.builds(BinOp, st.sampled_from("+-*"), children, children),
        st.builds(Neg, children),
        st.builds(Pow, children, st.integers(0, 3)),
        st.builds(Call, st.sampled_from(["sin", "cos"]), children),
    )


trees = st.recursive(leaves, extend, max_leaves=12)


@given(trees)
def test_print_parse_roundtrip(tree):
    assert parse_expr(to_text(tree)) == tree


@given(trees, st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_jet_value_matches_numeric_evaluation(tree, u, v):
    jet = eval_jet(tree, (u, v), 2)
    num = eval_numeric(tree, u, v)
    assert np.isclose(jet.value, num, rtol=1e-9, atol=1e-9)


@given(trees, trees, st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_evaluation_is_a_ring_homomorphism(a, b, u, v):
    """Jets of a sum and a product equal the sum and product of jets."""
    base, n = (u, v), 3
    ja, jb = eval_jet(a, base, n), eval_jet(b, base, n)
    s = eval_jet(BinOp("+", a, b), base, n)
    p = eval_jet(BinOp("*", a, b), base, n)
    assert np.allclose(s.coeffs, (ja + jb).coeffs, rtol=1e-9, atol=1e-9)
    assert np.allclose(p.coeffs, (ja * jb).coeffs, rtol=1e-9, atol=1e-6)


def test_precedence_and_unary_minus():
    assert parse_expr("-u^2") == Neg(Pow(Var("u"), 2))
    assert parse_expr("1 - u - v") == BinOp("-", BinOp("-", Num(1.0), Var("u")), Var("v"))
    assert parse_expr("u * v + 2") == BinOp("+", BinOp("*", Var("u"), Var("v")), Num(2.0))
    assert eval_numeric(parse_expr("2^3/4"), 0.0, 0.0) == pytest.approx(2.0)


@pytest.mark.parametrize("text, column", [
    ("u + * v", 5),
    ("u^1.5", 3),
    ("sin u", 5),
    ("(u + v", 7),
    ("w + 1", 1),
    ("u $ v", 3),
])
def test_parse_errors_carry_column(text, column):
    with pytest.raises(ParseError) as info:
        parse_expr(text, line=4)
    assert info.value.line == 4
    assert info.value.column == column


def test_file_errors_carry_line_numbers():
    with pytest.raises(ParseError) as info:
        parse_file("x = u\ny = v\nz = u +\n")
    assert info.value.line == 3
    with pytest.raises(ParseError):
        parse_file("x = u\ny = v\n")
    with pytest.raises(ParseError):
        parse_file("x = u\ny = v\nz = 0\ng = v\n")
    with pytest.raises(ParseError):
        parse_file("bogus = 1\n")


def test_definitions_are_shared():
    surf = parse_file("w := u*v\nx = u\ny = w + v^3\nz = w^2\n")
    assert isinstance(surf, SurfaceDef)
    f = surf.jets((0.5, 0.5), 3)
    assert f.value() == pytest.approx([0.5, 0.375, 0.0625])


def test_surface_text_roundtrip():
    surf = parse_file("order = 6\npoint = 0.25, -1\nw := sin(u)\nx = u\ny = w*v\nz = v^3\n"
                      "normal = 0, -3*v^2, w\n")
    again = parse_file(surf.to_text())
    assert again.order == 6 and again.base == (0.25, -1.0)
    a, b = surf.jets(None, 4), again.jets(None, 4)
    for ca, cb in zip(a, b):
        assert np.allclose(ca.coeffs, cb.coeffs)
    assert again.normal is not None


def test_generator_file():
    gen = parse_file("k = 3\ng = v^4/24\nh = u^2/2 + v^5/120\n")
    assert isinstance(gen, GeneratorDef) and gen.k == 3
    again = parse_file(gen.to_text())
    assert np.allclose(gen.h_jet((0.0, 0.0), 6).coeffs, again.h_jet((0.0, 0.0), 6).coeffs)


def test_domain_errors():
    with pytest.raises(DivisionByNonUnit):
        eval_jet(parse_expr("1/(u - u)"), (0.0, 0.0), 2)
    with pytest.raises(AnalysisError):
        eval_jet(parse_expr("sqrt(u)"), (0.0, 0.0), 2)


def test_env_order_override(monkeypatch):
    monkeypatch.setenv("FRONTAL_JET_ORDER", "5")
    assert parse_file("x = u\ny = v\nz = 0\n").order == 5
    monkeypatch.setenv("FRONTAL_JET_ORDER", "99")
    with pytest.raises(ParseError):
        parse_file("x = u\ny = v\nz = 0\n")


def test_batched_jets():
    node = parse_expr("exp(u) * v")
    pts = np.array([[0.0, 1.0], [1.0, 2.0]])
    j = eval_jet(node, pts, 2)
    assert isinstance(j, Jet2)
    assert j.value == pytest.approx([1.0, 2 * np.e])
