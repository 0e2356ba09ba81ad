import numpy as np
import pytest
from hypothesis import given, strategies as st

from frontal.analysis import (classify_point, identifier_lambda, null_direction, phi_derivatives,
                              phi_of_t, trace_singular_set)
from frontal.errors import NotSingular, SeedNotSingular
from frontal.expr import SurfaceDef
from frontal.surface import Reparametrized, TargetTransformed, polynomial_map, rotation_about

CUSPIDAL_EDGE = ("u", "v^2", "v^3")
SWALLOWTAIL = ("u", "4*v^3 + 2*u*v", "3*v^4 + u*v^2")
BUTTERFLY = ("u", "-u*v + v^4/24", "(-15*u^2 + 15*u*v^2 - v^5)/30")


def surf(xyz, normal=None, **kw):
    return SurfaceDef.from_strings(*xyz, normal=normal, **kw)


@pytest.mark.parametrize("xyz, k", [(CUSPIDAL_EDGE, 1), (SWALLOWTAIL, 2), (BUTTERFLY, 3)])
def test_catalog(xyz, k):
    cls = classify_point(surf(xyz))
    assert cls.variant == "kth" and cls.k == k and cls.is_front
    ka, kb = cls.diagnostics["k_routes"]
    assert ka == kb == k


def test_descriptions():
    assert classify_point(surf(SWALLOWTAIL)).describe() == "kind=2 (swallowtail), front=yes"
    assert classify_point(surf(BUTTERFLY)).describe() == "kind=3 (cuspidal butterfly), front=yes"
    assert classify_point(surf(("u", "v", "u*v"))).describe() == "regular point"


def test_non_front_and_degenerate():
    # a fold onto the plane: first kind, the lift fails to be an immersion
    fold = surf(("u", "v^2", "0"), normal=("0", "0", "1"))
    cls = classify_point(fold)
    assert cls.k == 1 and not cls.is_front
    assert cls.describe() == "kind=1, front=no"
    deg = surf(("u", "v^3", "0"), normal=("0", "0", "1"))
    assert classify_point(deg).variant == "degenerate"


def test_explicit_normal_matches_synthesized():
    a = surf(SWALLOWTAIL)
    b = surf(SWALLOWTAIL, normal=("v^2", "-v", "1"))
    assert classify_point(a).k == classify_point(b).k == 2


def test_points_away_from_origin():
    s = surf(SWALLOWTAIL)
    # (u, v) = (-6 t^2, t) lies on the singular set {u = -6 v^2}; only t = 0 is second kind
    cls = classify_point(s, (-6 * 0.3 ** 2, 0.3))
    assert cls.k == 1 and cls.is_front
    assert classify_point(s, (0.5, 0.5)).is_regular


def _diffeo(a, b, c):
    return polynomial_map(lambda u, v: u + v * v * a + u * v * b,
                          lambda u, v: v + u * u * c + u * 0.5)


small = st.floats(-0.8, 0.8)


@given(small, small, small, st.floats(0.1, 3.0), st.floats(-np.pi, np.pi))
def test_kind_is_invariant_under_coordinate_changes(a, b, c, scale, angle):
    base = surf(SWALLOWTAIL, normal=("v^2", "-v", "1"))
    moved = Reparametrized(base, _diffeo(a, b, c), base=(0.0, 0.0))
    moved = TargetTransformed(moved, rotation_about((1, 2, 3), angle), scale=scale,
                              shift=(1.0, -2.0, 0.5))
    cls = classify_point(moved)
    assert cls.k == 2 and cls.is_front


@given(st.floats(0.2, 5.0), small, small)
def test_kind_is_invariant_under_scaling_the_normal(c, a, b):
    """Multiplying the normal by a unit function rescales lambda and keeps k."""
    unit = f"({c!r} + ({a!r})*u + ({b!r})*v^2)"
    normal = (f"{unit}*v^2", f"-{unit}*v", unit)
    cls = classify_point(surf(SWALLOWTAIL, normal=normal))
    assert cls.k == 2


def test_identifier_scales_with_normal():
    a = identifier_lambda(surf(SWALLOWTAIL, normal=("v^2", "-v", "1")), (0.1, 0.2), 3)
    b = identifier_lambda(surf(SWALLOWTAIL, normal=("2*v^2", "-2*v", "2")), (0.1, 0.2), 3)
    assert np.allclose(b.coeffs, 2 * a.coeffs)


def test_phi_vanishing_order():
    d = phi_derivatives(surf(SWALLOWTAIL))
    assert abs(d[0]) < 1e-12 and abs(d[1]) > 1.0
    d3 = phi_derivatives(surf(BUTTERFLY))
    assert abs(d3[0]) < 1e-12 and abs(d3[1]) < 1e-12 and abs(d3[2]) > 0.5


def test_null_direction():
    s = surf(SWALLOWTAIL)
    eta = null_direction(s, (0.0, 0.0))
    assert np.allclose(np.abs(eta), [0.0, 1.0])
    with pytest.raises(NotSingular):
        null_direction(s, (1.0, 1.0))


def test_trace_swallowtail_singular_set():
    s = surf(SWALLOWTAIL, normal=("v^2", "-v", "1"))
    curve = trace_singular_set(s, (0.0, 0.0), (-1, 1, -0.4, 0.4), step=0.02)
    u, v = curve.points[:, 0], curve.points[:, 1]
    assert np.max(np.abs(u + 6 * v ** 2)) < 1e-9
    assert v.min() < -0.35 and v.max() > 0.35
    assert np.all(np.diff(curve.t) > 0)
    phi = phi_of_t(curve)
    zero = np.argmin(np.abs(curve.t))
    # phi changes sign through the swallowtail point and nowhere else
    assert abs(phi[zero]) < 1e-9
    assert np.sum(np.diff(np.sign(phi[np.abs(phi) > 1e-9])) != 0) == 1


def test_trace_rejects_regular_seed():
    s = surf(SWALLOWTAIL, normal=("v^2", "-v", "1"))
    with pytest.raises(SeedNotSingular):
        trace_singular_set(s, (0.5, 0.0), (-1, 1, -1, 1))
