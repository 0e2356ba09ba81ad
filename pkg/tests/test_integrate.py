import numpy as np
import pytest
from hypothesis import given, strategies as st

from frontal.bde import BDE, model_bde
from frontal.expr import SurfaceDef
from frontal.integrate import (ExactSampler, GridSampler, image_cusp_test, integrate_solutions,
                               portrait_seeds, root_directions, solution_jets)
from frontal.jet import Jet2

coef = st.floats(-5, 5)


@given(coef, coef, coef)
def test_root_directions_solve_the_quadratic(p, q, r):
    dirs = root_directions(p, q, r)
    if q * q - p * r <= 1e-9 * (1 + p * p + q * q + r * r):
        return
    assert dirs is not None
    scale = abs(p) + abs(q) + abs(r)
    for d in dirs:
        assert np.linalg.norm(d) == pytest.approx(1.0)
        assert abs(p * d[0] ** 2 + 2 * q * d[0] * d[1] + r * d[1] ** 2) < 1e-9 * scale
    assert abs(dirs[0][0]) >= abs(dirs[1][0])


def test_no_directions_when_discriminant_negative():
    assert root_directions(1.0, 0.0, 1.0) is None


def test_lines_at_45_degrees():
    bde = BDE.from_expressions("1", "0", "-1")
    window = (-1, 1, -1, 1)
    curves = integrate_solutions(bde, window, [(0.1, 0.2)], step=0.05)
    assert len(curves) == 2
    for c in curves:
        d = c.points - np.array([0.1, 0.2])
        assert np.max(np.abs(np.abs(d[:, 0]) - np.abs(d[:, 1]))) < 1e-8
        assert set(c.reasons) == {"window"}


def test_solutions_cusp_on_the_discriminant():
    """Solutions of dv^2 - u du^2 = 0 are the semicubical parabolas 9 (v - c)^2 = 4 u^3."""
    bde = BDE.from_expressions("-u", "0", "1")
    window = (-0.5, 1.0, -1.0, 1.0)
    seed = np.array([0.25, 0.1])
    shift = 2.0 / 3.0 * seed[0] ** 1.5
    curves = integrate_solutions(bde, window, [seed], step=0.02, max_len=3.0)
    assert len(curves) == 2
    for c in curves:
        u, v = c.points[:, 0], c.points[:, 1]
        res = [np.max(np.abs(9 * (v - cc) ** 2 - 4 * u ** 3)) for cc in (seed[1] - shift,
                                                                         seed[1] + shift)]
        assert min(res) < 1e-4
        # the curve reaches the discriminant and turns back into u > 0
        assert u.min() < 1e-4 and np.all(u > -1e-4)


def test_solution_series():
    bde = BDE.from_expressions("-u", "0", "1")
    u0, v0 = 0.25, 0.1
    U, V, S = solution_jets(bde, (u0, v0), np.sqrt(u0), "m", order=6)
    c = v0 - 2.0 / 3.0 * u0 ** 1.5
    t = 0.05
    u, v = U.evaluate(t, 0.0), V.evaluate(t, 0.0)
    assert abs(9 * (v - c) ** 2 - 4 * u ** 3) < 1e-8


def test_grid_sampler_matches_exact():
    bde = BDE.from_expressions("v + u^2*v", "u*v - 0.3", "1 + u^3")
    window = (-1, 1, -1, 1)
    g, e = GridSampler(bde, window), ExactSampler(bde, window)
    rng = np.random.default_rng(0)
    for u, v in rng.uniform(-0.9, 0.9, size=(20, 2)):
        assert np.allclose(g.coeffs(u, v), e.coeffs(u, v), atol=1e-6)


def test_portrait_seeds_lie_in_the_two_direction_region():
    bde = model_bde(-1.0)
    sampler = GridSampler(bde, (-1, 1, -1, 1))
    seeds = portrait_seeds(sampler, 6)
    assert seeds
    for s in seeds:
        assert bde.discriminant(*s) > 0


def test_integration_is_deterministic():
    bde = model_bde(0.25)
    window = (-1, 1, -1, 1)
    sampler = GridSampler(bde, window)
    seeds = portrait_seeds(sampler, 3, straddle=4)
    a = integrate_solutions(bde, window, seeds, step=0.05, sampler=sampler)
    b = integrate_solutions(bde, window, seeds, step=0.05, sampler=GridSampler(bde, window))
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert np.array_equal(x.points, y.points)


def test_image_cusp_test_on_cuspidal_edge():
    s = SurfaceDef.from_strings("u", "v^2", "v^3")
    t = Jet2.variable("u", 6, (0.0, 0.0))
    zero = Jet2.constant(0.0, 6, (0.0, 0.0))
    across = image_cusp_test(s, zero + 0.1, t)
    assert across.ok and across.diagnostics["cusp_orders"] == (2, 3)
    along = image_cusp_test(s, t + 0.1, zero)
    assert not along.ok and along.diagnostics["cusp_orders"] == (1, None)
