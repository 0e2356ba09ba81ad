"""Normal forms of k-th kind singular points and the second-kind invariants."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .analysis import (classify_point, extended_null_field, is_zero, normal_field,
                       phi_series)
from .errors import (AnalysisError, NotKthKind, NotNormalized, NotSecondKind, WrongInputForm,
                     WrongKind)
from .expr import GeneratorDef, parse_expr, polynomial_text
from .jet import MAX_ORDER, Jet2, JetVec3, det3, dot, solve_graph
from .surface import Reparametrized, Surface, TargetTransformed, linear_map

PREDICATE_TOL = 1e-10


def _as_generator(gd, k=None):
    if isinstance(gd, GeneratorDef):
        if k is not None and k != gd.k:
            gd = GeneratorDef(gd.g, gd.h, k, gd.base, gd.order, gd.definitions)
        return gd
    g, h = gd
    return GeneratorDef.from_strings(g, h, k=k or 2)


class NormalFormSurface(Surface):
    """``(u, N_k[g], N_k[h])`` where ``N_k`` is the k-th kind construction.

    ``N_k[g] = (v^k/k! - u) g^(k) + sum_i (-1)^i v^(k-i)/(k-i)! g^(k-i)``
    with derivatives taken in v.  Its v-derivative is
    ``(v^k/k! - u) g^(k+1)``, so the normal is
    ``(h1 f2_u - g1 f3_u, -h1, g1)`` with ``g1 = g^(k+1)``, ``h1 = h^(k+1)``.
    """

    def __init__(self, gen, meta=None):
        k = gen.k
        super().__init__((0.0, 0.0), min(gen.order, MAX_ORDER - k - 1), meta)
        self.gen = gen
        self.k = k
        self.max_order = MAX_ORDER - k - 1

    def _derivs(self, base, order, count):
        """``[d_v^j g]`` and ``[d_v^j h]`` for j = 0..count, all at ``order``."""
        m = order + count
        out = []
        for fn in (self.gen.g_jet, self.gen.h_jet):
            cur = fn(base, m)
            ds = [cur.truncate(order)]
            for _ in range(count):
                cur = cur.d_v()
                ds.append(cur.truncate(order))
            out.append(ds)
        return out

    def _component(self, ds, base, order):
        k = self.k
        u = Jet2.variable("u", order, base)
        v = Jet2.variable("v", order, base)
        vk = v ** k * (1.0 / math.factorial(k))
        out = (vk - u) * ds[k]
        for i in range(1, k + 1):
            out = out + (v ** (k - i)) * ((-1) ** i / math.factorial(k - i)) * ds[k - i]
        return out

    def jets(self, base=None, order=None):
        base, order = self._at(base, order)
        gs, hs = self._derivs(base, order, self.k)
        u = Jet2.variable("u", order, base)
        return JetVec3(u, self._component(gs, base, order), self._component(hs, base, order))

    def normal_jets(self, base=None, order=None):
        base, order = self._at(base, order)
        f = self.jets(base, order + 1)
        gs, hs = self._derivs(base, order, self.k + 1)
        g1, h1 = gs[self.k + 1], hs[self.k + 1]
        f2u, f3u = f.y.d_u(), f.z.d_u()
        return JetVec3(h1 * f2u - g1 * f3u, -h1, g1)

    def generator_values(self, j):
        """``(d_v^j g, d_v^j h)`` at the origin."""
        gs, hs = self._derivs(np.zeros(2), 0, j)
        return float(gs[j].value), float(hs[j].value)


def build_kth_kind(gen, k=None):
    """Surface of the k-th kind construction; front determinant recorded in ``meta``."""
    gen = _as_generator(gen, k)
    k = gen.k
    surf = NormalFormSurface(gen)
    g1, h1 = surf.generator_values(k + 1)
    if is_zero(math.hypot(g1, h1)):
        err = NotSecondKind if k == 2 else NotKthKind
        raise err(f"(d_v^{k + 1} g, d_v^{k + 1} h)(0) = (0, 0): not of kind {k}")
    g2, h2 = surf.generator_values(k + 2)
    front_det = g1 * h2 - g2 * h1
    surf.meta.update({
        "normal_form": True,
        "k": k,
        "front_det": front_det,
        "front": not is_zero(front_det, abs(g1 * h2) + abs(g2 * h1)),
        "singular_set": f"v^{k}/{math.factorial(k)} = u",
        "null_field": "d/dv",
    })
    return surf


def normalized_predicates(table):
    a, b = table.a, table.b
    return {
        "g(0)=0": abs(a[0][0]) <= PREDICATE_TOL,
        "h(0)=0": abs(b[0][0]) <= PREDICATE_TOL,
        "g_u-g_vv=0": abs(a[1][0] - a[0][2]) <= PREDICATE_TOL * (1 + abs(a[1][0])),
        "h_u-h_vv=0": abs(b[1][0] - b[0][2]) <= PREDICATE_TOL * (1 + abs(b[1][0])),
        "h_vvv=0": abs(b[0][3]) <= PREDICATE_TOL,
        "g_vvv>0": a[0][3] > PREDICATE_TOL,
    }


def build_second_kind(gen):
    """Second-kind normal form; warns when the reduction predicates fail."""
    gen = _as_generator(gen, 2)
    surf = build_kth_kind(gen, 2)
    table = extract_coeffs(gen)
    failed = [name for name, ok in table.predicates.items() if not ok]
    if failed:
        warnings.warn("generator is not normalized (" + ", ".join(failed) + "); "
                      "coefficient-route invariants are unavailable", stacklevel=2)
    surf.meta["normalized"] = not failed
    surf.meta["swallowtail"] = bool(surf.meta["front"])
    return surf


def u_axis_mapping(base, order):
    """``(u, v) -> (u^2/2 - v, u)``."""
    u = Jet2.variable("u", order, base)
    v = Jet2.variable("v", order, base)
    return u * u * 0.5 - v, u


def to_u_axis_form(surface):
    """``F(u, v) = -f(u^2/2 - v, u)``: singular set the u-axis, null field d/du + u d/dv."""
    if not surface.meta.get("normal_form") or surface.meta.get("k") != 2:
        raise WrongInputForm("expected the output of build_second_kind")
    inner = Reparametrized(surface, u_axis_mapping, base=(0.0, 0.0))
    meta = dict(surface.meta)
    meta.update({"u_axis": True, "singular_set": "v = 0", "null_field": "d/du + u d/dv"})
    return TargetTransformed(inner, -np.eye(3), meta=meta)


# -- coefficients --------------------------------------------------------

@dataclass
class CoeffTable:
    """``a[i][j]`` and ``b[i][j]``: partial derivatives of g and h at the origin."""

    a: np.ndarray
    b: np.ndarray
    predicates: dict = field(default_factory=dict)

    @property
    def normalized(self):
        return all(self.predicates.values())


def extract_coeffs(gen, order=5):
    gen = _as_generator(gen)
    origin = np.zeros(2)
    tabs = []
    for jet in (gen.g_jet(origin, order), gen.h_jet(origin, order)):
        t = np.zeros((order + 1, order + 1))
        for i in range(order + 1):
            for j in range(order + 1 - i):
                t[i, j] = jet.partial(i, j)
        tabs.append(t)
    table = CoeffTable(tabs[0], tabs[1])
    table.predicates = normalized_predicates(table)
    return table


def expansion_coefficients(surface, order=4):
    """The ``order``-jets of the y and z components at the origin as tables."""
    f = surface.jets((0.0, 0.0), order)
    return f.y.table(), f.z.table()


def predicted_low_degree(table):
    """Degree <= 4 coefficients of y and z implied by the generator coefficients.

    Valid for normalized generators; keys are ``(i, j)`` for ``u^i v^j``.
    """
    a, b = table.a, table.b
    y = {
        (2, 0): (-2 * a[1][2] + a[2][0]) / 2,
        (3, 0): (-3 * a[2][2] + a[3][0]) / 6,
        (4, 0): (-4 * a[3][2] + a[4][0]) / 24,
        (1, 1): -a[0][3],
        (2, 1): -a[1][3],
        (3, 1): -a[2][3] / 2,
        (1, 2): -a[0][4] / 2,
        (2, 2): -a[1][4] / 2,
        (0, 3): a[0][3] / 6,
        (1, 3): (-a[0][5] + a[1][3]) / 6,
        (0, 4): a[0][4] / 8,
    }
    z = {
        (2, 0): (-2 * b[1][2] + b[2][0]) / 2,
        (3, 0): (-3 * b[2][2] + b[3][0]) / 6,
        (4, 0): (-4 * b[3][2] + b[4][0]) / 24,
        (2, 1): -b[1][3],
        (3, 1): -b[2][3] / 2,
        (1, 2): -b[0][4] / 2,
        (2, 2): -b[1][4] / 2,
        (1, 3): (-b[0][5] + b[1][3]) / 6,
        (0, 4): b[0][4] / 8,
    }
    full = []
    for d in (y, z):
        t = np.zeros((5, 5))
        for (i, j), c in d.items():
            t[i, j] = c
        full.append(t)
    return full[0], full[1]


# -- invariants ----------------------------------------------------------

@dataclass
class Invariants:
    kappa_nu: float
    mu_c: float
    tau_s: float
    route: str
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)

    def as_tuple(self):
        return (self.kappa_nu, self.mu_c, self.tau_s)


def invariants_from_coeffs(table):
    if not table.normalized:
        failed = [n for n, ok in table.predicates.items() if not ok]
        raise NotNormalized("generator fails " + ", ".join(failed))
    a, b = table.a, table.b
    return Invariants(float(-2 * b[1][2] + b[2][0]), float(b[0][4] / a[0][3] ** 2),
                      float(2 * a[0][3]), "coefficient")


def _series(jet):
    return np.array([jet.coeff(j, 0) for j in range(jet.order + 1)])


def _limit_ratio(num, den, tol=1e-10):
    scale = max(np.max(np.abs(num)), np.max(np.abs(den)), 1.0)
    nz = np.nonzero(np.abs(den) > tol * scale)[0]
    if not len(nz):
        raise AnalysisError("denominator vanishes to all computed orders")
    m = int(nz[0])
    if np.any(np.abs(num[:m]) > 1e-8 * scale):
        raise AnalysisError("limit diverges: numerator vanishes to lower order than denominator")
    return float(num[m] / den[m]), m


def aligned_frame(surface, p=None, order=None):
    """Coordinates ``(U, V)`` at a second-kind point, and the oriented unit normal.

    ``V`` spans ``ker df``; ``(U, V)`` is positively oriented; ``V`` is
    oriented so that ``phi'(0) < 0`` when the null field is co-oriented with
    the singular curve; ``nu`` is oriented so that ``det(f_u, f_v, nu)``
    increases along ``U``.  These choices reproduce the normal-form
    conventions ``nu(0) = (0, 0, 1)``, ``g_vvv(0) > 0``.
    """
    p = np.asarray(surface.base if p is None else p, dtype=float)
    n = min(surface.order if order is None else order, surface.max_order)
    f = surface.jets(p, 1)
    _, _, vt = np.linalg.svd(np.stack([f.d_u().value(), f.d_v().value()], axis=-1))
    e2 = vt[-1]
    e1 = np.array([e2[1], -e2[0]])
    for _ in range(2):
        aligned = Reparametrized(surface, linear_map(p, e1, e2), base=(0.0, 0.0), order=n)
        fa = aligned.jets((0.0, 0.0), n + 1)
        nu2 = normal_field(aligned, (0.0, 0.0), n)
        lam = det3(fa.d_u(), fa.d_v(), nu2)
        s = solve_graph(lam, "v")
        eta = extended_null_field(fa.d_u(), fa.d_v(), np.array([0.0, 1.0]))
        if phi_series(lam, eta)[1] > 0:
            e1, e2 = -e1, -e2
            continue
        break
    if lam.coeff(1, 0) < 0:
        nu2 = -nu2
    return aligned, nu2, s, (e1, e2)


def invariants_general(surface, p=None, order=None, denominator="velocity"):
    """kappa_nu, mu_c and tau_s from their defining formulas, evaluated with jets.

    ``denominator`` selects ``|gamma_hat'|^2`` (``'velocity'``) or
    ``|gamma_hat|^2`` (``'position'``) in the kappa_nu limit.
    """
    p = np.asarray(surface.base if p is None else p, dtype=float)
    cls = classify_point(surface, p, order)
    if cls.variant != "kth" or cls.k != 2:
        raise WrongKind(f"invariants need a second-kind point, found: {cls.describe()}")
    aligned, nu2, s, frame = aligned_frame(surface, p, order)
    n = min(s.order, nu2.order)
    fa = aligned.jets((0.0, 0.0), n)
    nu = nu2.truncate(n).normalized()

    # normalized cuspidal curvature at the origin
    fu = fa.d_u().value()
    fuv = fa.d_u().d_v().value()
    nu_v = nu.d_v().value()
    mu_c = -np.linalg.norm(fu) ** 3 * np.dot(fuv, nu_v) / np.dot(np.cross(fuv, fu), np.cross(fuv, fu))

    # singular locus gamma_hat(t) = f(s(t), t)
    t = Jet2.variable("u", n, (0.0, 0.0))
    gu, gv = s.truncate(n), t
    gh = fa.compose(gu, gv)
    nug = nu.compose(gu.truncate(nu.order), gv.truncate(nu.order))
    d1 = gh.d_u()
    d2 = d1.d_u()
    d3 = d2.d_u()
    num = _series(dot(d2, nug))
    if denominator == "velocity":
        den = _series(dot(d1, d1))
    elif denominator == "position":
        den = _series(dot(gh, gh))
    else:
        raise ValueError(f"unknown denominator {denominator!r}")
    kappa_nu, lead = _limit_ratio(num, den)

    a2, a3, nv = d2.value(), d3.value(), nug.value()
    tau_s = float(np.linalg.det(np.stack([a2, a3, nv], axis=-1)) / np.linalg.norm(a2) ** 2.5)
    diag = {"frame": tuple(tuple(map(float, e)) for e in frame), "kappa_leading_order": lead}
    return Invariants(float(kappa_nu), float(mu_c), tau_s, "general", diag)


# -- emission --------------------------------------------------------------

def surface_text(surface, order=None, header=None):
    """Polynomial surface file (x, y, z and normal) from jets at the origin."""
    n = min(surface.order if order is None else order, surface.max_order)
    f = surface.jets((0.0, 0.0), n)
    lines = []
    if header:
        lines += [f"# {line}" for line in header.splitlines()]
    lines += [f"order = {n}", "point = 0, 0"]
    for name, comp in zip("xyz", f):
        lines.append(f"{name} = {polynomial_text(comp, 1e-300)}")
    nu = surface.normal_jets((0.0, 0.0), n)
    if nu is not None:
        lines.append("normal = " + ", ".join(polynomial_text(c, 1e-300) for c in nu))
    return "\n".join(lines) + "\n"


def random_normalized_generator(rng, scale=1.0, k=2, a03_min=0.5):
    """Random polynomial (g, h) of degree 5 in reduced position for kind k.

    ``g_u = (-1)^k d_v^k g``, the same for h, ``d_v^(k+1) h = 0`` and
    ``d_v^(k+1) g >= a03_min`` at the origin; for k = 2 these are the
    reduction predicates checked by :func:`extract_coeffs`.
    """
    a, b = {}, {}
    for i in range(6):
        for j in range(6 - i):
            if 1 <= i + j <= 5:
                a[i, j] = float(rng.uniform(-scale, scale))
                b[i, j] = float(rng.uniform(-scale, scale))
    if not 2 <= k <= 3:
        raise ValueError("random generators of degree 5 support k = 2 or 3")
    sign = (-1) ** k
    a[1, 0] = sign * a[0, k]
    b[1, 0] = sign * b[0, k]
    b[0, k + 1] = 0.0
    a[0, k + 1] = abs(a[0, k + 1]) + a03_min
    return GeneratorDef(_poly_ast(a), _poly_ast(b), k=k), a, b


def _poly_ast(coeffs):
    parts = []
    for (i, j), c in sorted(coeffs.items()):
        if c == 0.0:
            continue
        c = c / (math.factorial(i) * math.factorial(j))
        mono = "*".join(["u"] * i + ["v"] * j)
        parts.append(f"({c!r})*{mono}")
    return parse_expr(" + ".join(parts) if parts else "0")
