"""Singular sets, null directions and k-th kind classification."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (DegenerateSingularSet, InternalInconsistency, NormalRequired,
                     NotDivisible, NotSingular, SeedNotSingular, TotallyDegenerate)
from .jet import (MAX_ORDER, Jet2, JetVec3, align, compose, cross, det3,
                  divide_exact_by_v, dot, solve_graph)

ZERO_TOL = 1e-8

KIND_NAMES = {1: "cuspidal edge", 2: "swallowtail", 3: "cuspidal butterfly"}


def is_zero(value, scale=0.0, tol=ZERO_TOL):
    return abs(value) <= tol * (1.0 + scale)


# -- normals and identifiers ---------------------------------------------

def synthesize_normal(surface, base, order):
    """Normal field jet obtained by dividing ``f_u x f_v`` by its vanishing factor.

    Away from the singular set ``f_u x f_v`` itself is returned.  On it, one
    component of the cross product serves as an identifier; its zero set is
    straightened to ``{b = 0}`` and the cross product is divided by ``b``.
    Raises :class:`NormalRequired` when the cross product does not factor.
    """
    base = np.asarray(base, dtype=float)
    order = min(order, MAX_ORDER - 2)
    if base.ndim > 1:
        flat = base.reshape(-1, 2)
        f = surface.jets(flat, order + 1)
        c = cross(f.d_u(), f.d_v())
        norms = np.linalg.norm(c.value(), axis=-1)
        scale = (np.linalg.norm(f.d_u().value(), axis=-1)
                 * np.linalg.norm(f.d_v().value(), axis=-1))
        coeffs = [comp.coeffs.copy() for comp in c]
        # only points on the singular set need the factored normal
        for i in np.nonzero(norms <= ZERO_TOL * (1.0 + scale))[0]:
            one = synthesize_normal(surface, flat[i], order)
            for k in range(3):
                coeffs[k][i] = one[k].truncate(order).coeffs
        shape = base.shape[:-1]
        return JetVec3(*(Jet2(x.reshape(shape + x.shape[-1:]), order, base) for x in coeffs))
    f = surface.jets(base, order + 2)
    c = cross(f.d_u(), f.d_v())
    cv = c.value()
    scale = np.linalg.norm(f.d_u().value()) * np.linalg.norm(f.d_v().value())
    if np.linalg.norm(cv) > ZERO_TOL * (1.0 + scale):
        return c.truncate(order)
    grads = [comp.gradient() for comp in c]
    k = int(np.argmax([np.linalg.norm(g) for g in grads]))
    if np.linalg.norm(grads[k]) <= ZERO_TOL:
        raise NormalRequired("f_u x f_v vanishes to second order here; supply a normal field")
    lam = c[k]
    u0, v0 = (float(x) for x in base)
    along = "v" if abs(grads[k][0]) >= abs(grads[k][1]) else "u"
    s = solve_graph(lam, along)
    n = lam.order
    origin = (0.0, 0.0)
    a = Jet2.variable("u", n, origin)
    b = Jet2.variable("v", n, origin)
    zero = Jet2.constant(0.0, n, origin)
    s_a = compose(s, a, zero)
    if along == "v":
        U, V = s_a + b + u0, a + v0
    else:
        U, V = a + u0, s_a + b + v0
    try:
        quotient = JetVec3(*(divide_exact_by_v(x) for x in c.compose(U, V)))
    except NotDivisible:
        raise NormalRequired("f_u x f_v does not factor through the singular set; "
                             "supply a normal field") from None
    m = quotient.order
    du = Jet2.variable("u", m, base) - u0
    dv = Jet2.variable("v", m, base) - v0
    zm = Jet2.constant(0.0, m, base)
    sm = s.truncate(m)
    if along == "v":
        A, B = dv, du - compose(sm, dv, zm)
    else:
        A, B = du, dv - compose(sm, du, zm)
    return quotient.compose(A, B)


def normal_field(surface, base, order):
    """Non-normalized normal jets: the surface's own, or a synthesized one."""
    n = surface.normal_jets(base, order)
    if n is not None:
        return n
    return synthesize_normal(surface, base, order)


def identifier_lambda(surface, p=None, order=None):
    """Jet of ``det(f_u, f_v, nu2)`` at ``p``."""
    p = surface.base if p is None else p
    order = min(surface.order if order is None else order, surface.max_order)
    f = surface.jets(p, order + 1)
    nu = normal_field(surface, p, order)
    return det3(f.d_u(), f.d_v(), nu)


def _kernel(fu, fv):
    """Singular values and the right singular vector of the smallest one."""
    jac = np.stack([fu, fv], axis=-1)
    _, sig, vt = np.linalg.svd(jac)
    return sig, vt[-1]


def _orient(vec, ref=None):
    if ref is None:
        k = int(np.argmax(np.abs(vec)))
        return vec if vec[k] >= 0 else -vec
    return vec if np.dot(vec, ref) >= 0 else -vec


def null_direction(surface, p, ref=None):
    """Unit kernel vector of ``df_p``; oriented along ``ref`` when given."""
    f = surface.jets(p, 1)
    fu, fv = f.d_u().value(), f.d_v().value()
    sig, vec = _kernel(fu, fv)
    if sig[0] <= ZERO_TOL:
        raise TotallyDegenerate(f"df vanishes at {tuple(np.round(p, 12))}")
    if sig[1] > ZERO_TOL * (1.0 + sig[0]):
        raise NotSingular(f"df has rank 2 at {tuple(np.round(p, 12))}")
    return _orient(vec, ref)


def extended_null_field(fu, fv, kernel):
    """Smooth null field (a, b) on a neighborhood, as jets.

    The Gram matrix of ``df`` has rank one on the singular set; one of its
    rows gives the kernel.  The component of ``kernel`` of larger size is
    fixed to one.
    """
    E, F, G = dot(fu, fu), dot(fu, fv), dot(fv, fv)
    if abs(kernel[1]) >= abs(kernel[0]):
        one = Jet2.constant(1.0, E.order, E.base)
        return -F / E, one
    one = Jet2.constant(1.0, G.order, G.base)
    return one, -F / G


def directional(a, b, lam):
    """``a lam_u + b lam_v`` with orders aligned."""
    lu, lv = lam.d_u(), lam.d_v()
    a, b, lu, lv = align(a, b, lu, lv)
    return a * lu + b * lv


# -- classification --------------------------------------------------------

@dataclass
class KindClassification:
    variant: str
    k: int = None
    is_front: bool = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def is_regular(self):
        return self.variant == "regular"

    def describe(self):
        if self.variant == "regular":
            return "regular point"
        if self.variant == "degenerate":
            return "degenerate singular point"
        front = "yes" if self.is_front else "no"
        name = KIND_NAMES.get(self.k) if self.is_front else None
        label = f"kind={self.k} ({name})" if name else f"kind={self.k}"
        return f"{label}, front={front}"


def _first_nonzero(values, start):
    scale = max((abs(x) for x in values), default=0.0)
    for i, x in enumerate(values):
        if not is_zero(x, scale):
            return start + i
    return None


def phi_series(lam, eta):
    """Taylor coefficients of ``phi(t) = det(gamma'(t), eta(gamma(t)))``.

    ``gamma`` solves ``lam = 0`` as a graph over the coordinate in which
    ``lam`` varies least; ``eta`` is the pair of jets (a, b).
    """
    lu, lv = lam.gradient()
    along = "v" if abs(lu) >= abs(lv) else "u"
    s = solve_graph(lam, along)
    u0, v0 = (float(x) for x in lam.base)
    n = s.order
    t = Jet2.variable("u", n, (0.0, 0.0))
    if along == "v":
        gu, gv = s + u0, t + v0
    else:
        gu, gv = t + u0, s + v0
    a, b = eta
    m = min(a.order, b.order, n)
    ea = compose(a.truncate(m), gu.truncate(m), gv.truncate(m))
    eb = compose(b.truncate(m), gu.truncate(m), gv.truncate(m))
    dgu, dgv = gu.d_u(), gv.d_u()
    dgu, dgv, ea, eb = align(dgu, dgv, ea, eb)
    phi = dgu * eb - dgv * ea
    return np.array([phi.coeff(j, 0) for j in range(phi.order + 1)])


def is_front_at(fu, fv, nu2):
    """Rank test of ``(df, d nu)`` with the unit normal."""
    nu = nu2.normalized()
    rows = np.concatenate([np.stack([fu.value(), fv.value()], axis=-1),
                           np.stack([nu.d_u().value(), nu.d_v().value()], axis=-1)])
    sig = np.linalg.svd(rows, compute_uv=False)
    return bool(sig[1] > ZERO_TOL * (1.0 + sig[0])), sig


def classify_point(surface, p=None, order=None):
    """Classify ``p`` as regular, k-th kind or degenerate.

    k is computed twice: from the vanishing order of ``phi`` along the
    singular curve and from iterated derivatives of the identifier along an
    extended null field.  Disagreement raises :class:`InternalInconsistency`.
    """
    p = np.asarray(surface.base if p is None else p, dtype=float)
    n = surface.order if order is None else order
    n = min(n, surface.max_order)
    f = surface.jets(p, n + 1)
    fu, fv = f.d_u(), f.d_v()
    nu2 = normal_field(surface, p, n)
    if np.linalg.norm(nu2.value()) <= ZERO_TOL:
        raise NormalRequired("normal field vanishes at the point")
    lam = det3(fu, fv, nu2)
    grad = lam.gradient()
    diag = {"lambda": float(lam.value), "dlambda": tuple(float(g) for g in grad)}
    if not is_zero(lam.value, np.linalg.norm(grad)):
        return KindClassification("regular", diagnostics=diag)
    front, sig = is_front_at(fu, fv, nu2)
    diag["front_singular_values"] = tuple(float(x) for x in sig)
    if np.linalg.norm(grad) <= ZERO_TOL * (1.0 + lam.max_abs()):
        return KindClassification("degenerate", is_front=front, diagnostics=diag)
    sig_df, kernel = _kernel(fu.value(), fv.value())
    if sig_df[0] <= ZERO_TOL:
        raise TotallyDegenerate("df vanishes at a non-degenerate singular point")
    eta = extended_null_field(fu, fv, kernel)
    cap = n - 2

    # route (b): eta^i lambda at p
    vals_b = []
    cur = lam
    for _ in range(cap):
        cur = directional(eta[0], eta[1], cur)
        vals_b.append(float(cur.value))
    k_b = _first_nonzero(vals_b, 1)

    # route (a): derivatives of phi at t = 0
    coeffs = phi_series(lam, eta)
    vals_a = [float(math.factorial(j) * c) for j, c in enumerate(coeffs[:cap])]
    k_a = _first_nonzero(vals_a, 1)

    diag["eta_lambda"] = vals_b
    diag["phi_derivatives"] = vals_a
    diag["k_routes"] = (k_a, k_b)
    if k_a != k_b:
        raise InternalInconsistency(f"phi route gives k={k_a}, null-field route gives k={k_b}")
    if k_a is None:
        diag["note"] = f"all tested derivatives vanish up to order {cap}"
        return KindClassification("degenerate", is_front=front, diagnostics=diag)
    return KindClassification("kth", k=k_a, is_front=front, diagnostics=diag)


# -- tracing -----------------------------------------------------------------

@dataclass
class SingularCurve:
    t: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    nulls: np.ndarray
    reasons: tuple = ()

    def __len__(self):
        return len(self.t)

    @property
    def parameter_range(self):
        return float(self.t[0]), float(self.t[-1])

    def image(self, surface):
        return surface.evaluate(self.points[:, 0], self.points[:, 1])


def identifier_function(surface, seed):
    """Callable ``p -> (lambda, grad lambda)`` used for tracing.

    Without a normal field, the component of ``f_u x f_v`` with the largest
    gradient at ``seed`` serves as the identifier.
    """
    if surface.normal_jets(seed, 0) is not None:
        def lam_at(p):
            f = surface.jets(p, 2)
            nu = surface.normal_jets(p, 1)
            lam = det3(f.d_u(), f.d_v(), nu)
            return float(lam.value), lam.gradient()
        return lam_at
    f = surface.jets(seed, 2)
    c = cross(f.d_u(), f.d_v())
    k = int(np.argmax([np.linalg.norm(comp.gradient()) for comp in c]))

    def lam_at(p):
        g = surface.jets(p, 2)
        comp = cross(g.d_u(), g.d_v())[k]
        return float(comp.value), comp.gradient()
    return lam_at


def _inside(p, window):
    umin, umax, vmin, vmax = window
    return umin <= p[0] <= umax and vmin <= p[1] <= vmax


def _newton(lam_at, p, tol=1e-12, max_iter=30):
    for _ in range(max_iter):
        val, grad = lam_at(p)
        g2 = float(np.dot(grad, grad))
        if math.sqrt(g2) <= ZERO_TOL:
            raise DegenerateSingularSet(f"d lambda vanishes near {tuple(np.round(p, 10))}")
        if abs(val) <= tol * max(1.0, math.sqrt(g2)):
            return p, True
        p = p - val * grad / g2
    val, grad = lam_at(p)
    return p, abs(val) <= 1e3 * tol * max(1.0, float(np.linalg.norm(grad)))


def trace_singular_set(surface, seed, window, step=0.01, max_points=20000):
    """Follow ``lambda = 0`` from ``seed`` in both directions until the window is left."""
    lam_at = identifier_function(surface, seed)
    seed = np.asarray(seed, dtype=float)
    val, grad = lam_at(seed)
    gnorm = float(np.linalg.norm(grad))
    if gnorm <= ZERO_TOL:
        raise DegenerateSingularSet("d lambda vanishes at the seed")
    if abs(val) / gnorm > max(step, 1e-6):
        raise SeedNotSingular(f"seed is {abs(val) / gnorm:.3g} away from the singular set")
    p0, ok = _newton(lam_at, seed)
    if not ok or not _inside(p0, window):
        raise SeedNotSingular("projection of the seed onto lambda = 0 failed")

    def tangent(p, ref):
        _, g = lam_at(p)
        t = np.array([-g[1], g[0]]) / np.linalg.norm(g)
        return _orient(t, ref) if ref is not None else t

    t0 = tangent(p0, None)
    t0 = _orient(t0)
    branches = []
    reasons = []
    for sign in (1.0, -1.0):
        pts, tans = [], []
        p, ref, h = p0.copy(), sign * t0, step
        arc = 0.0
        reason = "window"
        while len(pts) < max_points:
            tn = tangent(p, ref)
            q, ok = _newton(lam_at, p + h * tn)
            if not ok or np.linalg.norm(q - p) > 2 * h:
                h *= 0.5
                if h < step * 1e-4:
                    reason = "step-underflow"
                    break
                continue
            if not _inside(q, window):
                break
            arc += float(np.linalg.norm(q - p))
            p, ref = q, tangent(q, tn)
            pts.append(p.copy())
            tans.append(ref.copy())
            h = min(step, 2 * h)
        else:
            reason = "max-points"
        branches.append((pts, tans))
        reasons.append(reason)

    fwd, bwd = branches
    pts = [p for p in reversed(bwd[0])] + [p0] + fwd[0]
    tans = [-t for t in reversed(bwd[1])] + [t0] + fwd[1]
    pts = np.array(pts)
    tans = np.array(tans)
    t = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    t -= t[len(bwd[0])]
    nulls = np.zeros_like(pts)
    start = len(bwd[0])
    order_idx = list(range(start, len(pts))) + list(range(start - 1, -1, -1))
    ref = None
    for i in order_idx:
        if i == start - 1:
            ref = nulls[start]
        f = surface.jets(pts[i], 1)
        _, vec = _kernel(f.d_u().value(), f.d_v().value())
        nulls[i] = _orient(vec, ref)
        ref = nulls[i]
    return SingularCurve(t, pts, tans, nulls, tuple(reasons))


def phi_of_t(curve):
    """Samples of ``det(gamma'(t), eta(t))`` with unit tangent and null vector."""
    return curve.tangents[:, 0] * curve.nulls[:, 1] - curve.tangents[:, 1] * curve.nulls[:, 0]


def phi_derivatives(surface, p=None, order=None):
    """``phi^(j)(0)`` at a singular point, computed from jets."""
    p = np.asarray(surface.base if p is None else p, dtype=float)
    n = min(surface.order if order is None else order, surface.max_order)
    f = surface.jets(p, n + 1)
    fu, fv = f.d_u(), f.d_v()
    lam = det3(fu, fv, normal_field(surface, p, n))
    _, kernel = _kernel(fu.value(), fv.value())
    coeffs = phi_series(lam, extended_null_field(fu, fv, kernel))
    return np.array([math.factorial(j) * c for j, c in enumerate(coeffs)])
