"""Integration of BDE solution curves and the cusp certificate at the singular set."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .errors import AnalysisError
from .jet import Jet2, compose, pad

DELTA_SWITCH = 1e-4
# the lifted field is this small (relative to the coefficients) only next to a folded point
FOLD_STOP = 1e-5


# -- coefficient samplers ------------------------------------------------

class GridSampler:
    """Bicubic splines of p, q, r fitted on a regular grid over the window."""

    def __init__(self, bde, window, res=(121, 121)):
        umin, umax, vmin, vmax = window
        self.window = tuple(float(w) for w in window)
        self.us = np.linspace(umin, umax, res[0])
        self.vs = np.linspace(vmin, vmax, res[1])
        uu, vv = np.meshgrid(self.us, self.vs, indexing="ij")
        p, q, r = bde.values(uu, vv)
        self.grids = (np.asarray(p), np.asarray(q), np.asarray(r))
        if not all(np.all(np.isfinite(g)) for g in self.grids):
            raise AnalysisError("BDE coefficients are not finite on the window")
        self.splines = [RectBivariateSpline(self.us, self.vs, g, kx=3, ky=3) for g in self.grids]
        self.scale = max(float(np.max(np.abs(g))) for g in self.grids) or 1.0

    def coeffs(self, u, v):
        return tuple(float(s.ev(u, v)) for s in self.splines)

    def coeffs_grad(self, u, v):
        vals = self.coeffs(u, v)
        du = tuple(float(s.ev(u, v, dx=1)) for s in self.splines)
        dv = tuple(float(s.ev(u, v, dy=1)) for s in self.splines)
        return vals, du, dv

    def discriminant_grid(self):
        p, q, r = self.grids
        return q * q - p * r


class ExactSampler:
    """Coefficients evaluated from jets at every call (slow, exact)."""

    def __init__(self, bde, window, scale=None):
        self.bde = bde
        self.window = tuple(float(w) for w in window)
        if scale is None:
            uu, vv = np.meshgrid(np.linspace(window[0], window[1], 9),
                                 np.linspace(window[2], window[3], 9), indexing="ij")
            scale = max(float(np.max(np.abs(x))) for x in bde.values(uu, vv))
        self.scale = scale or 1.0

    def coeffs(self, u, v):
        p, q, r = self.bde.jets(np.array([u, v]), 0)
        return float(p.value), float(q.value), float(r.value)

    def coeffs_grad(self, u, v):
        jets = self.bde.jets(np.array([u, v]), 1)
        vals = tuple(float(j.value) for j in jets)
        du = tuple(float(j.coeff(1, 0)) for j in jets)
        dv = tuple(float(j.coeff(0, 1)) for j in jets)
        return vals, du, dv


# -- direction fields ----------------------------------------------------

def root_directions(p, q, r):
    """Unit solution directions of ``p du^2 + 2q du dv + r dv^2 = 0`` where ``q^2 > pr``.

    Computed from the closed-form eigen-decomposition of the symmetric
    matrix ``[[p, q], [q, r]]``, which avoids solving for a slope in a chart.
    Returned with the more horizontal direction first.
    """
    mid, rad = 0.5 * (p + r), math.hypot(0.5 * (p - r), q)
    neg, pos = mid - rad, mid + rad
    if neg >= 0 or pos <= 0:
        return None
    th = 0.5 * math.atan2(2 * q, p - r)
    c, s = math.cos(th), math.sin(th)
    a, b = math.sqrt(-neg), math.sqrt(pos)
    # a e_pos +- b e_neg with e_pos = (c, s), e_neg = (-s, c)
    x1, y1 = a * c - b * s, a * s + b * c
    x2, y2 = a * c + b * s, a * s - b * c
    n1, n2 = math.hypot(x1, y1), math.hypot(x2, y2)
    d1, d2 = np.array([x1 / n1, y1 / n1]), np.array([x2 / n2, y2 / n2])
    if abs(d1[0]) < abs(d2[0]):
        d1, d2 = d2, d1
    return d1, d2


def _closest(dirs, ref):
    best, score = np.full(2, np.nan), -np.inf
    r0, r1 = float(ref[0]), float(ref[1])
    for d in dirs:
        c = d[0] * r0 + d[1] * r1
        if c > score:
            best, score = d, c
        if -c > score:
            best, score = -d, -c
    return best


def lifted_field(sampler, y, chart):
    """Vector field on ``{p + 2q m + r m^2 = 0}`` (chart 'm': m = dv/du; 'n': n = du/dv)."""
    u, v, m = y
    (p, q, r), (pu, qu, ru), (pv, qv, rv) = sampler.coeffs_grad(u, v)
    if chart == "m":
        Fm = 2 * q + 2 * r * m
        Fu = pu + 2 * qu * m + ru * m * m
        Fv = pv + 2 * qv * m + rv * m * m
        return np.array([Fm, m * Fm, -(Fu + m * Fv)])
    Fn = 2 * p * m + 2 * q
    Fu = pu * m * m + 2 * qu * m + ru
    Fv = pv * m * m + 2 * qv * m + rv
    return np.array([m * Fn, Fn, -(m * Fu + Fv)])


def _projected(xi):
    return xi[:2]


# -- integration -----------------------------------------------------------

@dataclass
class SolutionCurve:
    points: np.ndarray
    t: np.ndarray
    family: int
    seed_index: int
    reasons: tuple = ()

    def __len__(self):
        return len(self.points)


def _inside(p, window):
    return window[0] <= p[0] <= window[1] and window[2] <= p[1] <= window[3]


def _clip(p, q, window):
    """Point where the segment p -> q leaves the window."""
    t = 1.0
    d = q - p
    for k, (lo, hi) in enumerate(((window[0], window[1]), (window[2], window[3]))):
        if d[k] > 0 and q[k] > hi:
            t = min(t, (hi - p[k]) / d[k])
        elif d[k] < 0 and q[k] < lo:
            t = min(t, (lo - p[k]) / d[k])
    return p + max(t, 0.0) * d


def _rk4(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _adaptive(f, y, h, tol):
    """One step-doubling RK4 step; returns (y_new, h_used, h_next) or None on underflow."""
    while True:
        full = _rk4(f, y, h)
        half = _rk4(f, _rk4(f, y, h / 2), h / 2)
        err = float(np.max(np.abs(half - full))) / 15.0
        if not np.all(np.isfinite(half)):
            err = np.inf
        if err <= tol:
            grow = 2.0 if err == 0 else min(2.0, 0.9 * (tol / err) ** 0.2)
            return half + (half - full) / 15.0, h, h * max(grow, 1.0)
        h *= max(0.2, 0.9 * (tol / err) ** 0.2) if np.isfinite(err) else 0.25
        if h < 1e-9:
            return None


def _run(sampler, y0, d0, step, max_len, window, tol, max_steps=20000):
    """Integrate from ``y0`` leaving in direction ``d0``; returns points and a reason."""
    scale = sampler.scale
    dsw = DELTA_SWITCH * scale * scale
    pts = [np.array(y0, dtype=float)]
    y = np.array(y0, dtype=float)
    ref = np.array(d0, dtype=float)
    mode, chart, sigma, state = "root", None, 1.0, None
    length, h = 0.0, step
    reason = "max-steps"
    for _ in range(max_steps):
        if mode == "root":
            p, q, r = sampler.coeffs(*y)
            if q * q - p * r < dsw:
                # enter the lift with the slope of the current direction
                chart = "m" if abs(ref[0]) >= abs(ref[1]) else "n"
                slope = ref[1] / ref[0] if chart == "m" else ref[0] / ref[1]
                state = np.array([y[0], y[1], slope])
                xi = lifted_field(sampler, state, chart)
                proj = _projected(xi)
                sigma = 1.0 if np.dot(proj, ref) >= 0 else -1.0
                mode = "lift"
                continue
            direction = ref

            def field_fn(z, direction=direction):
                pp, qq, rr = sampler.coeffs(*z)
                dirs = root_directions(pp, qq, rr)
                if dirs is None:
                    return np.full(2, np.nan)
                return _closest(dirs, direction)
            res = _adaptive(field_fn, y, h, tol)
            if res is None:
                reason = "step-underflow"
                break
            y_new, used, h = res
            h = min(h, step)
            dirs = root_directions(*sampler.coeffs(*y_new))
            if dirs is not None:
                ref = _closest(dirs, (y_new - y) / max(np.linalg.norm(y_new - y), 1e-300))
        else:
            def field_fn(z, chart=chart, sigma=sigma):
                xi = sigma * lifted_field(sampler, z, chart)
                nrm = np.linalg.norm(xi)
                return xi / nrm if nrm > 0 else xi
            xi0 = lifted_field(sampler, state, chart)
            if np.linalg.norm(xi0) < FOLD_STOP * scale:
                reason = "folded-point"
                break
            res = _adaptive(field_fn, state, h, tol)
            if res is None:
                reason = "step-underflow"
                break
            state, used, h = res
            h = min(h, step)
            y_new = state[:2].copy()
            if abs(state[2]) > 2.0:
                # change chart m <-> n = 1/m, keeping the projected orientation
                old = sigma * _projected(lifted_field(sampler, state, chart))
                chart = "n" if chart == "m" else "m"
                state = np.array([state[0], state[1], 1.0 / state[2]])
                new = _projected(lifted_field(sampler, state, chart))
                sigma = 1.0 if np.dot(new, old) >= 0 else -1.0
            p, q, r = sampler.coeffs(*y_new)
            if q * q - p * r > 4 * dsw:
                mode = "root"
                v = sigma * _projected(lifted_field(sampler, state, chart))
                nv = np.linalg.norm(v)
                ref = v / nv if nv > 0 else (y_new - y) / max(np.linalg.norm(y_new - y), 1e-300)
        if not _inside(y_new, window):
            pts.append(_clip(y, y_new, window))
            reason = "window"
            break
        seg = float(np.linalg.norm(y_new - y))
        if length + seg >= max_len:
            frac = (max_len - length) / seg if seg > 0 else 0.0
            pts.append(y + frac * (y_new - y))
            reason = "max-length"
            break
        length += seg
        y = y_new
        pts.append(y.copy())
    return np.array(pts), reason


def integrate_curve(sampler, seed, family, step, max_len, tol=None, seed_index=0):
    p, q, r = sampler.coeffs(*seed)
    dirs = root_directions(p, q, r)
    if dirs is None or q * q - p * r < DELTA_SWITCH * sampler.scale ** 2:
        return None
    d0 = dirs[family]
    window = sampler.window
    tol = tol if tol is not None else 1e-6 * max(window[1] - window[0], window[3] - window[2])
    fwd, r1 = _run(sampler, seed, d0, step, max_len, window, tol)
    bwd, r2 = _run(sampler, seed, -d0, step, max_len, window, tol)
    pts = np.concatenate([bwd[::-1], fwd[1:]])
    t = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    t -= t[len(bwd) - 1]
    return SolutionCurve(pts, t, family, seed_index, (r2, r1))


def integrate_solutions(bde, window, seeds, step=0.01, max_len=2.0, sampler=None, tol=None):
    """Solution curves of both families through every seed with two directions."""
    sampler = sampler or GridSampler(bde, window)
    curves = []
    for i, seed in enumerate(seeds):
        seed = np.asarray(seed, dtype=float)
        if not _inside(seed, sampler.window):
            continue
        for family in (0, 1):
            c = integrate_curve(sampler, seed, family, step, max_len, tol, i)
            if c is not None:
                curves.append(c)
    return curves


def portrait_seeds(sampler, n, straddle=16):
    """Grid seeds with two solution directions, plus seeds just inside ``delta > 0``."""
    from skimage.measure import find_contours

    umin, umax, vmin, vmax = sampler.window
    dsw = DELTA_SWITCH * sampler.scale ** 2
    seeds = []
    if n > 0:
        hu, hv = (umax - umin) / n, (vmax - vmin) / n
        for i in range(n):
            for j in range(n):
                s = (umin + (i + 0.5) * hu, vmin + (j + 0.5) * hv)
                p, q, r = sampler.coeffs(*s)
                if q * q - p * r > 4 * dsw:
                    seeds.append(s)
    delta = sampler.discriminant_grid()
    if straddle and np.min(delta) < 0 < np.max(delta):
        contours = find_contours(delta, 0.0)
        pts = [c for c in contours if len(c) > 1]
        if pts:
            allpts = np.concatenate(pts)
            idx = np.linspace(0, len(allpts) - 1, straddle).astype(int)
            du = sampler.us[1] - sampler.us[0]
            dv = sampler.vs[1] - sampler.vs[0]
            for k in idx:
                i, j = allpts[k]
                u = sampler.us[0] + i * du
                v = sampler.vs[0] + j * dv
                (p, q, r), (pu, qu, ru), (pv, qv, rv) = sampler.coeffs_grad(u, v)
                grad = np.array([2 * q * qu - pu * r - p * ru, 2 * q * qv - pv * r - p * rv])
                g = np.linalg.norm(grad)
                if g == 0:
                    continue
                off = 2.0 * max(du, dv)
                s = np.array([u, v]) + off * grad / g
                if _inside(s, sampler.window):
                    pq, qq, rq = sampler.coeffs(*s)
                    if qq * qq - pq * rq > 4 * dsw:
                        seeds.append(tuple(s))
    return seeds


# -- local solutions as jets and the cusp certificate ------------------------

def _integrate_series(a):
    """Antiderivative in t (first variable) of a univariate jet, zero constant term."""
    n = a.order
    coeffs = [0.0] + [a.coeff(k, 0) / (k + 1) for k in range(n)]
    return Jet2.from_dict({(k, 0): c for k, c in enumerate(coeffs)}, n, (0.0, 0.0))


def solution_jets(bde, point, slope, chart="m", order=6):
    """Taylor series of the lifted integral curve through ``(point, slope)``.

    Returns univariate jets ``(u(t), v(t), slope(t))`` solving
    ``y' = xi(y)`` exactly to the given order by Picard iteration.
    """
    u0, v0 = (float(x) for x in point)
    p, q, r = bde.jets(np.array([u0, v0]), order + 1)
    t0 = (0.0, 0.0)
    U = Jet2.constant(u0, order, t0)
    V = Jet2.constant(v0, order, t0)
    S = Jet2.constant(float(slope), order, t0)
    pu, qu, ru = (x.d_u() for x in (p, q, r))
    pv, qv, rv = (x.d_v() for x in (p, q, r))
    for _ in range(order + 1):
        def at(j):
            return pad(compose(j.truncate(order), U.truncate(order), V.truncate(order)), order)
        P, Q, R = at(p), at(q), at(r)
        Pu, Qu, Ru, Pv, Qv, Rv = (at(x) for x in (pu, qu, ru, pv, qv, rv))
        m = S
        if chart == "m":
            Fm = (Q + R * m) * 2.0
            Fu = Pu + Qu * m * 2.0 + Ru * m * m
            Fv = Pv + Qv * m * 2.0 + Rv * m * m
            xi = (Fm, m * Fm, -(Fu + m * Fv))
        else:
            Fn = (P * m + Q) * 2.0
            Fu = Pu * m * m + Qu * m * 2.0 + Ru
            Fv = Pv * m * m + Qv * m * 2.0 + Rv
            xi = (m * Fn, Fn, -(m * Fu + Fv))
        U = _integrate_series(xi[0]) + u0
        V = _integrate_series(xi[1]) + v0
        S = _integrate_series(xi[2]) + float(slope)
    return U, V, S


def _derivs(vec_jet):
    n = vec_jet.order
    return np.array([math.factorial(k) * np.array([c.coeff(k, 0) for c in vec_jet])
                     for k in range(n + 1)])


@dataclass
class CuspCertificate:
    ok: bool
    diagnostics: dict = field(default_factory=dict)

    def __bool__(self):
        return self.ok


def image_cusp_test(surface, U, V, rel=1e-6):
    """3/2-cusp test for the image of the domain curve ``t -> (U(t), V(t))`` at t = 0."""
    u0, v0 = float(U.value), float(V.value)
    f = surface.jets(np.array([u0, v0]), U.order)
    gh = f.compose(U, V)
    d = _derivs(gh)
    n1, n2 = np.linalg.norm(d[1]), np.linalg.norm(d[2])
    n3 = np.linalg.norm(d[3]) if len(d) > 3 else 0.0
    c23 = np.linalg.norm(np.cross(d[2], d[3])) if len(d) > 3 else 0.0
    vanishing = n1 < rel * n2
    nondeg = c23 > rel * max(n2 * n3, 1e-300) and n2 > rel * (1.0 + n3)
    norms = [float(np.linalg.norm(x)) for x in d]
    scale = max(norms[1:]) if len(norms) > 1 else 0.0
    first = next((k for k in range(1, len(d)) if norms[k] > 1e-9 * (1 + scale)), None)
    second = None
    if first is not None:
        for k in range(first + 1, len(d)):
            if np.linalg.norm(np.cross(d[first], d[k])) > 1e-9 * (1 + norms[first] * norms[k]):
                second = k
                break
    diag = {
        "point": (u0, v0),
        "|g'|": float(n1), "|g''|": float(n2), "|g'''|": float(n3),
        "|g'' x g'''|": float(c23),
        "cusp_orders": (first, second),
        "first_derivative_vanishes": bool(vanishing),
        "nondegenerate": bool(nondeg),
    }
    return CuspCertificate(bool(vanishing and nondeg), diag)


def cusp_certificate(surface, bde, point, direction=None, order=6):
    """Certificate for the solution of ``bde`` through ``point`` on the singular set.

    On the discriminant the double root is used and the solution is the
    projection of the lifted integral curve; elsewhere each root direction
    is tried (or the one closest to ``direction``) and the first success is
    returned.
    """
    u0, v0 = (float(x) for x in point)
    p, q, r = (float(x.value) for x in bde.jets(np.array([u0, v0]), 0))
    scale = max(abs(p), abs(q), abs(r), 1e-300)
    delta = q * q - p * r
    slopes = []
    if abs(delta) <= 1e-10 * scale * scale:
        if abs(r) >= abs(p):
            slopes.append((-q / r, "m"))
        else:
            slopes.append((-q / p, "n"))
    else:
        dirs = root_directions(p, q, r)
        if dirs is None:
            return CuspCertificate(False, {"point": (u0, v0), "reason": "no real directions"})
        if direction is not None:
            dirs = [_closest(dirs, np.asarray(direction, dtype=float))]
        for d in dirs:
            if abs(d[0]) >= abs(d[1]):
                slopes.append((d[1] / d[0], "m"))
            else:
                slopes.append((d[0] / d[1], "n"))
    results = []
    for slope, chart in slopes:
        U, V, _ = solution_jets(bde, (u0, v0), slope, chart, order)
        cert = image_cusp_test(surface, U, V)
        cert.diagnostics["slope"] = (float(slope), chart)
        cert.diagnostics["domain_velocity"] = (float(U.coeff(1, 0)), float(V.coeff(1, 0)))
        results.append(cert)
        if cert.ok:
            return cert
    return results[0]
