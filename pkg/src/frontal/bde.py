"""Binary differential equations ``p du^2 + 2q du dv + r dv^2 = 0``.

Coefficients are produced lazily as jets at any (batched) base point, so
the same object serves the folded-singularity analysis at the origin and
the curve integrator on a grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import normal_field
from .errors import (AnalysisError, LimitingNormalCurvatureZero, NotFoldedType, WrongInputForm,
                     WrongKind)
from .expr import eval_jet, parse_expr
from .jet import Jet2, compose, divide_exact_by_v, dot, recenter

FOLD_EPS = 1e-9
NEAR_AXIS = 1e-4
KINDS = ("lc", "as", "ch", "custom")
LC_VARIANTS = ("standard", "swapped", "printed")


# -- fundamental forms ---------------------------------------------------

@dataclass
class FundamentalForms:
    """First form and second form taken against the non-normalized normal."""

    E: Jet2
    F: Jet2
    G: Jet2
    L: Jet2
    M: Jet2
    N: Jet2
    nu_sq: Jet2

    @property
    def W(self):
        return self.E * self.G - self.F * self.F

    def form_curvatures(self):
        """``(LN - M^2)/W`` and ``(EN - 2FM + GL)/(2W)`` with the unscaled L, M, N."""
        W = self.W
        K = (self.L * self.N - self.M * self.M) / W
        H = (self.E * self.N - self.F * self.M * 2.0 + self.G * self.L) / (W * 2.0)
        return K, H

    def curvatures(self):
        """Gaussian and mean curvature (sign of H follows the given normal)."""
        K2, H2 = self.form_curvatures()
        return K2 / self.nu_sq, H2 / self.nu_sq.sqrt()


def fundamental_forms(surface, p, order=2):
    f = surface.jets(p, order + 2)
    fu, fv = f.d_u(), f.d_v()
    fuu, fuv, fvv = fu.d_u(), fu.d_v(), fv.d_v()
    nu = normal_field(surface, p, order)
    n = min(order, nu.order)
    nu = nu.truncate(n)
    fu, fv = fu.truncate(n), fv.truncate(n)
    return FundamentalForms(dot(fu, fu), dot(fu, fv), dot(fv, fv),
                            dot(fuu, nu), dot(fuv, nu), dot(fvv, nu), dot(nu, nu))


def tensor_coefficients(forms, kind, lc_variant="standard"):
    """``(p, q, r)`` of the lines-of-curvature, asymptotic or characteristic tensor."""
    E, F, G, L, M, N = forms.E, forms.F, forms.G, forms.L, forms.M, forms.N
    if kind == "as":
        return L, M, N
    if kind == "lc":
        mid = (E * N - G * L) * 0.5
        if lc_variant == "standard":
            return E * M - F * L, mid, F * N - G * M
        if lc_variant == "swapped":
            return F * N - G * M, mid, E * M - F * L
        if lc_variant == "printed":
            return F * N - G * M, mid, E * N - F * L
        raise ValueError(f"unknown lines-of-curvature variant {lc_variant!r}")
    if kind == "ch":
        p = L * (G * L - E * N) + M * (E * M - F * L) * 2.0
        q = M * (G * L + E * N) - F * L * N * 2.0
        r = N * (E * N - G * L) + M * (G * M - F * N) * 2.0
        return p, q, r
    raise ValueError(f"unknown tensor kind {kind!r}")


# -- the BDE object --------------------------------------------------------

class BDE:
    """``p du^2 + 2 q du dv + r dv^2`` with coefficients given as jets.

    ``coeff_fn(base, order)`` returns the jets ``(p, q, r)``.
    """

    def __init__(self, coeff_fn, kind="custom", reduced=False, surface=None, label=None):
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        self.coeff_fn = coeff_fn
        self.kind = kind
        self.reduced = reduced
        self.surface = surface
        self.label = label or kind

    def jets(self, base, order=2):
        return self.coeff_fn(np.asarray(base, dtype=float), order)

    def values(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        p, q, r = self.jets(np.stack([u, v], axis=-1), 0)
        return p.value, q.value, r.value

    def discriminant(self, u, v=None):
        if v is None:
            u, v = u
        p, q, r = self.values(u, v)
        return q * q - p * r

    @classmethod
    def from_expressions(cls, p, q, r, kind="custom", label=None):
        asts = [parse_expr(e) if isinstance(e, str) else e for e in (p, q, r)]

        def coeffs(base, order):
            return tuple(eval_jet(a, base, order) for a in asts)
        return cls(coeffs, kind, label=label)

    @classmethod
    def from_surface(cls, surface, kind, reduced=False, lc_variant="standard"):
        if kind not in ("lc", "as", "ch"):
            raise ValueError("surface tensors are lc, as or ch")

        def coeffs(base, order):
            forms = fundamental_forms(surface, base, order)
            return tensor_coefficients(forms, kind, lc_variant)
        bde = cls(coeffs, kind, surface=surface, label=kind)
        return reduce_by_identifier(bde, surface) if reduced else bde


def model_bde(l):
    """``(v + l u^2/2) du^2 + dv^2``."""
    return BDE.from_expressions(f"v + ({float(l)!r})*u^2/2", "0", "1",
                                label=f"model(l={float(l)!r})")


def _divide_by_v_anywhere(jets_at, base, order):
    """Jets of ``X / v`` at batched ``base`` for X vanishing on ``{v = 0}``."""
    base = np.asarray(base, dtype=float)
    near = np.abs(base[..., 1]) < NEAR_AXIS
    out = None
    if np.any(~near):
        far_base = base[~near]
        vinv = Jet2.variable("v", order, far_base).reciprocal()
        far = [x * vinv for x in jets_at(far_base, order)]
    if np.any(near):
        axis = base[near].copy()
        axis[:, 1] = 0.0
        raw = jets_at(axis, order + 1)
        close = [recenter(divide_exact_by_v(x), base[near]) for x in raw]
    parts = []
    for k in range(3):
        coeffs = np.zeros(base.shape[:-1] + (Jet2.constant(0.0, order, (0, 0)).coeffs.shape[-1],))
        if np.any(~near):
            coeffs[~near] = far[k].coeffs
        if np.any(near):
            coeffs[near] = close[k].coeffs
        parts.append(Jet2(coeffs, order, base))
    out = tuple(parts)
    return out


def reduce_by_identifier(bde, surface=None):
    """Divide lc and ch tensors by ``v`` (singular set ``{v = 0}``); as is unchanged.

    Divisibility is checked eagerly at the surface's base point.
    """
    if bde.reduced:
        return bde
    if bde.kind == "as":
        return BDE(bde.coeff_fn, bde.kind, True, bde.surface, bde.label)
    if bde.kind not in ("lc", "ch"):
        raise WrongInputForm("only lc and ch tensors carry the identifier factor")
    surface = surface or bde.surface
    u0 = surface.base[0] if surface is not None else 0.0
    for x in bde.jets(np.array([[u0, 0.0]]), 3):
        divide_exact_by_v(x)
    fn = bde.coeff_fn

    def coeffs(base, order):
        base = np.asarray(base, dtype=float)
        flat = base.reshape(-1, 2)
        res = _divide_by_v_anywhere(fn, flat, order)
        return tuple(Jet2(x.coeffs.reshape(base.shape[:-1] + x.coeffs.shape[-1:]), order, base)
                     for x in res)
    return BDE(coeffs, bde.kind, True, bde.surface, bde.label + "/v")


def discriminant(bde, point):
    return float(bde.discriminant(point[0], point[1]))


# -- folded singularities --------------------------------------------------

def _at_origin(jet):
    return Jet2(jet.coeffs, jet.order, (0.0, 0.0))


def normalized_pair(bde_or_jets, base=(0.0, 0.0), order=3):
    """``(p/r, q/r)`` at ``base`` with ``p01 > 0`` arranged by ``v -> -v``.

    Returns the pair as jets re-based at the origin and the flip flag.
    """
    if isinstance(bde_or_jets, BDE):
        p, q, r = bde_or_jets.jets(base, order)
    else:
        p, q, r = bde_or_jets
    p, q, r = (_at_origin(x) for x in (p, q, r))
    scale = max(float(np.max(np.abs(x.coeffs[: 3]))) for x in (p, q, r))
    if abs(r.value) <= 1e-8 * (1.0 + scale):
        raise NotFoldedType("r vanishes at the point")
    rinv = r.reciprocal()
    pt, qt = p * rinv, q * rinv
    tol = 1e-8 * (1.0 + max(abs(pt.coeff(0, 1)), abs(pt.coeff(1, 0))))
    if abs(pt.value) > tol or abs(pt.coeff(1, 0)) > tol:
        raise NotFoldedType(f"p/r has 1-jet {pt.value:.3g} + {pt.coeff(1, 0):.3g} u + "
                            f"{pt.coeff(0, 1):.3g} v; need p = p_u = 0")
    if abs(pt.coeff(0, 1)) <= tol:
        raise NotFoldedType("p_v vanishes at the point")
    flipped = pt.coeff(0, 1) < 0
    if flipped:
        u = Jet2.variable("u", pt.order, (0.0, 0.0))
        mv = -Jet2.variable("v", pt.order, (0.0, 0.0))
        pt = compose(pt, u, mv)
        qt = -compose(qt, u, mv)
    return pt, qt, flipped


def coefficient_A(bde_or_jets, base=(0.0, 0.0)):
    """``(p20 - 2 q10^2 - p01 q10) / p01^2`` of the r-normalized tensor."""
    pt, qt, _ = normalized_pair(bde_or_jets, base)
    p01 = pt.coeff(0, 1)
    p20 = pt.partial(2, 0)
    q10 = qt.coeff(1, 0)
    return float((p20 - 2 * q10 ** 2 - p01 * q10) / p01 ** 2)


def pull_back(p, q, r, U, V):
    """Coefficients of the tensor after substituting ``u = U(a, b)``, ``v = V(a, b)``."""
    P0, Q0, R0 = (compose(x, U, V) for x in (p, q, r))
    uA, uB, vA, vB = U.d_u(), U.d_v(), V.d_u(), V.d_v()
    n = uA.order
    P0, Q0, R0 = (x.truncate(n) for x in (P0, Q0, R0))
    P = P0 * uA * uA + Q0 * uA * vA * 2.0 + R0 * vA * vA
    Q = P0 * uA * uB + Q0 * (uA * vB + uB * vA) + R0 * vA * vB
    R = P0 * uB * uB + Q0 * uB * vB * 2.0 + R0 * vB * vB
    return P, Q, R


@dataclass
class FactResult:
    A: float
    stage1: tuple
    stage2: tuple


def fact_pipeline(bde_or_jets, base=(0.0, 0.0), order=4):
    """Reduce an equation with ``p = p_u = 0 != p_v``, ``r != 0`` to ``(V + A U^2/2) dU^2 + dV^2``.

    Two polynomial coordinate changes are applied by jet composition and
    the tensor is divided by its dV^2 coefficient after each.  ``A`` is read
    off the reduced 2-jet as ``2 [U^2] / [V]``.
    """
    if isinstance(bde_or_jets, BDE):
        jets = bde_or_jets.jets(base, order)
    else:
        jets = bde_or_jets
    pt, qt, _ = normalized_pair(jets, base, order)
    n = pt.order
    one = Jet2.constant(1.0, n, (0.0, 0.0))
    p01 = pt.coeff(0, 1)
    q10, q01 = qt.coeff(1, 0), qt.coeff(0, 1)
    sq = math.sqrt(p01)
    a = Jet2.variable("u", n, (0.0, 0.0))
    b = Jet2.variable("v", n, (0.0, 0.0))
    U = a * (-1.0 / sq)
    V = b - a * a * (q10 / (2 * p01)) + a * b * (q01 / sq)
    P, Q, R = pull_back(pt, qt, one, U, V)
    Rinv = R.reciprocal()
    p1, q1 = P * Rinv, Q * Rinv
    stage1 = (p1, q1)

    m = p1.order
    pb11, pb02 = p1.coeff(1, 1), p1.partial(0, 2)
    qb20, qb11, qb02 = q1.partial(2, 0), q1.coeff(1, 1), q1.partial(0, 2)
    x20, x11 = -pb11 / 2, -pb02 / 4
    y30, y21, y12 = -qb20, pb02 / 4 - qb11, -qb02
    a = Jet2.variable("u", m, (0.0, 0.0))
    b = Jet2.variable("v", m, (0.0, 0.0))
    U2 = a + a * a * (x20 / 2) + a * b * x11
    V2 = b + a * a * a * (y30 / 6) + a * a * b * (y21 / 2) + a * b * b * (y12 / 2)
    one = Jet2.constant(1.0, m, (0.0, 0.0))
    P, Q, R = pull_back(p1, q1, one, U2, V2)
    Rinv = R.reciprocal()
    p2, q2 = P * Rinv, Q * Rinv
    A = 2 * p2.coeff(2, 0) / p2.coeff(0, 1)
    return FactResult(float(A), stage1, (p2, q2))


@dataclass
class FoldedClass:
    variant: str
    l_value: float

    def __str__(self):
        return f"{self.variant} (l={self.l_value:.17g})"


def classify_folded(l, eps=FOLD_EPS):
    l = float(l)
    if l < -eps:
        return FoldedClass("folded saddle", l)
    if eps < l < 0.125 - eps:
        return FoldedClass("folded node", l)
    if l > 0.125 + eps:
        return FoldedClass("folded focus", l)
    return FoldedClass("boundary", l)


# -- swallowtail foliations ------------------------------------------------

@dataclass
class FoliationReport:
    A_as: float
    A_ch: float
    class_as: FoldedClass
    class_ch: FoldedClass
    l_printed: float
    l_corrected: float
    class_as_route2: FoldedClass
    class_ch_route2: FoldedClass
    sign_report: dict = field(default_factory=dict)


def classify_swallowtail_foliations(surface, inv=None, kappa_tol=1e-9):
    """Folded types of the reduced asymptotic and characteristic equations at a swallowtail.

    Route 1 reads A off the u-axis presentation; route 2 uses the invariants.
    ``sign_report`` records the measured ratio between A and
    ``mu_c tau_s / (4 kappa_nu)`` alongside the corrected closed form
    ``A_as = 4 kappa_nu / (mu_c tau_s^2) = -A_ch``.
    """
    from .normal_form import extract_coeffs, invariants_from_coeffs, invariants_general, \
        to_u_axis_form

    if not surface.meta.get("normal_form") or surface.meta.get("k") != 2:
        raise WrongKind("expected a second-kind normal form")
    if inv is None:
        try:
            inv = invariants_from_coeffs(extract_coeffs(surface.gen))
        except AnalysisError:
            inv = invariants_general(surface)
    kn, mu, tau = inv.as_tuple()
    if abs(kn) <= kappa_tol * (1.0 + abs(mu) + abs(tau)):
        raise LimitingNormalCurvatureZero("kappa_nu vanishes; r_as(0) = 0")
    ua = to_u_axis_form(surface)
    w_as = BDE.from_surface(ua, "as", reduced=True)
    w_ch = BDE.from_surface(ua, "ch", reduced=True)
    A_as = coefficient_A(w_as)
    A_ch = coefficient_A(w_ch)
    l_printed = mu * tau / (4 * kn)
    if mu == 0:
        l_corr = math.inf if kn > 0 else -math.inf
    else:
        l_corr = 4 * kn / (mu * tau ** 2)
    report = {
        "l_printed": l_printed,
        "ratio_as": A_as / l_printed if l_printed else math.nan,
        "ratio_ch": A_ch / l_printed if l_printed else math.nan,
        "printed_ratio_as": -1.0,
        "printed_ratio_ch": 1.0,
        "l_corrected": l_corr,
        "corrected_residual_as": A_as - l_corr,
        "corrected_residual_ch": A_ch + l_corr,
        "A_ch_plus_A_as": A_ch + A_as,
    }
    return FoliationReport(A_as, A_ch, classify_folded(A_as), classify_folded(A_ch),
                           l_printed, l_corr, classify_folded(l_corr), classify_folded(-l_corr),
                           report)


def format_sign_report(rep):
    r = rep.sign_report
    return "\n".join([
        f"A(as) = {rep.A_as:.17g}",
        f"A(ch) = {rep.A_ch:.17g}",
        f"mu_c*tau_s/(4*kappa_nu) = {r['l_printed']:.17g}",
        f"A(as) / (mu_c*tau_s/(4*kappa_nu)) = {r['ratio_as']:.17g} (printed relation predicts -1)",
        f"A(ch) / (mu_c*tau_s/(4*kappa_nu)) = {r['ratio_ch']:.17g} (printed relation predicts +1)",
        f"4*kappa_nu/(mu_c*tau_s^2) = {r['l_corrected']:.17g}",
        f"A(as) - 4*kappa_nu/(mu_c*tau_s^2) = {r['corrected_residual_as']:.3e}",
        f"A(ch) + A(as) = {r['A_ch_plus_A_as']:.3e}",
    ])
