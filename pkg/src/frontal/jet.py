"""Truncated Taylor arithmetic in two variables.

A :class:`Jet2` of order ``N`` at a base point ``(u0, v0)`` stores the
coefficients ``c[i][j] = d^(i+j)F / du^i dv^j (base) / (i! j!)`` for
``i + j <= N``.  Coefficients are kept flat in graded order, so truncating
to a lower order is a prefix slice.  Every jet may carry a leading batch
shape: ``coeffs.shape == batch + (T,)`` and ``base.shape == batch + (2,)``.
Batched jets evaluate one expression at many base points in one pass.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import (
    DivisionByNonUnit,
    DomainError,
    JetMismatch,
    NotDivisible,
    OrderExceeded,
)

MAX_ORDER = 12
DEFAULT_ORDER = 8
DIVISIBILITY_TOL = 1e-9
_BASE_TOL = 1e-9


def n_coeffs(order):
    return (order + 1) * (order + 2) // 2


@lru_cache(maxsize=None)
def _layout(order):
    monos = [(i, d - i) for d in range(order + 1) for i in range(d, -1, -1)]
    index = {m: k for k, m in enumerate(monos)}
    return tuple(monos), index


@lru_cache(maxsize=None)
def _mul_plan(order):
    monos, index = _layout(order)
    triples = []
    for ka, (ia, ja) in enumerate(monos):
        for kb, (ib, jb) in enumerate(monos):
            if ia + ja + ib + jb <= order:
                triples.append((index[(ia + ib, ja + jb)], ka, kb))
    triples.sort()
    io = np.array([t[0] for t in triples])
    ia = np.array([t[1] for t in triples])
    ib = np.array([t[2] for t in triples])
    starts = np.searchsorted(io, np.arange(len(monos)))
    return ia, ib, starts


@lru_cache(maxsize=None)
def _deriv_plan(order, var):
    monos, index = _layout(order)
    _, low = _layout(order - 1)
    src, fac = [], []
    for (i, j) in _layout(order - 1)[0]:
        if var == 0:
            src.append(index[(i + 1, j)])
            fac.append(i + 1)
        else:
            src.append(index[(i, j + 1)])
            fac.append(j + 1)
    return np.array(src), np.array(fac, dtype=float)


@lru_cache(maxsize=None)
def _divv_plan(order):
    monos, index = _layout(order)
    src = [index[(i, j + 1)] for (i, j) in _layout(order - 1)[0]]
    pure_u = [index[(i, 0)] for i in range(order + 1)]
    return np.array(src), np.array(pure_u)


def _check_order(order):
    if not 0 <= order <= MAX_ORDER:
        raise OrderExceeded(f"jet order {order} outside [0, {MAX_ORDER}]")


class Jet2:
    """Truncated bivariate Taylor expansion (optionally batched)."""

    __slots__ = ("coeffs", "order", "base")
    __array_priority__ = 1000

    def __init__(self, coeffs, order, base):
        _check_order(order)
        coeffs = np.asarray(coeffs, dtype=float)
        base = np.asarray(base, dtype=float)
        if coeffs.shape[-1] != n_coeffs(order):
            raise JetMismatch(
                f"order {order} needs {n_coeffs(order)} coefficients, got {coeffs.shape[-1]}"
            )
        if base.shape[-1] != 2:
            raise JetMismatch("base must be a point (u0, v0)")
        if base.shape[:-1] != coeffs.shape[:-1]:
            base = np.broadcast_to(base, coeffs.shape[:-1] + (2,))
        self.coeffs = coeffs
        self.order = order
        self.base = base

    # -- construction -------------------------------------------------
    @classmethod
    def constant(cls, value, order, base):
        base = np.asarray(base, dtype=float)
        value = np.asarray(value, dtype=float)
        batch = np.broadcast_shapes(value.shape, base.shape[:-1])
        c = np.zeros(batch + (n_coeffs(order),))
        c[..., 0] = value
        return cls(c, order, np.broadcast_to(base, batch + (2,)))

    @classmethod
    def variable(cls, name, order, base):
        base = np.asarray(base, dtype=float)
        k = {"u": 0, "v": 1}[name]
        c = np.zeros(base.shape[:-1] + (n_coeffs(order),))
        c[..., 0] = base[..., k]
        if order >= 1:
            c[..., 1 + k] = 1.0
        return cls(c, order, base)

    @classmethod
    def from_table(cls, table, base=(0.0, 0.0)):
        """Build from a square array ``table[i][j]`` (entries with i+j > N ignored)."""
        table = np.asarray(table, dtype=float)
        order = table.shape[-1] - 1
        monos, _ = _layout(order)
        c = np.stack([table[..., i, j] for (i, j) in monos], axis=-1)
        return cls(c, order, base)

    @classmethod
    def from_dict(cls, terms, order, base=(0.0, 0.0)):
        """``terms`` maps ``(i, j)`` to the coefficient of ``du^i dv^j``."""
        _, index = _layout(order)
        c = np.zeros(n_coeffs(order))
        for (i, j), val in terms.items():
            if i + j <= order:
                c[index[(i, j)]] += val
        return cls(c, order, base)

    # -- access -------------------------------------------------------
    @property
    def batch_shape(self):
        return self.coeffs.shape[:-1]

    @property
    def value(self):
        return self.coeffs[..., 0]

    def coeff(self, i, j):
        if i + j > self.order:
            raise OrderExceeded(f"c[{i}][{j}] needs order {i + j}, jet has {self.order}")
        return self.coeffs[..., _layout(self.order)[1][(i, j)]]

    def partial(self, i, j):
        """``d^(i+j)F / du^i dv^j`` at the base point."""
        return math.factorial(i) * math.factorial(j) * self.coeff(i, j)

    def gradient(self):
        return np.stack([self.coeff(1, 0), self.coeff(0, 1)], axis=-1)

    def table(self):
        out = np.zeros(self.batch_shape + (self.order + 1, self.order + 1))
        for k, (i, j) in enumerate(_layout(self.order)[0]):
            out[..., i, j] = self.coeffs[..., k]
        return out

    def terms(self, tol=0.0):
        """Dict ``{(i, j): c}`` of the (unbatched) nonzero coefficients."""
        monos, _ = _layout(self.order)
        return {m: float(c) for m, c in zip(monos, self.coeffs) if abs(c) > tol}

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Jet2(self.coeffs[idx + (Ellipsis,)][..., :], self.order,
                    self.base[idx + (Ellipsis,)])

    def __repr__(self):
        if self.batch_shape:
            return f"Jet2(order={self.order}, batch={self.batch_shape})"
        return f"Jet2(order={self.order}, base={tuple(self.base)}, terms={self.terms(1e-15)})"

    def max_abs(self):
        return np.max(np.abs(self.coeffs), axis=-1)

    # -- structure ----------------------------------------------------
    def truncate(self, order):
        if order > self.order:
            raise OrderExceeded(f"cannot raise jet order {self.order} to {order}")
        return Jet2(self.coeffs[..., : n_coeffs(order)], order, self.base)

    def _compatible(self, other):
        if self.order != other.order:
            raise JetMismatch(f"jet orders differ: {self.order} vs {other.order}")
        if self.base.shape != other.base.shape or not np.allclose(
            self.base, other.base, rtol=0, atol=_BASE_TOL
        ):
            raise JetMismatch("jets are based at different points")

    def _wrap_scalar(self, other):
        other = np.asarray(other, dtype=float)
        if other.ndim and other.shape != self.batch_shape:
            other = np.broadcast_to(other, self.batch_shape)
        return other

    # -- arithmetic ---------------------------------------------------
    def __neg__(self):
        return Jet2(-self.coeffs, self.order, self.base)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Jet2):
            self._compatible(other)
            return Jet2(self.coeffs + other.coeffs, self.order, self.base)
        c = self.coeffs.copy()
        c[..., 0] += self._wrap_scalar(other)
        return Jet2(c, self.order, self.base)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet2):
            self._compatible(other)
            ia, ib, starts = _mul_plan(self.order)
            prod = self.coeffs[..., ia] * other.coeffs[..., ib]
            return Jet2(np.add.reduceat(prod, starts, axis=-1), self.order, self.base)
        s = self._wrap_scalar(other)
        return Jet2(self.coeffs * s[..., None] if s.ndim else self.coeffs * s,
                    self.order, self.base)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet2):
            return self * other.reciprocal()
        s = self._wrap_scalar(other)
        return Jet2(self.coeffs / (s[..., None] if s.ndim else s), self.order, self.base)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if int(n) != n or n < 0:
            raise DomainError("jets support only non-negative integer powers")
        n = int(n)
        result = Jet2.constant(1.0, self.order, self.base)
        factor = self
        while n:
            if n & 1:
                result = result * factor
            n >>= 1
            if n:
                factor = factor * factor
        return result

    # -- calculus -----------------------------------------------------
    def d(self, var):
        """Partial derivative jet; ``var`` is 'u' or 'v'.  Order drops by one."""
        if self.order == 0:
            raise OrderExceeded("cannot differentiate an order-0 jet")
        k = {"u": 0, "v": 1}[var]
        src, fac = _deriv_plan(self.order, k)
        return Jet2(self.coeffs[..., src] * fac, self.order - 1, self.base)

    def d_u(self):
        return self.d("u")

    def d_v(self):
        return self.d("v")

    def _apply_series(self, taylor):
        """Evaluate ``sum_k taylor[k] * (self - self.value)^k`` by Horner."""
        x = self - self.value
        result = Jet2.constant(taylor[self.order], self.order, self.base)
        for k in range(self.order - 1, -1, -1):
            result = result * x + taylor[k]
        return result

    def reciprocal(self, tol=1e-300):
        a0 = self.value
        if np.any(np.abs(a0) <= tol):
            raise DivisionByNonUnit("division by a jet whose constant term vanishes")
        taylor = [(-1.0) ** k / a0 ** (k + 1) for k in range(self.order + 1)]
        return self._apply_series(taylor)

    def sqrt(self):
        a0 = self.value
        if np.any(a0 <= 0):
            raise DomainError("sqrt of a jet with non-positive constant term")
        taylor = []
        binom = 1.0
        for k in range(self.order + 1):
            taylor.append(binom * a0 ** (0.5 - k))
            binom *= (0.5 - k) / (k + 1)
        return self._apply_series(taylor)

    def exp(self):
        e = np.exp(self.value)
        return self._apply_series([e / math.factorial(k) for k in range(self.order + 1)])

    def sin(self):
        s, c = np.sin(self.value), np.cos(self.value)
        cyc = [s, c, -s, -c]
        return self._apply_series([cyc[k % 4] / math.factorial(k) for k in range(self.order + 1)])

    def cos(self):
        s, c = np.sin(self.value), np.cos(self.value)
        cyc = [c, -s, -c, s]
        return self._apply_series([cyc[k % 4] / math.factorial(k) for k in range(self.order + 1)])

    def evaluate(self, du, dv):
        """Value of the truncated polynomial at ``base + (du, dv)``."""
        du = np.asarray(du, dtype=float)
        dv = np.asarray(dv, dtype=float)
        total = 0.0
        for k, (i, j) in enumerate(_layout(self.order)[0]):
            total = total + self.coeffs[..., k] * du ** i * dv ** j
        return total


def divide_exact_by_v(a, tol=DIVISIBILITY_TOL):
    """Exact quotient ``a / (v - v0)``; the result has order ``N - 1``.

    Raises :class:`NotDivisible` when some pure-``u`` coefficient ``c[i][0]``
    exceeds ``tol * (1 + max|c|)``.
    """
    if a.order == 0:
        raise OrderExceeded("cannot divide an order-0 jet by v")
    src, pure_u = _divv_plan(a.order)
    residual = np.max(np.abs(a.coeffs[..., pure_u]), axis=-1)
    bound = tol * (1.0 + a.max_abs())
    if np.any(residual > bound):
        raise NotDivisible(
            f"jet is not divisible by v (pure-u residual {np.max(residual):.3e})"
        )
    return Jet2(a.coeffs[..., src], a.order - 1, a.base)


def v_residual(a):
    """Largest pure-``u`` coefficient, relative to the jet's scale."""
    _, pure_u = _divv_plan(a.order)
    return np.max(np.abs(a.coeffs[..., pure_u]), axis=-1) / (1.0 + a.max_abs())


def _powers(x, n):
    out = [Jet2.constant(1.0, x.order, x.base), x]
    for _ in range(2, n + 1):
        out.append(out[-1] * x)
    return out[: n + 1]


def _substitute(outer, dx, dy):
    """``sum c_ij dx^i dy^j`` where dx, dy are jets without constant term."""
    order = min(outer.order, dx.order)
    dx = dx.truncate(order)
    dy = dy.truncate(order)
    xp = _powers(dx, order)
    yp = _powers(dy, order)
    monos, _ = _layout(outer.order)
    result = Jet2.constant(0.0, order, dx.base)
    batch = dx.batch_shape
    for k, (i, j) in enumerate(monos):
        if i + j > order:
            break
        c = outer.coeffs[..., k]
        if not np.any(c):
            continue
        if batch and np.ndim(c) == 0:
            c = np.full(batch, float(c))
        result = result + (xp[i] * yp[j]) * c
    return result


def compose(outer, inner_u, inner_v):
    """Jet of ``F(U(u, v), V(u, v))``.

    The inner jets must share order and base, and their constant terms must
    equal the outer jet's base point.  The result lives at the inner base
    and has order ``min(outer.order, inner.order)``.
    """
    inner_u._compatible(inner_v)
    target = np.stack([inner_u.value, inner_v.value], axis=-1)
    base = np.broadcast_to(outer.base, target.shape)
    if not np.allclose(target, base, rtol=0, atol=_BASE_TOL * (1 + np.max(np.abs(base)))):
        raise JetMismatch("inner jets do not map the new base to the outer base point")
    dx = inner_u - inner_u.value
    dy = inner_v - inner_v.value
    return _substitute(outer, dx, dy)


def recenter(a, new_base):
    """Re-expand the truncated polynomial of ``a`` about ``new_base``.

    Exact for polynomials of degree <= order; otherwise the error is of the
    size of the dropped Taylor terms at the shift distance.
    """
    new_base = np.asarray(new_base, dtype=float)
    new_base = np.broadcast_to(new_base, a.base.shape)
    shift = new_base - a.base
    x = Jet2.variable("u", a.order, new_base) - new_base[..., 0] + shift[..., 0]
    y = Jet2.variable("v", a.order, new_base) - new_base[..., 1] + shift[..., 1]
    monos, _ = _layout(a.order)
    xp = _powers(x, a.order)
    yp = _powers(y, a.order)
    result = Jet2.constant(0.0, a.order, new_base)
    for k, (i, j) in enumerate(monos):
        result = result + (xp[i] * yp[j]) * a.coeffs[..., k]
    return result


def pad(a, order):
    """Raise the order of ``a`` by appending zero coefficients."""
    if order < a.order:
        return a.truncate(order)
    extra = np.zeros(a.batch_shape + (n_coeffs(order) - n_coeffs(a.order),))
    return Jet2(np.concatenate([a.coeffs, extra], axis=-1), order, a.base)


def align(*jets):
    """Truncate jets to their common (lowest) order."""
    order = min(j.order for j in jets)
    return [j.truncate(order) for j in jets]


class JetVec3:
    """Three jets sharing order and base: a vector-valued map germ."""

    __slots__ = ("x", "y", "z")

    def __init__(self, x, y, z):
        x, y, z = align(x, y, z)
        x._compatible(y)
        x._compatible(z)
        self.x, self.y, self.z = x, y, z

    def __iter__(self):
        return iter((self.x, self.y, self.z))

    def __getitem__(self, k):
        return (self.x, self.y, self.z)[k]

    @property
    def order(self):
        return self.x.order

    @property
    def base(self):
        return self.x.base

    def __add__(self, other):
        return JetVec3(*(a + b for a, b in zip(*align_vecs(self, other))))

    def __sub__(self, other):
        return JetVec3(*(a - b for a, b in zip(*align_vecs(self, other))))

    def __neg__(self):
        return JetVec3(-self.x, -self.y, -self.z)

    def scale(self, s):
        if isinstance(s, Jet2):
            s = s.truncate(min(s.order, self.order))
            v = self.truncate(s.order)
            return JetVec3(v.x * s, v.y * s, v.z * s)
        return JetVec3(self.x * s, self.y * s, self.z * s)

    def truncate(self, order):
        return JetVec3(self.x.truncate(order), self.y.truncate(order), self.z.truncate(order))

    def d(self, var):
        return JetVec3(self.x.d(var), self.y.d(var), self.z.d(var))

    def d_u(self):
        return self.d("u")

    def d_v(self):
        return self.d("v")

    def value(self):
        return np.stack([self.x.value, self.y.value, self.z.value], axis=-1)

    def normalized(self):
        return self.scale(dot(self, self).sqrt().reciprocal())

    def compose(self, inner_u, inner_v):
        return JetVec3(*(compose(c, inner_u, inner_v) for c in self))


def align_vecs(a, b):
    order = min(a.order, b.order)
    return a.truncate(order), b.truncate(order)


def dot(a, b):
    a, b = align_vecs(a, b)
    return a.x * b.x + a.y * b.y + a.z * b.z


def cross(a, b):
    a, b = align_vecs(a, b)
    return JetVec3(a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x)


def det3(a, b, c):
    """Determinant of the matrix with columns a, b, c (JetVec3 each)."""
    return dot(a, cross(b, c))


def det3_entries(m):
    """Determinant of a 3x3 nested list of jets."""
    (a, b, c), (d, e, f), (g, h, i) = m
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def univariate(coeffs, base=(0.0, 0.0)):
    """Jet in the first variable only: ``sum coeffs[k] t^k``."""
    order = len(coeffs) - 1
    return Jet2.from_dict({(k, 0): c for k, c in enumerate(coeffs)}, order, base)


def univariate_coeffs(a):
    """Coefficients ``c[k][0]`` of a jet viewed as a series in its first variable."""
    return np.array([a.coeff(k, 0) for k in range(a.order + 1)])


def solve_graph(F, along="v", max_iter=None):
    """Solve ``F = 0`` near its base as a graph over one coordinate.

    With ``along='v'`` returns the univariate jet ``s(t)`` (zero constant
    term, variable ``t`` at base (0, 0)) such that
    ``F(u0 + s(t), v0 + t) = 0`` to the jet's order; ``along='u'`` solves
    ``F(u0 + t, v0 + s(t)) = 0``.  Newton iteration on jets; needs the
    derivative in the solved-for direction to be nonzero.
    """
    if F.batch_shape:
        raise JetMismatch("solve_graph works on unbatched jets")
    u0, v0 = (float(b) for b in F.base)
    order = F.order
    solve_var = "u" if along == "v" else "v"
    dF = F.d(solve_var)
    if abs(dF.value) < 1e-14:
        raise DivisionByNonUnit(f"dF/d{solve_var} vanishes; cannot solve for {solve_var}")
    t = univariate([0.0, 1.0] + [0.0] * (order - 1)) if order >= 1 else univariate([0.0])
    s = Jet2.constant(0.0, order, (0.0, 0.0))
    iters = max_iter or order + 2
    for _ in range(iters):
        if along == "v":
            iu, iv = s + u0, t + v0
        else:
            iu, iv = t + u0, s + v0
        g = compose(F, iu, iv)
        gd = pad(compose(dF, iu.truncate(dF.order), iv.truncate(dF.order)), order)
        step = g / gd
        s = s - step
        s.coeffs[0] = 0.0
        if np.max(np.abs(step.coeffs[1:]), initial=0.0) < 1e-16 * (1 + np.max(np.abs(s.coeffs))):
            break
    return s
