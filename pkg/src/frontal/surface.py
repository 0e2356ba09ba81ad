"""Surface germs evaluated as jets, and the transformations between them."""
from __future__ import annotations

import numpy as np

from .jet import DEFAULT_ORDER, MAX_ORDER, Jet2, JetVec3


class Surface:
    """A map (u, v) -> R^3 that can be expanded into jets at any base point.

    Subclasses implement :meth:`jets` and, when a normal field is known,
    :meth:`normal_jets` (a non-normalized normal; ``None`` when absent).
    ``base`` and ``order`` are the defaults used by the analysis routines.
    ``max_order`` is the largest n for which ``jets(p, n + 1)`` and
    ``normal_jets(p, n)`` can both be produced.
    """

    base = (0.0, 0.0)
    order = DEFAULT_ORDER
    max_order = MAX_ORDER - 1

    def __init__(self, base=(0.0, 0.0), order=DEFAULT_ORDER, meta=None):
        self.base = tuple(float(b) for b in base)
        self.order = int(order)
        self.meta = dict(meta or {})

    def jets(self, base=None, order=None):
        raise NotImplementedError

    def normal_jets(self, base=None, order=None):
        return None

    @property
    def has_normal(self):
        return self.normal_jets(self.base, 0) is not None

    def _at(self, base, order):
        base = self.base if base is None else base
        order = self.order if order is None else order
        return np.asarray(base, dtype=float), order

    def evaluate(self, u, v):
        """Points of the surface; ``u`` and ``v`` broadcast together."""
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        pts = np.stack([u, v], axis=-1)
        return self.jets(pts, 0).value()

    def evaluate_normal(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        nj = self.normal_jets(np.stack([u, v], axis=-1), 0)
        return None if nj is None else nj.value()


class Reparametrized(Surface):
    """``f o phi`` for a source diffeomorphism ``phi``.

    ``mapping(base, order)`` must return the jets ``(U, V)`` of ``phi`` at
    ``base``.  The normal is pulled back unchanged.
    """

    def __init__(self, surface, mapping, base=None, order=None, meta=None):
        super().__init__(surface.base if base is None else base,
                         surface.order if order is None else order, meta)
        self.surface = surface
        self.mapping = mapping
        self.max_order = surface.max_order

    def _pull(self, getter, base, order):
        base, order = self._at(base, order)
        U, V = self.mapping(base, order)
        image = np.stack([U.value, V.value], axis=-1)
        outer = getter(image, order)
        if outer is None:
            return None
        return outer.compose(U, V)

    def jets(self, base=None, order=None):
        return self._pull(self.surface.jets, base, order)

    def normal_jets(self, base=None, order=None):
        return self._pull(self.surface.normal_jets, base, order)


class TargetTransformed(Surface):
    """``scale * A f + shift`` for an invertible 3x3 matrix ``A``.

    The normal transforms by the cofactor matrix, which keeps
    ``det(f_u, f_v, nu)`` proportional to the original identifier.
    """

    def __init__(self, surface, matrix=None, scale=1.0, shift=(0.0, 0.0, 0.0), meta=None):
        super().__init__(surface.base, surface.order, meta)
        self.surface = surface
        self.max_order = surface.max_order
        self.matrix = np.eye(3) if matrix is None else np.asarray(matrix, dtype=float)
        self.scale = float(scale)
        self.shift = np.asarray(shift, dtype=float)
        a = self.matrix
        self.cofactor = np.linalg.det(a) * np.linalg.inv(a).T

    @staticmethod
    def _apply(m, vec, factor=1.0, shift=None):
        comps = []
        for i in range(3):
            c = vec[0] * (m[i, 0] * factor) + vec[1] * (m[i, 1] * factor) + vec[2] * (m[i, 2] * factor)
            if shift is not None:
                c = c + shift[i]
            comps.append(c)
        return JetVec3(*comps)

    def jets(self, base=None, order=None):
        base, order = self._at(base, order)
        return self._apply(self.matrix, self.surface.jets(base, order), self.scale, self.shift)

    def normal_jets(self, base=None, order=None):
        base, order = self._at(base, order)
        n = self.surface.normal_jets(base, order)
        if n is None:
            return None
        return self._apply(self.cofactor, n)


def rotation_about(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * k @ k


def linear_map(origin, e1, e2):
    """Mapping ``(a, b) -> origin + a e1 + b e2`` for :class:`Reparametrized`.

    The returned callable expects base points in the new (a, b) chart.
    """
    origin = np.asarray(origin, dtype=float)
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)

    def mapping(base, order):
        a = Jet2.variable("u", order, base)
        b = Jet2.variable("v", order, base)
        return (a * e1[0] + b * e2[0] + origin[0], a * e1[1] + b * e2[1] + origin[1])

    return mapping


def polynomial_map(fu, fv):
    """Mapping from two callables taking (u_jet, v_jet) and returning jets."""

    def mapping(base, order):
        u = Jet2.variable("u", order, base)
        v = Jet2.variable("v", order, base)
        U, V = fu(u, v), fv(u, v)
        if not isinstance(U, Jet2):
            U = Jet2.constant(U, order, base)
        if not isinstance(V, Jet2):
            V = Jet2.constant(V, order, base)
        return U, V

    return mapping
