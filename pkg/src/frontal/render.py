"""CSV, SVG and OBJ writers."""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from . import __version__

FAMILY_COLORS = ("#1f77b4", "#d62728")


def fmt(x):
    return "%.17g" % (float(x) + 0.0)


def curves_csv(curves, surface=None):
    out = io.StringIO()
    out.write("curve_id,branch,t,u,v,x,y,z\n")
    for cid, c in enumerate(curves):
        pts = np.asarray(c.points)
        xyz = surface.evaluate(pts[:, 0], pts[:, 1]) if surface is not None else None
        for k, (t, (u, v)) in enumerate(zip(c.t, pts)):
            row = [str(cid), str(c.family), fmt(t), fmt(u), fmt(v)]
            row += [fmt(a) for a in xyz[k]] if xyz is not None else ["", "", ""]
            out.write(",".join(row) + "\n")
    return out.getvalue()


@dataclass
class PortraitSpec:
    window: tuple
    resolution: tuple = (600, 600)
    layers: dict = field(default_factory=lambda: {
        "discriminant": True, "singular_set": True, "families": True, "folded_point": True})
    line_width: float = 1.0
    singular_width: float = 3.0
    colors: tuple = FAMILY_COLORS

    def __post_init__(self):
        umin, umax, vmin, vmax = self.window
        if not (umax > umin and vmax > vmin):
            raise ValueError("window must have positive area")
        if min(self.resolution) <= 0:
            raise ValueError("resolution must be positive")


def _to_px(spec, pts):
    umin, umax, vmin, vmax = spec.window
    w, h = spec.resolution
    pts = np.asarray(pts, dtype=float)
    x = (pts[:, 0] - umin) / (umax - umin) * w
    y = (vmax - pts[:, 1]) / (vmax - vmin) * h
    return np.stack([x, y], axis=1)


def _polyline(spec, pts, attrs):
    px = _to_px(spec, pts)
    coords = " ".join(f"{x:.3f},{y:.3f}" for x, y in px)
    return f'<polyline points="{coords}" fill="none" {attrs}/>'


def discriminant_contours(delta, window):
    """Zero level set of a grid of discriminant values as polylines in (u, v)."""
    from skimage.measure import find_contours

    delta = np.asarray(delta, dtype=float)
    if not (np.min(delta) < 0 < np.max(delta)):
        return []
    nu, nv = delta.shape
    umin, umax, vmin, vmax = window
    out = []
    for c in find_contours(delta, 0.0):
        u = umin + c[:, 0] * (umax - umin) / (nu - 1)
        v = vmin + c[:, 1] * (vmax - vmin) / (nv - 1)
        out.append(np.stack([u, v], axis=1))
    return out


def portrait_svg(spec, curves=(), discriminant=(), singular=(), folded_point=None):
    w, h = spec.resolution
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f"<!-- frontal {__version__} -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>',
    ]
    if spec.layers.get("discriminant"):
        lines.append('<g id="discriminant">')
        for c in discriminant:
            lines.append(_polyline(spec, c, f'stroke="#555555" stroke-width="{spec.line_width}" '
                                            'stroke-dasharray="6,4"'))
        lines.append("</g>")
    if spec.layers.get("families"):
        for fam in (0, 1):
            lines.append(f'<g id="family-{fam}">')
            for c in curves:
                if c.family == fam and len(c.points) > 1:
                    lines.append(_polyline(spec, c.points, f'stroke="{spec.colors[fam]}" '
                                                           f'stroke-width="{spec.line_width}"'))
            lines.append("</g>")
    if spec.layers.get("singular_set"):
        lines.append('<g id="singular-set">')
        for c in singular:
            lines.append(_polyline(spec, c, f'stroke="black" stroke-width="{spec.singular_width}"'))
        lines.append("</g>")
    if spec.layers.get("folded_point") and folded_point is not None:
        x, y = _to_px(spec, [folded_point])[0]
        lines.append('<g id="folded-point">')
        lines.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="4" fill="black"/>')
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def mesh_obj(surface, window, res):
    """Triangulated regular grid of the surface image."""
    umin, umax, vmin, vmax = window
    nx, ny = res
    if nx < 2 or ny < 2:
        raise ValueError("mesh resolution must be at least 2x2")
    us = np.linspace(umin, umax, nx)
    vs = np.linspace(vmin, vmax, ny)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    xyz = surface.evaluate(uu, vv)
    out = io.StringIO()
    out.write(f"# frontal mesh {nx}x{ny}\n")
    for i in range(nx):
        for j in range(ny):
            x, y, z = xyz[i, j]
            out.write(f"v {fmt(x)} {fmt(y)} {fmt(z)}\n")
    for i in range(nx):
        for j in range(ny):
            out.write(f"vt {fmt(us[i])} {fmt(vs[j])}\n")

    def idx(i, j):
        return i * ny + j + 1
    for i in range(nx - 1):
        for j in range(ny - 1):
            a, b, c, d = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
            out.write(f"f {a}/{a} {b}/{b} {c}/{c}\n")
            out.write(f"f {a}/{a} {c}/{c} {d}/{d}\n")
    return out.getvalue()
