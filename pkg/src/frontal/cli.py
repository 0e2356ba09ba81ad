"""The ``frontal`` command."""
from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from . import __version__
from .errors import AnalysisError, InputError, NotFoldedType, NotDivisible
from .expr import GeneratorDef, parse_file

EXIT_OK, EXIT_INPUT, EXIT_ANALYSIS, EXIT_IO = 0, 2, 3, 4


class IOFailure(Exception):
    pass


def fmt(x):
    return "%.17g" % (float(x) + 0.0)


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc.strerror or exc}") from None


def _write(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc.strerror or exc}") from None


def _pair(text, what):
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError:
        raise InputError(f"{what} must be two comma-separated numbers, got {text!r}") from None
    return a, b


def _window(text):
    try:
        w = tuple(float(x) for x in text.split(","))
    except ValueError:
        w = ()
    if len(w) != 4:
        raise InputError(f"window must be UMIN,UMAX,VMIN,VMAX, got {text!r}")
    if not (w[1] > w[0] and w[3] > w[2]):
        raise InputError("window must have positive area")
    return w


def _resolution(text):
    try:
        nx, ny = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise InputError(f"resolution must look like 64x64, got {text!r}") from None
    if nx < 2 or ny < 2:
        raise InputError("resolution must be at least 2x2")
    return nx, ny


def load_surface(path):
    """A surface file, or a generator file turned into its normal form."""
    obj = parse_file(_read(path))
    if isinstance(obj, GeneratorDef):
        from .normal_form import build_kth_kind, build_second_kind

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return build_second_kind(obj) if obj.k == 2 else build_kth_kind(obj)
    return obj


def load_generator(path):
    obj = parse_file(_read(path))
    if not isinstance(obj, GeneratorDef):
        raise InputError(f"{path} is a surface file; expected a generator file (g, h)")
    return obj


# -- commands --------------------------------------------------------------

def cmd_classify(args, out):
    from .analysis import classify_point

    surf = load_surface(args.surface)
    p = _pair(args.point, "point") if args.point else None
    cls = classify_point(surf, p)
    d = cls.diagnostics
    out.write(cls.describe() + "\n")
    if cls.is_front is not None:
        out.write(f"is_front: {'yes' if cls.is_front else 'no'}\n")
    out.write(f"lambda: {fmt(d['lambda'])}\n")
    out.write("dlambda: " + ", ".join(fmt(x) for x in d["dlambda"]) + "\n")
    if "eta_lambda" in d:
        out.write("eta^i lambda: " + ", ".join(fmt(x) for x in d["eta_lambda"]) + "\n")
        out.write("phi derivatives: " + ", ".join(fmt(x) for x in d["phi_derivatives"]) + "\n")
        ka, kb = d["k_routes"]
        out.write(f"k by phi: {ka}, k by null field: {kb}\n")
    if "note" in d:
        out.write(f"note: {d['note']}\n")


def _write_invariants(out, inv):
    out.write(f"[{inv.route}]\n")
    out.write(f"kappa_nu = {fmt(inv.kappa_nu)}\n")
    out.write(f"mu_c = {fmt(inv.mu_c)}\n")
    out.write(f"tau_s = {fmt(inv.tau_s)}\n")


def cmd_invariants(args, out):
    from .normal_form import build_kth_kind, extract_coeffs, invariants_from_coeffs, \
        invariants_general

    gen = load_generator(args.generator)
    results = []
    if args.method in ("coeffs", "both"):
        results.append(invariants_from_coeffs(extract_coeffs(gen)))
    if args.method in ("general", "both"):
        surf = build_kth_kind(gen, 2)
        results.append(invariants_general(surf))
    for inv in results:
        _write_invariants(out, inv)
    if len(results) == 2:
        diff = max(abs(a - b) for a, b in zip(results[0].as_tuple(), results[1].as_tuple()))
        agree = diff <= 1e-6 * (1.0 + max(abs(x) for x in results[0].as_tuple()))
        out.write(f"routes agree: {'yes' if agree else 'no'} (max difference {diff:.3e})\n")


def cmd_normal_form(args, out):
    from .normal_form import build_kth_kind, build_second_kind, surface_text, to_u_axis_form

    gen = load_generator(args.generator)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        surf = build_second_kind(gen) if gen.k == 2 else build_kth_kind(gen)
    for w in caught:
        sys.stderr.write(f"warning: {w.message}\n")
    header = [f"normal form of kind {surf.meta['k']}"]
    if args.u_axis:
        surf = to_u_axis_form(surf)
        header.append("u-axis form: singular set v = 0, null field d/du + u d/dv")
    text = surface_text(surf, header="\n".join(header))
    if args.output == "-":
        out.write(text)
    else:
        _write(args.output, text)


def _analysis_target(surf):
    """Surface whose singular set is ``{v = 0}`` when one is available, and the point."""
    from .normal_form import to_u_axis_form

    if surf.meta.get("normal_form") and surf.meta.get("k") == 2:
        return to_u_axis_form(surf), np.zeros(2)
    return surf, np.asarray(surf.base, dtype=float)


def _reduced_bde(surf, kind):
    """The identifier-reduced equation if the tensor divides, else the raw one."""
    from .bde import BDE, reduce_by_identifier

    bde = BDE.from_surface(surf, kind)
    try:
        return reduce_by_identifier(bde, surf), True
    except (NotDivisible, AnalysisError):
        return bde, False


def cmd_bde_info(args, out):
    from .bde import classify_folded, classify_swallowtail_foliations, coefficient_A, \
        format_sign_report

    surf = load_surface(args.surface)
    target, p = _analysis_target(surf)
    bde, reduced = _reduced_bde(target, args.bde)
    pj, qj, rj = bde.jets(p, 0)
    out.write(f"equation: {args.bde}{' (divided by the identifier)' if reduced else ''}\n")
    out.write(f"point: {fmt(p[0])}, {fmt(p[1])}\n")
    out.write(f"p, q, r: {fmt(pj.value)}, {fmt(qj.value)}, {fmt(rj.value)}\n")
    delta = float(bde.discriminant(p[0], p[1]))
    out.write(f"delta(0) = {fmt(delta)}\n")
    try:
        A = coefficient_A(bde, p)
    except NotFoldedType as exc:
        out.write(f"A: not a folded singular point ({exc})\n")
        return
    out.write(f"A = {fmt(A)}\n")
    out.write(f"l = {fmt(A)}\n")
    out.write(f"folded type: {classify_folded(A)}\n")
    if args.bde in ("as", "ch") and surf.meta.get("normal_form") and surf.meta.get("k") == 2:
        rep = classify_swallowtail_foliations(surf)
        out.write("sign report:\n")
        for line in format_sign_report(rep).splitlines():
            out.write(f"  {line}\n")
        route2 = rep.class_as_route2 if args.bde == "as" else rep.class_ch_route2
        out.write(f"folded type from invariants: {route2}\n")


def cmd_foliate(args, out):
    from .analysis import classify_point, trace_singular_set
    from .bde import coefficient_A
    from .integrate import GridSampler, integrate_solutions, portrait_seeds
    from .render import PortraitSpec, curves_csv, discriminant_contours, portrait_svg

    if args.seeds < 0:
        raise InputError("--seeds must be non-negative")
    if not args.step > 0:
        raise InputError("--step must be positive")
    window = _window(args.window)
    surf = load_surface(args.surface)
    target, p = _analysis_target(surf)
    bde, _ = _reduced_bde(target, args.bde)
    sampler = GridSampler(bde, window)
    delta = sampler.discriminant_grid()
    if not np.any(delta > 0):
        sys.stderr.write("warning: the discriminant is not positive anywhere in the window; "
                         "no solution curves\n")
        curves = []
    else:
        seeds = portrait_seeds(sampler, args.seeds)
        span = max(window[1] - window[0], window[3] - window[2])
        curves = integrate_solutions(bde, window, seeds, step=args.step,
                                     max_len=2.0 * span, sampler=sampler)
    _write(args.out, curves_csv(curves, target))
    if args.svg:
        singular = []
        folded = None
        try:
            cls = classify_point(target, p)
            if cls.variant == "kth":
                sc = trace_singular_set(target, p, window, step=span_step(window))
                singular.append(sc.points)
        except AnalysisError:
            pass
        try:
            coefficient_A(bde, p)
            if window[0] <= p[0] <= window[1] and window[2] <= p[1] <= window[3]:
                folded = p
        except AnalysisError:
            pass
        spec = PortraitSpec(window)
        svg = portrait_svg(spec, curves, discriminant_contours(delta, window), singular, folded)
        _write(args.svg, svg)
    out.write(f"{len(curves)} curves written to {args.out}\n")


def span_step(window):
    return max(window[1] - window[0], window[3] - window[2]) / 200.0


def cmd_mesh(args, out):
    from .render import mesh_obj

    window = _window(args.window)
    res = _resolution(args.res)
    surf = load_surface(args.surface)
    text = mesh_obj(surf, window, res)
    if "nan" in text or "inf" in text:
        raise AnalysisError("surface is not finite on the window")
    _write(args.output, text)
    out.write(f"{res[0] * res[1]} vertices written to {args.output}\n")


# -- entry point -------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="frontal", description=__doc__)
    ap.add_argument("--version", action="version", version=f"frontal {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="classify a point of a surface")
    c.add_argument("-s", "--surface", required=True)
    c.add_argument("-p", "--point", help="U,V (default: the file's point)")
    c.set_defaults(func=cmd_classify)

    c = sub.add_parser("invariants", help="kappa_nu, mu_c and tau_s of a second-kind normal form")
    c.add_argument("-g", "--generator", required=True)
    c.add_argument("--method", choices=("coeffs", "general", "both"), default="both")
    c.set_defaults(func=cmd_invariants)

    c = sub.add_parser("normal-form", help="emit the surface built from a generator file")
    c.add_argument("-g", "--generator", required=True)
    c.add_argument("--u-axis", action="store_true", help="emit the u-axis presentation")
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_normal_form)

    c = sub.add_parser("bde-info", help="discriminant and folded type at the base point")
    c.add_argument("-s", "--surface", required=True)
    c.add_argument("--bde", choices=("as", "ch", "lc"), required=True)
    c.set_defaults(func=cmd_bde_info)

    c = sub.add_parser("foliate", help="integrate solution curves and write CSV (and SVG)")
    c.add_argument("-s", "--surface", required=True)
    c.add_argument("--bde", choices=("as", "ch", "lc"), required=True)
    c.add_argument("--window", required=True, help="UMIN,UMAX,VMIN,VMAX")
    c.add_argument("--seeds", type=int, default=12)
    c.add_argument("--step", type=float, default=0.01)
    c.add_argument("--out", required=True)
    c.add_argument("--svg")
    c.set_defaults(func=cmd_foliate)

    c = sub.add_parser("mesh", help="triangulated surface mesh as OBJ")
    c.add_argument("-s", "--surface", required=True)
    c.add_argument("--window", required=True, help="UMIN,UMAX,VMIN,VMAX")
    c.add_argument("--res", default="64x64", help="NXxNY")
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_mesh)
    return ap


def main(argv=None, out=None):
    out = out or sys.stdout
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args.func(args, out)
    except InputError as exc:
        sys.stderr.write(f"frontal: input error: {exc}\n")
        return EXIT_INPUT
    except AnalysisError as exc:
        sys.stderr.write(f"frontal: {type(exc).__name__}: {exc}\n")
        return EXIT_ANALYSIS
    except IOFailure as exc:
        sys.stderr.write(f"frontal: {exc}\n")
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
