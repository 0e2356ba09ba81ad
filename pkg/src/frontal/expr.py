"""A small expression language for surfaces and generator functions.

Files are line oriented::

    # the standard swallowtail
    order = 8
    point = 0, 0
    w := u*v
    x = u
    y = 4*v^3 + 2*w
    z = 3*v^4 + w*v
    normal = v^2, -v, 1

Generator files use the keys ``g``, ``h`` and optionally ``k``.  Exponents
are non-negative integer literals, and ``^`` binds tighter than unary minus
(``-u^2`` is ``-(u^2)``).
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import AnalysisError, DomainError, ParseError
from .jet import DEFAULT_ORDER, MAX_ORDER, Jet2, JetVec3
from .surface import Surface

FUNCTIONS = ("sin", "cos", "exp", "sqrt")
VARIABLES = ("u", "v")


def default_order():
    raw = os.environ.get("FRONTAL_JET_ORDER")
    if not raw:
        return DEFAULT_ORDER
    try:
        order = int(raw)
    except ValueError:
        raise ParseError(f"FRONTAL_JET_ORDER must be an integer, got {raw!r}") from None
    if not 1 <= order <= MAX_ORDER:
        raise ParseError(f"FRONTAL_JET_ORDER must lie in [1, {MAX_ORDER}]")
    return order


# -- AST ----------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float
    span: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    span: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Ref:
    name: str
    span: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    operand: object
    span: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    span: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int
    span: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: object
    span: tuple = field(default=None, compare=False, repr=False)


# -- tokenizer and parser -------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)

_BINARY = {"+": 1, "-": 1, "*": 2, "/": 2}


class _Parser:
    def __init__(self, text, line=None, col0=0, names=()):
        self.text = text
        self.line = line
        self.col0 = col0
        self.names = set(names)
        self.tokens = []
        pos = 0
        stripped = text.rstrip()
        while pos < len(stripped):
            m = _TOKEN.match(stripped, pos)
            if not m or m.end() == pos:
                self.error(f"unexpected character {stripped[pos:].lstrip()[:1]!r}",
                           pos + len(stripped[pos:]) - len(stripped[pos:].lstrip()))
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.tokens.append(("end", "", len(stripped)))
        self.i = 0

    def error(self, message, pos):
        raise ParseError(message, self.line, self.col0 + pos + 1)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value:
            self.error(f"expected {value!r}, found {text or 'end of input'!r}", pos)

    def parse(self):
        node = self.expr(0)
        kind, text, pos = self.peek()
        if kind != "end":
            self.error(f"unexpected {text!r}", pos)
        return node

    def expr(self, min_prec):
        left = self.unary()
        while True:
            kind, text, pos = self.peek()
            prec = _BINARY.get(text) if kind == "op" else None
            if prec is None or prec < min_prec or prec == 0:
                return left
            if prec < max(min_prec, 1):
                return left
            self.take()
            right = self.expr(prec + 1)
            left = BinOp(text, left, right, span=(pos,))

    def unary(self):
        kind, text, pos = self.peek()
        if kind == "op" and text in "+-":
            self.take()
            operand = self.unary()
            return Neg(operand, span=(pos,)) if text == "-" else operand
        return self.power()

    def power(self):
        base = self.atom()
        kind, text, pos = self.peek()
        if kind == "op" and text == "^":
            self.take()
            ekind, etext, epos = self.take()
            if ekind != "num":
                self.error("exponent must be a non-negative integer literal", epos)
            value = float(etext)
            if value != int(value) or not re.fullmatch(r"\d+\.?0*", etext):
                self.error(f"non-integer exponent {etext}", epos)
            return Pow(base, int(value), span=(pos,))
        return base

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text), span=(pos,))
        if kind == "name":
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr(0)
                self.expect(")")
                return Call(text, arg, span=(pos,))
            if text in VARIABLES:
                return Var(text, span=(pos,))
            if text not in self.names:
                self.error(f"undefined name {text!r}", pos)
            return Ref(text, span=(pos,))
        if text == "(":
            node = self.expr(0)
            self.expect(")")
            return node
        if kind == "end":
            self.error("unexpected end of expression", pos)
        self.error(f"unexpected {text!r}", pos)


def parse_expr(text, names=(), line=None, col0=0):
    """Parse one expression; ``names`` lists the definitions in scope."""
    if not text.strip():
        raise ParseError("empty expression", line, col0 + 1)
    return _Parser(text, line, col0, names).parse()


# -- printing --------------------------------------------------------------

def _fmt_num(x):
    r = repr(float(x))
    return r[:-2] if r.endswith(".0") else r


def to_text(node):
    """Render an AST so that parsing the text gives the same AST back."""
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, (Var, Ref)):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Pow):
        inner = to_text(node.base)
        if not isinstance(node.base, (Num, Var, Ref, Call)):
            inner = f"({inner})"
        return f"{inner}^{node.exponent}"
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        if not isinstance(node.operand, (Num, Var, Ref, Call, Pow)):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, BinOp):
        prec = _BINARY[node.op]
        left, right = to_text(node.left), to_text(node.right)
        if isinstance(node.left, BinOp) and _BINARY[node.left.op] < prec:
            left = f"({left})"
        if isinstance(node.right, BinOp) and _BINARY[node.right.op] <= prec:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an expression node: {node!r}")


# -- evaluation ------------------------------------------------------------

def _annotate(node, exc):
    pos = node.span[0] + 1 if node.span else None
    where = f" (at column {pos})" if pos else ""
    return type(exc)(f"{exc}{where}")


def eval_jet(node, base, order, env=None, _cache=None):
    """Jet of the expression at ``base`` (a point or a batch of points)."""
    base = np.asarray(base, dtype=float)
    env = env or {}
    cache = {} if _cache is None else _cache

    def rec(n):
        if isinstance(n, Num):
            return n.value
        if isinstance(n, Var):
            return Jet2.variable(n.name, order, base)
        if isinstance(n, Ref):
            if n.name not in cache:
                if n.name not in env:
                    raise ParseError(f"undefined name {n.name!r}")
                cache[n.name] = rec(env[n.name])
            return cache[n.name]
        if isinstance(n, Neg):
            return -rec(n.operand)
        if isinstance(n, BinOp):
            a, b = rec(n.left), rec(n.right)
            if n.op == "+":
                return a + b
            if n.op == "-":
                return a - b
            if n.op == "*":
                return a * b
            try:
                if isinstance(b, Jet2):
                    return a * b.reciprocal()
                if b == 0:
                    raise DomainError("division by zero")
                return a / b
            except AnalysisError as exc:
                raise _annotate(n, exc) from None
        if isinstance(n, Pow):
            a = rec(n.base)
            return a ** n.exponent
        if isinstance(n, Call):
            a = rec(n.arg)
            if not isinstance(a, Jet2):
                a = Jet2.constant(a, order, base)
            try:
                return getattr(a, n.func)()
            except AnalysisError as exc:
                raise _annotate(n, exc) from None
        raise TypeError(f"not an expression node: {n!r}")

    out = rec(node)
    if not isinstance(out, Jet2):
        out = Jet2.constant(out, order, base)
    return out


def eval_numeric(node, u, v, env=None):
    """Plain numeric evaluation with numpy broadcasting."""
    env = env or {}
    cache = {}

    def rec(n):
        if isinstance(n, Num):
            return n.value
        if isinstance(n, Var):
            return u if n.name == "u" else v
        if isinstance(n, Ref):
            if n.name not in cache:
                cache[n.name] = rec(env[n.name])
            return cache[n.name]
        if isinstance(n, Neg):
            return -rec(n.operand)
        if isinstance(n, BinOp):
            a, b = rec(n.left), rec(n.right)
            return {"+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide}[n.op](a, b)
        if isinstance(n, Pow):
            return rec(n.base) ** n.exponent
        if isinstance(n, Call):
            return getattr(np, n.func)(rec(n.arg))
        raise TypeError(f"not an expression node: {n!r}")

    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.broadcast_to(np.asarray(rec(node), dtype=float), np.broadcast(u, v).shape)


# -- file-level definitions ------------------------------------------------

class SurfaceDef(Surface):
    """Surface given by expressions for x, y, z and an optional normal field."""

    def __init__(self, x, y, z, normal=None, base=(0.0, 0.0), order=None,
                 definitions=None, meta=None):
        super().__init__(base, default_order() if order is None else order, meta)
        self.x, self.y, self.z = x, y, z
        self.normal = tuple(normal) if normal is not None else None
        self.definitions = dict(definitions or {})

    @classmethod
    def from_strings(cls, x, y, z, normal=None, **kw):
        n = None if normal is None else tuple(parse_expr(e) for e in normal)
        return cls(parse_expr(x), parse_expr(y), parse_expr(z), n, **kw)

    def _vec(self, exprs, base, order):
        cache = {}
        return JetVec3(*(eval_jet(e, base, order, self.definitions, cache) for e in exprs))

    def jets(self, base=None, order=None):
        base, order = self._at(base, order)
        return self._vec((self.x, self.y, self.z), base, order)

    def normal_jets(self, base=None, order=None):
        if self.normal is None:
            return None
        base, order = self._at(base, order)
        return self._vec(self.normal, base, order)

    def evaluate(self, u, v):
        return np.stack([eval_numeric(e, u, v, self.definitions) for e in (self.x, self.y, self.z)],
                        axis=-1)

    def to_text(self):
        lines = [f"order = {self.order}", f"point = {_fmt_num(self.base[0])}, {_fmt_num(self.base[1])}"]
        for name, e in self.definitions.items():
            lines.append(f"{name} := {to_text(e)}")
        lines += [f"x = {to_text(self.x)}", f"y = {to_text(self.y)}", f"z = {to_text(self.z)}"]
        if self.normal is not None:
            lines.append("normal = " + ", ".join(to_text(e) for e in self.normal))
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return f"SurfaceDef(x={to_text(self.x)!r}, y={to_text(self.y)!r}, z={to_text(self.z)!r})"


@dataclass
class GeneratorDef:
    """Generator pair (g, h) for the k-th kind normal form."""

    g: object
    h: object
    k: int = 2
    base: tuple = (0.0, 0.0)
    order: int = DEFAULT_ORDER
    definitions: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.k < 2:
            raise ParseError(f"k must be at least 2, got {self.k}")

    @classmethod
    def from_strings(cls, g, h, **kw):
        return cls(parse_expr(g), parse_expr(h), **kw)

    def g_jet(self, base, order):
        return eval_jet(self.g, base, order, self.definitions)

    def h_jet(self, base, order):
        return eval_jet(self.h, base, order, self.definitions)

    def to_text(self):
        lines = [f"order = {self.order}", f"point = {_fmt_num(self.base[0])}, {_fmt_num(self.base[1])}",
                 f"k = {self.k}"]
        for name, e in self.definitions.items():
            lines.append(f"{name} := {to_text(e)}")
        lines += [f"g = {to_text(self.g)}", f"h = {to_text(self.h)}"]
        return "\n".join(lines) + "\n"


_KEYS = ("order", "point", "x", "y", "z", "normal", "g", "h", "k")
_LINE = re.compile(r"^\s*(?P<name>[A-Za-z_][A-Za-z_0-9]*)\s*(?P<op>:=|=)(?P<rest>.*)$")


def _split_top(text, col0, line, count):
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append((text[start:i], col0 + start))
            start = i + 1
    parts.append((text[start:], col0 + start))
    if len(parts) != count:
        raise ParseError(f"expected {count} comma-separated entries, found {len(parts)}", line, col0 + 1)
    return parts


def parse_file(text):
    """Parse a surface or generator file into :class:`SurfaceDef` / :class:`GeneratorDef`."""
    values = {}
    definitions = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _LINE.match(line)
        if not m:
            col = len(line) - len(line.lstrip()) + 1
            raise ParseError("expected 'key = expression' or 'name := expression'", lineno, col)
        name, op, rest = m.group("name"), m.group("op"), m.group("rest")
        col0 = m.start("rest")
        if op == ":=":
            if name in VARIABLES or name in FUNCTIONS or name in _KEYS:
                raise ParseError(f"cannot define reserved name {name!r}", lineno, m.start("name") + 1)
            if name in definitions:
                raise ParseError(f"{name!r} defined twice", lineno, m.start("name") + 1)
            definitions[name] = parse_expr(rest, definitions, lineno, col0)
            continue
        if name not in _KEYS:
            raise ParseError(f"unknown key {name!r}", lineno, m.start("name") + 1)
        if name in values:
            raise ParseError(f"key {name!r} given twice", lineno, m.start("name") + 1)
        if name in ("order", "k"):
            try:
                values[name] = int(rest.strip())
            except ValueError:
                raise ParseError(f"{name} must be an integer", lineno, col0 + 1) from None
        elif name == "point":
            try:
                values[name] = tuple(float(p) for p, _ in _split_top(rest, col0, lineno, 2))
            except ValueError:
                raise ParseError("point must be two comma-separated reals", lineno, col0 + 1) from None
        elif name == "normal":
            values[name] = tuple(parse_expr(p, definitions, lineno, c)
                                 for p, c in _split_top(rest, col0, lineno, 3))
        else:
            values[name] = parse_expr(rest, definitions, lineno, col0)

    has_surface = any(k in values for k in ("x", "y", "z"))
    has_generator = any(k in values for k in ("g", "h"))
    if has_surface and has_generator:
        raise ParseError("file mixes surface keys (x, y, z) with generator keys (g, h)")
    order = values.get("order", default_order())
    if not 1 <= order <= MAX_ORDER:
        raise ParseError(f"order must lie in [1, {MAX_ORDER}]")
    base = values.get("point", (0.0, 0.0))
    if has_surface:
        missing = [k for k in ("x", "y", "z") if k not in values]
        if missing:
            raise ParseError(f"surface file lacks {', '.join(missing)}")
        if "k" in values:
            raise ParseError("key 'k' belongs to generator files")
        return SurfaceDef(values["x"], values["y"], values["z"], values.get("normal"),
                          base=base, order=order, definitions=definitions)
    if has_generator:
        missing = [k for k in ("g", "h") if k not in values]
        if missing:
            raise ParseError(f"generator file lacks {', '.join(missing)}")
        if "normal" in values:
            raise ParseError("key 'normal' belongs to surface files")
        return GeneratorDef(values["g"], values["h"], k=values.get("k", 2), base=base,
                            order=order, definitions=definitions)
    raise ParseError("file defines neither a surface (x, y, z) nor a generator (g, h)")


def polynomial_text(jet, tol=0.0):
    """Expand an unbatched jet into a polynomial in (u - u0), (v - v0)."""
    u0, v0 = (float(b) for b in jet.base)
    du = "u" if u0 == 0 else f"(u - {_fmt_num(u0)})" if u0 > 0 else f"(u + {_fmt_num(-u0)})"
    dv = "v" if v0 == 0 else f"(v - {_fmt_num(v0)})" if v0 > 0 else f"(v + {_fmt_num(-v0)})"
    pieces = []
    for (i, j), c in sorted(jet.terms(tol).items(), key=lambda kv: (kv[0][0] + kv[0][1], -kv[0][0])):
        mono = []
        if i:
            mono.append(du if i == 1 else f"{du}^{i}")
        if j:
            mono.append(dv if j == 1 else f"{dv}^{j}")
        mag = "%.17g" % abs(c)
        body = "*".join(([mag] if (mag != "1" or not mono) else []) + mono)
        pieces.append(("-" if c < 0 else "+", body))
    if not pieces:
        return "0"
    sign, body = pieces[0]
    text = ("-" if sign == "-" else "") + body
    for sign, body in pieces[1:]:
        text += f" {sign} {body}"
    return text
