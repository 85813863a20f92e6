"""Weight functions given by a small expression language.

Grammar (coordinates are ``z1 .. zn``)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := number | 'i' | zK | '(' expr ')' | '-' factor
            | re(expr) | im(expr) | abs(expr) | log(expr)
            | max(expr, expr) | min(expr, expr)

Complex-valued subexpressions are allowed only underneath ``re``, ``im``
or ``abs``; the whole expression must be real. Every expressible weight
is continuous where it is finite (``log`` may produce ``-inf``, which is
clipped to ``Q_MIN`` and reported).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .discs import Q_MIN, clip_low
from .errors import ParseError, WeightEvaluationError


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class ImagUnit:
    pass


@dataclass(frozen=True)
class Coord:
    index: int  # 1-based


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Node = Union[Num, ImagUnit, Coord, Neg, BinOp, Call]

_FUNCS = {"re": 1, "im": 1, "abs": 1, "log": 1, "max": 2, "min": 2}
_COMPLEX_OK = {"re", "im", "abs"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(src: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(src)))
    return toks


_FACTOR_START = frozenset({"number", "zK", "i", "(", "-"} | set(_FUNCS))


class _Parser:
    def __init__(self, src: str):
        self.toks = _tokenize(src)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def expect(self, text: str) -> _Tok:
        t = self.tok
        if t.text != text:
            raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.pos, {text})
        self.i += 1
        return t

    def parse(self):
        node, kind = self.expr()
        if self.tok.kind != "eof":
            raise ParseError(
                f"unexpected {self.tok.text!r}", self.tok.pos, {"+", "-", "*", "/", "end of input"}
            )
        if kind != "real":
            raise ParseError("weight must be real-valued; wrap complex parts in re/im/abs", 0)
        return node

    def expr(self):
        left, lk = self.term()
        while self.tok.text in ("+", "-"):
            op = self.tok.text
            self.i += 1
            right, rk = self.term()
            left, lk = BinOp(op, left, right), _join(lk, rk)
        return left, lk

    def term(self):
        left, lk = self.factor()
        while self.tok.text in ("*", "/"):
            op = self.tok.text
            self.i += 1
            right, rk = self.factor()
            left, lk = BinOp(op, left, right), _join(lk, rk)
        return left, lk

    def factor(self):
        t = self.tok
        if t.kind == "number":
            self.i += 1
            return Num(float(t.text)), "real"
        if t.text == "-":
            self.i += 1
            node, kind = self.factor()
            return Neg(node), kind
        if t.text == "(":
            self.i += 1
            node, kind = self.expr()
            self.expect(")")
            return node, kind
        if t.kind == "name":
            if t.text == "i":
                self.i += 1
                return ImagUnit(), "complex"
            m = re.fullmatch(r"z([1-9]\d*)", t.text)
            if m:
                self.i += 1
                return Coord(int(m.group(1))), "complex"
            if t.text in _FUNCS:
                return self.call()
            raise ParseError(f"unknown name {t.text!r}", t.pos, _FACTOR_START)
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.pos, _FACTOR_START)

    def call(self):
        name_tok = self.tok
        name = name_tok.text
        self.i += 1
        self.expect("(")
        args = []
        for k in range(_FUNCS[name]):
            if k:
                self.expect(",")
            arg_pos = self.tok.pos
            node, kind = self.expr()
            if kind == "complex" and name not in _COMPLEX_OK:
                raise ParseError(
                    f"complex argument to {name}(); use re, im or abs", arg_pos
                )
            args.append(node)
        self.expect(")")
        return Call(name, tuple(args)), "real"


def _join(a: str, b: str) -> str:
    return "complex" if "complex" in (a, b) else "real"


def parse_expression(source: str) -> Node:
    return _Parser(source).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_source(node: Node) -> str:
    """Canonical text for a tree; ``parse_expression`` inverts it exactly."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, ImagUnit):
        return "i"
    if isinstance(node, Coord):
        return f"z{node.index}"
    if isinstance(node, Neg):
        inner = to_source(node.arg)
        if isinstance(node.arg, BinOp):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_source(a) for a in node.args)})"
    p = _PREC[node.op]
    left = to_source(node.left)
    if isinstance(node.left, BinOp) and _PREC[node.left.op] < p:
        left = f"({left})"
    right = to_source(node.right)
    if isinstance(node.right, BinOp) and _PREC[node.right.op] <= p:
        right = f"({right})"
    return f"{left} {node.op} {right}"


def _max_coord(node: Node) -> int:
    if isinstance(node, Coord):
        return node.index
    if isinstance(node, Neg):
        return _max_coord(node.arg)
    if isinstance(node, BinOp):
        return max(_max_coord(node.left), _max_coord(node.right))
    if isinstance(node, Call):
        return max(_max_coord(a) for a in node.args)
    return 0


def _eval(node: Node, pts: np.ndarray):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, ImagUnit):
        return 1j
    if isinstance(node, Coord):
        return pts[:, node.index - 1]
    if isinstance(node, Neg):
        return -_eval(node.arg, pts)
    if isinstance(node, BinOp):
        a = _eval(node.left, pts)
        b = _eval(node.right, pts)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        with np.errstate(divide="ignore", invalid="ignore"):
            return a / b
    args = [_eval(a, pts) for a in node.args]
    name = node.name
    if name == "re":
        return np.real(args[0])
    if name == "im":
        return np.imag(args[0])
    if name == "abs":
        return np.abs(args[0])
    if name == "log":
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(args[0])
    if name == "max":
        return np.maximum(args[0], args[1])
    return np.minimum(args[0], args[1])


def _substitute(node: Node, fn) -> Node:
    if isinstance(node, Coord):
        return fn(node)
    if isinstance(node, Neg):
        return Neg(_substitute(node.arg, fn))
    if isinstance(node, BinOp):
        return BinOp(node.op, _substitute(node.left, fn), _substitute(node.right, fn))
    if isinstance(node, Call):
        return Call(node.name, tuple(_substitute(a, fn) for a in node.args))
    return node


@dataclass(frozen=True)
class Weight:
    """A parsed, continuous weight ``q`` on C^n."""

    expression: Node
    continuity_flag: bool = True
    floor: float = Q_MIN

    @property
    def source(self) -> str:
        return to_source(self.expression)

    @property
    def dim_required(self) -> int:
        return _max_coord(self.expression)

    @property
    def is_constant(self) -> bool:
        return self.dim_required == 0

    def raw(self, points) -> np.ndarray:
        """Unclipped values on an ``(..., n)`` array of points."""
        pts = np.asarray(points, dtype=complex)
        if pts.ndim == 1:
            pts = pts[None, :]
        shape = pts.shape[:-1]
        flat = pts.reshape(-1, pts.shape[-1])
        if self.dim_required > flat.shape[1]:
            raise WeightEvaluationError(
                f"weight uses z{self.dim_required} but points have dimension {flat.shape[1]}"
            )
        out = _eval(self.expression, flat)
        out = np.broadcast_to(np.asarray(out), (flat.shape[0],))
        if np.iscomplexobj(out):
            out = out.real
        out = np.asarray(out, dtype=float)
        if np.any(np.isnan(out)):
            raise WeightEvaluationError(f"weight {self.source!r} is undefined at some point")
        return out.reshape(shape)

    def evaluate(self, points) -> tuple[np.ndarray, bool]:
        """Values clipped at the floor, and whether clipping happened."""
        return clip_low(self.raw(points))

    def __call__(self, points) -> np.ndarray:
        return self.evaluate(points)[0]

    def constant_value(self) -> float:
        if not self.is_constant:
            raise ValueError("weight depends on the coordinates")
        return float(self.raw(np.zeros((1, 1)))[0])

    def split_constant(self) -> tuple["Weight", float]:
        """Write ``q = q_var + c`` peeling additive constants off the top-level sum."""
        if self.is_constant:
            return Weight(Num(0.0)), self.constant_value()
        node, c = _peel(self.expression)
        return Weight(node), c

    def shifted(self, c: float) -> "Weight":
        return Weight(BinOp("+", self.expression, Num(float(c))))

    def rescaled(self, a: float) -> "Weight":
        """The weight ``z -> q(z / a)``."""
        return Weight(_substitute(self.expression, lambda n: BinOp("/", n, Num(float(a)))))


def _peel(node: Node) -> tuple[Node, float]:
    if isinstance(node, BinOp) and node.op in "+-":
        sign = 1.0 if node.op == "+" else -1.0
        if _max_coord(node.right) == 0:
            rest, c = _peel(node.left)
            return rest, c + sign * float(np.real(_eval(node.right, np.zeros((1, 1)))))
        if node.op == "+" and _max_coord(node.left) == 0:
            rest, c = _peel(node.right)
            return rest, c + float(np.real(_eval(node.left, np.zeros((1, 1)))))
    return node, 0.0


def parse_weight(source: str) -> Weight:
    """Parse weight text; raises :class:`ParseError` with position on failure."""
    return Weight(parse_expression(source))


def constant_weight(c: float) -> Weight:
    return Weight(Num(float(c)))
