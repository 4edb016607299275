"""Complex expression trees: construction, parsing, printing and evaluation.

Expressions are immutable dataclass trees.  The same node classes carry the
real-variable forms produced by :mod:`contour_forge.lowering`; there the
constants simply hold floats.

Grammar (loosest binding first)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := atom ('^' integer)?
    atom   := number | 'i' | identifier | identifier '(' expr ')' | '(' expr ')'

``a - b`` is stored as ``Add(a, Neg(b))``; there is no subtraction node.
"""

from __future__ import annotations

import cmath
import enum
import math
import re
from dataclasses import dataclass
from typing import ClassVar, Iterator, Mapping

from .errors import (
    ArityError,
    DivisionNearZero,
    ExprSyntaxError,
    UnboundVariable,
    UnknownIdentifier,
)

# |w| below which sinc switches to its series; truncation error ~ w^6/5040.
TAU_SINC = 1e-3
# Guards literal division by zero only.
TAU_DIV = 1e-300

VARIABLES = ("z", "t", "theta")

ComplexValue = complex


class EntiretyTag(enum.Enum):
    ENTIRE = "Entire"
    ENTIRE_BY_REMOVABLE_SINGULARITY = "EntireByRemovableSingularity"
    NOT_ENTIRE = "NotEntire"
    UNKNOWN = "Unknown"


class Expr:
    """Base class of all expression nodes."""

    __slots__ = ()

    def children(self) -> tuple["Expr", ...]:
        return ()

    def __str__(self) -> str:
        return format_expr(self)


@dataclass(frozen=True)
class Const(Expr):
    value: complex


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class IntPow(Expr):
    base: Expr
    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 0:
            raise ValueError(f"IntPow exponent must be a non-negative integer, got {self.n!r}")

    def children(self):
        return (self.base,)


@dataclass(frozen=True)
class Func(Expr):
    """Unary elementary function; subclasses fix ``fname``."""

    arg: Expr
    fname: ClassVar[str] = ""

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Exp(Func):
    fname: ClassVar[str] = "exp"


@dataclass(frozen=True)
class Sin(Func):
    fname: ClassVar[str] = "sin"


@dataclass(frozen=True)
class Cos(Func):
    fname: ClassVar[str] = "cos"


@dataclass(frozen=True)
class Sinh(Func):
    fname: ClassVar[str] = "sinh"


@dataclass(frozen=True)
class Cosh(Func):
    fname: ClassVar[str] = "cosh"


@dataclass(frozen=True)
class Sinc(Func):
    fname: ClassVar[str] = "sinc"


FUNCTIONS: dict[str, type[Func]] = {
    cls.fname: cls for cls in (Exp, Sin, Cos, Sinh, Cosh, Sinc)
}

I = Const(1j)


def walk(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def free_vars(e: Expr) -> frozenset[str]:
    return frozenset(n.name for n in walk(e) if isinstance(n, Var))


def depth(e: Expr) -> int:
    kids = e.children()
    return 1 + (max(depth(k) for k in kids) if kids else 0)


# ---------------------------------------------------------------- parsing

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
)

_ATOM_START = frozenset({"number", "identifier", "'i'", "'('", "'-'"})


@dataclass(frozen=True)
class _Token:
    kind: str  # number | ident | op | end
    text: str
    pos: int  # 1-based column


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    i = 0
    while i < len(source):
        m = _TOKEN_RE.match(source, i)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[i]!r}", i + 1)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), i + 1))
        i = m.end()
    tokens.append(_Token("end", "", len(source) + 1))
    return tokens


class _Parser:
    def __init__(self, source: str, variables):
        self.tokens = _tokenize(source)
        self.k = 0
        self.variables = frozenset(variables)

    @property
    def tok(self) -> _Token:
        return self.tokens[self.k]

    def advance(self) -> _Token:
        t = self.tokens[self.k]
        self.k += 1
        return t

    def fail(self, expected):
        t = self.tok
        what = "end of input" if t.kind == "end" else f"token {t.text!r}"
        raise ExprSyntaxError(f"unexpected {what}", t.pos, expected)

    def is_op(self, *ops) -> bool:
        return self.tok.kind == "op" and self.tok.text in ops

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            self.fail({"'+'", "'-'", "'*'", "'/'", "end of input"})
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.is_op("+", "-"):
            op = self.advance().text
            right = self.term()
            left = Add(left, right) if op == "+" else Add(left, Neg(right))
        return left

    def term(self) -> Expr:
        left = self.factor()
        while self.is_op("*", "/"):
            op = self.advance().text
            right = self.factor()
            left = Mul(left, right) if op == "*" else Div(left, right)
        return left

    def factor(self) -> Expr:
        if self.is_op("-"):
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.is_op("^"):
            self.advance()
            t = self.tok
            if t.kind != "number" or not t.text.isdigit():
                self.fail({"non-negative integer exponent"})
            self.advance()
            return IntPow(base, int(t.text))
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "number":
            self.advance()
            return Const(complex(float(t.text), 0.0))
        if t.kind == "ident":
            return self.identifier()
        if self.is_op("("):
            self.advance()
            e = self.expr()
            if not self.is_op(")"):
                self.fail({"')'", "'+'", "'-'", "'*'", "'/'"})
            self.advance()
            return e
        self.fail(_ATOM_START)

    def identifier(self) -> Expr:
        t = self.advance()
        name = t.text
        if name == "i":
            return I
        if name in FUNCTIONS:
            if not self.is_op("("):
                raise ArityError(name, t.pos, f"function {name!r} needs a parenthesised argument (offset {t.pos})")
            self.advance()
            if self.is_op(")"):
                raise ArityError(name, t.pos)
            arg = self.expr()
            if self.is_op(","):
                raise ArityError(name, t.pos)
            if not self.is_op(")"):
                self.fail({"')'", "'+'", "'-'", "'*'", "'/'"})
            self.advance()
            return FUNCTIONS[name](arg)
        if name in VARIABLES:
            if name not in self.variables:
                raise UnknownIdentifier(name, t.pos)
            if self.is_op("("):
                raise ArityError(name, t.pos, f"variable {name!r} is not a function (offset {t.pos})")
            return Var(name)
        raise UnknownIdentifier(name, t.pos)


def parse_expr(source: str, variables=VARIABLES) -> Expr:
    """Parse ``source`` into an expression tree.

    Raises ExprSyntaxError, UnknownIdentifier or ArityError with 1-based
    positions.  ``variables`` restricts which of z, t, theta are accepted.
    """
    return _Parser(source, variables).parse()


# --------------------------------------------------------------- printing

_P_ADD, _P_MUL, _P_NEG, _P_POW, _P_ATOM = 1, 2, 3, 4, 5


def _num(x: float) -> str:
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def _is_canonical_const(v) -> bool:
    v = complex(v)
    re_, im = v.real, v.imag
    if im == 0.0:
        return re_ >= 0.0 and math.copysign(1.0, re_) > 0 and math.isfinite(re_)
    return re_ == 0.0 and im == 1.0


def _const_text(v) -> str:
    v = complex(v)
    re_, im = v.real, v.imag
    if im == 0.0:
        return _num(re_) if re_ >= 0 and math.copysign(1.0, re_) > 0 else f"(-{_num(-re_)})"
    if re_ == 0.0:
        if im == 1.0:
            return "i"
        if im == -1.0:
            return "(-i)"
        return f"({_num(im)} * i)" if im > 0 else f"(-{_num(-im)} * i)"
    sign = "+" if im > 0 else "-"
    return f"({_num(re_)} {sign} {_num(abs(im))} * i)"


def _prec(e: Expr) -> int:
    if isinstance(e, Add):
        return _P_ADD
    if isinstance(e, (Mul, Div)):
        return _P_MUL
    if isinstance(e, Neg):
        return _P_NEG
    if isinstance(e, IntPow):
        return _P_POW
    return _P_ATOM


def _text(e: Expr) -> str:
    if isinstance(e, Const):
        return _const_text(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Add):
        left = _wrap(e.left, _P_ADD)
        r = e.right
        if isinstance(r, Neg):
            return f"{left} - {_wrap(r.arg, _P_MUL)}"
        if isinstance(r, Const) and complex(r.value).imag == 0 and complex(r.value).real < 0:
            # real-valued lowered forms: print t^2 - 4 rather than t^2 + (-4)
            return f"{left} - {_num(-complex(r.value).real)}"
        return f"{left} + {_wrap(r, _P_MUL)}"
    if isinstance(e, (Mul, Div)):
        op = "*" if isinstance(e, Mul) else "/"
        return f"{_wrap(e.left, _P_MUL)} {op} {_wrap(e.right, _P_NEG)}"
    if isinstance(e, Neg):
        inner = _text(e.arg)
        return "-" + (inner if _prec(e.arg) == _P_ATOM else f"({inner})")
    if isinstance(e, IntPow):
        return f"{_wrap(e.base, _P_ATOM)}^{e.n}"
    if isinstance(e, Func):
        return f"{e.fname}({_text(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


def _wrap(e: Expr, min_prec: int) -> str:
    s = _text(e)
    return s if _prec(e) >= min_prec else f"({s})"


_LATEX_FUNCS = {
    "exp": r"\exp",
    "sin": r"\sin",
    "cos": r"\cos",
    "sinh": r"\sinh",
    "cosh": r"\cosh",
    "sinc": r"\mathrm{sinc}",
}


def _latex(e: Expr) -> str:
    if isinstance(e, Const):
        return _const_text(e.value).replace(" * i", "i")
    if isinstance(e, Var):
        return r"\theta" if e.name == "theta" else e.name
    if isinstance(e, Add):
        r = e.right
        if isinstance(r, Neg):
            return f"{_latex_wrap(e.left, _P_ADD)} - {_latex_wrap(r.arg, _P_MUL)}"
        if isinstance(r, Const) and complex(r.value).imag == 0 and complex(r.value).real < 0:
            return f"{_latex_wrap(e.left, _P_ADD)} - {_num(-complex(r.value).real)}"
        return f"{_latex_wrap(e.left, _P_ADD)} + {_latex_wrap(r, _P_MUL)}"
    if isinstance(e, Mul):
        return f"{_latex_wrap(e.left, _P_MUL)} \\cdot {_latex_wrap(e.right, _P_NEG)}"
    if isinstance(e, Div):
        return f"\\frac{{{_latex(e.left)}}}{{{_latex(e.right)}}}"
    if isinstance(e, Neg):
        return "-" + _latex_wrap(e.arg, _P_ATOM)
    if isinstance(e, IntPow):
        return f"{{{_latex_wrap(e.base, _P_ATOM)}}}^{{{e.n}}}"
    if isinstance(e, Func):
        return f"{_LATEX_FUNCS[e.fname]}({_latex(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


def _latex_wrap(e: Expr, min_prec: int) -> str:
    s = _latex(e)
    return s if _prec(e) >= min_prec else f"\\left({s}\\right)"


def format_expr(e: Expr, style: str = "text") -> str:
    """Render ``e`` as grammar text (re-parseable) or LaTeX."""
    if style == "text":
        return _text(e)
    if style == "latex":
        return _latex(e)
    raise ValueError(f"unknown style {style!r}")


# ------------------------------------------------------------- evaluation


def sinc(w: complex) -> complex:
    if abs(w) < TAU_SINC:
        w2 = w * w
        return 1 - w2 / 6 + w2 * w2 / 120
    return cmath.sin(w) / w


_CMATH = {
    "exp": cmath.exp,
    "sin": cmath.sin,
    "cos": cmath.cos,
    "sinh": cmath.sinh,
    "cosh": cmath.cosh,
    "sinc": sinc,
}


def eval_expr(e: Expr, bindings: Mapping[str, complex]) -> complex:
    """Evaluate ``e`` at one point by structural recursion."""
    if isinstance(e, Const):
        return complex(e.value)
    if isinstance(e, Var):
        try:
            return complex(bindings[e.name])
        except KeyError:
            raise UnboundVariable(e.name) from None
    if isinstance(e, Add):
        return eval_expr(e.left, bindings) + eval_expr(e.right, bindings)
    if isinstance(e, Mul):
        return eval_expr(e.left, bindings) * eval_expr(e.right, bindings)
    if isinstance(e, Div):
        num = eval_expr(e.left, bindings)
        den = eval_expr(e.right, bindings)
        if abs(den) < TAU_DIV:
            raise DivisionNearZero(f"denominator {format_expr(e.right)} vanishes ({den!r})")
        return num / den
    if isinstance(e, Neg):
        return -eval_expr(e.arg, bindings)
    if isinstance(e, IntPow):
        base = eval_expr(e.base, bindings)
        out = complex(1.0)
        for _ in range(e.n):
            out *= base
        return out
    if isinstance(e, Func):
        return _CMATH[e.fname](eval_expr(e.arg, bindings))
    raise TypeError(f"not an expression node: {e!r}")


def const_value(e: Expr) -> complex:
    """Value of an expression with no free variables."""
    return eval_expr(e, {})
