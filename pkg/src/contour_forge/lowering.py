"""Lowering of ``f(z(p)) z'(p)`` to explicit real expressions in the path parameter.

Complex sub-expressions are carried as (real part, imaginary part) pairs of
real trees and combined with the textbook rules, e.g.::

    exp(a + ib)  -> (e^a cos b, e^a sin b)
    sin(a + ib)  -> (sin a cosh b, cos a sinh b)
    u / w        -> conj(w) u / |w|^2

The builders below fold constants and apply only identities that are exact
in floating point (x + 0, x * 1, x * 0, -(-x), x * x -> x^2, ...), so the
lowered trees evaluate to the same numbers as the unsimplified ones.
No trigonometric identities are applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .contour import CircularArc, HalfEllipse, Line, PathSegment, PolynomialGraph
from .errors import DivisionNearZero, DomainMismatch, LoweringError, RemovablePointOnPath, UnboundVariable
from .expr import (
    TAU_DIV, Add, Const, Cos, Cosh, Div, Exp, Expr, Func, IntPow, Mul, Neg, Sin, Sinc, Sinh,
    Var, eval_expr, free_vars, walk,
)

RealExpr = Expr

ZERO = Const(0.0)
ONE = Const(1.0)

_MATH = {Exp: math.exp, Sin: math.sin, Cos: math.cos, Sinh: math.sinh, Cosh: math.cosh}


def _cv(e):
    return complex(e.value).real if isinstance(e, Const) else None


def const(x: float) -> Const:
    return Const(float(x))


def add(a, b):
    ca, cb = _cv(a), _cv(b)
    if ca is not None and cb is not None:
        return const(ca + cb)
    if ca == 0.0:
        return b
    if cb == 0.0:
        return a
    if a == b:
        return mul(Const(2.0), a)
    if isinstance(a, Neg) and not isinstance(b, Neg):
        return add(b, a)
    return Add(a, b)


def neg(a):
    if isinstance(a, Const):
        return const(-_cv(a))
    if isinstance(a, Neg):
        return a.arg
    if isinstance(a, Add) and isinstance(a.right, Neg):
        return Add(a.right.arg, Neg(a.left))
    return Neg(a)


def sub(a, b):
    return add(a, neg(b))


def mul(a, b):
    ca, cb = _cv(a), _cv(b)
    if ca is not None and cb is not None:
        return const(ca * cb)
    if ca == 0.0 or cb == 0.0:
        return ZERO
    if ca == 1.0:
        return b
    if cb == 1.0:
        return a
    if ca == -1.0:
        return neg(b)
    if cb == -1.0:
        return neg(a)
    if isinstance(a, Neg):
        return neg(mul(a.arg, b))
    if isinstance(b, Neg):
        return neg(mul(a, b.arg))
    if a == b:
        return IntPow(a, 2)
    if isinstance(a, IntPow) and a.base == b:
        return IntPow(b, a.n + 1)
    if cb is not None:
        return Mul(b, a)
    return Mul(a, b)


def div(a, b):
    ca, cb = _cv(a), _cv(b)
    if ca is not None and cb is not None and cb != 0.0:
        return const(ca / cb)
    if ca == 0.0:
        return ZERO
    if cb == 1.0:
        return a
    return Div(a, b)


def ipow(a, n: int):
    if n == 0:
        return ONE
    if n == 1:
        return a
    ca = _cv(a)
    if ca is not None:
        out = 1.0
        for _ in range(n):
            out *= ca
        return const(out)
    return IntPow(a, n)


def func(cls, a):
    ca = _cv(a)
    if ca is not None:
        return const(_MATH[cls](ca))
    return cls(a)


def poly_expr(coeffs, x):
    """Sum of c_k x^k, highest degree first, zero terms dropped."""
    deg = len(coeffs) - 1
    out = ZERO
    for k, c in enumerate(coeffs):
        out = add(out, mul(const(c), ipow(x, deg - k)))
    return out


# --------------------------------------------------------------- lowering


@dataclass(frozen=True)
class LoweredIntegrand:
    re_part: RealExpr
    im_part: RealExpr
    parameter: str
    domain: tuple[float, float]
    orientation_note: str
    segment: PathSegment

    def evaluate(self, p) -> np.ndarray:
        """Complex value re_part + i im_part at parameter values ``p``."""
        re_ = kernels.eval_real(kernels.compile_expr(self.re_part), p)
        im = kernels.eval_real(kernels.compile_expr(self.im_part), p)
        return re_ + 1j * im


def segment_symbolic(seg: PathSegment):
    """Real expressions (Re z, Im z, Re z', Im z') in the natural parameter."""
    p = Var(seg.param_name)
    if isinstance(seg, Line):
        a, d = complex(seg.a), complex(seg.b) - complex(seg.a)
        return (add(const(a.real), mul(const(d.real), p)), add(const(a.imag), mul(const(d.imag), p)),
                const(d.real), const(d.imag))
    if isinstance(seg, CircularArc):
        c, r = complex(seg.center), float(seg.radius)
        cos_, sin_ = Cos(p), Sin(p)
        return (add(const(c.real), mul(const(r), cos_)), add(const(c.imag), mul(const(r), sin_)),
                neg(mul(const(r), sin_)), mul(const(r), cos_))
    if isinstance(seg, PolynomialGraph):
        coeffs = seg.coeffs
        deriv = [c * (len(coeffs) - 1 - k) for k, c in enumerate(coeffs[:-1])] or [0.0]
        return p, poly_expr(coeffs, p), ONE, poly_expr(deriv, p)
    if isinstance(seg, HalfEllipse):
        c = complex(seg.center)
        cos_, sin_ = Cos(p), Sin(p)
        return (add(const(c.real), mul(const(seg.rx), cos_)), add(const(c.imag), mul(const(seg.ry), sin_)),
                neg(mul(const(seg.rx), sin_)), mul(const(seg.ry), cos_))
    raise LoweringError(f"cannot lower segment kind {type(seg).__name__}")


def _cmul(a, b):
    return sub(mul(a[0], b[0]), mul(a[1], b[1])), add(mul(a[0], b[1]), mul(a[1], b[0]))


def _cdiv(a, b):
    den = add(ipow(b[0], 2), ipow(b[1], 2))
    return (div(add(mul(a[0], b[0]), mul(a[1], b[1])), den),
            div(sub(mul(a[1], b[0]), mul(a[0], b[1])), den))


def _lower(e: Expr, z):
    if isinstance(e, Const):
        v = complex(e.value)
        return const(v.real), const(v.imag)
    if isinstance(e, Var):
        if e.name != "z":
            raise LoweringError(f"integrands are functions of z only, found {e.name!r}")
        return z
    if isinstance(e, Add):
        a, b = _lower(e.left, z), _lower(e.right, z)
        return add(a[0], b[0]), add(a[1], b[1])
    if isinstance(e, Neg):
        a = _lower(e.arg, z)
        return neg(a[0]), neg(a[1])
    if isinstance(e, Mul):
        return _cmul(_lower(e.left, z), _lower(e.right, z))
    if isinstance(e, Div):
        return _cdiv(_lower(e.left, z), _lower(e.right, z))
    if isinstance(e, IntPow):
        base = _lower(e.base, z)
        out = (ONE, ZERO)
        for _ in range(e.n):
            out = _cmul(out, base)
        return out
    if isinstance(e, Sinc):
        w = _lower(e.arg, z)
        return _cdiv(_lower_func(Sin, w), w)
    if isinstance(e, Func):
        return _lower_func(type(e), _lower(e.arg, z))
    raise LoweringError(f"cannot lower node {e!r}")


def _lower_func(cls, w):
    a, b = w
    if cls is Exp:
        ea = func(Exp, a)
        return mul(ea, func(Cos, b)), mul(ea, func(Sin, b))
    if cls is Sin:
        return mul(func(Sin, a), func(Cosh, b)), mul(func(Cos, a), func(Sinh, b))
    if cls is Cos:
        return mul(func(Cos, a), func(Cosh, b)), neg(mul(func(Sin, a), func(Sinh, b)))
    if cls is Sinh:
        return mul(func(Sinh, a), func(Cos, b)), mul(func(Cosh, a), func(Sin, b))
    if cls is Cosh:
        return mul(func(Cosh, a), func(Cos, b)), mul(func(Sinh, a), func(Sin, b))
    raise LoweringError(f"no lowering rule for {cls.__name__}")


def _vanishes_at_origin(e: Expr) -> bool:
    try:
        return abs(eval_expr(e, {"z": 0j})) < TAU_DIV
    except (DivisionNearZero, UnboundVariable):
        return True


def _check_removable(f: Expr, seg: PathSegment) -> None:
    risky = [n.arg for n in walk(f) if isinstance(n, Sinc)] + [n.right for n in walk(f) if isinstance(n, Div)]
    if any(_vanishes_at_origin(d) for d in risky) and seg.contains(0j, tol=1e-14):
        raise RemovablePointOnPath(
            f"{type(seg).__name__} passes through z = 0 where the lowered form of the integrand divides by zero"
        )


def lower(f: Expr, seg: PathSegment) -> LoweredIntegrand:
    """Real and imaginary parts of f(z(p)) dz/dp as expressions in p."""
    extra = free_vars(f) - {"z"}
    if extra:
        raise LoweringError(f"integrand may only depend on z, found {sorted(extra)}")
    _check_removable(f, seg)
    x, y, dx, dy = segment_symbolic(seg)
    fr, fi = _lower(f, (x, y))
    re_part, im_part = _cmul((fr, fi), (dx, dy))
    p0, p1 = seg.param_domain()
    note = f"{seg.param_name} runs {p0:.10g} -> {p1:.10g}; integral over the segment = integral of (re + i im) d{seg.param_name} in that direction"
    return LoweredIntegrand(re_part, im_part, seg.param_name, (float(p0), float(p1)), note, seg)


# ------------------------------------------------------ real evaluation


def eval_real_expr(e: RealExpr, bindings) -> float:
    """Scalar evaluation of a real tree with :mod:`math` (reference path)."""
    if isinstance(e, Const):
        v = complex(e.value)
        if v.imag:
            raise LoweringError("complex constant in a real expression")
        return v.real
    if isinstance(e, Var):
        try:
            return float(bindings[e.name])
        except KeyError:
            raise UnboundVariable(e.name) from None
    if isinstance(e, Add):
        return eval_real_expr(e.left, bindings) + eval_real_expr(e.right, bindings)
    if isinstance(e, Mul):
        return eval_real_expr(e.left, bindings) * eval_real_expr(e.right, bindings)
    if isinstance(e, Div):
        den = eval_real_expr(e.right, bindings)
        if abs(den) < TAU_DIV:
            raise DivisionNearZero("denominator vanishes")
        return eval_real_expr(e.left, bindings) / den
    if isinstance(e, Neg):
        return -eval_real_expr(e.arg, bindings)
    if isinstance(e, IntPow):
        base = eval_real_expr(e.base, bindings)
        out = 1.0
        for _ in range(e.n):
            out *= base
        return out
    if isinstance(e, Sinc):
        a = eval_real_expr(e.arg, bindings)
        return 1.0 - a * a / 6 + a ** 4 / 120 if abs(a) < 1e-3 else math.sin(a) / a
    if isinstance(e, Func):
        return _MATH[type(e)](eval_real_expr(e.arg, bindings))
    raise TypeError(f"not an expression node: {e!r}")


def to_real(e: Expr) -> RealExpr:
    """Copy of ``e`` with float constants; complex constants are rejected."""
    if isinstance(e, Const):
        v = complex(e.value)
        if v.imag != 0:
            raise LoweringError(f"constant {v!r} is not real")
        return Const(v.real)
    if isinstance(e, Var):
        return e
    if isinstance(e, IntPow):
        return IntPow(to_real(e.base), e.n)
    if isinstance(e, (Add, Mul, Div)):
        return type(e)(to_real(e.left), to_real(e.right))
    return type(e)(to_real(e.arg))


# ------------------------------------------------------ pointwise check


@dataclass(frozen=True)
class EquivReport:
    max_abs: float
    max_rel: float
    at: float  # sample point of the largest absolute deviation
    n: int
    scale: float  # max(|a|, |b|) over the samples

    def matches(self, rel_tol: float = 1e-12) -> bool:
        """Deviation small relative to the size of the functions compared."""
        return self.max_abs <= rel_tol * max(1.0, self.scale)


def chebyshev_points(lo: float, hi: float, n: int) -> np.ndarray:
    k = np.arange(n)
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos((2 * k + 1) * np.pi / (2 * n))


def pointwise_equiv(a: RealExpr, b: RealExpr, domain, n: int = 1000) -> EquivReport:
    """Max absolute and relative deviation of ``a`` and ``b`` on Chebyshev points."""
    va, vb = free_vars(a), free_vars(b)
    if len(va | vb) > 1:
        raise DomainMismatch(f"expressions use different variables: {sorted(va)} vs {sorted(vb)}")
    lo, hi = domain
    x = chebyshev_points(float(lo), float(hi), n)
    ya = kernels.eval_real(kernels.compile_expr(a), x)
    yb = kernels.eval_real(kernels.compile_expr(b), x)
    dev = np.abs(ya - yb)
    scale = np.maximum(np.abs(ya), np.abs(yb))
    rel = np.divide(dev, scale, out=np.zeros_like(dev), where=scale > 0)
    k = int(np.argmax(dev))
    return EquivReport(float(dev[k]), float(np.max(rel)), float(x[k]), n, float(np.max(scale)))
