"""Adaptive Gauss-Kronrod (7/15) quadrature along contours and real intervals.

All segments of a contour share one pool of panels.  The panel with the
largest error estimate is bisected until the summed estimate meets the
tolerance or the subdivision budget is spent.  The final value is a
compensated sum taken in (segment, left endpoint) order, so the result does
not depend on the order in which panels were refined or evaluated.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .contour import Contour, PathSegment
from .errors import EvaluationError
from .expr import Expr, free_vars

_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)

# ascending nodes on [-1, 1]
NODES = np.array([-x for x in _XGK[:7]] + [0.0] + [x for x in reversed(_XGK[:7])])
KRONROD_WEIGHTS = np.array(list(_WGK[:7]) + [_WGK[7]] + list(reversed(_WGK[:7])))
_g = [0.0, _WG[0], 0.0, _WG[1], 0.0, _WG[2], 0.0]
GAUSS_WEIGHTS = np.array(_g + [_WG[3]] + list(reversed(_g)))

EPS = np.finfo(float).eps
# per-panel roundoff allowance, in units of eps * integral of |g|
ROUNDOFF_FACTOR = 4.0
ABS_TOL_FLOOR = 1e-14


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-12
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not self.abs_tol >= ABS_TOL_FLOOR:
            raise ValueError(f"abs_tol must be >= {ABS_TOL_FLOOR:g}, got {self.abs_tol!r}")
        if not self.rel_tol >= 0:
            raise ValueError(f"rel_tol must be >= 0, got {self.rel_tol!r}")
        if self.max_subdivisions < 0:
            raise ValueError("max_subdivisions must be >= 0")


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    abs_error_estimate: float  # summed |Kronrod - Gauss| over the final panels
    evaluations: int
    converged: bool
    subdivisions: int
    resabs: float = 0.0  # integral of |g|; scale for roundoff arguments
    roundoff_estimate: float = 0.0  # rounding allowance, not part of abs_error_estimate

    def to_dict(self) -> dict:
        return {
            "value": {"re": self.value.real, "im": self.value.imag},
            "abs_error_estimate": self.abs_error_estimate,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "subdivisions": self.subdivisions,
            "roundoff_estimate": self.roundoff_estimate,
        }


class _SegmentIntegrand:
    def __init__(self, prog, seg: PathSegment, index: int):
        self.prog = prog
        self.seg = seg
        self.index = index

    def __call__(self, s):
        z, dz = self.seg.points(s)
        try:
            f = kernels.eval_complex(self.prog, z)
        except EvaluationError as exc:
            raise EvaluationError(str(exc), location=f"segment {self.index} ({type(self.seg).__name__})") from exc
        return f * dz


class _RealIntegrand:
    def __init__(self, prog, lo: float, hi: float):
        self.prog = prog
        self.lo = lo
        self.width = hi - lo

    def __call__(self, s):
        x = self.lo + s * self.width
        try:
            g = kernels.eval_real(self.prog, x)
        except EvaluationError as exc:
            raise EvaluationError(str(exc), location=f"interval [{self.lo}, {self.lo + self.width}]") from exc
        return (g * self.width).astype(complex)


def _evaluate(piece, lefts, rights):
    lefts = np.asarray(lefts, dtype=float)
    rights = np.asarray(rights, dtype=float)
    hw = 0.5 * (rights - lefts)
    centre = 0.5 * (rights + lefts)
    s = (centre[:, None] + hw[:, None] * NODES[None, :]).ravel()
    g = piece(s)
    if not np.all(np.isfinite(g)):
        raise EvaluationError("integrand is not finite on the path",
                              location=getattr(piece, "index", None))
    vals, err, resabs = kernels.gk15(g, hw, KRONROD_WEIGHTS, GAUSS_WEIGHTS)
    return vals, err, resabs, ROUNDOFF_FACTOR * EPS * resabs


def adaptive(pieces, tol: Tolerance) -> QuadratureResult:
    """Integrate a list of callables ``g(s)`` over ``s`` in [0, 1] and sum them.

    Each panel carries its Kronrod-Gauss difference and a roundoff allowance
    ``ROUNDOFF_FACTOR * eps * integral |g|``.  Convergence compares the sum of
    the per-panel maxima with the tolerance; panels whose difference is below
    their allowance are never refined again.
    """
    panels = {}  # (piece, left) -> (right, value, err, roundoff, resabs)
    heap = []
    evaluations = 0

    def store(k, lefts, rights, out):
        vals, err, resabs, roundoff = out
        for j, (left, right) in enumerate(zip(lefts, rights)):
            e, r = float(err[j]), float(roundoff[j])
            panels[(k, left)] = (right, complex(vals[j]), e, r, float(resabs[j]))
            if e > r:
                heapq.heappush(heap, (-e, k, left))

    for k, piece in enumerate(pieces):
        store(k, [0.0], [1.0], _evaluate(piece, [0.0], [1.0]))
        evaluations += 15

    subdivisions = 0
    while True:
        total_err = math.fsum(max(p[2], p[3]) for p in panels.values())
        approx = sum(p[1] for p in panels.values())
        target = max(tol.abs_tol, tol.rel_tol * abs(approx))
        if total_err <= target or subdivisions >= tol.max_subdivisions or not heap:
            break
        _, k, a = heapq.heappop(heap)
        b = panels[(k, a)][0]
        m = 0.5 * (a + b)
        if not a < m < b:
            # panel cannot be split further in double precision
            break
        del panels[(k, a)]
        store(k, [a, m], [m, b], _evaluate(pieces[k], [a, m], [m, b]))
        evaluations += 30
        subdivisions += 1

    order = sorted(panels)
    values = np.array([panels[key][1] for key in order], dtype=complex)
    value = complex(kernels.neumaier_sum(values.real), kernels.neumaier_sum(values.imag))
    effective = math.fsum(max(panels[key][2], panels[key][3]) for key in order)
    return QuadratureResult(
        value,
        math.fsum(panels[key][2] for key in order),
        evaluations,
        effective <= max(tol.abs_tol, tol.rel_tol * abs(value)),
        subdivisions,
        math.fsum(panels[key][4] for key in order),
        math.fsum(panels[key][3] for key in order),
    )


def _program_for(f: Expr):
    extra = free_vars(f) - {"z"}
    if extra:
        raise EvaluationError(f"integrand may only depend on z, found {sorted(extra)}")
    return kernels.compile_expr(f)


def integrate_contour(f: Expr, c: Contour | PathSegment, tol: Tolerance = Tolerance()) -> QuadratureResult:
    """Path integral of ``f(z) dz`` along every segment of ``c``."""
    segments = (c,) if isinstance(c, PathSegment) else c.segments
    prog = _program_for(f)
    return adaptive([_SegmentIntegrand(prog, seg, k) for k, seg in enumerate(segments)], tol)


def integrate_real(g: Expr, lo: float, hi: float, tol: Tolerance = Tolerance()) -> QuadratureResult:
    """Integral of a real expression in one variable over [lo, hi] (oriented)."""
    if len(free_vars(g)) > 1:
        raise EvaluationError(f"real integrand must have one free variable, found {sorted(free_vars(g))}")
    prog = kernels.compile_expr(g)
    if np.any(prog.cim != 0):
        raise EvaluationError("real integrand contains complex constants")
    return adaptive([_RealIntegrand(prog, float(lo), float(hi))], tol)


def integrand_amplitude(f: Expr, c: Contour | PathSegment, n: int = 2001) -> float:
    """max |f(z(s)) z'(s)| over a uniform grid of ``n`` points per segment."""
    segments = (c,) if isinstance(c, PathSegment) else c.segments
    prog = _program_for(f)
    s = np.linspace(0.0, 1.0, n)
    amp = 0.0
    for seg in segments:
        z, dz = seg.points(s)
        g = kernels.eval_complex(prog, z) * dz
        a = float(np.max(np.abs(g)))
        amp = max(amp, a if math.isfinite(a) else math.inf)
    return amp


def conditioning_floor(f: Expr, c: Contour | PathSegment) -> float:
    """Smallest verifiable absolute tolerance: amplitude times machine epsilon."""
    return float(integrand_amplitude(f, c) * EPS)
