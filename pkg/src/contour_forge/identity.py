"""Numerical verification of the built-in identities.

Every closure record rests on the same finite-R fact: for an entire ``f``,
the loop ``[-R, R]`` followed by the closure (run from +R to -R) has zero
integral, hence

    integral over closure = - integral_{-R}^{R} f(x) dx        (every R)

The strange integrals are the lowered closure integrals, checked against the
segment integral at moderate R.  Limits are only ever taken on the segment
form, which stays well conditioned for large R.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .contour import (
    ORIENTATION, CircularArc, Contour, ContourFamily, Line, make_family,
)
from .errors import ConditioningLimit, EndpointMismatch, InputError
from .expr import EntiretyTag, Expr, parse_expr
from .lowering import LoweredIntegrand, RealExpr, const, lower, mul, pointwise_equiv, to_real
from .quadrature import ROUNDOFF_FACTOR, QuadratureResult, Tolerance, conditioning_floor, integrate_contour, integrate_real

# Floors above this leave nothing meaningful to compare for O(1) targets.
CONDITIONING_CEILING = 1e-6

# correctly rounded; math.sqrt(math.pi) lands one ulp low
SQRT_PI = 1.7724538509055160273


@dataclass(frozen=True)
class IdentityRecord:
    name: str
    f: Expr
    family: ContourFamily
    target: complex
    target_provenance: str
    kind: str = "closure"  # closure | small_circle | arc
    lowered_reference: Callable[[float], RealExpr] | None = None
    reference_sign: float = 1.0  # printed form == reference_sign * lowered re_part
    derived_reference: Callable[[float], RealExpr] | None = None
    notes: str = ""
    aux_params: dict = field(default_factory=dict)
    entirety: EntiretyTag = EntiretyTag.ENTIRE
    default_R: float = 3.0
    default_ladder: tuple[float, ...] = ()
    ladder_tol: float = 1e-10
    limit_tol: float = 1e-10


@dataclass(frozen=True)
class RLadder:
    values: tuple[float, ...]
    tol: float = 1e-10
    mode: str = "explicit"

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise InputError("ladder must not be empty")
        if any(v <= 0 for v in vals) or any(b <= a for a, b in zip(vals, vals[1:])):
            raise InputError(f"ladder values must be positive and strictly increasing, got {vals}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def geometric(cls, r0: float, factor: float, count: int, tol: float = 1e-10) -> "RLadder":
        return cls(tuple(r0 * factor ** k for k in range(count)), tol, "geometric")

    @classmethod
    def explicit(cls, values: Sequence[float], tol: float = 1e-10) -> "RLadder":
        return cls(tuple(values), tol, "explicit")

    @classmethod
    def parse(cls, text: str, tol: float = 1e-10) -> "RLadder":
        """``a:b:step`` (inclusive arithmetic ladder) or a comma list."""
        try:
            if ":" in text:
                a, b, step = (float(x) for x in text.split(":"))
                if step <= 0:
                    raise ValueError("step must be positive")
                n = int(math.floor((b - a) / step + 1e-9)) + 1
                return cls(tuple(a + k * step for k in range(n)), tol, "explicit")
            return cls(tuple(float(x) for x in text.split(",") if x.strip()), tol, "explicit")
        except ValueError as exc:
            raise InputError(f"bad ladder {text!r}: {exc}") from None


@dataclass
class VerificationReport:
    identity: str
    orientation: str
    R_values: list
    residuals: list
    conditioning_floors: list
    tolerances: list  # per residual; None = reported only
    limit_estimate: complex | None
    target: complex | None
    limit_residual: float | None
    limit_tol: float | None
    passed: bool
    notes: list = field(default_factory=list)
    wall_time_ms: float = 0.0
    quadrature_converged: bool = True
    ladder_converged: bool | None = None
    values: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        def cv(v):
            return None if v is None else {"re": complex(v).real, "im": complex(v).imag}

        return {
            "identity": self.identity,
            "orientation": self.orientation,
            "R_values": [float(r) for r in self.R_values],
            "residuals": [float(r) for r in self.residuals],
            "conditioning_floors": [float(r) for r in self.conditioning_floors],
            "limit_estimate": cv(self.limit_estimate),
            "target": cv(self.target),
            "limit_residual": None if self.limit_residual is None else float(self.limit_residual),
            "pass": bool(self.passed),
            "notes": "; ".join(self.notes),
            "wall_time_ms": float(self.wall_time_ms),
        }


def _quad_tol(eff_tol: float, floor: float, tol: Tolerance) -> Tolerance:
    # roundoff allowance is at most ROUNDOFF_FACTOR * floor; never ask for less
    abs_tol = max(eff_tol / 10, 2 * ROUNDOFF_FACTOR * floor, 1e-14)
    return Tolerance(abs_tol, tol.rel_tol, tol.max_subdivisions)


def _guard(floor: float, what: str) -> None:
    if not floor <= CONDITIONING_CEILING:
        raise ConditioningLimit(floor, CONDITIONING_CEILING, what)


def _as_contour(c) -> Contour:
    return c if isinstance(c, Contour) else Contour((c,))


def path_equivalence(f: Expr, a, b, tol: Tolerance = Tolerance(),
                     entirety: EntiretyTag = EntiretyTag.UNKNOWN, name: str = "path_equivalence") -> VerificationReport:
    """Compare the integrals of ``f`` along two paths with common endpoints."""
    t0 = time.perf_counter()
    a, b = _as_contour(a), _as_contour(b)
    eps = max(a.eps_chain, b.eps_chain)
    if abs(a.start - b.start) > eps or abs(a.end - b.end) > eps:
        raise EndpointMismatch(
            f"paths do not share endpoints: {a.start:.6g} -> {a.end:.6g} vs {b.start:.6g} -> {b.end:.6g}"
        )
    if entirety is EntiretyTag.UNKNOWN:
        warnings.warn("integrand entirety is unknown; path independence is assumed, not known", stacklevel=2)
    floor = max(conditioning_floor(f, a), conditioning_floor(f, b))
    _guard(floor, name)
    eff = max(tol.abs_tol, floor)
    qtol = _quad_tol(eff, floor, tol)
    ia, ib = integrate_contour(f, a, qtol), integrate_contour(f, b, qtol)
    residual = abs(ia.value - ib.value)
    converged = ia.converged and ib.converged
    notes = [f"path A integral {_fmt(ia.value)}", f"path B integral {_fmt(ib.value)}",
             f"tolerance max(abs_tol, floor) = {eff:.3e}"]
    if not converged:
        notes.append("quadrature did not converge")
    return VerificationReport(
        name, "both paths run from a common start to a common end", [], [residual], [floor], [eff],
        ia.value, ib.value, residual, eff, converged and residual <= eff, notes,
        (time.perf_counter() - t0) * 1e3, converged, None, [ia.value, ib.value],
    )


def _fmt(v: complex) -> str:
    return f"{v.real:.10g}{v.imag:+.10g}i"


def integrate_lowered(parts: Sequence[LoweredIntegrand], tol: Tolerance) -> tuple[complex, list[QuadratureResult]]:
    """Sum over segments of the integrals of re_part and im_part."""
    results = []
    total = 0j
    for li in parts:
        lo, hi = li.domain
        r = integrate_real(li.re_part, lo, hi, tol)
        i = integrate_real(li.im_part, lo, hi, tol)
        results += [r, i]
        total += complex(r.value.real, i.value.real)
    return total, results


def closure_contour(rec: IdentityRecord, R: float) -> Contour:
    return rec.family(R, **rec.aux_params)


def strange_vs_segment(rec: IdentityRecord, R: float, tol: Tolerance = Tolerance()) -> VerificationReport:
    """Finite-R identity: lowered closure integral = - segment integral."""
    if rec.kind != "closure":
        raise InputError(f"{rec.name} is not a closure identity")
    t0 = time.perf_counter()
    closure = closure_contour(rec, R)
    segment = Contour((Line(complex(-R), complex(R)),))
    floor = max(conditioning_floor(rec.f, closure), conditioning_floor(rec.f, segment))
    _guard(floor, f"{rec.name} at R={R:g}")
    eff = max(tol.abs_tol, floor)
    qtol = _quad_tol(eff, floor, tol)
    parts = [lower(rec.f, seg) for seg in closure.segments]
    strange, results = integrate_lowered(parts, qtol)
    seg_int = integrate_contour(rec.f, segment, qtol)
    residual = abs(strange + seg_int.value)
    re_res = abs(strange.real + seg_int.value.real)
    im_res = abs(strange.imag)
    converged = seg_int.converged and all(r.converged for r in results)
    notes = [
        f"strange (closure) integral {_fmt(strange)}",
        f"segment integral {_fmt(seg_int.value)}",
        f"real residual {re_res:.3e}, imaginary part {im_res:.3e}",
        f"tolerance max(abs_tol, floor) = {eff:.3e}",
        "closure integral = -segment integral under this orientation",
    ]
    notes += _reference_notes(rec, R, parts)
    if not converged:
        notes.append("quadrature did not converge")
    if rec.notes:
        notes.append(rec.notes)
    estimate = -strange
    return VerificationReport(
        rec.name, ORIENTATION, [R], [residual], [floor], [eff], estimate, rec.target,
        abs(estimate - rec.target), None,
        converged and re_res <= eff and im_res <= eff and residual <= eff,
        notes, (time.perf_counter() - t0) * 1e3, converged, None, [strange, seg_int.value],
    )


def _reference_notes(rec: IdentityRecord, R: float, parts) -> list[str]:
    if rec.lowered_reference is None or len(parts) != 1:
        return []
    li = parts[0]
    out = []
    printed = pointwise_equiv(mul(const(rec.reference_sign), li.re_part), rec.lowered_reference(R), li.domain)
    ok = printed.matches()
    sign = "" if rec.reference_sign > 0 else "-"
    out.append(f"printed form vs {sign}re_part: max abs dev {printed.max_abs:.3e} ({'match' if ok else 'MISMATCH'})")
    if rec.derived_reference is not None:
        d = pointwise_equiv(li.re_part, rec.derived_reference(R), li.domain)
        out.append(f"derived form vs re_part: max abs dev {d.max_abs:.3e} ({'match' if d.matches() else 'MISMATCH'})")
    return out


def limit_study(rec: IdentityRecord, ladder: RLadder, tol: Tolerance = Tolerance()) -> VerificationReport:
    """R -> infinity on the segment form I(R) = integral over [-R, R]."""
    if rec.kind != "closure":
        raise InputError(f"{rec.name} has no segment form; use its small-circle/arc check")
    t0 = time.perf_counter()
    values, residuals, floors, tols = [], [], [], []
    converged = True
    for R in ladder.values:
        seg = Contour((Line(complex(-R), complex(R)),))
        res = integrate_contour(rec.f, seg, tol)
        converged &= res.converged
        values.append(res.value)
        residuals.append(abs(res.value - rec.target))
        floors.append(conditioning_floor(rec.f, seg))
        tols.append(None)
    tols[-1] = rec.limit_tol
    step = abs(values[-1] - values[-2]) if len(values) >= 2 else math.inf
    ladder_ok = step < ladder.tol
    estimate = values[-1]
    limit_res = abs(estimate - rec.target)
    notes = [f"final step |I(R_n) - I(R_n-1)| = {step:.3e} (convergence tol {ladder.tol:.1e})",
             f"limit tolerance {rec.limit_tol:.1e}"]
    if not ladder_ok:
        notes.append("LadderNotConverged")
    if not converged:
        notes.append("quadrature did not converge")
    return VerificationReport(
        rec.name, "segment form: integral over [-R, R] run left to right", list(ladder.values), residuals,
        floors, tols, estimate, rec.target, limit_res, rec.limit_tol,
        ladder_ok and converged and limit_res <= rec.limit_tol, notes,
        (time.perf_counter() - t0) * 1e3, converged, ladder_ok, values,
    )


_EXP_IZ_OVER_Z = parse_expr("exp(i*z)/z")


def small_circle_check(eps_values: Sequence[float], tol: Tolerance = Tolerance()) -> VerificationReport:
    """Clockwise arc |z| = eps, theta: pi -> 0, of exp(iz)/z against -i pi."""
    t0 = time.perf_counter()
    eps_values = [float(e) for e in eps_values]
    if not eps_values or any(not 0 < e < 1 for e in eps_values):
        raise InputError("eps values must lie in (0, 1)")
    if any(b >= a for a, b in zip(eps_values, eps_values[1:])):
        raise InputError("eps ladder must be strictly decreasing")
    target = -1j * math.pi
    values, residuals, converged = [], [], True
    for eps in eps_values:
        r = integrate_contour(_EXP_IZ_OVER_Z, Contour((CircularArc(0j, eps, math.pi, 0.0),)), tol)
        converged &= r.converged
        values.append(r.value)
        residuals.append(abs(r.value - target))
    tols = [5 * e for e in eps_values]
    ratios = [residuals[k] / residuals[k + 1] for k in range(len(residuals) - 1)]
    scaled = [ratios[k] / (eps_values[k] / eps_values[k + 1]) for k in range(len(ratios))]
    ratio_ok = all(0.8 <= s <= 1.2 for s in scaled)
    ok = ratio_ok and converged and all(r <= t for r, t in zip(residuals, tols))
    notes = ["residual tolerance 5 eps", "residual ratios " + ", ".join(f"{x:.4g}" for x in ratios)
             + " (expected eps ratio within 20%)"]
    return VerificationReport(
        "small_circle_sinc_exp", "clockwise small arc, theta: pi -> 0", eps_values, residuals,
        [0.0] * len(eps_values), tols, values[-1], target, residuals[-1], tols[-1], ok, notes,
        (time.perf_counter() - t0) * 1e3, converged, None, values,
    )


def arc_vanishing_check(R_values: Sequence[float], tol: Tolerance = Tolerance()) -> VerificationReport:
    """Upper semicircle integral of exp(iz)/z against the bound 1.5 pi / R."""
    t0 = time.perf_counter()
    R_values = [float(R) for R in R_values]
    if not R_values or any(R < 1 for R in R_values):
        raise InputError("R values must be >= 1")
    values, residuals, converged = [], [], True
    for R in R_values:
        r = integrate_contour(_EXP_IZ_OVER_Z, Contour((CircularArc(0j, R, 0.0, math.pi),)), tol)
        converged &= r.converged
        values.append(r.value)
        residuals.append(abs(r.value))
    tols = [1.5 * math.pi / R for R in R_values]
    ok = converged and all(r <= t for r, t in zip(residuals, tols))
    notes = ["bound 1.5 pi / R per R"]
    if not converged:
        notes.append("NotConverged: quadrature budget exhausted")
    return VerificationReport(
        "jordan_arc_exp", "upper semicircle, theta: 0 -> pi", R_values, residuals, [0.0] * len(R_values),
        tols, values[-1], 0j, residuals[-1], tols[-1], ok, notes,
        (time.perf_counter() - t0) * 1e3, converged, None, values,
    )


# ---------------------------------------------------------------- catalog


def _real_src(template: str):
    def build(R: float) -> RealExpr:
        return to_real(parse_expr(template.format(R=repr(float(R)))))
    return build


def builtin_catalog() -> list[IdentityRecord]:
    gauss = parse_expr("exp(-z^2)")
    semicircle = make_family("semicircle_closure")
    return [
        IdentityRecord(
            "eq1_gaussian_semicircle", gauss, semicircle, complex(SQRT_PI),
            "integral of exp(-x^2) over the real line = sqrt(pi)",
            lowered_reference=_real_src("{R} * exp(-({R})^2 * cos(2 * theta)) * sin(({R})^2 * sin(2 * theta) - theta)"),
            reference_sign=1.0,
            notes=("printed integrand R e^(-R^2 cos 2theta) sin(R^2 sin 2theta - theta) equals re_part on "
                   "theta: 0 -> pi; its integral is -I(R), so minus the strange integral tends to sqrt(pi)"),
            default_R=3.0, default_ladder=(1, 2, 3, 4, 5, 6), ladder_tol=1e-10, limit_tol=1e-10,
        ),
        IdentityRecord(
            "eq3_sinc_semicircle", parse_expr("sinc(z)"), semicircle, complex(math.pi),
            "integral of sin(x)/x over the real line = pi (a = 1)",
            lowered_reference=_real_src("cos({R} * cos(theta)) * sinh({R} * sin(theta))"),
            reference_sign=-1.0,
            notes=("printed integrand cos(R cos theta) sinh(R sin theta) equals -re_part on theta: 0 -> pi; "
                   "its integral equals I(R) at every R. With this orientation the closure integral "
                   "tends to -pi (the printed -pi relation)"),
            entirety=EntiretyTag.ENTIRE_BY_REMOVABLE_SINGULARITY,
            default_R=5.0, default_ladder=(25, 50, 100, 200), ladder_tol=2e-2, limit_tol=1e-2,
        ),
        IdentityRecord(
            "parabola_gaussian", gauss, make_family("parabola_closure"), complex(SQRT_PI),
            "integral of exp(-x^2) over the real line = sqrt(pi)",
            lowered_reference=_real_src(
                "exp((t^2 - ({R})^2)^2 - t^2) * (cos(2 * t^3 - t * ({R})^2) + 2 * t * sin(2 * t^3 - t * ({R})^2))"),
            reference_sign=1.0,
            derived_reference=_real_src(
                "exp((t^2 - ({R})^2)^2 - t^2) * (cos(2 * t^3 - 2 * t * ({R})^2) + 2 * t * sin(2 * t^3 - 2 * t * ({R})^2))"),
            notes=("derived from f(z) = exp(-z^2) (the printed exp(z^2) does not give the printed exponent); "
                   "printed phase 2t^3 - tp^2 read with p = R differs from the derived 2t^3 - 2tR^2 and "
                   "fails the pointwise check; closure runs t: R -> -R"),
            default_R=2.0, default_ladder=(1, 2, 3, 4, 5, 6), ladder_tol=1e-10, limit_tol=1e-10,
        ),
        IdentityRecord(
            "small_circle_sinc_exp", _EXP_IZ_OVER_Z, make_family("indented_semicircle_loop"), -1j * math.pi,
            "limit eps -> 0 of the small-arc integral of exp(iz)/z = -i pi",
            kind="small_circle",
            notes="small arc |z| = eps traversed clockwise (theta: pi -> 0), the fourth piece of the indented loop",
            aux_params={"eps": 1e-3}, entirety=EntiretyTag.NOT_ENTIRE,
            default_ladder=(1e-2, 1e-3, 1e-4), limit_tol=5e-4,
        ),
        IdentityRecord(
            "jordan_arc_exp", _EXP_IZ_OVER_Z, semicircle, 0j,
            "limit R -> infinity of the upper-arc integral of exp(iz)/z = 0 (Jordan bound pi/R)",
            kind="arc",
            notes="upper semicircle theta: 0 -> pi; |integral| <= pi/R, checked with 1.5x slack",
            entirety=EntiretyTag.NOT_ENTIRE, default_ladder=(10, 50, 100),
        ),
    ]


def get_record(name: str) -> IdentityRecord:
    for rec in builtin_catalog():
        if rec.name == name:
            return rec
    raise InputError(f"unknown identity {name!r}; known: {', '.join(r.name for r in builtin_catalog())}")
