"""Parametrized path segments, contours and the R-indexed closure families.

Every segment is traversed for ``s`` in ``[0, 1]`` and also exposes its
natural parameter (``t`` for lines and polynomial graphs, ``theta`` for arcs
and ellipses), which is what the lowering step writes integrands in.

Closure families run from ``+R`` to ``-R``; appending the real segment
``[-R, R]`` in front of a closure produces a closed loop.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ContourSpecError, InvalidFamilyParams, ParameterOutOfRange
from .expr import const_value, parse_expr

ORIENTATION = "closures run from +R to -R; loop = [-R, R] followed by the closure"


def _check_s(s):
    if np.any(np.asarray(s) < 0.0) or np.any(np.asarray(s) > 1.0):
        raise ParameterOutOfRange(f"segment parameter must lie in [0, 1], got {s!r}")


class PathSegment:
    """Common interface; concrete kinds are frozen dataclasses below."""

    param_name = "s"

    def param_domain(self) -> tuple[float, float]:
        raise NotImplementedError

    def at_param(self, p):
        """Position and derivative with respect to the natural parameter."""
        raise NotImplementedError

    def points(self, s):
        """Vectorised position and velocity (d/ds) at ``s`` (array_like)."""
        s = np.asarray(s, dtype=float)
        p0, p1 = self.param_domain()
        z, dz = self.at_param(p0 + s * (p1 - p0))
        return z, dz * (p1 - p0)

    def reverse(self) -> "PathSegment":
        raise NotImplementedError

    @property
    def start(self) -> complex:
        return complex(self.points(0.0)[0])

    @property
    def end(self) -> complex:
        return complex(self.points(1.0)[0])

    def contains(self, w: complex, tol: float = 1e-12) -> bool:
        """Whether the point ``w`` lies on the segment (within ``tol``)."""
        raise NotImplementedError

    def length(self, n: int = 2049) -> float:
        _, dz = self.points(np.linspace(0.0, 1.0, n))
        speed = np.abs(dz)
        return float((speed.sum() - 0.5 * (speed[0] + speed[-1])) / (n - 1))


def segment_point(seg: PathSegment, s: float) -> tuple[complex, complex]:
    """Exact position ``z(s)`` and velocity ``dz/ds`` for ``s`` in [0, 1]."""
    _check_s(s)
    z, dz = seg.points(s)
    return complex(z), complex(dz)


@dataclass(frozen=True)
class Line(PathSegment):
    a: complex
    b: complex

    param_name = "t"

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))

    def param_domain(self):
        return (0.0, 1.0)

    def at_param(self, p):
        p = np.asarray(p, dtype=float)
        d = complex(self.b) - complex(self.a)
        return self.a + p * d, np.full(p.shape, d, dtype=complex) if p.shape else d

    def reverse(self):
        return Line(self.b, self.a)

    @property
    def start(self):
        return complex(self.a)

    @property
    def end(self):
        return complex(self.b)

    def contains(self, w, tol=1e-12):
        a, b = complex(self.a), complex(self.b)
        d = b - a
        if d == 0:
            return abs(w - a) <= tol
        u = ((w - a) * d.conjugate()).real / abs(d) ** 2
        u = min(1.0, max(0.0, u))
        return abs(a + u * d - w) <= tol * max(1.0, abs(d))


@dataclass(frozen=True)
class CircularArc(PathSegment):
    center: complex
    radius: float
    theta0: float
    theta1: float

    param_name = "theta"

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if not self.radius > 0:
            raise InvalidFamilyParams(f"arc radius must be positive, got {self.radius}")

    def param_domain(self):
        return (self.theta0, self.theta1)

    def at_param(self, p):
        e = np.exp(1j * np.asarray(p, dtype=float))
        return self.center + self.radius * e, 1j * self.radius * e

    def reverse(self):
        return CircularArc(self.center, self.radius, self.theta1, self.theta0)

    def contains(self, w, tol=1e-12):
        d = complex(w) - complex(self.center)
        if abs(abs(d) - self.radius) > tol * max(1.0, self.radius):
            return False
        lo, hi = sorted((self.theta0, self.theta1))
        ang = math.atan2(d.imag, d.real)
        for k in range(-2, 3):
            if lo - 1e-12 <= ang + 2 * math.pi * k <= hi + 1e-12:
                return True
        return False


@dataclass(frozen=True)
class PolynomialGraph(PathSegment):
    """z = t + i p(t); ``coeffs`` highest degree first."""

    coeffs: tuple[float, ...]
    t0: float
    t1: float

    param_name = "t"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def param_domain(self):
        return (self.t0, self.t1)

    def at_param(self, p):
        t = np.asarray(p, dtype=float)
        c = np.asarray(self.coeffs)
        dc = np.polyder(c) if len(c) > 1 else np.zeros(1)
        return t + 1j * np.polyval(c, t), 1.0 + 1j * np.polyval(dc, t)

    def reverse(self):
        return PolynomialGraph(self.coeffs, self.t1, self.t0)

    def contains(self, w, tol=1e-12):
        lo, hi = sorted((self.t0, self.t1))
        t = complex(w).real
        if not lo - tol <= t <= hi + tol:
            return False
        return abs(np.polyval(self.coeffs, t) - complex(w).imag) <= tol * max(1.0, abs(t))


@dataclass(frozen=True)
class HalfEllipse(PathSegment):
    center: complex
    rx: float
    ry: float
    theta0: float
    theta1: float

    param_name = "theta"

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if not (self.rx > 0 and self.ry > 0):
            raise InvalidFamilyParams(f"ellipse semi-axes must be positive, got rx={self.rx}, ry={self.ry}")

    def param_domain(self):
        return (self.theta0, self.theta1)

    def at_param(self, p):
        th = np.asarray(p, dtype=float)
        c, s = np.cos(th), np.sin(th)
        return (self.center + self.rx * c + 1j * self.ry * s,
                -self.rx * s + 1j * self.ry * c)

    def reverse(self):
        return HalfEllipse(self.center, self.rx, self.ry, self.theta1, self.theta0)

    def contains(self, w, tol=1e-12):
        d = complex(w) - complex(self.center)
        x, y = d.real / self.rx, d.imag / self.ry
        if abs(math.hypot(x, y) - 1.0) > tol:
            return False
        lo, hi = sorted((self.theta0, self.theta1))
        ang = math.atan2(y, x)
        return any(lo - 1e-12 <= ang + 2 * math.pi * k <= hi + 1e-12 for k in range(-2, 3))


@dataclass(frozen=True)
class Contour:
    segments: tuple[PathSegment, ...]
    eps_chain: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise InvalidFamilyParams("a contour needs at least one segment")
        if self.eps_chain is None:
            scale = max(max(abs(s.start), abs(s.end)) for s in self.segments)
            object.__setattr__(self, "eps_chain", 1e-12 * max(1.0, scale))

    @property
    def start(self) -> complex:
        return self.segments[0].start

    @property
    def end(self) -> complex:
        return self.segments[-1].end

    def chains(self) -> bool:
        return all(
            abs(a.end - b.start) <= self.eps_chain
            for a, b in zip(self.segments, self.segments[1:])
        )

    def closed(self) -> bool:
        return abs(self.end - self.start) <= self.eps_chain

    def reverse(self) -> "Contour":
        return reverse(self)

    def length(self) -> float:
        return sum(s.length() for s in self.segments)

    def __iter__(self):
        return iter(self.segments)

    def __len__(self):
        return len(self.segments)


def reverse(c: Contour | PathSegment):
    """Reverse traversal: segment order flipped, each re-parametrized s -> 1 - s."""
    if isinstance(c, PathSegment):
        return c.reverse()
    return Contour(tuple(seg.reverse() for seg in reversed(c.segments)), c.eps_chain)


# --------------------------------------------------------------- families


@dataclass(frozen=True)
class ContourFamily:
    name: str
    generator: Callable[[float, Mapping[str, object]], Contour]
    aux_schema: Mapping[str, object] = field(default_factory=dict)
    closure_only: bool = True
    description: str = ""

    def __call__(self, R: float, **aux) -> Contour:
        if not R > 0:
            raise InvalidFamilyParams(f"R must be positive, got {R}")
        unknown = set(aux) - set(self.aux_schema)
        if unknown:
            raise InvalidFamilyParams(f"{self.name}: unknown parameters {sorted(unknown)}")
        params = {**self.aux_schema, **aux}
        contour = self.generator(float(R), params)
        chain = 1e-12 * max(1.0, R)
        contour = Contour(contour.segments, chain)
        if not contour.chains():
            raise InvalidFamilyParams(f"{self.name}: generated segments do not chain")
        return contour


def validate_polygraph(coeffs: Sequence[float], R: float, grid: int = 10_000) -> None:
    """Check p(+-R) = 0 and that p keeps one strict sign on (-R, R)."""
    coeffs = [float(c) for c in coeffs]
    if len(coeffs) - 1 > 16:
        raise InvalidFamilyParams("polynomial graphs support degree <= 16")
    if len(coeffs) < 2:
        raise InvalidFamilyParams("polynomial must have real roots at -R and R")
    scale = max(1.0, float(np.max(np.abs(np.polyval(coeffs, np.linspace(-R, R, 101))))))
    for end in (-R, R):
        if abs(np.polyval(coeffs, end)) > 1e-10 * scale:
            raise InvalidFamilyParams(f"p({end:g}) = {np.polyval(coeffs, end):g}, expected 0")
    t = np.linspace(-R, R, grid + 2)[1:-1]
    vals = np.polyval(coeffs, t)
    if not (np.all(vals > 0) or np.all(vals < 0)):
        raise InvalidFamilyParams("polynomial has real roots strictly inside (-R, R)")


def _semicircle(R, aux):
    return Contour((CircularArc(0j, R, 0.0, math.pi),))


def _parabola(R, aux):
    return Contour((PolynomialGraph((1.0, 0.0, -R * R), R, -R),))


def _polygraph(R, aux):
    coeffs = aux.get("coeffs")
    if coeffs is None:
        coeffs = (1.0, 0.0, -R * R)
    validate_polygraph(coeffs, R)
    return Contour((PolynomialGraph(tuple(coeffs), R, -R),))


def _half_ellipse(R, aux):
    ry = aux.get("ry")
    ry = R if ry is None else float(ry)
    return Contour((HalfEllipse(0j, R, ry, 0.0, math.pi),))


def _indented(R, aux):
    eps = float(aux.get("eps", 1e-3))
    if not 0 < eps < R:
        raise InvalidFamilyParams(f"indentation radius must satisfy 0 < eps < R, got eps={eps}, R={R}")
    return Contour((
        Line(complex(eps), complex(R)),
        CircularArc(0j, R, 0.0, math.pi),
        Line(complex(-R), complex(-eps)),
        CircularArc(0j, eps, math.pi, 0.0),
    ))


_BASE_FAMILIES = {
    "semicircle_closure": (_semicircle, {}, "upper semicircle |z| = R, theta: 0 -> pi"),
    "parabola_closure": (_parabola, {}, "z = t + i(t^2 - R^2), t: R -> -R"),
    "polygraph_closure": (_polygraph, {"coeffs": None}, "z = t + i p(t), t: R -> -R; p(+-R) = 0"),
    "half_ellipse_closure": (_half_ellipse, {"ry": None}, "z = R cos(theta) + i ry sin(theta), theta: 0 -> pi"),
}

CLOSURE_FAMILIES = tuple(_BASE_FAMILIES)


def full_loop(base: ContourFamily) -> ContourFamily:
    """Close ``base``: the real segment [-R, R] followed by the closure."""
    if not base.closure_only:
        raise InvalidFamilyParams(f"{base.name} is already a closed loop")

    def gen(R, aux):
        closure = base.generator(R, aux)
        return Contour((Line(complex(-R), complex(R)),) + closure.segments)

    return ContourFamily(f"full_loop({base.name})", gen, dict(base.aux_schema), False,
                         f"[-R, R] then {base.description}")


def make_family(name: str) -> ContourFamily:
    """Family by name, e.g. ``"parabola_closure"`` or ``"full_loop(parabola_closure)"``."""
    m = re.fullmatch(r"\s*full_loop\(\s*(\w+)\s*\)\s*", name)
    if m:
        return full_loop(make_family(m.group(1)))
    if name == "indented_semicircle_loop":
        return ContourFamily(name, _indented, {"eps": 1e-3}, False,
                             "[eps, R], arc R: 0 -> pi, [-R, -eps], arc eps: pi -> 0 (clockwise)")
    try:
        gen, schema, desc = _BASE_FAMILIES[name]
    except KeyError:
        raise InvalidFamilyParams(f"unknown contour family {name!r}") from None
    return ContourFamily(name, gen, dict(schema), True, desc)


def loop_families() -> list[ContourFamily]:
    return [make_family("indented_semicircle_loop")] + [
        full_loop(make_family(n)) for n in CLOSURE_FAMILIES
    ]


# -------------------------------------------------------- spec language


@dataclass(frozen=True)
class ContourSpec:
    """Parsed CLI contour spec; ``family`` is None for explicit segments."""

    text: str
    contour: Contour
    family: ContourFamily | None
    R: float | None
    aux: Mapping[str, object]


_SPEC_RE = re.compile(r"\s*([A-Za-z_]\w*)\s*\((.*)\)\s*$", re.S)
_SPEC_NAMES = {
    "semicircle": ("semicircle_closure", {}),
    "parabola": ("parabola_closure", {}),
    "indented": ("indented_semicircle_loop", {"eps": "eps"}),
    "polygraph": ("polygraph_closure", {"p": "coeffs"}),
    "ellipse": ("half_ellipse_closure", {"ry": "ry"}),
}


def _number(text: str, spec: str) -> complex:
    try:
        return const_value(parse_expr(text, variables=()))
    except Exception as exc:  # noqa: BLE001 - reported as a spec error
        raise ContourSpecError(f"bad number {text!r} in contour spec {spec!r}: {exc}") from exc


def _real(text: str, spec: str) -> float:
    v = _number(text, spec)
    if v.imag != 0:
        raise ContourSpecError(f"{text!r} must be real in contour spec {spec!r}")
    return v.real


def _split_args(body: str, spec: str):
    positional, keyed, current = [], {}, None
    for group in body.split(";"):
        for item in group.split(","):
            item = item.strip()
            if not item:
                continue
            if "=" in item:
                key, _, value = item.partition("=")
                current = key.strip()
                if current in keyed:
                    raise ContourSpecError(f"duplicate parameter {current!r} in {spec!r}")
                keyed[current] = [value.strip()]
            elif current is None:
                positional.append(item)
            else:
                keyed[current].append(item)
    return positional, keyed


def parse_contour_spec(text: str) -> ContourSpec:
    """Parse ``semicircle(R=3)``, ``loop(parabola(R=2))``, ``segment(-3,3)`` ..."""
    m = _SPEC_RE.match(text)
    if not m:
        raise ContourSpecError(f"cannot parse contour spec {text!r}")
    name, body = m.group(1), m.group(2)
    if name == "loop":
        inner = parse_contour_spec(body)
        if inner.family is None:
            raise ContourSpecError(f"loop() needs a closure family, got {body!r}")
        fam = full_loop(inner.family)
        return ContourSpec(text, fam(inner.R, **inner.aux), fam, inner.R, inner.aux)
    positional, keyed = _split_args(body, text)
    if name == "segment":
        if keyed or len(positional) != 2:
            raise ContourSpecError(f"segment() takes two endpoints, got {text!r}")
        a, b = (_number(p, text) for p in positional)
        return ContourSpec(text, Contour((Line(a, b),)), None, None, {})
    if name not in _SPEC_NAMES:
        raise ContourSpecError(f"unknown contour kind {name!r} in {text!r}")
    fam_name, aux_keys = _SPEC_NAMES[name]
    if positional or "R" not in keyed:
        raise ContourSpecError(f"{name}() needs R=<value>, got {text!r}")
    R = _real(keyed.pop("R")[0], text)
    aux = {}
    for key, values in keyed.items():
        if key not in aux_keys:
            raise ContourSpecError(f"{name}() does not accept parameter {key!r}")
        if aux_keys[key] == "coeffs":
            aux["coeffs"] = tuple(_real(v, text) for v in values)
        else:
            if len(values) != 1:
                raise ContourSpecError(f"parameter {key!r} takes one value in {text!r}")
            aux[aux_keys[key]] = _real(values[0], text)
    fam = make_family(fam_name)
    return ContourSpec(text, fam(R, **aux), fam, R, aux)
