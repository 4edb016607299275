"""Command-line front end: ``contour-forge {derive,integrate,verify,limit,catalog}``.

Exit codes: 0 pass/converged, 1 verification ran but failed, 2 parse or
input error, 3 evaluation or lowering error, 4 quadrature or ladder
not converged, 5 conditioning limit.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

from .contour import ORIENTATION, Contour, parse_contour_spec
from .errors import ConditioningLimit, ContourForgeError, EvaluationError, InputError
from .expr import EntiretyTag, format_expr, parse_expr
from .identity import (
    RLadder, VerificationReport, arc_vanishing_check, builtin_catalog, get_record, limit_study,
    path_equivalence, small_circle_check, strange_vs_segment,
)
from .lowering import lower
from .quadrature import Tolerance, integrate_contour, integrate_real

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_EVAL, EXIT_NOT_CONVERGED, EXIT_CONDITIONING = 0, 1, 2, 3, 4, 5


# ------------------------------------------------------------------ output


def _json_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    # keep floats recognisable as floats for strict consumers
    return s if any(c in s for c in ".en") else s + ".0"


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, bool):
        return {None: "null", True: "true", False: "false"}[obj]
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _json_float(obj)
    if isinstance(obj, complex):
        return to_json({"re": obj.real, "im": obj.imag}, indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{to_json(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + to_json(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if hasattr(obj, "__float__"):
        return _json_float(float(obj))
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _g(x) -> str:
    if x is None:
        return "n/a"
    if isinstance(x, complex):
        sign = "-" if math.copysign(1.0, x.imag) < 0 else "+"
        return f"{x.real:.10g} {sign} {abs(x.imag):.10g}i"
    return f"{float(x):.10g}"


class _Sink:
    def __init__(self, out: str | None):
        self.out = out
        self.parts: list[str] = []

    def write(self, text: str) -> None:
        self.parts.append(text if text.endswith("\n") else text + "\n")

    def close(self) -> None:
        text = "".join(self.parts)
        if self.out:
            Path(self.out).write_text(text)
        else:
            sys.stdout.write(text)


def _report_text(rep: VerificationReport) -> str:
    lines = [f"identity: {rep.identity}", f"orientation: {rep.orientation}"]
    for k, res in enumerate(rep.residuals):
        label = f"R = {_g(rep.R_values[k])}" if k < len(rep.R_values) else f"check {k}"
        floor = rep.conditioning_floors[k] if k < len(rep.conditioning_floors) else None
        tol = rep.tolerances[k] if k < len(rep.tolerances) else None
        lines.append(f"  {label}: residual {_g(res)}  floor {_g(floor)}  tol {_g(tol)}")
    lines += [f"limit estimate: {_g(rep.limit_estimate)}", f"target: {_g(rep.target)}",
              f"limit residual: {_g(rep.limit_residual)}", f"pass: {rep.passed}"]
    lines += [f"note: {n}" for n in rep.notes]
    lines.append(f"wall time: {rep.wall_time_ms:.1f} ms")
    return "\n".join(lines)


# ----------------------------------------------------------------- helpers


def _tolerance(args) -> Tolerance:
    try:
        return Tolerance(args.abs_tol, args.rel_tol, args.max_subdiv)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _need(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise InputError("missing required option(s): " + ", ".join("--" + m for m in missing))


def _floats(text: str, what: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"bad {what} list {text!r}") from None
    if not vals:
        raise InputError(f"empty {what} list")
    return vals


def _emit_report(rep: VerificationReport, args, sink: _Sink) -> int:
    if args.emit == "text":
        sink.write(_report_text(rep))
    else:
        sink.write(to_json(rep.to_json_dict()))
    if not rep.quadrature_converged or rep.ladder_converged is False:
        return EXIT_NOT_CONVERGED
    return EXIT_OK if rep.passed else EXIT_FAIL


# ---------------------------------------------------------------- commands


def cmd_derive(args, sink: _Sink) -> int:
    _need(args, "function", "contour")
    f = parse_expr(args.function)
    spec = parse_contour_spec(args.contour)
    parts = [lower(f, seg) for seg in spec.contour.segments]
    if args.emit == "json":
        sink.write(to_json({
            "function": format_expr(f),
            "contour": spec.text,
            "orientation": ORIENTATION,
            "segments": [{
                "kind": type(li.segment).__name__,
                "parameter": li.parameter,
                "domain": [li.domain[0], li.domain[1]],
                "orientation_note": li.orientation_note,
                "re_part": format_expr(li.re_part),
                "im_part": format_expr(li.im_part),
                "re_part_latex": format_expr(li.re_part, "latex"),
                "im_part_latex": format_expr(li.im_part, "latex"),
            } for li in parts],
        }))
        return EXIT_OK
    style = "latex" if args.emit == "latex" else "text"
    sink.write(f"f(z) = {format_expr(f, style)}")
    sink.write(f"contour: {spec.text} ({ORIENTATION})")
    for k, li in enumerate(parts):
        lo, hi = li.domain
        sink.write(f"segment {k}: {type(li.segment).__name__}, parameter {li.parameter}, "
                   f"domain {_g(lo)} -> {_g(hi)}")
        sink.write(f"  orientation: {li.orientation_note}")
        sink.write(f"  re_part = {format_expr(li.re_part, style)}")
        sink.write(f"  im_part = {format_expr(li.im_part, style)}")
    return EXIT_OK


def cmd_integrate(args, sink: _Sink) -> int:
    _need(args, "function")
    tol = _tolerance(args)
    if args.interval is not None:
        if args.contour is not None:
            raise InputError("give either --contour or --interval, not both")
        bounds = _floats(args.interval, "interval")
        if len(bounds) != 2:
            raise InputError(f"--interval takes 'lo,hi', got {args.interval!r}")
        lo, hi = bounds
        g = parse_expr(args.function)
        res = integrate_real(g, lo, hi, tol)
        where = f"[{_g(lo)}, {_g(hi)}]"
    else:
        _need(args, "contour")
        f = parse_expr(args.function)
        spec = parse_contour_spec(args.contour)
        res = integrate_contour(f, spec.contour, tol)
        where = spec.text
    if args.emit == "json":
        sink.write(to_json(res.to_dict()))
    else:
        sink.write(f"integral over {where}: {_g(res.value)}")
        sink.write(f"error estimate: {_g(res.abs_error_estimate)}")
        sink.write(f"evaluations: {res.evaluations}, subdivisions: {res.subdivisions}, converged: {res.converged}")
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def _reverse_if_swapped(a: Contour, b: Contour) -> Contour:
    eps = max(a.eps_chain, b.eps_chain)
    same = abs(a.start - b.start) <= eps and abs(a.end - b.end) <= eps
    swapped = abs(a.start - b.end) <= eps and abs(a.end - b.start) <= eps
    return b.reverse() if swapped and not same else b


def cmd_verify(args, sink: _Sink) -> int:
    tol = _tolerance(args)
    if args.identity is None:
        _need(args, "pathA", "pathB", "function")
        f = parse_expr(args.function)
        a = parse_contour_spec(args.pathA).contour
        b = _reverse_if_swapped(a, parse_contour_spec(args.pathB).contour)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rep = path_equivalence(f, a, b, tol, EntiretyTag.UNKNOWN, name="path_equivalence")
        rep.notes.append("entirety of f not checked; path independence assumed")
        return _emit_report(rep, args, sink)
    rec = get_record(args.identity)
    if rec.kind == "small_circle":
        eps = _floats(args.eps, "eps") if args.eps else list(rec.default_ladder)
        return _emit_report(small_circle_check(eps, tol), args, sink)
    if rec.kind == "arc":
        Rs = _floats(args.R, "R") if args.R else list(rec.default_ladder)
        return _emit_report(arc_vanishing_check(Rs, tol), args, sink)
    Rs = _floats(args.R, "R") if args.R else [rec.default_R]
    if len(Rs) != 1:
        raise InputError("verify takes a single --R for closure identities; use limit for ladders")
    return _emit_report(strange_vs_segment(rec, Rs[0], tol), args, sink)


def cmd_limit(args, sink: _Sink) -> int:
    _need(args, "identity")
    tol = _tolerance(args)
    rec = get_record(args.identity)
    if rec.kind == "small_circle":
        text = args.eps or args.ladder
        eps = _floats(text, "eps") if text else list(rec.default_ladder)
        return _emit_report(small_circle_check(eps, tol), args, sink)
    if rec.kind == "arc":
        ladder = RLadder.parse(args.ladder) if args.ladder else RLadder.explicit(rec.default_ladder)
        return _emit_report(arc_vanishing_check(ladder.values, tol), args, sink)
    ladder = (RLadder.parse(args.ladder, rec.ladder_tol) if args.ladder
              else RLadder.explicit(rec.default_ladder, rec.ladder_tol))
    return _emit_report(limit_study(rec, ladder, tol), args, sink)


def cmd_catalog(args, sink: _Sink) -> int:
    recs = builtin_catalog()
    if args.emit == "json":
        sink.write(to_json([{
            "name": r.name, "function": format_expr(r.f), "family": r.family.name,
            "family_description": r.family.description, "kind": r.kind, "target": r.target,
            "target_provenance": r.target_provenance, "orientation": ORIENTATION,
            "entirety": r.entirety.name, "notes": r.notes,
        } for r in recs]))
        return EXIT_OK
    for r in recs:
        sink.write(f"{r.name}  [{r.kind}]")
        sink.write(f"  f(z) = {format_expr(r.f)} on {r.family.name} ({r.family.description})")
        sink.write(f"  target: {_g(r.target)}  ({r.target_provenance})")
        sink.write(f"  orientation: {ORIENTATION}")
        sink.write(f"  notes: {r.notes}")
    return EXIT_OK


_COMMANDS = {"derive": cmd_derive, "integrate": cmd_integrate, "verify": cmd_verify,
             "limit": cmd_limit, "catalog": cmd_catalog}
_HELP = {"derive": "print the lowered real integrand(s) of f along a contour",
         "integrate": "integrate f along a contour or a real function over an interval",
         "verify": "check a built-in identity or a path-equivalence pair",
         "limit": "run an R (or eps) ladder toward the limiting constant",
         "catalog": "list the built-in identities"}
_DEFAULT_EMIT = {"derive": "text", "integrate": "text", "verify": "json", "limit": "json", "catalog": "text"}


# ------------------------------------------------------------------ parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--function", help="integrand f(z), e.g. 'exp(-z^2)'")
    common.add_argument("--contour", help="contour spec, e.g. 'semicircle(R=3)' or 'loop(parabola(R=2))'")
    common.add_argument("--emit", choices=("text", "json", "latex"))
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--abs-tol", dest="abs_tol", type=float, default=1e-10)
    common.add_argument("--rel-tol", dest="rel_tol", type=float, default=1e-12)
    common.add_argument("--max-subdiv", dest="max_subdiv", type=int, default=2000)
    common.add_argument("--identity", help="built-in identity name (see 'catalog')")
    common.add_argument("--R", help="closure radius (comma list for arc checks)")
    common.add_argument("--pathA", help="first path for a path-equivalence check")
    common.add_argument("--pathB", help="second path for a path-equivalence check")
    common.add_argument("--ladder", help="R ladder: 'a:b:step' or comma list")
    common.add_argument("--eps", help="comma list of small-circle radii")
    common.add_argument("--interval", help="'lo,hi' to integrate a real function of t")
    common.add_argument("--config", help="file of 'flag-name = value' lines; command line wins")
    parser = _Parser(prog="contour-forge", description="Contour closures, lowering and identity checks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in _COMMANDS:
        sub.add_parser(name, parents=[common], help=_HELP[name])
    return parser


_FLAG_KEYS = {"function", "contour", "emit", "out", "abs-tol", "rel-tol", "max-subdiv", "identity", "R",
              "pathA", "pathB", "ladder", "eps", "interval"}


def read_config(path: str) -> list[str]:
    """Turn a config file into argv tokens (to be placed before the real flags)."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read config file {path!r}: {exc.strerror}") from None
    tokens = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        key = key.lstrip("-")
        if not sep or key not in _FLAG_KEYS:
            raise InputError(f"{path}:{lineno}: expected 'flag-name = value', got {raw.strip()!r}")
        tokens += [f"--{key}", value]
    return tokens


def _config_path(argv: list[str]) -> str | None:
    for k, tok in enumerate(argv):
        if tok == "--config" and k + 1 < len(argv):
            return argv[k + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        cfg = _config_path(argv)
        if cfg is not None and argv and argv[0] in _COMMANDS:
            argv = [argv[0]] + read_config(cfg) + argv[1:]
        args = parser.parse_args(argv)
        if args.emit is None:
            args.emit = _DEFAULT_EMIT[args.command]
        sink = _Sink(args.out)
        code = _COMMANDS[args.command](args, sink)
        sink.close()
        return code
    except SystemExit as exc:
        return int(exc.code or 0)
    except InputError as exc:
        _err(exc)
        return EXIT_INPUT
    except ConditioningLimit as exc:
        _err(exc)
        return EXIT_CONDITIONING
    except EvaluationError as exc:
        _err(exc)
        return EXIT_EVAL
    except ContourForgeError as exc:
        _err(exc)
        return EXIT_EVAL


def _err(exc: Exception) -> None:
    sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
