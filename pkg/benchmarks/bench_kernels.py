"""Compiled vs pure-Python kernel timings.

    python3 benchmarks/bench_kernels.py [--repeat N] [--points N]

Kernel-level rows pass each backend module explicitly. Whole-integration rows
run in a fresh interpreter per backend (selected via CONTOUR_FORGE_BACKEND)
so the quadrature driver picks the backend up exactly as a user would.
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

os.environ["CONTOUR_FORGE_THREADS"] = "1"  # single-threaded, like for like

from contour_forge import kernels
from contour_forge.contour import CircularArc
from contour_forge.expr import parse_expr
from contour_forge.lowering import lower
from contour_forge.quadrature import GAUSS_WEIGHTS, KRONROD_WEIGHTS

INTEGRATIONS = r"""
import json, sys, timeit
from contour_forge import kernels
from contour_forge.identity import get_record, limit_study, strange_vs_segment, RLadder
from contour_forge.contour import make_family
from contour_forge.expr import parse_expr
from contour_forge.quadrature import Tolerance, integrate_contour
repeat = int(sys.argv[1])
loop = make_family("full_loop(half_ellipse_closure)")(6, ry=2.0)
f = parse_expr("sinc(z) * exp(i*z)")
jobs = {
    "integrate sinc*exp(iz) on ellipse loop": lambda: integrate_contour(f, loop, Tolerance(1e-13, 0)),
    "sinc finite-R identity (R=5)": lambda: strange_vs_segment(get_record("eq3_sinc_semicircle"), 5.0),
    "gaussian ladder 1..6": lambda: limit_study(get_record("eq1_gaussian_semicircle"), RLadder.explicit(range(1, 7))),
}
out = {"backend": kernels.BACKEND}
for name, job in jobs.items():
    out[name] = min(timeit.repeat(job, number=1, repeat=repeat))
print(json.dumps(out))
"""


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_rows(n, repeat):
    rng = np.random.default_rng(0)
    z = rng.normal(size=n) * 2 + 1j * rng.normal(size=n)
    x = np.linspace(0, np.pi, n)
    cprog = kernels.compile_expr(parse_expr("sinc(z) * exp(-z^2) + cosh(z) / (z + 3)"))
    rprog = kernels.compile_expr(lower(parse_expr("sinc(z)"), CircularArc(0, 5, 0, np.pi)).re_part)
    panels = n // 15
    g = rng.normal(size=15 * panels) + 1j * rng.normal(size=15 * panels)
    hw = rng.uniform(0.01, 1, size=panels)
    vals = rng.normal(size=n)
    cases = {
        f"eval_complex ({n} pts)": lambda m: kernels.eval_complex(cprog, z, impl=m),
        f"eval_real ({n} pts)": lambda m: kernels.eval_real(rprog, x, impl=m),
        f"gk15 ({panels} panels)": lambda m: kernels.gk15(g, hw, KRONROD_WEIGHTS, GAUSS_WEIGHTS, impl=m),
        f"neumaier_sum ({n} terms)": lambda m: kernels.neumaier_sum(vals, impl=m),
    }
    py = kernels.backend_module("python")
    try:
        cy = kernels.backend_module("cython")
    except ImportError:
        cy = None
    for name, call in cases.items():
        t_py = best(lambda: call(py), repeat)
        t_cy = best(lambda: call(cy), repeat) if cy else None
        yield name, t_py, t_cy


def integration_rows(repeat):
    timings = {}
    for backend in ("python", "cython"):
        env = dict(os.environ, CONTOUR_FORGE_BACKEND=backend, CONTOUR_FORGE_THREADS="1")
        proc = subprocess.run([sys.executable, "-c", INTEGRATIONS, str(repeat)], env=env,
                              capture_output=True, text=True, check=True)
        timings[backend] = json.loads(proc.stdout)
    if timings["cython"].pop("backend") != "cython":
        timings["cython"] = {}
    timings["python"].pop("backend")
    for name, t_py in timings["python"].items():
        yield name, t_py, timings["cython"].get(name)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--points", type=int, default=30_000)
    args = ap.parse_args()
    print(f"{'case':48s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>9s}")
    for rows in (kernel_rows(args.points, args.repeat), integration_rows(args.repeat)):
        for name, t_py, t_cy in rows:
            cy = f"{t_cy * 1e3:12.2f}" if t_cy else f"{'n/a':>12s}"
            sp = f"{t_py / t_cy:8.1f}x" if t_cy else f"{'':>9s}"
            print(f"{name:48s} {t_py * 1e3:12.2f} {cy} {sp}")


if __name__ == "__main__":
    main()
