"""Hot kernels behind a backend switch.

The compiled extension ``_kernels`` is used when it was built; otherwise the
pure-Python twin ``_kernels_py`` is imported.  ``CONTOUR_FORGE_BACKEND=python``
forces the fallback.  Expressions are compiled once into postfix stack
programs (:class:`Program`) which the kernels evaluate point by point.

``CONTOUR_FORGE_THREADS`` caps how many threads large point batches are split
over (0 or unset: ``os.cpu_count()``).  Chunks are disjoint slices of the
output, so results do not depend on the thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels_py
from .errors import DivisionNearZero
from .expr import (
    Add, Const, Cos, Cosh, Div, Exp, Expr, IntPow, Mul, Neg, Sin, Sinc, Sinh, Var,
)

if os.environ.get("CONTOUR_FORGE_BACKEND", "").lower() == "python":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND

_OPS = {Add: 2, Mul: 3, Neg: 4, Div: 5, IntPow: 6,
        Exp: 7, Sin: 8, Cos: 9, Sinh: 10, Cosh: 11, Sinc: 12}

# below this many points a batch is never split across threads
PARALLEL_MIN_POINTS = 4096


def backend_module(name: str | None = None):
    """Kernel module by name ("cython" or "python"); None gives the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    from . import _kernels  # type: ignore[attr-defined]
    return _kernels


def thread_count() -> int:
    raw = os.environ.get("CONTOUR_FORGE_THREADS", "").strip()
    n = int(raw) if raw else 0
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass(frozen=True)
class Program:
    ops: np.ndarray  # int32 opcodes
    args: np.ndarray  # int32 operand (constant index or exponent)
    cre: np.ndarray
    cim: np.ndarray
    var: str | None


def compile_expr(e: Expr) -> Program:
    """Flatten ``e`` into a postfix program over its single free variable."""
    ops: list[int] = []
    args: list[int] = []
    consts: list[complex] = []
    names: set[str] = set()

    def emit(node):
        if isinstance(node, Const):
            consts.append(complex(node.value))
            ops.append(0)
            args.append(len(consts) - 1)
            return
        if isinstance(node, Var):
            names.add(node.name)
            ops.append(1)
            args.append(0)
            return
        for child in node.children():
            emit(child)
        ops.append(_OPS[type(node)])
        args.append(node.n if isinstance(node, IntPow) else 0)

    emit(e)
    if len(names) > 1:
        raise ValueError(f"kernel programs take one free variable, got {sorted(names)}")
    c = np.array(consts or [0j], dtype=complex)
    return Program(
        np.array(ops, dtype=np.int32), np.array(args, dtype=np.int32),
        np.ascontiguousarray(c.real), np.ascontiguousarray(c.imag),
        next(iter(names)) if names else None,
    )


@lru_cache(maxsize=1)
def _pool(n: int) -> ThreadPoolExecutor:
    return ThreadPoolExecutor(max_workers=n)


def _chunks(n: int):
    threads = thread_count() if BACKEND != "python" else 1
    if threads <= 1 or n < PARALLEL_MIN_POINTS:
        return [(0, n)]
    step = -(-n // threads)
    return [(lo, min(n, lo + step)) for lo in range(0, n, step)]


def eval_complex(prog: Program, z, impl=None) -> np.ndarray:
    """Evaluate ``prog`` at the complex points ``z``."""
    impl = impl or _impl
    z = np.asarray(z, dtype=complex).ravel()
    zre = np.ascontiguousarray(z.real)
    zim = np.ascontiguousarray(z.imag)
    out_re = np.empty(z.shape[0])
    out_im = np.empty(z.shape[0])

    def run(lo, hi):
        bad = impl.eval_complex(prog.ops, prog.args, prog.cre, prog.cim,
                                zre[lo:hi], zim[lo:hi], out_re[lo:hi], out_im[lo:hi])
        return -1 if bad < 0 else lo + bad

    chunks = _chunks(z.shape[0])
    if len(chunks) == 1:
        statuses = [run(0, z.shape[0])]
    else:
        statuses = list(_pool(len(chunks)).map(lambda c: run(*c), chunks))
    for bad in statuses:
        if bad >= 0:
            raise DivisionNearZero(f"division by (near) zero at z = {complex(z[bad])!r}")
    return out_re + 1j * out_im


def eval_real(prog: Program, x, impl=None) -> np.ndarray:
    """Evaluate a real program at the real points ``x``."""
    impl = impl or _impl
    x = np.ascontiguousarray(np.asarray(x, dtype=float).ravel())
    out = np.empty(x.shape[0])
    chunks = _chunks(x.shape[0])

    def run(lo, hi):
        bad = impl.eval_real(prog.ops, prog.args, prog.cre, x[lo:hi], out[lo:hi])
        return -1 if bad < 0 else lo + bad

    if len(chunks) == 1:
        statuses = [run(0, x.shape[0])]
    else:
        statuses = list(_pool(len(chunks)).map(lambda c: run(*c), chunks))
    for bad in statuses:
        if bad >= 0:
            raise DivisionNearZero(f"division by (near) zero at t = {float(x[bad])!r}")
    return out


def gk15(g: np.ndarray, hw: np.ndarray, wk: np.ndarray, wg: np.ndarray, impl=None):
    """Panel sums for ``g`` laid out as consecutive 15-node blocks."""
    impl = impl or _impl
    n = hw.shape[0]
    gre = np.ascontiguousarray(g.real)
    gim = np.ascontiguousarray(g.imag)
    kre, kim, err, resabs = (np.empty(n) for _ in range(4))
    impl.gk15(gre, gim, np.ascontiguousarray(hw, dtype=float), wk, wg, kre, kim, err, resabs)
    return kre + 1j * kim, err, resabs


def neumaier_sum(values, impl=None) -> float:
    impl = impl or _impl
    return float(impl.neumaier_sum(np.ascontiguousarray(values, dtype=float)))
