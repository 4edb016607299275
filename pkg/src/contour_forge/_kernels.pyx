# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contract and operation order as ``_kernels_py``."""

from libc.math cimport sin, cos, sinh, cosh, exp, sqrt, fabs, INFINITY
from libc.stdlib cimport malloc, free

BACKEND = "cython"

cdef enum:
    OP_CONST = 0
    OP_VAR = 1
    OP_ADD = 2
    OP_MUL = 3
    OP_NEG = 4
    OP_DIV = 5
    OP_POW = 6
    OP_EXP = 7
    OP_SIN = 8
    OP_COS = 9
    OP_SINH = 10
    OP_COSH = 11
    OP_SINC = 12

cdef double TAU_SINC = 1e-3
cdef double TAU_DIV = 1e-300


cdef inline double hypot(double x, double y) noexcept nogil:
    # same scaled formula as the Python twin; libm hypot is not used
    cdef double ax = fabs(x)
    cdef double ay = fabs(y)
    cdef double m = ax if ax >= ay else ay
    cdef double u, v
    if m == 0.0 or m == INFINITY:
        return m
    u = ax / m
    v = ay / m
    return m * sqrt(u * u + v * v)


cdef Py_ssize_t _eval_complex(const int[:] ops, const int[:] args,
                              const double[:] cre, const double[:] cim,
                              const double[:] zre, const double[:] zim,
                              double[:] out_re, double[:] out_im,
                              double* sr, double* si) noexcept nogil:
    cdef Py_ssize_t n_ops = ops.shape[0]
    cdef Py_ssize_t k, j, top, q
    cdef int op
    cdef double a, b, c, d, e, pr, pi, tmp, den, w2r, w2i, w4r, w4i, nr, ni
    for k in range(zre.shape[0]):
        top = -1
        for j in range(n_ops):
            op = ops[j]
            if op == OP_CONST:
                top += 1
                sr[top] = cre[args[j]]
                si[top] = cim[args[j]]
            elif op == OP_VAR:
                top += 1
                sr[top] = zre[k]
                si[top] = zim[k]
            elif op == OP_ADD:
                top -= 1
                sr[top] = sr[top] + sr[top + 1]
                si[top] = si[top] + si[top + 1]
            elif op == OP_MUL:
                top -= 1
                a = sr[top]
                b = si[top]
                c = sr[top + 1]
                d = si[top + 1]
                sr[top] = a * c - b * d
                si[top] = a * d + b * c
            elif op == OP_NEG:
                sr[top] = -sr[top]
                si[top] = -si[top]
            elif op == OP_DIV:
                top -= 1
                c = sr[top + 1]
                d = si[top + 1]
                if hypot(c, d) < TAU_DIV:
                    return k
                a = sr[top]
                b = si[top]
                den = c * c + d * d
                sr[top] = (a * c + b * d) / den
                si[top] = (b * c - a * d) / den
            elif op == OP_POW:
                a = sr[top]
                b = si[top]
                pr = 1.0
                pi = 0.0
                for q in range(args[j]):
                    tmp = pr * a - pi * b
                    pi = pr * b + pi * a
                    pr = tmp
                sr[top] = pr
                si[top] = pi
            else:
                a = sr[top]
                b = si[top]
                if op == OP_EXP:
                    e = exp(a)
                    sr[top] = e * cos(b)
                    si[top] = e * sin(b)
                elif op == OP_SIN:
                    sr[top] = sin(a) * cosh(b)
                    si[top] = cos(a) * sinh(b)
                elif op == OP_COS:
                    sr[top] = cos(a) * cosh(b)
                    si[top] = -(sin(a) * sinh(b))
                elif op == OP_SINH:
                    sr[top] = sinh(a) * cos(b)
                    si[top] = cosh(a) * sin(b)
                elif op == OP_COSH:
                    sr[top] = cosh(a) * cos(b)
                    si[top] = sinh(a) * sin(b)
                elif op == OP_SINC:
                    if hypot(a, b) < TAU_SINC:
                        w2r = a * a - b * b
                        w2i = 2.0 * a * b
                        w4r = w2r * w2r - w2i * w2i
                        w4i = 2.0 * w2r * w2i
                        sr[top] = 1.0 - w2r / 6.0 + w4r / 120.0
                        si[top] = -w2i / 6.0 + w4i / 120.0
                    else:
                        nr = sin(a) * cosh(b)
                        ni = cos(a) * sinh(b)
                        den = a * a + b * b
                        sr[top] = (nr * a + ni * b) / den
                        si[top] = (ni * a - nr * b) / den
        out_re[k] = sr[0]
        out_im[k] = si[0]
    return -1


def eval_complex(const int[:] ops, const int[:] args, const double[:] cre, const double[:] cim,
                 const double[:] zre, const double[:] zim, double[:] out_re, double[:] out_im):
    cdef Py_ssize_t n = ops.shape[0] + 1
    cdef double* sr = <double*> malloc(n * sizeof(double))
    cdef double* si = <double*> malloc(n * sizeof(double))
    cdef Py_ssize_t status
    if sr == NULL or si == NULL:
        free(sr)
        free(si)
        raise MemoryError()
    with nogil:
        status = _eval_complex(ops, args, cre, cim, zre, zim, out_re, out_im, sr, si)
    free(sr)
    free(si)
    return status


cdef Py_ssize_t _eval_real(const int[:] ops, const int[:] args, const double[:] cre,
                           const double[:] xs, double[:] out, double* st) noexcept nogil:
    cdef Py_ssize_t n_ops = ops.shape[0]
    cdef Py_ssize_t k, j, top, q
    cdef int op
    cdef double a, p
    for k in range(xs.shape[0]):
        top = -1
        for j in range(n_ops):
            op = ops[j]
            if op == OP_CONST:
                top += 1
                st[top] = cre[args[j]]
            elif op == OP_VAR:
                top += 1
                st[top] = xs[k]
            elif op == OP_ADD:
                top -= 1
                st[top] = st[top] + st[top + 1]
            elif op == OP_MUL:
                top -= 1
                st[top] = st[top] * st[top + 1]
            elif op == OP_NEG:
                st[top] = -st[top]
            elif op == OP_DIV:
                top -= 1
                if fabs(st[top + 1]) < TAU_DIV:
                    return k
                st[top] = st[top] / st[top + 1]
            elif op == OP_POW:
                a = st[top]
                p = 1.0
                for q in range(args[j]):
                    p = p * a
                st[top] = p
            elif op == OP_EXP:
                st[top] = exp(st[top])
            elif op == OP_SIN:
                st[top] = sin(st[top])
            elif op == OP_COS:
                st[top] = cos(st[top])
            elif op == OP_SINH:
                st[top] = sinh(st[top])
            elif op == OP_COSH:
                st[top] = cosh(st[top])
            elif op == OP_SINC:
                a = st[top]
                if fabs(a) < TAU_SINC:
                    st[top] = 1.0 - a * a / 6.0 + a * a * (a * a) / 120.0
                else:
                    st[top] = sin(a) / a
        out[k] = st[0]
    return -1


def eval_real(const int[:] ops, const int[:] args, const double[:] cre,
              const double[:] xs, double[:] out):
    cdef double* st = <double*> malloc((ops.shape[0] + 1) * sizeof(double))
    cdef Py_ssize_t status
    if st == NULL:
        raise MemoryError()
    with nogil:
        status = _eval_real(ops, args, cre, xs, out, st)
    free(st)
    return status


def gk15(const double[:] gre, const double[:] gim, const double[:] hw,
         const double[:] wk, const double[:] wg,
         double[:] kre, double[:] kim, double[:] err, double[:] resabs):
    cdef Py_ssize_t p, j, base
    cdef double ar, ai, br, bi, ab, x, y, h
    with nogil:
        for p in range(hw.shape[0]):
            base = 15 * p
            ar = 0.0
            ai = 0.0
            br = 0.0
            bi = 0.0
            ab = 0.0
            for j in range(15):
                x = gre[base + j]
                y = gim[base + j]
                ar += wk[j] * x
                ai += wk[j] * y
                ab += wk[j] * hypot(x, y)
                br += wg[j] * x
                bi += wg[j] * y
            h = hw[p]
            kre[p] = h * ar
            kim[p] = h * ai
            err[p] = h * hypot(ar - br, ai - bi)
            resabs[p] = h * ab


def neumaier_sum(const double[:] values):
    cdef double total = 0.0
    cdef double comp = 0.0
    cdef double t, v
    cdef Py_ssize_t k
    with nogil:
        for k in range(values.shape[0]):
            v = values[k]
            t = total + v
            if fabs(total) >= fabs(v):
                comp += (total - t) + v
            else:
                comp += (v - t) + total
            total = t
    return total + comp
