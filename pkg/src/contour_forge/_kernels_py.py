"""Pure-Python kernels; the reference twin of ``_kernels.pyx``.

Both modules implement the same functions with the same operation order so
that they agree to the last bit on IEEE hardware without fused multiply-add.
Calling conventions are documented in :mod:`contour_forge.kernels`.
"""

import math

OP_CONST, OP_VAR, OP_ADD, OP_MUL, OP_NEG, OP_DIV, OP_POW = 0, 1, 2, 3, 4, 5, 6
OP_EXP, OP_SIN, OP_COS, OP_SINH, OP_COSH, OP_SINC = 7, 8, 9, 10, 11, 12

TAU_SINC = 1e-3
TAU_DIV = 1e-300

BACKEND = "python"


def _cabs(x, y):
    # scaled modulus from correctly rounded operations only (libm hypot and
    # math.hypot are not guaranteed to agree bit for bit)
    ax = abs(x)
    ay = abs(y)
    m = ax if ax >= ay else ay
    if m == 0.0 or m == math.inf:
        return m
    u = ax / m
    v = ay / m
    return m * math.sqrt(u * u + v * v)


def _cdiv(a, b, c, d):
    den = c * c + d * d
    return (a * c + b * d) / den, (b * c - a * d) / den


def eval_complex(ops, args, cre, cim, zre, zim, out_re, out_im):
    """Evaluate a stack program at every point; return -1 or the first failing index."""
    ops = list(ops)
    args = list(args)
    cre = list(cre)
    cim = list(cim)
    n_ops = len(ops)
    sin, cos, sinh, cosh, exp, hypot = math.sin, math.cos, math.sinh, math.cosh, math.exp, _cabs
    for k, (x, y) in enumerate(zip(zre.tolist(), zim.tolist())):
        sr = []
        si = []
        for j in range(n_ops):
            op = ops[j]
            if op == OP_CONST:
                sr.append(cre[args[j]])
                si.append(cim[args[j]])
            elif op == OP_VAR:
                sr.append(x)
                si.append(y)
            elif op == OP_ADD:
                c = sr.pop()
                d = si.pop()
                sr[-1] = sr[-1] + c
                si[-1] = si[-1] + d
            elif op == OP_MUL:
                c = sr.pop()
                d = si.pop()
                a = sr[-1]
                b = si[-1]
                sr[-1] = a * c - b * d
                si[-1] = a * d + b * c
            elif op == OP_NEG:
                sr[-1] = -sr[-1]
                si[-1] = -si[-1]
            elif op == OP_DIV:
                c = sr.pop()
                d = si.pop()
                if hypot(c, d) < TAU_DIV:
                    return k
                sr[-1], si[-1] = _cdiv(sr[-1], si[-1], c, d)
            elif op == OP_POW:
                a = sr[-1]
                b = si[-1]
                pr = 1.0
                pi = 0.0
                for _ in range(args[j]):
                    pr, pi = pr * a - pi * b, pr * b + pi * a
                sr[-1] = pr
                si[-1] = pi
            else:
                a = sr[-1]
                b = si[-1]
                if op == OP_EXP:
                    e = exp(a)
                    sr[-1] = e * cos(b)
                    si[-1] = e * sin(b)
                elif op == OP_SIN:
                    sr[-1] = sin(a) * cosh(b)
                    si[-1] = cos(a) * sinh(b)
                elif op == OP_COS:
                    sr[-1] = cos(a) * cosh(b)
                    si[-1] = -(sin(a) * sinh(b))
                elif op == OP_SINH:
                    sr[-1] = sinh(a) * cos(b)
                    si[-1] = cosh(a) * sin(b)
                elif op == OP_COSH:
                    sr[-1] = cosh(a) * cos(b)
                    si[-1] = sinh(a) * sin(b)
                elif op == OP_SINC:
                    if hypot(a, b) < TAU_SINC:
                        w2r = a * a - b * b
                        w2i = 2.0 * a * b
                        w4r = w2r * w2r - w2i * w2i
                        w4i = 2.0 * w2r * w2i
                        sr[-1] = 1.0 - w2r / 6.0 + w4r / 120.0
                        si[-1] = -w2i / 6.0 + w4i / 120.0
                    else:
                        sr[-1], si[-1] = _cdiv(sin(a) * cosh(b), cos(a) * sinh(b), a, b)
                else:
                    raise ValueError(f"bad opcode {op}")
        out_re[k] = sr[-1]
        out_im[k] = si[-1]
    return -1


def eval_real(ops, args, cre, xs, out):
    """Real-valued twin of :func:`eval_complex`."""
    ops = list(ops)
    args = list(args)
    cre = list(cre)
    n_ops = len(ops)
    sin, cos, sinh, cosh, exp = math.sin, math.cos, math.sinh, math.cosh, math.exp
    for k, x in enumerate(xs.tolist()):
        st = []
        for j in range(n_ops):
            op = ops[j]
            if op == OP_CONST:
                st.append(cre[args[j]])
            elif op == OP_VAR:
                st.append(x)
            elif op == OP_ADD:
                c = st.pop()
                st[-1] = st[-1] + c
            elif op == OP_MUL:
                c = st.pop()
                st[-1] = st[-1] * c
            elif op == OP_NEG:
                st[-1] = -st[-1]
            elif op == OP_DIV:
                c = st.pop()
                if abs(c) < TAU_DIV:
                    return k
                st[-1] = st[-1] / c
            elif op == OP_POW:
                a = st[-1]
                p = 1.0
                for _ in range(args[j]):
                    p = p * a
                st[-1] = p
            elif op == OP_EXP:
                st[-1] = exp(st[-1])
            elif op == OP_SIN:
                st[-1] = sin(st[-1])
            elif op == OP_COS:
                st[-1] = cos(st[-1])
            elif op == OP_SINH:
                st[-1] = sinh(st[-1])
            elif op == OP_COSH:
                st[-1] = cosh(st[-1])
            elif op == OP_SINC:
                a = st[-1]
                if abs(a) < TAU_SINC:
                    a2 = a * a
                    st[-1] = 1.0 - a2 / 6.0 + a2 * a2 / 120.0
                else:
                    st[-1] = sin(a) / a
            else:
                raise ValueError(f"bad opcode {op}")
        out[k] = st[-1]
    return -1


def gk15(gre, gim, hw, wk, wg, kre, kim, err, resabs):
    """Per-panel Kronrod sum, Gauss-Kronrod difference and sum of |g|."""
    gre = gre.tolist()
    gim = gim.tolist()
    wk = wk.tolist()
    wg = wg.tolist()
    hypot = _cabs
    for p, h in enumerate(hw.tolist()):
        base = 15 * p
        ar = ai = br = bi = ab = 0.0
        for j in range(15):
            x = gre[base + j]
            y = gim[base + j]
            w = wk[j]
            ar += w * x
            ai += w * y
            ab += w * hypot(x, y)
            v = wg[j]
            br += v * x
            bi += v * y
        kre[p] = h * ar
        kim[p] = h * ai
        err[p] = h * hypot(ar - br, ai - bi)
        resabs[p] = h * ab


def neumaier_sum(values):
    """Compensated sum in input order."""
    total = 0.0
    comp = 0.0
    for v in values.tolist():
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp
