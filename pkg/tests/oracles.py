"""Reference values computed independently of the package under test.

Series are summed with ``math.fsum``; nothing here imports ``contour_forge``.
"""

import math

# sqrt(pi) to 32 digits, rounded to double
SQRT_PI_DIGITS = "1.7724538509055160272981674833411"
SQRT_PI = float(SQRT_PI_DIGITS)


def erf_series(x: float, terms: int = 400) -> float:
    """erf(x) = 2/sqrt(pi) e^(-x^2) sum 2^n x^(2n+1) / (1*3*...*(2n+1)); positive terms only."""
    out, term = [], x
    for n in range(terms):
        out.append(term)
        term *= 2 * x * x / (2 * n + 3)
    return 2.0 / SQRT_PI * math.exp(-x * x) * math.fsum(out)


def si_series(x: float, terms: int = 150) -> float:
    """Sine integral: Maclaurin series up to 20 (to about 1e-8 there), asymptotic beyond."""
    if x > 20:
        return _si_asymptotic(x)
    out, term = [], x  # term = (-1)^n x^(2n+1) / (2n+1)!
    for n in range(terms):
        out.append(term / (2 * n + 1))
        term *= -x * x / ((2 * n + 2) * (2 * n + 3))
    return math.fsum(out)


def _si_asymptotic(x: float) -> float:
    # Si(x) = pi/2 - f(x) cos x - g(x) sin x, truncated at the smallest term
    f, g = [], []
    tf, tg = 1.0 / x, 1.0 / (x * x)
    for k in range(1, 60):
        f.append(tf)
        g.append(tg)
        nf = -tf * (2 * k - 1) * (2 * k) / (x * x)
        ng = -tg * (2 * k) * (2 * k + 1) / (x * x)
        if abs(nf) >= abs(tf) or abs(ng) >= abs(tg):
            break
        tf, tg = nf, ng
    return math.pi / 2 - math.fsum(f) * math.cos(x) - math.fsum(g) * math.sin(x)


def gauss_segment(R: float) -> float:
    """Integral of exp(-x^2) over [-R, R]."""
    return SQRT_PI * erf_series(R)


def sinc_segment(R: float) -> float:
    """Integral of sin(x)/x over [-R, R]."""
    return 2.0 * si_series(R)


def dense_max(g, lo: float, hi: float, n: int = 200_001):
    """(max |g|, argmax) over a uniform grid."""
    best, at = -1.0, lo
    for k in range(n):
        t = lo + (hi - lo) * k / (n - 1)
        v = abs(g(t))
        if v > best:
            best, at = v, t
    return best, at
