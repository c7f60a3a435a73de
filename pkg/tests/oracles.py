"""Independent oracles and their frozen outputs.

Every expected value asserted in the tests that is not a closed form was
computed by one of these routines, which deliberately avoid the library
under test: python's decimal module for logarithms, exact Fraction
arithmetic for series and characteristic polynomials, and mpmath (a
different multiprecision stack) for Bessel-kernel quadrature.  The frozen
strings below are their outputs; meta-tests re-derive a few cheaply to
guard against drift.
"""

from decimal import Decimal, getcontext
from fractions import Fraction

import mpmath as mp

# arcoth(1 + 1e-50) = (1/2) ln((x+1)/(x-1)), decimal module at 200 digits
ARCOTH_1P1E50 = (
    "57.91120091513111475515840242783819347406528728289945452789353752"
    "893601205291865"
)

# sum of 1/k! with exact fractions (89 terms)
E_100 = (
    "2.718281828459045235360287471352662497757247093699959574966967627"
    "724076630353547594571382178525166427"
)

# 8x8 Hilbert matrix eigenvalues: exact Faddeev-LeVerrier characteristic
# polynomial over Fractions, roots isolated on a geometric grid and
# bisected 240 times (all digits exact at this length)
HILBERT8_EIGENVALUES = [
    "1.111538966372442427068269060372313499783624290287953692e-10",
    "1.798873745817576677264584820179872325977061751599127779e-08",
    "1.294332091872811480295087156831268144852698134802017913e-06",
    "5.436943369749942362372444469332109830146161526690310750e-05",
    "1.467688117741867311580993109160768809731877821907741014e-03",
    "2.621284357811904779660478252510828866900693321217959106e-02",
    "2.981252113169307061836778838921031461719483685414693925e-01",
    "1.695938996921949452081821727389524336568712318162483425e+00",
]


def decimal_arcoth(x_str: str, prec: int = 210) -> str:
    """(1/2) ln((x+1)/(x-1)) in pure decimal arithmetic."""
    getcontext().prec = prec
    x = Decimal(x_str)
    return str(((x + 1) / (x - 1)).ln() / 2)


def fraction_e(terms: int = 90) -> Fraction:
    s = Fraction(0)
    f = Fraction(1)
    for k in range(1, terms):
        s += f
        f /= k
    return s


def hilbert_charpoly(n: int = 8):
    """Exact monic characteristic polynomial coefficients (descending)."""
    H = [[Fraction(1, i + j + 1) for j in range(n)] for i in range(n)]

    def matmul(a, b):
        return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)]
                for i in range(n)]

    coeffs = [Fraction(1)]
    M = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for k in range(1, n + 1):
        HM = matmul(H, M)
        c = -sum(HM[i][i] for i in range(n)) / k
        coeffs.append(c)
        M = [[HM[i][j] + (c if i == j else 0) for j in range(n)]
             for i in range(n)]
    return coeffs


def bisect_roots(coeffs, lo: Fraction, hi: Fraction, grow: Fraction,
                 iters: int = 240):
    """Sign-change isolation on a geometric grid plus exact bisection."""

    def p(x):
        acc = Fraction(0)
        for c in coeffs:
            acc = acc * x + c
        return acc

    pts = [lo]
    while pts[-1] < hi:
        pts.append(pts[-1] * grow)
    roots = []
    ps = p(pts[0])
    for i in range(1, len(pts)):
        s2 = p(pts[i])
        if (ps < 0) != (s2 < 0):
            a, b = pts[i - 1], pts[i]
            pa = p(a)
            for _ in range(iters):
                mid = (a + b) / 2
                pm = p(mid)
                if (pa < 0) != (pm < 0):
                    b = mid
                else:
                    a, pa = mid, pm
            roots.append((a + b) / 2)
        ps = s2
    return roots


def mp_bessel_kernel_entry(pieces_j, pieces_k, m, dps: int = 40):
    """Position-space (A^-1/4)_{jk} with mpmath: Bessel-K kernel against
    two piecewise-linear elements given as [(a, b, v_lo, v_hi)] floats.

    The r-integral splits at the correlation breakpoints; the r -> 0
    endpoint uses mpmath's tanh-sinh handling of the r^(-1/2) weak
    singularity.
    """
    mp.mp.dps = dps
    m = mp.mpf(m)
    quarter = mp.mpf(1) / 4

    def kernel(r):
        return ((2 * m) ** quarter / (mp.sqrt(mp.pi) * mp.gamma(quarter))
                * r ** (-quarter) * mp.besselk(quarter, m * r))

    pj = [tuple(map(mp.mpf, seg)) for seg in pieces_j]
    pk = [tuple(map(mp.mpf, seg)) for seg in pieces_k]

    def corr(r):
        total = mp.mpf(0)
        for (a1, b1, v1, w1) in pj:
            for (a2, b2, v2, w2) in pk:
                lo = max(a1, a2 + r)
                hi = min(b1, b2 + r)
                if hi <= lo:
                    continue
                def f(x, a1=a1, b1=b1, v1=v1, w1=w1,
                      a2=a2, b2=b2, v2=v2, w2=w2):
                    f1 = v1 + (w1 - v1) * (x - a1) / (b1 - a1)
                    f2 = v2 + (w2 - v2) * ((x - r) - a2) / (b2 - a2)
                    return f1 * f2
                total += mp.quad(f, [lo, hi])
        return total

    breaks = sorted({abs(float(a1) - float(b2)) for (a1, b1, v1, w1) in pj
                     for (a2, b2, v2, w2) in pk}
                    | {abs(float(b1) - float(a2)) for (a1, b1, v1, w1) in pj
                       for (a2, b2, v2, w2) in pk}
                    | {0.0})
    pts = [mp.mpf(b) for b in breaks]

    def g(r):
        if r == 0:
            return mp.mpf(0)
        return kernel(r) * (corr(r) + corr(-r))

    return mp.quad(g, pts)
