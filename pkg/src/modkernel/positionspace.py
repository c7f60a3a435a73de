"""Position-space route to the fractional-power matrix entries.

The operator (-d^2/dx^2 + m^2)^(-1/4) has the convolution kernel

    K(r) = (2m)^(1/4) / (sqrt(pi) Gamma(1/4)) * r^(-1/4) * K_{1/4}(m r),

so a matrix entry is a double integral of K against two elements.  This
module evaluates that directly: the modified Bessel function through its
exponential integral representation, the element correlation in closed
per-segment form, and the weak r^(-1/2) endpoint singularity removed by
the substitution r = rho^4.

It shares no code path with the momentum-space assembly and exists as its
cross-check (selfcheck and test oracles); it is far too slow to be the
production route.
"""

from __future__ import annotations

import gmpy2
from gmpy2 import fma

from .discretization import BasisSet
from .precision import PrecisionContext
from .quadrature import gauss_legendre

__all__ = ["besselk_quarter", "kernel_value", "position_entry"]


def besselk_quarter(ctx: PrecisionContext, z):
    """K_{1/4}(z) from its integral representation
    K_nu(z) = integral of exp(-z cosh t) cosh(nu t) over t >= 0."""
    d = ctx.decimal_digits + ctx.guard_digits
    with ctx.boosted(10):
        z = gmpy2.mpfr(z)
        bits = gmpy2.get_context().precision
        ln10 = gmpy2.log(gmpy2.mpfr(10))
        quarter = gmpy2.mpfr(1) / 4
        n = int(1.1 * d) + 20
        nodes, weights = gauss_legendre(n, bits)
        total = gmpy2.mpfr(0)
        ta = gmpy2.mpfr(0)
        while True:
            tb = ta + 1
            mid = (ta + tb) / 2
            for xi, w in zip(nodes, weights):
                t = fma(gmpy2.mpfr("0.5"), xi, mid)
                total = fma(
                    w / 2, gmpy2.exp(-z * gmpy2.cosh(t)) * gmpy2.cosh(quarter * t),
                    total)
            ta = tb
            # stop once the remaining tail is below the precision floor
            if z * gmpy2.cosh(ta) - ta / 4 > (d + 15) * ln10:
                return total


def kernel_value(ctx: PrecisionContext, m, r):
    """Convolution kernel of the inverse quarter power at separation r > 0."""
    with ctx.boosted(10):
        m = gmpy2.mpfr(m)
        r = gmpy2.mpfr(r)
        pi = 4 * gmpy2.atan(gmpy2.mpfr(1))
        quarter = gmpy2.mpfr(1) / 4
        pref = (2 * m) ** quarter / (gmpy2.sqrt(pi) * gmpy2.gamma(quarter))
        return pref * r ** (-quarter) * besselk_quarter(ctx, m * r)


def _linear_pieces(grid, elem):
    """Element as [(x_lo, x_hi, value at lo, value at hi)] with exact nodes."""
    n = elem.node
    xs = grid.nodes
    if elem.kind == 0:  # hat
        return [(xs[n - 1], xs[n], 0, 1), (xs[n], xs[n + 1], 1, 0)]
    if elem.kind == 1:  # rise
        return [(xs[n - 1], xs[n], 0, 1)]
    return [(xs[n], xs[n + 1], 1, 0)]


def _correlation(ctx, pieces_j, pieces_k, r):
    """C(r) = integral of e_j(x) e_k(x - r) dx, exact per linear segment."""
    total = gmpy2.mpfr(0)
    for (a1, b1, v1, w1) in pieces_j:
        for (a2, b2, v2, w2) in pieces_k:
            lo = max(a1, a2 + r)
            hi = min(b1, b2 + r)
            if hi <= lo:
                continue
            # both factors linear on [lo, hi]: 2-point Gauss is exact
            mid = (lo + hi) / 2
            rad = (hi - lo) / 2
            xi = rad / gmpy2.sqrt(gmpy2.mpfr(3))
            for x in (mid - xi, mid + xi):
                f1 = v1 + (w1 - v1) * (x - a1) / (b1 - a1)
                f2 = v2 + (w2 - v2) * ((x - r) - a2) / (b2 - a2)
                total = fma(rad, f1 * f2, total)
    return total


def position_entry(basis: BasisSet, mass, j: int, k: int):
    """(A^-1/4)_{jk} as a position-space double integral.

    Integrates K(r) (C(r) + C(-r)) over r >= 0 with r-panels at the
    correlation breakpoints and r = rho^4 on the first panel, which makes
    the integrand analytic despite K ~ r^(-1/2) at the origin.
    """
    ctx = basis.ctx
    grid = basis.grid
    d = ctx.decimal_digits + ctx.guard_digits
    with ctx.boosted(10):
        m = gmpy2.mpfr(mass)
        bits = gmpy2.get_context().precision
        pj = _linear_pieces(grid, basis.elements[j])
        pk = _linear_pieces(grid, basis.elements[k])
        h = grid.h
        delta = (basis.elements[j].node - basis.elements[k].node)
        breaks = sorted({abs((delta + dd)) for dd in range(-2, 3)})
        edges = [b * h for b in breaks]
        if edges[0] != 0:
            edges = [gmpy2.mpfr(0)] + edges
        n = int(1.05 * d) + 16
        nodes, weights = gauss_legendre(n, bits)

        def f(r):
            c = _correlation(ctx, pj, pk, r) + _correlation(ctx, pj, pk, -r)
            if not c:
                return c
            return kernel_value(ctx, m, r) * c

        total = gmpy2.mpfr(0)
        for (ra, rb) in zip(edges[:-1], edges[1:]):
            if ra == 0:
                # r = rho^4 removes the endpoint singularity
                rho_hi = rb ** (gmpy2.mpfr(1) / 4)
                mid = rho_hi / 2
                for xi, w in zip(nodes, weights):
                    rho = fma(mid, xi, mid)
                    r = rho ** 4
                    total = fma(w * mid * 4 * rho ** 3, f(r), total)
            else:
                mid = (ra + rb) / 2
                rad = (rb - ra) / 2
                for xi, w in zip(nodes, weights):
                    r = fma(rad, xi, mid)
                    total = fma(w * rad, f(r), total)
        return +total
