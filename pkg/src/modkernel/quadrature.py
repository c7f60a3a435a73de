"""Gauss-Legendre rules at arbitrary precision, with panel helpers.

Nodes are found by Newton iteration on the Legendre recurrence from
float64 Tricomi seeds; rules are cached per (n, bits).  Rules and panel
sums are deterministic for a fixed precision.
"""

from __future__ import annotations

import math

import gmpy2

_RULE_CACHE: dict = {}


def _legendre_pair(n: int, x):
    """(P_n(x), P'_n(x)) by upward recurrence."""
    p0 = gmpy2.mpfr(1)
    p1 = x
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1)
    return p1, dp


def gauss_legendre(n: int, bits: int):
    """Nodes and weights of the n-point rule on [-1, 1] at `bits` precision."""
    key = (n, bits)
    rule = _RULE_CACHE.get(key)
    if rule is not None:
        return rule
    work = gmpy2.context(precision=bits + 40, trap_invalid=True, trap_divzero=True)
    with work:
        nodes = [None] * n
        weights = [None] * n
        half = n // 2
        for i in range(1, half + 1):
            # float seed, refined in float first, then full-precision Newton
            x = math.cos(math.pi * (i - 0.25) / (n + 0.5))
            for _ in range(8):
                p0f, p1f = 1.0, x
                for k in range(2, n + 1):
                    p0f, p1f = p1f, ((2 * k - 1) * x * p1f - (k - 1) * p0f) / k
                dpf = n * (x * p1f - p0f) / (x * x - 1.0)
                x -= p1f / dpf
            xm = gmpy2.mpfr(x)
            iters = max(3, math.ceil(math.log2((bits + 40) / 45.0)) + 2)
            for _ in range(iters):
                p, dp = _legendre_pair(n, xm)
                xm = xm - p / dp
            _, dp = _legendre_pair(n, xm)
            w = 2 / ((1 - xm * xm) * dp * dp)
            nodes[i - 1] = -xm
            weights[i - 1] = w
            nodes[n - i] = xm
            weights[n - i] = w
        if n % 2 == 1:
            xm = gmpy2.mpfr(0)
            _, dp = _legendre_pair(n, xm)
            nodes[half] = xm
            weights[half] = 2 / (dp * dp)
    _RULE_CACHE[key] = (nodes, weights)
    return nodes, weights


def panel_points(a, b, n: int, bits: int):
    """Quadrature points and weights mapped onto the panel [a, b]."""
    nodes, weights = gauss_legendre(n, bits)
    mid = (a + b) / 2
    rad = (b - a) / 2
    return [(mid + rad * x, rad * w) for x, w in zip(nodes, weights)]


def integrate_panels(f, panels, n: int, bits: int):
    """Sum of f over consecutive panels [(a0,a1),(a1,a2),...] with n nodes each."""
    total = gmpy2.mpfr(0)
    for a, b in panels:
        for x, w in panel_points(a, b, n, bits):
            total += w * f(x)
    return total


def geometric_panels(first, last, start_len):
    """Panel edges [0..] with doubling lengths: [0,s],[s,2s],[2s,4s],... up to last."""
    edges = [first]
    x = first + start_len
    step = start_len
    while x < last:
        edges.append(x)
        step *= 2
        x = x + step
    edges.append(last)
    return list(zip(edges[:-1], edges[1:]))
