"""The central computation: assemble B, gate its spectrum, apply arcoth by
functional calculus, form the kernel matrices, and smear against Gaussian
probes.

Everything happens in the orthonormal frame of the basis until the last
step, where the kernel matrices are pulled back to hat-basis bilinear
form so that smearing integrals run against true position-space test
functions.  Eigenvalues of B inside (or indistinguishable from) the band
[-1, 1] abort the run: more digits or more cells is the remedy, clamping
is never applied.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import fma

from .discretization import (
    BasisSet,
    Grid,
    Interval,
    RegionSpec,
    Wedge,
    a_power_matrix,
    build_basis,
    chi_matrix,
    orthonormal_frame,
)
from .errors import DomainError, ForbiddenSpectrum, ProbeOutsideGrid
from .linalg import (
    MatrixMP,
    SymEigen,
    invert,
    matrix_function,
    multiply,
    solve_cholesky,
    sym_eigen,
)
from .precision import PrecisionContext, Real
from .quadrature import gauss_legendre

__all__ = [
    "GaussianProbe",
    "ModularResult",
    "SmearScan",
    "ScanEntry",
    "build_B",
    "spectrum_gate",
    "classify_spectrum",
    "build_M",
    "kernel_on_grid",
    "smear",
    "mu_scan",
    "analytic_reference",
    "is_massless_limit",
    "run_pipeline",
]

# a run is flagged when fewer than this many trustworthy digits remain
# after the arcoth amplification near the forbidden band
PRECISION_MARGIN_DIGITS = 30


@dataclass(frozen=True)
class GaussianProbe:
    """L2-normalized Gaussian probe centered at mu.

    width is the standard deviation of the probe density g^2, so
    g(x) = (2 pi sigma^2)^(-1/4) exp(-(x-mu)^2 / (4 sigma^2)) and the
    smearing measure g^2 dx is the normal distribution N(mu, sigma^2).
    """

    center: object
    width: object

    def values(self, ctx, xs):
        with ctx.activate():
            mu = ctx.real(self.center)
            sigma = ctx.real(self.width)
            if sigma <= 0:
                raise DomainError("probe width must be positive")
            two_pi = 2 * ctx.pi()
            norm = 1 / gmpy2.sqrt(sigma * gmpy2.sqrt(two_pi))
            out = []
            for x in xs:
                u = (x - mu) / sigma
                out.append(norm * gmpy2.exp(-u * u / 4))
            return out


@dataclass
class ModularResult:
    """Kernel matrices in hat-basis bilinear form plus run diagnostics."""

    B_eigenvalues: list
    M_minus: MatrixMP
    M_plus: MatrixMP
    min_gap: Real
    basis: BasisSet
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.min_gap > 0:
            raise ForbiddenSpectrum(-1, None, self.min_gap)

    @property
    def ctx(self):
        return self.M_minus.ctx


@dataclass(frozen=True)
class ScanEntry:
    mu: object
    value: object
    analytic_ref: object  # None when no closed form applies
    region: RegionSpec
    mass: object


@dataclass
class SmearScan:
    entries: list

    def __post_init__(self):
        for a, b in zip(self.entries, self.entries[1:]):
            if not a.mu < b.mu:
                raise DomainError("scan probe centers must strictly increase")


def build_B(chi_t: MatrixMP, a_neg_t: MatrixMP,
            a_pos_t: MatrixMP | None = None) -> MatrixMP:
    """B = A+ chi A- + A- chi A+ - 1 in the orthonormal frame, symmetrized.

    a_pos_t is obtained by numerical inversion of the (SPD) a_neg_t when
    not supplied.
    """
    if a_pos_t is None:
        a_pos_t = invert(a_neg_t)
    ctx = chi_t.ctx
    left = multiply(multiply(a_pos_t, chi_t), a_neg_t)
    right = multiply(multiply(a_neg_t, chi_t), a_pos_t)
    s = left.add(right)
    with ctx.activate():
        one = ctx.real(1)
        data = [row[:] for row in s.data]
        for i in range(s.rows):
            data[i][i] = data[i][i] - one
    return MatrixMP(ctx, data).symmetrized()


def spectrum_gate(b: MatrixMP, epsilon=None):
    """Eigendecomposition of B with the arcoth domain enforced.

    Raises ForbiddenSpectrum if any |eigenvalue| <= 1 + epsilon, where
    epsilon defaults to the eigensolver's own noise floor (so a gap
    indistinguishable from rounding error is rejected, never clamped).
    Returns (SymEigen, min_gap, warnings).
    """
    eig = sym_eigen(b)
    ctx = b.ctx
    with ctx.activate():
        if epsilon is None:
            noise = 10 * b.rows * eig.residual
            floor = (ctx.real(10) **
                     (-(ctx.decimal_digits - ctx.guard_digits))) * b.frobenius()
            epsilon = max(noise, floor)
        else:
            epsilon = ctx.real(epsilon)
        min_gap = None
        min_idx = None
        for i, lam in enumerate(eig.eigenvalues):
            gap = abs(lam) - 1
            if min_gap is None or gap < min_gap:
                min_gap, min_idx = gap, i
        if min_gap <= epsilon:
            raise ForbiddenSpectrum(min_idx, eig.eigenvalues[min_idx], min_gap)
        warnings = []
        # trustworthy digits left after the 1/(lambda^2 - 1) amplification
        log_gap = float(gmpy2.log10(min_gap))
        log_norm = float(gmpy2.log10(max(b.frobenius(), ctx.real(1))))
        effective = (ctx.decimal_digits - ctx.guard_digits) + log_gap - log_norm
        if effective < PRECISION_MARGIN_DIGITS:
            warnings.append(
                f"precision marginal: min |lambda|-1 = {ctx.to_str(min_gap, 3)} "
                f"leaves ~{effective:.0f} trustworthy digits "
                f"(< {PRECISION_MARGIN_DIGITS}); raise digits"
            )
    return eig, min_gap, warnings


def classify_spectrum(b: MatrixMP, chi_t: MatrixMP, a_neg_t: MatrixMP,
                      a_pos_t: MatrixMP, epsilon=None):
    """Eigendecompose B, separating structural band modes from the rest.

    Finite rank breaks the anti-locality of the half power: whenever the
    region fills less than half the box, rank(chi) forces eigenvalues at
    exactly -1 whose eigenvectors u satisfy chi A^(-1/4) u = 0 and
    chi A^(+1/4) u = 0.  Those modes contribute exactly nothing to the
    kernel tested against functions supported in the region, so they are
    deflated after their decoupling is verified coordinate by coordinate.
    A band mode that fails the verification, or any retained eigenvalue
    within epsilon of the band, raises ForbiddenSpectrum; eigenvalues at
    +1 always do (the region-coupled degenerate case).

    Returns (eig, kept indices, deflated indices, min_gap over kept,
    warnings, max deflated coupling).
    """
    eig = sym_eigen(b)
    ctx = b.ctx
    n = b.rows
    with ctx.activate():
        fro = max(b.frobenius(), ctx.real(1))
        band_tol = max(
            ctx.real(10000) * n * eig.residual,
            (ctx.real(10) ** (-(ctx.decimal_digits - 2 * ctx.guard_digits)))
            * fro)
        coupling_tol = ctx.real(10) ** (-(ctx.decimal_digits // 2))
        kept = []
        deflated = []
        max_coupling = ctx.real(0)
        U = eig.eigenvectors
        for i, lam in enumerate(eig.eigenvalues):
            gap = abs(lam) - 1
            if abs(gap) > band_tol:
                kept.append(i)
                continue
            if lam > 0:
                # +1 modes couple to region-supported probes: unusable
                raise ForbiddenSpectrum(
                    i, lam, gap,
                    hint="a +1 band mode means the region fills half the "
                         "box or more; enlarge halfwidth")
            u = [U.data[r][i] for r in range(n)]
            c_neg = max(abs(v) for v in chi_t.mul_vector(a_neg_t.mul_vector(u)))
            c_pos = max(abs(v) for v in chi_t.mul_vector(a_pos_t.mul_vector(u)))
            coupling = max(c_neg, c_pos)
            if coupling > coupling_tol:
                raise ForbiddenSpectrum(i, lam, gap)
            deflated.append(i)
            if coupling > max_coupling:
                max_coupling = coupling
        if not kept:
            raise ForbiddenSpectrum(0, eig.eigenvalues[0],
                                    abs(eig.eigenvalues[0]) - 1)
        min_gap = None
        min_idx = None
        for i in kept:
            gap = abs(eig.eigenvalues[i]) - 1
            if min_gap is None or gap < min_gap:
                min_gap, min_idx = gap, i
        if epsilon is None:
            epsilon = max(10 * n * eig.residual,
                          (ctx.real(10) **
                           (-(ctx.decimal_digits - ctx.guard_digits))) * fro)
        else:
            epsilon = ctx.real(epsilon)
        if min_gap <= epsilon:
            raise ForbiddenSpectrum(min_idx, eig.eigenvalues[min_idx], min_gap)
        warnings = []
        log_gap = float(gmpy2.log10(min_gap))
        log_norm = float(gmpy2.log10(fro))
        effective = (ctx.decimal_digits - ctx.guard_digits) + log_gap - log_norm
        if effective < PRECISION_MARGIN_DIGITS:
            warnings.append(
                f"precision marginal: min |lambda|-1 = {ctx.to_str(min_gap, 3)} "
                f"leaves ~{effective:.0f} trustworthy digits "
                f"(< {PRECISION_MARGIN_DIGITS}); raise digits"
            )
    return eig, kept, deflated, min_gap, warnings, max_coupling


def build_M(eig_b: SymEigen, a_neg_t: MatrixMP, a_pos_t: MatrixMP,
            sign: str, basis: BasisSet, keep=None) -> MatrixMP:
    """M(sign) = 2 A(sign) arcoth(B) A(sign), pulled back to the hat basis.

    keep restricts the functional calculus to the listed eigenvalue
    indices (the verified-decoupled band modes are omitted that way).
    The orthonormal-frame result Mt is converted to the bilinear-form
    matrix via the congruence reversal L Mt L^T.
    """
    if sign not in ("+", "-"):
        raise DomainError(f"sign must be '+' or '-', got {sign!r}")
    ctx = a_neg_t.ctx
    if keep is None:
        sub = eig_b
    else:
        cols = list(keep)
        U = eig_b.eigenvectors
        sub = SymEigen(
            [eig_b.eigenvalues[i] for i in cols],
            MatrixMP(ctx, [[U.data[r][i] for i in cols]
                           for r in range(U.rows)]),
            eig_b.residual)
    arc = matrix_function(ctx.arcoth, sub)
    a = a_neg_t if sign == "-" else a_pos_t
    mt = multiply(multiply(a, arc), a).scale(2).symmetrized()
    L = basis.chol()
    m_hat = multiply(multiply(L, mt), L.transpose())
    return m_hat.symmetrized()


def kernel_on_grid(m_hat: MatrixMP, basis: BasisSet):
    """Pointwise kernel samples M(x_a, x_b) on the interior grid nodes.

    Expands the kernel over the orthonormalized elements, which in terms
    of the bilinear-form matrix means sampling G^-1 M G^-1 against the
    element point values.
    """
    ctx = m_hat.ctx
    L = basis.chol()
    n = m_hat.rows
    # G^-1 M: solve column by column
    cols = []
    for j in range(n):
        col = [m_hat.data[i][j] for i in range(n)]
        cols.append(solve_cholesky(L, col))
    gm = MatrixMP(ctx, [[cols[j][i] for j in range(n)] for i in range(n)])
    cols = []
    for j in range(n):
        col = [gm.data[j][i] for i in range(n)]  # row j of G^-1 M
        cols.append(solve_cholesky(L, col))
    coeff = MatrixMP(ctx, [[cols[i][j] for j in range(n)] for i in range(n)])
    pv = basis.point_value_matrix()
    samples = multiply(multiply(pv.transpose(), coeff), pv)
    xs = basis.grid.nodes[1:-1]
    return xs, samples


def band_masses(xs, samples: MatrixMP, h, center, window=None):
    """Sums of |kernel| on the diagonal band |x-y| <= 2h, off it, and on
    the antidiagonal band |x + y - 2 c| <= 2h (reported, never asserted).

    window = (lo, hi) restricts the sums to sample points inside it; the
    pipeline passes the region so the diagnostics describe the kernel
    where the modular data lives and the heatmaps are drawn.
    """
    ctx = samples.ctx
    with ctx.activate():
        two_h = 2 * ctx.real(h)
        c2 = 2 * ctx.real(center)
        band = ctx.real(0)
        off = ctx.real(0)
        anti = ctx.real(0)
        idx = range(len(xs))
        if window is not None:
            lo, hi = ctx.real(window[0]), ctx.real(window[1])
            idx = [i for i in idx if lo <= xs[i] <= hi]
        for i in idx:
            x = xs[i]
            for j in idx:
                y = xs[j]
                v = abs(samples.data[i][j])
                if abs(x - y) <= two_h:
                    band += v
                else:
                    off += v
                if abs(x + y - c2) <= two_h:
                    anti += v
        return band, off, anti


def smear(m_hat: MatrixMP, basis: BasisSet, probe: GaussianProbe) -> Real:
    """Quadratic form of the kernel against one L2-normalized Gaussian.

    The probe is projected onto the basis by exact per-cell quadrature of
    its overlaps, the Gram system is solved for coefficients, and the
    bilinear form is evaluated; when M multiplies by f the result
    estimates f(mu).
    """
    ctx = m_hat.ctx
    grid = basis.grid
    with ctx.activate():
        mu = ctx.real(probe.center)
        sigma = ctx.real(probe.width)
        if sigma <= 0:
            raise DomainError("probe width must be positive")
        if abs(mu) + 6 * sigma >= grid.half_width:
            raise ProbeOutsideGrid(
                f"probe at {ctx.to_str(mu, 6)} with width {ctx.to_str(sigma, 6)} "
                f"reaches the box edge {ctx.to_str(grid.half_width, 6)}")
        d_work = ctx.decimal_digits + ctx.guard_digits
        # cells with non-negligible probe mass
        reach = 2 * sigma * gmpy2.sqrt((d_work + 10) * gmpy2.log(ctx.real(10)))
        lo = max(0, int(float((mu - reach + grid.half_width) / grid.h)) - 1)
        hi = min(grid.n_cells, int(float((mu + reach + grid.half_width) / grid.h)) + 2)
        n_gl = int(0.55 * d_work) + 16
        nodes, weights = gauss_legendre(n_gl, ctx.bits)
        v = [ctx.real(0)] * basis.size
        two_pi = 2 * ctx.pi()
        norm = 1 / gmpy2.sqrt(sigma * gmpy2.sqrt(two_pi))
        for cell in range(lo, hi):
            sup = basis.cell_support[cell]
            if not sup:
                continue
            a = grid.nodes[cell]
            b = grid.nodes[cell + 1]
            mid = (a + b) / 2
            rad = (b - a) / 2
            for xi, w in zip(nodes, weights):
                x = fma(rad, xi, mid)
                u = (x - mu) / sigma
                gx = norm * gmpy2.exp(-u * u / 4)
                t = (x - a) / (b - a)
                wg = w * rad * gx
                for (idx, vlo, vhi) in sup:
                    val = vlo + (vhi - vlo) * t
                    if val:
                        v[idx] = fma(wg, val, v[idx])
        c = solve_cholesky(basis.chol(), v)
        mc = m_hat.mul_vector(c)
        out = ctx.real(0)
        for ci, mi in zip(c, mc):
            out = fma(ci, mi, out)
        return out


def analytic_reference(region: RegionSpec, m_regime: str, mu, ctx):
    """Known closed forms: the wedge boost line and, in the massless
    limit, the double-cone parabola.  None where no reference applies."""
    if m_regime not in ("massless-limit", "any"):
        raise DomainError(f"unknown mass regime {m_regime!r}")
    with ctx.activate():
        mu = ctx.real(mu)
        two_pi = 2 * ctx.pi()
        if isinstance(region, Wedge):
            a = ctx.real(region.edge)
            if mu > a:
                return two_pi * (mu - a)
            return None
        if m_regime != "massless-limit":
            return None
        left = ctx.real(region.left)
        right = ctx.real(region.right)
        r = (right - left) / 2
        c = (right + left) / 2
        if abs(mu - c) <= r:
            return (two_pi / 2) * (r * r - (mu - c) ** 2)
        return None


def is_massless_limit(region: RegionSpec, mass, ctx) -> bool:
    """Treat the mass as zero when m * (region radius scale) <= 1/100."""
    with ctx.activate():
        m = ctx.real(mass)
        if isinstance(region, Interval):
            scale = (ctx.real(region.right) - ctx.real(region.left)) / 2
        else:
            scale = ctx.real(1)
        return m * scale <= ctx.real("0.01")


def run_pipeline(region: RegionSpec, mass, n_cells: int, half_width,
                 ctx: PrecisionContext, mode: str = "split",
                 epsilon=None, complement: bool = False,
                 progress=None) -> ModularResult:
    """Full chain: basis, chi, A^(-1/4), frames, B, gate, arcoth, M-+.

    complement=True runs the same geometry with the region swapped for
    its complement inside the box (chi -> G - chi), which flips B and
    hence the sign of the kernels exactly.
    """
    say = progress or (lambda msg: None)
    t0 = time.time()
    grid = Grid(ctx, n_cells, half_width)
    basis = build_basis(grid, region, mode)
    say(f"basis: {basis.size} elements, mode={mode}")
    x = chi_matrix(basis, complement=complement)
    a_neg, quad_err = a_power_matrix(basis, mass, return_error=True)
    say(f"A^(-1/4) assembled ({time.time() - t0:.1f}s, "
        f"estimate {ctx.to_str(quad_err, 3)})")
    chi_t = orthonormal_frame(basis, x)
    a_neg_t = orthonormal_frame(basis, a_neg)
    a_pos_t = invert(a_neg_t)
    b = build_B(chi_t, a_neg_t, a_pos_t)
    say(f"B assembled ({time.time() - t0:.1f}s); eigensolve...")
    eig, kept, deflated, min_gap, warnings, max_coupling = classify_spectrum(
        b, chi_t, a_neg_t, a_pos_t, epsilon)
    say(f"spectrum gated: min gap {ctx.to_str(min_gap, 3)}, "
        f"{len(deflated)} decoupled band modes ({time.time() - t0:.1f}s)")
    m_minus = build_M(eig, a_neg_t, a_pos_t, "-", basis, keep=kept)
    m_plus = build_M(eig, a_neg_t, a_pos_t, "+", basis, keep=kept)

    with ctx.activate():
        if isinstance(region, Interval):
            center = (ctx.real(region.left) + ctx.real(region.right)) / 2
            window = (region.left, region.right)
        else:
            center = ctx.real(region.edge)
            window = (region.edge, grid.half_width)
    xs, samples = kernel_on_grid(m_minus, basis)
    band, off, anti = band_masses(xs, samples, grid.h, center, window)
    say(f"kernel sampled; band masses computed ({time.time() - t0:.1f}s)")

    metadata = {
        "mass": mass,
        "n_cells": n_cells,
        "half_width": half_width,
        "digits": ctx.decimal_digits,
        "mode": mode,
        "region": region,
        "complement": complement,
        "quad_error": quad_err,
        "eigen_residual": eig.residual,
        "deflated_modes": len(deflated),
        "deflated_coupling": max_coupling,
        "warnings": warnings,
        "band_mass": band,
        "offband_mass": off,
        "antidiagonal_mass": anti,
        "seconds": time.time() - t0,
    }
    return ModularResult(
        B_eigenvalues=eig.eigenvalues,
        M_minus=m_minus,
        M_plus=m_plus,
        min_gap=min_gap,
        basis=basis,
        metadata=metadata,
    )


def mu_scan(region: RegionSpec, mass, n_cells: int, half_width,
            ctx: PrecisionContext, sigma, mu_list, mode: str = "split",
            epsilon=None, progress=None):
    """One pipeline run, then a smear per probe center, with analytic
    references attached where they exist.  Returns (SmearScan, result)."""
    if not mu_list:
        raise DomainError("mu list must not be empty")
    result = run_pipeline(region, mass, n_cells, half_width, ctx,
                          mode=mode, epsilon=epsilon, progress=progress)
    regime = ("massless-limit" if is_massless_limit(region, mass, ctx)
              else "any")
    with ctx.activate():
        mus = sorted(ctx.real(v) for v in mu_list)
    entries = []
    for mu in mus:
        val = smear(result.M_minus, result.basis,
                    GaussianProbe(mu, sigma))
        ref = analytic_reference(region, regime, mu, ctx)
        entries.append(ScanEntry(mu, val, ref, region, mass))
    return SmearScan(entries), result
