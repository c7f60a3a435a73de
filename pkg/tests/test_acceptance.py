"""Acceptance suite: the release bar for the package, one pass/fail line
per criterion on stdout.

The quantitative anchors are the two closed-form modular kernels (the
boost line 2 pi x for the wedge, the parabola pi(1 - x^2) for the
near-massless interval) plus property-based checks for everything the
continuum theory fixes only qualitatively.
"""

import subprocess
import sys

import gmpy2
import pytest

from modkernel import (
    ForbiddenSpectrum,
    GaussianProbe,
    Grid,
    Interval,
    MatrixMP,
    PrecisionContext,
    Wedge,
    a_power_matrix,
    build_basis,
    cholesky,
    invert,
    multiply,
    run_pipeline,
    smear,
    sym_eigen,
)
from modkernel.positionspace import position_entry
from oracles import HILBERT8_EIGENVALUES


def _report(name: str, ok: bool, detail: str = ""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else ""))
    assert ok, f"{name}: {detail}"


def _rel(ctx, value, want):
    with ctx.activate():
        return float(abs(value - want) / abs(want))


# -- criterion: wedge reference (quantitative) --------------------------------

def test_wedge_reference(ctx300, wedge_m1, wedge_m4):
    ctx = ctx300
    with ctx.activate():
        two_pi = 2 * ctx.pi()
    rels = []
    drifts = []
    for mu in ("0.25", "0.5", "1.0"):
        v1 = smear(wedge_m1.M_minus, wedge_m1.basis, GaussianProbe(mu, "0.1"))
        v4 = smear(wedge_m4.M_minus, wedge_m4.basis, GaussianProbe(mu, "0.1"))
        with ctx.activate():
            want = two_pi * ctx.real(mu)
            rels.append(_rel(ctx, v1, want))
            rels.append(_rel(ctx, v4, want))
            drifts.append(float(abs(v4 - v1) / want))
    detail = (f"max rel err {max(rels):.4f} (tol 0.05), "
              f"mass drift {max(drifts):.4f}")
    _report("wedge reference 2*pi*mu at m=1 and m=4", max(rels) <= 0.05
            and max(drifts) <= 0.05, detail)


# -- criterion: massless double-cone limit ------------------------------------

def test_massless_double_cone(ctx300, interval_m001_n64, interval_m001_n128):
    ctx = ctx300
    with ctx.activate():
        pi = ctx.pi()
    gaps = {}
    for name, res in (("N=64", interval_m001_n64),
                      ("N=128", interval_m001_n128)):
        worst = 0.0
        for mu in ("-0.5", "0", "0.5"):
            v = smear(res.M_minus, res.basis, GaussianProbe(mu, "0.08"))
            with ctx.activate():
                want = pi * (1 - ctx.real(mu) ** 2)
            worst = max(worst, _rel(ctx, v, want))
        gaps[name] = worst
    ok = gaps["N=64"] <= 0.10 and gaps["N=128"] <= 0.10 \
        and gaps["N=128"] < gaps["N=64"]
    _report("massless double cone pi(1-mu^2)",
            ok, f"worst rel err N=64: {gaps['N=64']:.4f}, doubled: "
                f"{gaps['N=128']:.4f} (tol 0.10, must shrink)")


# -- criterion: mass dependence (property-based) -------------------------------

def test_mass_dependence(ctx300, interval_m001_n64, interval_m1, interval_m4,
                         interval_m10):
    ctx = ctx300
    vals = []
    for res in (interval_m001_n64, interval_m1, interval_m4, interval_m10):
        vals.append(smear(res.M_minus, res.basis, GaussianProbe("0", "0.08")))
    with ctx.activate():
        pi = ctx.pi()
        lo = float(pi * ctx.real("0.9"))
        hi = float(2 * pi * ctx.real("1.1"))
        floats = [float(v) for v in vals]
    increasing = all(a < b for a, b in zip(floats, floats[1:]))
    in_range = all(lo <= v <= hi for v in floats)
    _report("mass dependence at mu=0",
            increasing and in_range,
            f"values {', '.join(f'{v:.4f}' for v in floats)} rising from "
            f"pi={float(pi):.4f} toward 2pi={float(2 * pi):.4f}")


# -- criterion: diagonal concentration ------------------------------------------

def test_diagonal_concentration(ctx300, interval_m1):
    md = interval_m1.metadata
    band = float(md["band_mass"])
    off = float(md["offband_mass"])
    anti = float(md["antidiagonal_mass"])
    _report("diagonal concentration of the interval kernel",
            band > off,
            f"band {band:.1f} > off-band {off:.1f}; antidiagonal mass "
            f"{anti:.1f} (reported, not asserted)")


# -- criterion: spectral gate and precision -------------------------------------

def test_spectral_gate_all_runs(ctx300, wedge_m1, wedge_m4,
                                interval_m001_n64, interval_m001_n128,
                                interval_m1, interval_m4, interval_m10):
    ctx = ctx300
    results = [wedge_m1, wedge_m4, interval_m001_n64, interval_m001_n128,
               interval_m1, interval_m4, interval_m10]
    with ctx.activate():
        ok = all(r.min_gap > 0 for r in results)
        gaps = [ctx.to_str(r.min_gap, 3) for r in results]
    _report("spectral gate: min |lambda(B)| > 1 on all runs", ok,
            "min gaps " + ", ".join(gaps))


def test_starved_precision_fails_loudly():
    ctx = PrecisionContext(60)
    try:
        res = run_pipeline(Interval("-1", "1"), "1", 64, "4", ctx,
                           mode="split")
    except ForbiddenSpectrum as e:
        _report("starved run (digits=60 at N=64) fails loudly", True,
                f"ForbiddenSpectrum: gap {e.gap}")
        return
    warned = bool(res.metadata["warnings"])
    _report("starved run (digits=60 at N=64) fails loudly", warned,
            "survived with min_gap warnings" if warned
            else "no error and no warning: silent values")


# -- criterion: oracle suites ----------------------------------------------------

def test_oracle_arcoth_coth_roundtrip(ctx300):
    ctx = ctx300
    with ctx.activate():
        tol = ctx.real(10) ** (-(ctx.decimal_digits - 30))
        worst = ctx.real(0)
        for k in (1, 5, 10, 20, 25):
            for sign in (1, -1):
                x = sign * (1 + ctx.real(10) ** -k)
                d = abs(ctx.coth(ctx.arcoth(x)) - x)
                worst = max(worst, d)
        ok = worst <= tol
        detail = f"worst |coth(arcoth(x)) - x| = {ctx.to_str(worst, 3)}"
    _report("oracle: arcoth/coth round trip at 10^-(digits-30)", ok, detail)


def test_oracle_momentum_vs_position():
    ctx = PrecisionContext(50)
    grid = Grid(ctx, 8, 2)
    worst = 0.0
    count = 0
    for mode, pairs in (("standard", [(0, 0), (0, 1), (0, 3)]),
                        ("split", [(1, 1), (1, 2), (2, 6)])):
        basis = build_basis(grid, Interval("-1", "1"), mode)
        a = a_power_matrix(basis, 1)
        with ctx.activate():
            tol = float(ctx.tol(10))
            for (j, k) in pairs:
                d = float(abs(position_entry(basis, 1, j, k) - a[j, k]))
                worst = max(worst, d)
                count += 1
    _report("oracle: momentum vs position quadrature on 6 entries",
            worst <= tol and count >= 5,
            f"worst |diff| = {worst:.3e} (tol {tol:.1e})")


def test_oracle_jacobi_vs_charpoly_bisection():
    ctx = PrecisionContext(60)
    from fractions import Fraction
    h = MatrixMP.from_rows(
        ctx, [[Fraction(1, i + j + 1) for j in range(8)] for i in range(8)],
        symmetric=True)
    e = sym_eigen(h)
    with ctx.activate():
        tol = ctx.real(10) ** -40
        worst = ctx.real(0)
        for got, frozen in zip(e.eigenvalues, HILBERT8_EIGENVALUES):
            want = ctx.parse(frozen)
            worst = max(worst, abs(got - want) / max(abs(want), ctx.real(1)))
        ok = worst <= tol
        detail = f"worst dev {ctx.to_str(worst, 3)} (tol 1e-40)"
    _report("oracle: Jacobi vs characteristic-polynomial bisection", ok, detail)


def test_oracle_residuals():
    ctx = PrecisionContext(100)
    grid = Grid(ctx, 16, 2)
    basis = build_basis(grid, Wedge("0"), "split")
    a = a_power_matrix(basis, 1)
    L = cholesky(basis.gram)
    with ctx.activate():
        tol = ctx.tol(ctx.guard_digits)
        r1 = multiply(L, L.transpose()).sub(basis.gram).max_abs()
        ainv = invert(a)
        eye = MatrixMP.identity(ctx, basis.size)
        r2 = multiply(a, ainv).sub(eye).max_abs()
        at = a  # orthonormal-frame residual covered via invert above
        ok = r1 < tol and r2 < tol
        detail = (f"chol resid {ctx.to_str(r1, 3)}, "
                  f"inverse resid {ctx.to_str(r2, 3)} (tol {ctx.to_str(tol, 3)})")
    _report("oracle: Gram/Cholesky/inversion residuals", ok, detail)


def test_oracle_inverse_of_discretized_power():
    # inverse of the discretized A^(-1/4) at N=16, m=1, b=2, 100 digits
    ctx = PrecisionContext(100)
    basis = build_basis(Grid(ctx, 16, 2), Wedge("0"), "split")
    from modkernel import orthonormal_frame
    at = orthonormal_frame(basis, a_power_matrix(basis, 1))
    apos = invert(at)
    with ctx.activate():
        r = multiply(at, apos).sub(MatrixMP.identity(ctx, basis.size)).max_abs()
        ok = r < ctx.real(10) ** -80
    _report("oracle: discretized A^(1/4) inversion residual", ok,
            f"residual {ctx.to_str(r, 3)} (tol 1e-80)")


# -- criterion: determinism -------------------------------------------------------

def test_determinism_byte_identical_scans(tmp_path):
    out = tmp_path / "scan.csv"
    cmd = [sys.executable, "-m", "modkernel.cli", "scan",
           "--region", "wedge", "--edge", "0", "--mass", "1",
           "--cells", "16", "--halfwidth", "2", "--digits", "100",
           "--sigma", "0.15", "--mu", "0.25", "--mu", "0.75",
           "--out", str(out)]
    blobs = []
    for _ in range(2):
        r = subprocess.run(cmd, capture_output=True, text=True)
        assert r.returncode == 0, r.stderr
        blobs.append(out.read_bytes())
    _report("determinism: byte-identical scan CSVs", blobs[0] == blobs[1],
            f"{len(blobs[0])} bytes each")


# -- heavy invariants: weak convergence, precision sensitivity, gap trend ---------

def test_weak_convergence_stabilization(ctx300, interval_m1):
    # |value(N) - value(2N)| decreases over three successive doublings
    ctx = ctx300
    vals = {}
    for n in (16, 32, 128):
        res = run_pipeline(Interval("-1", "1"), "1", n, "4", ctx, mode="split")
        vals[n] = smear(res.M_minus, res.basis, GaussianProbe("0", "0.1"))
    vals[64] = smear(interval_m1.M_minus, interval_m1.basis,
                     GaussianProbe("0", "0.1"))
    with ctx.activate():
        d = [float(abs(vals[n] - vals[2 * n])) for n in (16, 32, 64)]
    _report("weak convergence: successive N-doubling differences decrease",
            d[0] > d[1] > d[2],
            "diffs " + ", ".join(f"{x:.3e}" for x in d))


def test_weak_convergence_box_growth(ctx300):
    # at fixed spacing h = 1/4, growing the box shrinks the differences
    ctx = ctx300
    vals = []
    for n, b in ((32, "4"), (64, "8"), (128, "16")):
        res = run_pipeline(Interval("-1", "1"), "1", n, b, ctx, mode="split")
        vals.append(smear(res.M_minus, res.basis, GaussianProbe("0", "0.1")))
    with ctx.activate():
        d1 = float(abs(vals[0] - vals[1]))
        d2 = float(abs(vals[1] - vals[2]))
    _report("weak convergence: box-doubling differences decrease",
            d2 < d1, f"diffs {d1:.3e} -> {d2:.3e}")


def test_precision_sensitivity():
    # digits + 100 moves the value far less than the N-convergence gap
    v = {}
    for digits in (150, 250):
        ctx = PrecisionContext(digits)
        res = run_pipeline(Interval("-1", "1"), "1", 32, "4", ctx,
                           mode="split")
        v[digits] = float(smear(res.M_minus, res.basis,
                                GaussianProbe("0", "0.1")))
    ctx = PrecisionContext(150)
    res64 = run_pipeline(Interval("-1", "1"), "1", 64, "4", ctx, mode="split")
    v64 = float(smear(res64.M_minus, res64.basis, GaussianProbe("0", "0.1")))
    drift = abs(v[150] - v[250])
    gap = abs(v[150] - v64)
    _report("precision sensitivity below convergence gap",
            drift < gap, f"digit drift {drift:.3e} vs N-gap {gap:.3e}")


def test_min_gap_shrinks_with_n(ctx300, wedge_m1):
    ctx150 = PrecisionContext(150)
    g16 = run_pipeline(Wedge("0"), "1", 16, "4", ctx150, mode="split").min_gap
    g32 = run_pipeline(Wedge("0"), "1", 32, "4", ctx150, mode="split").min_gap
    g64 = wedge_m1.min_gap
    ok = float(g16) > float(g32) > float(g64)
    _report("band gap shrinks as N grows (logged, not rate-asserted)",
            ok, f"gaps {float(g16):.2e}, {float(g32):.2e}, {float(g64):.2e}")


def test_reflection_covariance(ctx300, interval_m1):
    ctx = ctx300
    pairs = []
    for mu in ("0.25", "0.5", "0.75"):
        vp = smear(interval_m1.M_minus, interval_m1.basis,
                   GaussianProbe(mu, "0.08"))
        vm = smear(interval_m1.M_minus, interval_m1.basis,
                   GaussianProbe("-" + mu, "0.08"))
        with ctx.activate():
            pairs.append(float(abs(vp - vm) / abs(vp)))
    _report("reflection covariance within 1%", max(pairs) <= 0.01,
            f"worst asymmetry {max(pairs):.2e}")
