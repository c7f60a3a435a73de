"""Command-line front end: kernel, scan, converge, selfcheck.

Configuration comes from defaults, the MODKERNEL_DIGITS environment
variable, an optional ``key = value`` config file, and flags, in that
order of increasing precedence.  Every output file echoes the merged
configuration in its ``#`` headers, stdout stays machine-clean, progress
goes to stderr, and identical configurations produce byte-identical
files.

Exit codes: 0 success, 1 selfcheck failure, 2 spectral/precision failure,
3 configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import gmpy2

from . import __version__
from .discretization import (
    Grid,
    Interval,
    Wedge,
    build_basis,
    chi_matrix,
    set_quadrature_fault,
)
from .errors import (
    ConfigError,
    DomainError,
    ForbiddenSpectrum,
    NoConvergence,
    NotPositiveDefinite,
    ProbeOutsideGrid,
    QuadratureNotConverged,
    RegionNotOnGrid,
    SingularMatrix,
)
from .linalg import MatrixMP, cholesky, invert, matrix_function, multiply, sym_eigen
from .pipeline import (
    GaussianProbe,
    analytic_reference,
    build_B,
    is_massless_limit,
    kernel_on_grid,
    run_pipeline,
    smear,
    spectrum_gate,
)
from .positionspace import position_entry
from .precision import PrecisionContext

CSV_DIGITS = 30

_DEFAULTS = {
    "region": "interval",
    "edge": "0",
    "left": "-1",
    "right": "1",
    "mass": "1",
    "cells": "32",
    "halfwidth": "4",
    "mode": "split",
    "sigma": "",       # empty: 0.05 * region extent
    "mu": "",
    "mu-range": "",
    "out": "",
    "full-precision": "false",
    "digits": "",      # empty: MODKERNEL_DIGITS or 150
    "rung": "",
}


def _progress(msg: str):
    print(f"modkernel: {msg}", file=sys.stderr, flush=True)


# -- configuration ----------------------------------------------------------

def parse_config_file(path: str) -> dict:
    cfg = {}
    try:
        with open(path) as f:
            for lineno, line in enumerate(f, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                k, v = (t.strip() for t in line.split("=", 1))
                if k not in _DEFAULTS:
                    raise ConfigError(f"{path}:{lineno}: unknown key {k!r}")
                cfg[k] = v
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    return cfg


class RunConfig:
    """Merged, validated configuration with the raw values kept verbatim."""

    def __init__(self, raw: dict):
        self.raw = dict(raw)
        try:
            self.digits = int(raw["digits"]) if raw["digits"] else int(
                os.environ.get("MODKERNEL_DIGITS", "150"))
        except ValueError as e:
            raise ConfigError(f"digits must be an integer: {e}") from e
        if self.digits < 30:
            raise ConfigError("digits must be >= 30")
        self.ctx = PrecisionContext(self.digits)
        if raw["region"] not in ("wedge", "interval"):
            raise ConfigError(f"region must be wedge or interval, "
                              f"got {raw['region']!r}")
        if raw["mode"] not in ("standard", "split"):
            raise ConfigError(f"mode must be standard or split, "
                              f"got {raw['mode']!r}")
        self.mode = raw["mode"]
        p = self._num
        if raw["region"] == "wedge":
            self.region = Wedge(p("edge"))
        else:
            self.region = Interval(p("left"), p("right"))
        self.masses = [t.strip() for t in raw["mass"].split(",") if t.strip()]
        if not self.masses:
            raise ConfigError("at least one mass is required")
        for mtok in self.masses:
            with self.ctx.activate():
                if self.ctx.parse(mtok) <= 0:
                    raise ConfigError(f"mass must be positive, got {mtok}")
        try:
            self.cells = int(raw["cells"])
        except ValueError as e:
            raise ConfigError(f"cells must be an integer: {e}") from e
        self.halfwidth = p("halfwidth")
        self.sigma = raw["sigma"] or self._default_sigma()
        with self.ctx.activate():
            if self.ctx.parse(self.sigma) <= 0:
                raise ConfigError("sigma must be positive")
        self.mu_list = self._mu_values()
        self.out = raw["out"]
        self.full_precision = raw["full-precision"].lower() in ("true", "1", "yes")
        self.rungs = self._parse_rungs(raw["rung"])

    def _num(self, key: str) -> str:
        tok = self.raw[key]
        try:
            self.ctx.parse(tok)
        except DomainError as e:
            raise ConfigError(f"{key}: {e}") from e
        return tok

    def _default_sigma(self) -> str:
        with self.ctx.activate():
            if isinstance(self.region, Interval):
                extent = self.ctx.parse(self.raw["right"]) - \
                    self.ctx.parse(self.raw["left"])
            else:
                extent = self.ctx.parse(self.raw["halfwidth"]) - \
                    self.ctx.parse(self.raw["edge"])
            return self.ctx.to_str(extent / 20, 12)

    def _mu_values(self) -> list:
        vals = [t.strip() for t in self.raw["mu"].split(",") if t.strip()]
        rng = self.raw["mu-range"]
        if rng:
            parts = rng.split(":")
            if len(parts) != 3:
                raise ConfigError(f"mu-range must be lo:hi:step, got {rng!r}")
            with self.ctx.activate():
                try:
                    lo = self.ctx.parse(parts[0])
                    hi = self.ctx.parse(parts[1])
                    step = self.ctx.parse(parts[2])
                except DomainError as e:
                    raise ConfigError(f"mu-range: {e}") from e
                if step <= 0 or hi < lo:
                    raise ConfigError("mu-range needs lo <= hi and step > 0")
                x = lo
                while x <= hi + step / 2:
                    vals.append(self.ctx.to_str(x, 20))
                    x += step
        return vals

    def _parse_rungs(self, tok: str) -> list:
        rungs = []
        for part in (t.strip() for t in tok.split(",") if t.strip()):
            fields = part.split(":")
            if len(fields) != 3:
                raise ConfigError(f"rung must be cells:halfwidth:digits, "
                                  f"got {part!r}")
            try:
                n = int(fields[0])
                digits = int(fields[2])
            except ValueError as e:
                raise ConfigError(f"rung {part!r}: {e}") from e
            rungs.append((n, fields[1], digits))
        return rungs

    def echo_lines(self) -> list:
        keys = sorted(k for k, v in self.raw.items() if v != "")
        kv = " ".join(f"{k}={self.raw[k]}" for k in keys)
        return [f"config: {kv}"]

    def fmt(self, x, ctx=None) -> str:
        ctx = ctx or self.ctx
        return ctx.to_str(x, ctx.decimal_digits if self.full_precision
                          else CSV_DIGITS)


def _write_header(f, cfg: RunConfig, command: str, extra: list):
    f.write(f"# modkernel {command} v{__version__}\n")
    for line in cfg.echo_lines():
        f.write(f"# {line}\n")
    f.write(f"# digits: {cfg.digits}\n")
    for line in extra:
        f.write(f"# {line}\n")


def _spectrum_lines(cfg: RunConfig, result) -> list:
    ctx = cfg.ctx
    ev = result.B_eigenvalues
    lines = [
        f"min_gap: {ctx.to_str(result.min_gap, CSV_DIGITS)}",
        f"lambda_min: {ctx.to_str(ev[0], CSV_DIGITS)}",
        f"lambda_max: {ctx.to_str(ev[-1], CSV_DIGITS)}",
        f"quad_error: {ctx.to_str(result.metadata['quad_error'], 8)}",
        f"deflated_band_modes: {result.metadata['deflated_modes']}",
        f"band_mass: {ctx.to_str(result.metadata['band_mass'], 12)}",
        f"offband_mass: {ctx.to_str(result.metadata['offband_mass'], 12)}",
        f"antidiagonal_mass: {ctx.to_str(result.metadata['antidiagonal_mass'], 12)}",
    ]
    for w in result.metadata["warnings"]:
        lines.append(f"warning: {w}")
        print(f"modkernel: warning: {w}", file=sys.stderr)
    return lines


# -- commands ----------------------------------------------------------------

def cmd_kernel(cfg: RunConfig) -> int:
    if len(cfg.masses) != 1:
        raise ConfigError("kernel takes exactly one mass")
    result = run_pipeline(cfg.region, cfg.masses[0], cfg.cells, cfg.halfwidth,
                          cfg.ctx, mode=cfg.mode, progress=_progress)
    xs, samples = kernel_on_grid(result.M_minus, result.basis)
    out = cfg.out or "kernel.csv"
    with open(out, "w") as f:
        _write_header(f, cfg, "kernel", _spectrum_lines(cfg, result))
        f.write("x,y,value\n")
        for i, x in enumerate(xs):
            for j, y in enumerate(xs):
                f.write(f"{cfg.fmt(x)},{cfg.fmt(y)},"
                        f"{cfg.fmt(samples.data[i][j])}\n")
    _progress(f"kernel written to {out}")
    return 0


def _mass_suffix(out: str, mass: str) -> str:
    base, dot, ext = out.rpartition(".")
    if not dot:
        return f"{out}_m{mass}"
    return f"{base}_m{mass}.{ext}"


def cmd_scan(cfg: RunConfig) -> int:
    if not cfg.mu_list:
        raise ConfigError("scan needs at least one probe center "
                          "(--mu or --mu-range)")
    out = cfg.out or "scan.csv"
    ctx = cfg.ctx
    for mass in cfg.masses:
        result = run_pipeline(cfg.region, mass, cfg.cells, cfg.halfwidth,
                              ctx, mode=cfg.mode, progress=_progress)
        regime = ("massless-limit"
                  if is_massless_limit(cfg.region, mass, ctx) else "any")
        with ctx.activate():
            mus = sorted(ctx.parse(t) for t in cfg.mu_list)
        path = _mass_suffix(out, mass) if len(cfg.masses) > 1 else out
        with open(path, "w") as f:
            _write_header(f, cfg, "scan",
                          [f"mass: {mass}", f"regime: {regime}"]
                          + _spectrum_lines(cfg, result))
            f.write("mu,value,analytic_ref,abs_gap\n")
            for mu in mus:
                val = smear(result.M_minus, result.basis,
                            GaussianProbe(mu, cfg.sigma))
                ref = analytic_reference(cfg.region, regime, mu, ctx)
                with ctx.activate():
                    gap = abs(val - ref) if ref is not None else None
                f.write(",".join([
                    cfg.fmt(mu),
                    cfg.fmt(val),
                    cfg.fmt(ref) if ref is not None else "",
                    cfg.fmt(gap) if gap is not None else "",
                ]) + "\n")
        _progress(f"scan for mass {mass} written to {path}")
    return 0


def cmd_converge(cfg: RunConfig) -> int:
    if not cfg.rungs:
        raise ConfigError("converge needs at least one --rung cells:halfwidth:digits")
    if not cfg.mu_list:
        raise ConfigError("converge needs fixed probes (--mu or --mu-range)")
    if len(cfg.masses) != 1:
        raise ConfigError("converge takes exactly one mass")
    out = cfg.out or "converge.csv"
    rows = []
    prev = {}
    for idx, (cells, halfwidth, digits) in enumerate(cfg.rungs):
        rctx = PrecisionContext(digits)
        t0 = time.time()
        try:
            result = run_pipeline(cfg.region, cfg.masses[0], cells, halfwidth,
                                  rctx, mode=cfg.mode, progress=_progress)
        except (ForbiddenSpectrum, QuadratureNotConverged, NoConvergence,
                DomainError, RegionNotOnGrid) as e:
            _progress(f"rung {idx} failed: {type(e).__name__}")
            for mu in cfg.mu_list:
                rows.append([str(idx), str(cells), halfwidth, str(digits),
                             mu, f"ERROR:{type(e).__name__}", "", "", ""])
            continue
        secs = f"{time.time() - t0:.3f}"
        with rctx.activate():
            mus = sorted(rctx.parse(t) for t in cfg.mu_list)
        for mu in mus:
            val = smear(result.M_minus, result.basis,
                        GaussianProbe(mu, cfg.sigma))
            key = rctx.to_str(mu, 20)
            with rctx.activate():
                diff = (abs(val - rctx.parse(prev[key]))
                        if key in prev else None)
            prev[key] = rctx.to_str(val)
            rows.append([
                str(idx), str(cells), halfwidth, str(digits),
                cfg.fmt(mu, rctx), cfg.fmt(val, rctx),
                rctx.to_str(result.min_gap, 8), secs,
                cfg.fmt(diff, rctx) if diff is not None else "",
            ])
    with open(out, "w") as f:
        _write_header(f, cfg, "converge", [])
        f.write("rung,cells,halfwidth,digits,mu,value,min_gap,seconds,diff_prev\n")
        for row in rows:
            f.write(",".join(row) + "\n")
    _progress(f"convergence report written to {out}")
    return 0


# -- selfcheck ----------------------------------------------------------------

def _selfchecks():
    """(name, callable) pairs; each raises AssertionError on failure."""
    def scalar_trivials():
        ctx = PrecisionContext(40)
        with ctx.activate():
            a = ctx.arcoth(2)
            assert abs(a - ctx.elementary("ln", 3) / 2) < ctx.tol(5)
            assert ctx.arcoth(-2) == -a
            assert ctx.elementary("ln", 1) == 0
            assert ctx.elementary("sqrt", 4) == 2
            assert abs(ctx.pi() - ctx.real(4) * ctx.elementary("atan", 1)) == 0

    def roundtrip_floor():
        for digits in (30, 100):
            ctx = PrecisionContext(digits)
            with ctx.activate():
                for k in (2, 5, 10):
                    x = 1 + ctx.real(10) ** (-k)
                    back = ctx.coth(ctx.arcoth(x))
                    assert abs(back - x) < ctx.tol(10), f"digits={digits} k={k}"
                s = ctx.to_str(ctx.pi())
                assert ctx.to_str(ctx.parse(s)) == s

    def gram_forms():
        ctx = PrecisionContext(40)
        g = Grid(ctx, 8, 2)
        bs = build_basis(g, Interval("-1", "1"), "standard")
        with ctx.activate():
            h = g.h
            assert bs.gram[0, 0] == 2 * h / 3
            assert bs.gram[0, 1] == h / 6
            assert bs.gram[0, 2] == 0
        bsp = build_basis(g, Interval("-1", "1"), "split")
        with ctx.activate():
            idx = [i for i, e in enumerate(bsp.elements) if e.kind != 0]
            i0 = idx[0]
            assert bsp.gram[i0, i0] == g.h / 3

    def chi_trivials():
        ctx = PrecisionContext(40)
        g = Grid(ctx, 8, 2)
        bs = build_basis(g, Interval("-1", "1"), "split")
        x = chi_matrix(bs)
        inside = set(bs.inside_indices())
        for i in range(bs.size):
            for j in range(bs.size):
                want = bs.gram[i, j] if (i in inside and j in inside) else 0
                assert x[i, j] == want
        xt = chi_matrix(bs, complement=True)
        with ctx.activate():
            assert all(x[i, j] + xt[i, j] == bs.gram[i, j]
                       for i in range(bs.size) for j in range(bs.size))

    def small_linalg():
        ctx = PrecisionContext(40)
        a = MatrixMP.from_rows(ctx, [[0, 1], [1, 0]], symmetric=True)
        e = sym_eigen(a)
        with ctx.activate():
            assert abs(e.eigenvalues[0] + 1) < ctx.tol(5)
            assert abs(e.eigenvalues[1] - 1) < ctx.tol(5)
        b = MatrixMP.from_rows(ctx, [[2, 1], [1, 2]], symmetric=True)
        L = cholesky(b)
        with ctx.activate():
            assert abs(L[0, 0] - gmpy2.sqrt(ctx.real(2))) < ctx.tol(5)
        binv = invert(b)
        with ctx.activate():
            r = multiply(b, binv).sub(MatrixMP.identity(ctx, 2)).max_abs()
            assert r < ctx.tol(10)

    def b_trivials():
        ctx = PrecisionContext(40)
        g = Grid(ctx, 8, 2)
        bs = build_basis(g, Interval("-1", "1"), "split")
        from .discretization import a_power_matrix, orthonormal_frame
        a_neg = orthonormal_frame(bs, a_power_matrix(bs, 1))
        ident = MatrixMP.identity(ctx, bs.size)
        zero = MatrixMP.zeros(ctx, bs.size, symmetric=True)
        b_full = build_B(ident, a_neg)
        b_none = build_B(zero, a_neg)
        with ctx.activate():
            assert b_full.sub(ident).max_abs() < ctx.tol(10)
            assert b_none.add(ident).max_abs() < ctx.tol(10)
        try:
            spectrum_gate(b_full)
        except ForbiddenSpectrum:
            pass
        else:
            raise AssertionError("gate accepted lambda = 1")

    def momentum_vs_position():
        ctx = PrecisionContext(40)
        g = Grid(ctx, 8, 2)
        from .discretization import a_power_matrix
        for mode, pairs in (("standard", [(0, 0), (0, 2)]),
                            ("split", [(1, 1), (1, 4)])):
            bs = build_basis(g, Interval("-1", "1"), mode)
            a = a_power_matrix(bs, 1)
            with ctx.activate():
                tol = ctx.tol(2)
                for (j, k) in pairs:
                    d = abs(position_entry(bs, 1, j, k) - a[j, k])
                    assert d < tol, f"{mode} ({j},{k}): {ctx.to_str(d, 3)}"

    return [
        ("scalar_trivials", scalar_trivials),
        ("arcoth_coth_roundtrip", roundtrip_floor),
        ("gram_closed_forms", gram_forms),
        ("chi_trivials", chi_trivials),
        ("small_linalg", small_linalg),
        ("b_trivials", b_trivials),
        ("momentum_vs_position", momentum_vs_position),
    ]


def cmd_selfcheck(inject_fault: bool = False) -> int:
    if inject_fault:
        set_quadrature_fault("drop_tail")
    failures = []
    try:
        for name, fn in _selfchecks():
            try:
                fn()
            except Exception as e:  # report every failing check by name
                failures.append(name)
                print(f"FAIL {name}: {type(e).__name__}: {e}")
            else:
                print(f"ok {name}")
    finally:
        if inject_fault:
            set_quadrature_fault(None)
    if failures:
        print(f"selfcheck: {len(failures)} failure(s): {', '.join(failures)}")
        return 1
    print("selfcheck: all checks passed")
    return 0


# -- entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="modkernel",
        description="Modular Hamiltonian kernels for the massive free "
                    "scalar on wedge and interval regions.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value file, overridden by flags")
        p.add_argument("--region", choices=["wedge", "interval"])
        p.add_argument("--edge")
        p.add_argument("--left")
        p.add_argument("--right")
        p.add_argument("--mass", action="append",
                       help="repeatable; several masses make a ladder")
        p.add_argument("--cells", type=int)
        p.add_argument("--halfwidth")
        p.add_argument("--digits", type=int)
        p.add_argument("--mode", choices=["standard", "split"])
        p.add_argument("--sigma")
        p.add_argument("--mu", action="append", help="repeatable probe center")
        p.add_argument("--mu-range", dest="mu_range",
                       help="lo:hi:step (use --mu-range=-a:b:s "
                            "when lo is negative)")
        p.add_argument("--out")
        p.add_argument("--full-precision", dest="full_precision",
                       action="store_true",
                       help="write all context digits instead of 30")

    common(sub.add_parser("kernel", help="grid-sampled kernel CSV"))
    common(sub.add_parser("scan", help="smeared values over probe centers"))
    pc = sub.add_parser("converge", help="N/b/digits ladder study")
    common(pc)
    pc.add_argument("--rung", action="append",
                    help="repeatable cells:halfwidth:digits")
    ps = sub.add_parser("selfcheck", help="built-in example and oracle suite")
    ps.add_argument("--inject-quadrature-fault", action="store_true",
                    help="test hook: corrupt the quadrature and expect "
                         "the cross-checks to catch it")
    return ap


def _merge_config(args) -> RunConfig:
    merged = dict(_DEFAULTS)
    if args.config:
        merged.update(parse_config_file(args.config))
    flag_map = {
        "region": args.region, "edge": args.edge, "left": args.left,
        "right": args.right, "cells": args.cells, "halfwidth": args.halfwidth,
        "digits": args.digits, "mode": args.mode, "sigma": args.sigma,
        "mu-range": args.mu_range, "out": args.out,
    }
    for k, v in flag_map.items():
        if v is not None:
            merged[k] = str(v)
    if args.mass:
        merged["mass"] = ",".join(args.mass)
    if args.mu:
        merged["mu"] = ",".join(args.mu)
    if args.full_precision:
        merged["full-precision"] = "true"
    if getattr(args, "rung", None):
        merged["rung"] = ",".join(args.rung)
    return RunConfig(merged)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "selfcheck":
        return cmd_selfcheck(args.inject_quadrature_fault)
    try:
        cfg = _merge_config(args)
        if args.command == "kernel":
            return cmd_kernel(cfg)
        if args.command == "scan":
            return cmd_scan(cfg)
        if args.command == "converge":
            return cmd_converge(cfg)
    except ConfigError as e:
        print(f"modkernel: configuration error: {e}", file=sys.stderr)
        return 3
    except (RegionNotOnGrid, DomainError, ProbeOutsideGrid) as e:
        print(f"modkernel: configuration error: {e}", file=sys.stderr)
        return 3
    except ForbiddenSpectrum as e:
        print(f"modkernel: forbidden spectrum: {e}", file=sys.stderr)
        print("modkernel: remedy: raise --digits and/or --cells",
              file=sys.stderr)
        return 2
    except (QuadratureNotConverged, NoConvergence, SingularMatrix,
            NotPositiveDefinite) as e:
        print(f"modkernel: precision failure: {e}", file=sys.stderr)
        print("modkernel: remedy: raise --digits", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
