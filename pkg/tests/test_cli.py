import os
import subprocess
import sys

import pytest

from modkernel.cli import main

BASE = ["--mass", "1", "--cells", "16", "--halfwidth", "2", "--digits", "80",
        "--sigma", "0.15"]


def run_cli(args):
    return main(args)


def test_scan_wedge(tmp_path):
    out = tmp_path / "s.csv"
    rc = run_cli(["scan", "--region", "wedge", "--edge", "0", *BASE,
                  "--mu", "0.5", "--mu", "0.25", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    header = [l for l in lines if l.startswith("#")]
    assert any("config:" in l for l in header)
    assert any("min_gap:" in l for l in header)
    assert any("digits: 80" in l for l in header)
    rows = [l for l in lines if l and not l.startswith("#")]
    assert rows[0] == "mu,value,analytic_ref,abs_gap"
    assert len(rows) == 3
    # analytic reference 2 pi mu present, abs gap small
    mu, val, ref, gap = rows[1].split(",")
    assert float(mu) == 0.25
    assert abs(float(ref) - 2 * 3.14159265 * 0.25) < 1e-6
    assert abs(float(val) - float(ref)) < 0.3


def test_scan_mass_ladder_one_file_per_mass(tmp_path):
    out = tmp_path / "scan.csv"
    rc = run_cli(["scan", "--region", "wedge", "--edge", "0",
                  "--mass", "1", "--mass", "2", "--cells", "16",
                  "--halfwidth", "2", "--digits", "60", "--sigma", "0.15",
                  "--mu", "0.5", "--out", str(out)])
    assert rc == 0
    assert (tmp_path / "scan_m1.csv").exists()
    assert (tmp_path / "scan_m2.csv").exists()
    assert not out.exists()


def test_scan_empty_mu_exit_3(tmp_path):
    rc = run_cli(["scan", "--region", "wedge", "--edge", "0", *BASE,
                  "--out", str(tmp_path / "s.csv")])
    assert rc == 3


def test_malformed_mu_range_exit_3(tmp_path):
    rc = run_cli(["scan", "--region", "wedge", "--edge", "0", *BASE,
                  "--mu-range", "0:1", "--out", str(tmp_path / "s.csv")])
    assert rc == 3
    rc = run_cli(["scan", "--region", "wedge", "--edge", "0", *BASE,
                  "--mu-range", "1:0:0.5", "--out", str(tmp_path / "s.csv")])
    assert rc == 3


def test_mu_range_expansion(tmp_path):
    out = tmp_path / "s.csv"
    rc = run_cli(["scan", "--region", "wedge", "--edge", "0", *BASE,
                  "--mu-range", "0.25:0.75:0.25", "--out", str(out)])
    assert rc == 0
    rows = [l for l in out.read_text().splitlines()
            if l and not l.startswith("#")][1:]
    assert [float(r.split(",")[0]) for r in rows] == [0.25, 0.5, 0.75]


def test_kernel_csv(tmp_path):
    out = tmp_path / "k.csv"
    rc = run_cli(["kernel", "--region", "interval", "--left", "-1",
                  "--right", "1", "--mass", "1", "--cells", "16",
                  "--halfwidth", "4", "--digits", "80", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert any("deflated_band_modes: 7" in l for l in lines)
    assert any("antidiagonal_mass:" in l for l in lines)
    rows = [l for l in lines if l and not l.startswith("#")]
    assert rows[0] == "x,y,value"
    assert len(rows) == 1 + 15 * 15
    vals = {}
    for r in rows[1:]:
        x, y, v = r.split(",")
        vals[(x, y)] = v
    for (x, y), v in list(vals.items())[:60]:
        assert vals[(y, x)] == v  # symmetric samples, byte for byte


def test_kernel_degenerate_region_exit_2(tmp_path):
    # chi covering the whole box is rejected by validation (exit 3), a
    # genuinely degenerate spectrum (half-box split interval) exits 2
    rc = run_cli(["kernel", "--region", "interval", "--left", "-1",
                  "--right", "1", "--mass", "1", "--cells", "16",
                  "--halfwidth", "2", "--digits", "150",
                  "--out", str(tmp_path / "k.csv")])
    assert rc == 2


def test_starved_digits_fails_loudly(tmp_path):
    # digits far below the band-gap scale: ForbiddenSpectrum, never output
    out = tmp_path / "k.csv"
    rc = run_cli(["kernel", "--region", "interval", "--left", "-1",
                  "--right", "1", "--mass", "1", "--cells", "32",
                  "--halfwidth", "4", "--digits", "40", "--out", str(out)])
    assert rc == 2
    assert not out.exists()


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# sample config\n"
        "region = wedge\n"
        "edge = 0\n"
        "mass = 1\n"
        "cells = 16\n"
        "halfwidth = 2\n"
        "digits = 60\n"
        "sigma = 0.2\n"
        "mu = 0.5\n")
    out = tmp_path / "s.csv"
    rc = run_cli(["scan", "--config", str(cfg), "--sigma", "0.15",
                  "--out", str(out)])
    assert rc == 0
    text = out.read_text()
    assert "sigma=0.15" in text  # flag wins over file
    assert "cells=16" in text


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("regiom = wedge\n")
    rc = run_cli(["scan", "--config", str(cfg), "--mu", "0.5"])
    assert rc == 3


def test_env_var_default_digits(tmp_path, monkeypatch):
    monkeypatch.setenv("MODKERNEL_DIGITS", "61")
    out = tmp_path / "s.csv"
    rc = run_cli(["scan", "--region", "wedge", "--edge", "0", "--mass", "1",
                  "--cells", "16", "--halfwidth", "2", "--sigma", "0.15",
                  "--mu", "0.5", "--out", str(out)])
    assert rc == 0
    assert "# digits: 61" in out.read_text()


def test_full_precision_flag(tmp_path):
    out = tmp_path / "s.csv"
    rc = run_cli(["scan", "--region", "wedge", "--edge", "0", *BASE,
                  "--mu", "0.5", "--full-precision", "--out", str(out)])
    assert rc == 0
    rows = [l for l in out.read_text().splitlines()
            if l and not l.startswith("#")][1:]
    mantissa = rows[0].split(",")[1].split("e")[0]
    assert len(mantissa) >= 80  # all context digits written


def test_converge_report(tmp_path):
    out = tmp_path / "c.csv"
    rc = run_cli(["converge", "--region", "wedge", "--edge", "0",
                  "--mass", "1", "--sigma", "0.2", "--mu", "0.5",
                  "--rung", "8:2:60", "--rung", "16:2:60",
                  "--rung", "16:2:90", "--out", str(out)])
    assert rc == 0
    rows = [l for l in out.read_text().splitlines()
            if l and not l.startswith("#")]
    assert rows[0].startswith("rung,cells,halfwidth,digits,mu")
    assert len(rows) == 4
    first = rows[1].split(",")
    second = rows[2].split(",")
    assert first[-1] == ""            # no previous rung to diff against
    assert second[-1] != ""           # successive difference recorded
    # digits rung at fixed N drifts less than the N-convergence gap
    third = rows[3].split(",")
    assert float(third[-1]) < float(second[-1])


def test_converge_single_rung(tmp_path):
    out = tmp_path / "c.csv"
    rc = run_cli(["converge", "--region", "wedge", "--edge", "0",
                  "--mass", "1", "--sigma", "0.2", "--mu", "0.5",
                  "--rung", "8:2:60", "--out", str(out)])
    assert rc == 0
    rows = [l for l in out.read_text().splitlines()
            if l and not l.startswith("#")]
    assert len(rows) == 2 and rows[1].split(",")[-1] == ""


def test_converge_rung_failure_recorded(tmp_path):
    out = tmp_path / "c.csv"
    rc = run_cli(["converge", "--region", "interval", "--left", "-1",
                  "--right", "1", "--mass", "1", "--sigma", "0.1",
                  "--mu", "0", "--rung", "32:4:40", "--rung", "16:4:80",
                  "--out", str(out)])
    assert rc == 0  # failures are recorded per rung, run continues
    rows = [l for l in out.read_text().splitlines()
            if l and not l.startswith("#")]
    assert "ERROR:ForbiddenSpectrum" in rows[1]
    assert "ERROR" not in rows[2]


def test_selfcheck_passes():
    assert run_cli(["selfcheck"]) == 0


def test_selfcheck_fault_injection_fails():
    assert run_cli(["selfcheck", "--inject-quadrature-fault"]) == 1


def test_determinism_byte_identical(tmp_path):
    # two complete scan runs with identical configs, separate processes
    out = tmp_path / "scan.csv"
    cmd = [sys.executable, "-m", "modkernel.cli", "scan",
           "--region", "interval", "--left", "-1", "--right", "1",
           "--mass", "1", "--cells", "16", "--halfwidth", "4",
           "--digits", "100", "--sigma", "0.1",
           "--mu", "0", "--mu", "0.5", "--out", str(out)]
    outs = []
    for seed in ("0", "1"):  # hash randomization must not matter
        env = dict(os.environ)
        env["PYTHONHASHSEED"] = seed
        r = subprocess.run(cmd, env=env, capture_output=True, text=True)
        assert r.returncode == 0, r.stderr
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
