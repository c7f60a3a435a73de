"""Parsing and validation of modkernel CSV files.

Figures must never be rendered from unlabeled data, so files whose
headers lack the config echo are refused outright.  All physics numbers
come from the file; this package only adds the closed-form overlays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class BadInput(ValueError):
    """Missing, malformed, or mislabeled input file."""


@dataclass
class KernelData:
    config: dict
    header: dict
    xs: list
    matrix: list  # rows aligned with xs

    @property
    def region(self):
        return _region_of(self.config)


@dataclass
class ScanData:
    config: dict
    header: dict
    mass: str
    mus: list
    values: list
    refs: list  # None where the file carries no analytic reference

    @property
    def region(self):
        return _region_of(self.config)


def _region_of(config):
    if config.get("region") == "wedge":
        return ("wedge", float(config["edge"]))
    return ("interval", float(config["left"]), float(config["right"]))


def _parse_headers(lines, expected_kind):
    header = {}
    config = None
    if not lines or not lines[0].startswith(f"# modkernel {expected_kind}"):
        raise BadInput(f"not a modkernel {expected_kind} CSV")
    for line in lines:
        if not line.startswith("#"):
            break
        body = line[1:].strip()
        if body.startswith("config:"):
            config = {}
            for tok in body[len("config:"):].split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    config[k] = v
        elif ":" in body:
            k, v = body.split(":", 1)
            header[k.strip()] = v.strip()
    if config is None:
        raise BadInput("header lacks the config echo; refusing unlabeled data")
    return header, config


def read_kernel(path) -> KernelData:
    try:
        with open(path) as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise BadInput(f"cannot read {path}: {e}") from e
    header, config = _parse_headers(lines, "kernel")
    rows = [l for l in lines if l and not l.startswith("#")]
    if not rows or rows[0] != "x,y,value":
        raise BadInput(f"{path}: expected x,y,value rows")
    entries = {}
    xs = []
    seen = set()
    for r in rows[1:]:
        parts = r.split(",")
        if len(parts) != 3:
            raise BadInput(f"{path}: malformed row {r!r}")
        try:
            x, y, v = (float(p) for p in parts)
        except ValueError as e:
            raise BadInput(f"{path}: non-numeric row {r!r}") from e
        entries[(parts[0], parts[1])] = v
        if parts[0] not in seen:
            seen.add(parts[0])
            xs.append((parts[0], x))
    n = len(xs)
    if len(entries) != n * n:
        raise BadInput(f"{path}: {len(entries)} samples do not fill "
                       f"an {n}x{n} block")
    matrix = [[entries[(kx, ky)] for (ky, _) in xs] for (kx, _) in xs]
    return KernelData(config, header, [v for (_, v) in xs], matrix)


def read_scan(path) -> ScanData:
    try:
        with open(path) as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise BadInput(f"cannot read {path}: {e}") from e
    header, config = _parse_headers(lines, "scan")
    rows = [l for l in lines if l and not l.startswith("#")]
    if not rows or rows[0] != "mu,value,analytic_ref,abs_gap":
        raise BadInput(f"{path}: expected mu,value,analytic_ref,abs_gap rows")
    mus, values, refs = [], [], []
    for r in rows[1:]:
        parts = r.split(",")
        if len(parts) != 4:
            raise BadInput(f"{path}: malformed row {r!r}")
        try:
            mus.append(float(parts[0]))
            values.append(float(parts[1]))
            refs.append(float(parts[2]) if parts[2] else None)
        except ValueError as e:
            raise BadInput(f"{path}: non-numeric row {r!r}") from e
    if not mus:
        raise BadInput(f"{path}: empty scan")
    if not all(math.isfinite(v) for v in values):
        raise BadInput(f"{path}: non-finite values")
    mass = header.get("mass", config.get("mass", "?"))
    return ScanData(config, header, mass, mus, values, refs)
