"""Figure rendering: kernel heatmap with diagonal slice, and mass-scan
curves with the closed-form overlays.

Figures are pure functions of their CSV inputs; the only formulas here
are the two analytic references (the wedge boost line and the massless
double-cone parabola), matching the definitions in the pipeline that
produced the data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .reader import BadInput, KernelData, ScanData, read_kernel, read_scan  # noqa: E402

TWO_PI = 2 * math.pi


@dataclass
class FigureSpec:
    inputs: list
    kind: str                      # "heatmap" | "scan"
    out: str
    overlay_parabola: bool = False
    overlay_wedge_lines: bool = False
    title: str = ""

    def __post_init__(self):
        if self.kind not in ("heatmap", "scan"):
            raise BadInput(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise BadInput("no input CSVs given")


def parabola_reference(region, mu):
    """pi (r^2 - (mu - c)^2) inside the interval, the m -> 0 kernel."""
    if region[0] != "interval":
        return None
    _, left, right = region
    r = (right - left) / 2
    c = (right + left) / 2
    if abs(mu - c) <= r:
        return math.pi * (r * r - (mu - c) ** 2)
    return None


def wedge_lines_reference(region, mu):
    """Large-mass asymptote: each interval end acts as a wedge, giving
    2 pi times the distance to the nearer edge; for a wedge region the
    single boost line 2 pi (mu - edge)."""
    if region[0] == "wedge":
        edge = region[1]
        return TWO_PI * (mu - edge) if mu > edge else None
    _, left, right = region
    if left <= mu <= right:
        return TWO_PI * min(mu - left, right - mu)
    return None


def render_heatmap(spec: FigureSpec) -> str:
    if len(spec.inputs) != 1:
        raise BadInput("heatmap takes exactly one kernel CSV")
    data = read_kernel(spec.inputs[0])
    xs = data.xs
    m = data.matrix
    vmax = max((abs(v) for row in m for v in row), default=0.0) or 1.0

    fig, (ax0, ax1) = plt.subplots(
        1, 2, figsize=(11, 4.6), gridspec_kw={"width_ratios": [1.25, 1]})
    im = ax0.imshow(
        m, origin="lower", cmap="RdBu_r", vmin=-vmax, vmax=vmax,
        extent=(xs[0], xs[-1], xs[0], xs[-1]), interpolation="nearest")
    ax0.set_xlabel("y")
    ax0.set_ylabel("x")
    ax0.set_title(spec.title or "kernel of $M_-$")
    fig.colorbar(im, ax=ax0, shrink=0.9)

    diag = [m[i][i] for i in range(len(xs))]
    ax1.plot(xs, diag, lw=1.2, color="black")
    ax1.set_xlabel("x")
    ax1.set_ylabel("$M_-(x, x)$")
    ax1.set_title("diagonal slice")
    ax1.axhline(0.0, lw=0.5, color="gray")

    caption = []
    for key in ("band_mass", "offband_mass", "antidiagonal_mass"):
        if key in data.header:
            caption.append(f"{key}={float(data.header[key]):.4g}")
    if caption:
        fig.text(0.5, 0.005, "  ".join(caption), ha="center", fontsize=8)
    fig.tight_layout(rect=(0, 0.03, 1, 1))
    fig.savefig(spec.out)
    plt.close(fig)
    return spec.out


def render_scan(spec: FigureSpec) -> str:
    scans = [read_scan(p) for p in spec.inputs]
    region = scans[0].region
    for s in scans[1:]:
        if s.region != region:
            raise BadInput("scan inputs describe different regions")

    def sort_key(s):
        try:
            return float(s.mass)
        except ValueError:
            return math.inf

    scans.sort(key=sort_key)
    fig, ax = plt.subplots(figsize=(7.2, 4.8))
    lo = min(min(s.mus) for s in scans)
    hi = max(max(s.mus) for s in scans)
    grid = [lo + (hi - lo) * k / 400 for k in range(401)]

    for s in scans:
        ax.plot(s.mus, s.values, marker="o", ms=3, lw=1.1,
                label=f"m = {s.mass}")
    if spec.overlay_parabola:
        ys = [parabola_reference(region, x) for x in grid]
        ax.plot([x for x, y in zip(grid, ys) if y is not None],
                [y for y in ys if y is not None],
                color="black", lw=1.6, ls="--", label="massless parabola")
    if spec.overlay_wedge_lines:
        ys = [wedge_lines_reference(region, x) for x in grid]
        ax.plot([x for x, y in zip(grid, ys) if y is not None],
                [y for y in ys if y is not None],
                color="black", lw=1.6, ls=":", label="wedge lines")
    ax.set_xlabel(r"$\mu$")
    ax.set_ylabel(r"$\langle g_\mu, M_- \, g_\mu\rangle$")
    ax.set_title(spec.title or "smeared kernel across masses")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.out)
    plt.close(fig)
    return spec.out


def render(spec: FigureSpec) -> str:
    if spec.kind == "heatmap":
        return render_heatmap(spec)
    return render_scan(spec)
