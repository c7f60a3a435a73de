"""Figure rendering for modkernel CSV outputs."""

from .figures import FigureSpec, parabola_reference, render, render_heatmap, render_scan, wedge_lines_reference
from .reader import BadInput, KernelData, ScanData, read_kernel, read_scan

__version__ = "0.1.0"
