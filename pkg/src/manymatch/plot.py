"""Static SVG rendering of a planar instance and its edges."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError
from .geometry import ColoredPointSet
from .penalties import as_edges

PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")
SIZE = 600
MARGIN = 20


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def plot_svg(S: ColoredPointSet, E=None, size: int = SIZE) -> str:
    if S.dim != 2:
        raise InvalidInputError(f"plotting needs d = 2, got d = {S.dim}")
    E = as_edges(E if E is not None else [])
    X = S.coords
    if S.n:
        lo = X.min(axis=0)
        span = float(np.max(X.max(axis=0) - lo))
    else:
        lo, span = np.zeros(2), 0.0
    scale = (size - 2 * MARGIN) / span if span > 0 else 1.0
    # y grows downward in SVG
    px = MARGIN + (X[:, 0] - lo[0]) * scale
    py = size - MARGIN - (X[:, 1] - lo[1]) * scale
    radius = 3 if S.n <= 2000 else 1
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<rect width="{size}" height="{size}" fill="white"/>',
           '<g stroke="#444444" stroke-width="1">']
    for a, b in E.tolist():
        out.append(f'<line x1="{_fmt(px[a])}" y1="{_fmt(py[a])}" x2="{_fmt(px[b])}" y2="{_fmt(py[b])}"/>')
    out.append("</g>")
    out.append("<g>")
    for i in range(S.n):
        fill = PALETTE[int(S.colors[i]) % len(PALETTE)]
        out.append(f'<circle cx="{_fmt(px[i])}" cy="{_fmt(py[i])}" r="{radius}" fill="{fill}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
