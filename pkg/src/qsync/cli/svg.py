"""Minimal static SVG charts: line plots and heatmaps.

Output depends only on the data, so identical tables give identical bytes.
Heatmaps use a fixed five-stop viridis approximation, linearly interpolated
between the stops; NaN or infinite cells are left blank.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from ..errors import QsyncError

VIRIDIS = [(0.0, (68, 1, 84)), (0.25, (59, 82, 139)), (0.5, (33, 145, 140)), (0.75, (94, 201, 98)), (1.0, (253, 231, 37))]
SERIES = ["#5b2a86", "#e07a1f", "#2a7f62", "#b8336a", "#3066be", "#7a7a7a", "#c5a300", "#1b998b"]
W, H = 640, 420
L, R, T, B = 70, 150, 30, 55


class PlotError(QsyncError, ValueError):
    """Table columns do not fit the requested chart kind."""


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick(v: float) -> str:
    return f"{v:.4g}"


def colormap(x: float) -> str:
    x = min(max(x, 0.0), 1.0)
    for (x0, c0), (x1, c1) in zip(VIRIDIS, VIRIDIS[1:]):
        if x <= x1:
            f = (x - x0) / (x1 - x0)
            rgb = [round(a + f * (b - a)) for a, b in zip(c0, c1)]
            return "#%02x%02x%02x" % tuple(rgb)
    return "#%02x%02x%02x" % VIRIDIS[-1][1]


def _bounds(vals):
    v = np.asarray(vals, float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        pad = abs(lo) * 0.05 or 1.0
        return lo - pad, hi + pad
    return lo, hi


def _frame(title, xlabel, ylabel, xr, yr):
    pw, ph = W - L - R, H - T - B
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<rect x="{L}" y="{T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for i in range(5):
        f = i / 4
        x = L + f * pw
        y = T + ph - f * ph
        out.append(f'<line x1="{_fmt(x)}" y1="{T + ph}" x2="{_fmt(x)}" y2="{T + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{_fmt(x)}" y="{T + ph + 16}" text-anchor="middle">{_tick(xr[0] + f * (xr[1] - xr[0]))}</text>')
        out.append(f'<line x1="{L - 4}" y1="{_fmt(y)}" x2="{L}" y2="{_fmt(y)}" stroke="black"/>')
        out.append(f'<text x="{L - 6}" y="{_fmt(y + 4)}" text-anchor="end">{_tick(yr[0] + f * (yr[1] - yr[0]))}</text>')
    out.append(f'<text x="{L + pw / 2:.1f}" y="{H - 14}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{T + ph / 2:.1f}" text-anchor="middle" transform="rotate(-90 16 {T + ph / 2:.1f})">{escape(ylabel)}</text>'
    )
    return out


def line_svg(x, series: dict, xlabel: str, ylabel: str = "", title: str = "") -> str:
    """series maps a legend label to y values; non-finite points break the line."""
    x = np.asarray(x, float)
    if x.ndim != 1 or not series:
        raise PlotError("a line plot needs one x column and at least one series")
    xr = _bounds(x)
    yr = _bounds(np.concatenate([np.asarray(v, float) for v in series.values()]))
    pw, ph = W - L - R, H - T - B
    sx = lambda v: L + (v - xr[0]) / (xr[1] - xr[0]) * pw  # noqa: E731
    sy = lambda v: T + ph - (v - yr[0]) / (yr[1] - yr[0]) * ph  # noqa: E731
    out = _frame(title, xlabel, ylabel, xr, yr)
    for k, (label, ys) in enumerate(series.items()):
        color = SERIES[k % len(SERIES)]
        ys = np.asarray(ys, float)
        if ys.shape != x.shape:
            raise PlotError(f"series {label!r} does not match the x column length")
        seg = []
        for xv, yv in zip(x, ys):
            if math.isfinite(xv) and math.isfinite(yv):
                seg.append(f"{_fmt(sx(xv))},{_fmt(sy(yv))}")
                continue
            if seg:
                out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(seg)}"/>')
            seg = []
        if seg:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(seg)}"/>')
        ly = T + 10 + 16 * k
        out.append(f'<line x1="{W - R + 10}" y1="{ly}" x2="{W - R + 30}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{W - R + 34}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def heatmap_svg(x, y, z, xlabel: str, ylabel: str, title: str = "") -> str:
    """z[i, j] is drawn at (x[i], y[j]); x and y must be sorted grids."""
    x, y, z = np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)
    if z.shape != (len(x), len(y)):
        raise PlotError("heatmap values do not form an x-by-y grid")
    pw, ph = W - L - R, H - T - B
    dx = (x[1] - x[0]) if len(x) > 1 else 1.0
    dy = (y[1] - y[0]) if len(y) > 1 else 1.0
    xr = (x[0] - dx / 2, x[-1] + dx / 2)
    yr = (y[0] - dy / 2, y[-1] + dy / 2)
    zr = _bounds(z)
    cw, chh = pw / len(x), ph / len(y)
    out = _frame(title, xlabel, ylabel, xr, yr)
    for i in range(len(x)):
        for j in range(len(y)):
            v = z[i, j]
            if not math.isfinite(v):
                continue
            c = colormap((v - zr[0]) / (zr[1] - zr[0]))
            out.append(
                f'<rect x="{_fmt(L + i * cw)}" y="{_fmt(T + ph - (j + 1) * chh)}" width="{_fmt(cw + 0.3)}" height="{_fmt(chh + 0.3)}" fill="{c}"/>'
            )
    # colour bar
    bx = W - R + 20
    for k in range(50):
        f = k / 49
        out.append(f'<rect x="{bx}" y="{_fmt(T + ph - (k + 1) * ph / 50)}" width="14" height="{_fmt(ph / 50 + 0.3)}" fill="{colormap(f)}"/>')
    out.append(f'<text x="{bx + 18}" y="{T + ph}">{_tick(zr[0])}</text>')
    out.append(f'<text x="{bx + 18}" y="{T + 10}">{_tick(zr[1])}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
