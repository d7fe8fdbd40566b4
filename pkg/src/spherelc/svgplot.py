"""Minimal SVG emitter: log/linear line plots with error bars, and histograms
with a density overlay. No plotting dependencies."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["svg_line_plot", "svg_histogram"]

PALETTE = ("#1f6fb4", "#e07b39", "#2e9e4f", "#c03a3a", "#7b5ea7", "#4a4a4a")

_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64, 16, 34, 46


def _esc(text: str) -> str:
    return (str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))


class _Axis:
    """Maps one data coordinate to pixels, linearly or in log10."""

    def __init__(self, lo: float, hi: float, px_lo: float, px_hi: float, log: bool):
        if log:
            lo = max(lo, 1e-300)
            hi = max(hi, lo * 10)
        if hi <= lo:
            hi = lo + 1.0
        self.lo, self.hi, self.log = lo, hi, log
        self.px_lo, self.px_hi = px_lo, px_hi

    def __call__(self, v: float) -> float:
        if self.log:
            v = max(v, 1e-300)
            frac = (math.log10(v) - math.log10(self.lo)) / (
                math.log10(self.hi) - math.log10(self.lo))
        else:
            frac = (v - self.lo) / (self.hi - self.lo)
        return self.px_lo + frac * (self.px_hi - self.px_lo)

    def ticks(self) -> list[float]:
        if self.log:
            lo_e = math.floor(math.log10(self.lo))
            hi_e = math.ceil(math.log10(self.hi))
            vals = [10.0 ** e for e in range(lo_e, hi_e + 1)]
            return [v for v in vals if self.lo <= v <= self.hi] or [self.lo, self.hi]
        step = (self.hi - self.lo) / 5.0
        return [self.lo + i * step for i in range(6)]


def _finite_positive(x, y, log_y: bool):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    keep = np.isfinite(x) & np.isfinite(y)
    if log_y:
        keep &= y > 0
    return x[keep], y[keep]


def _frame(width, height, title, xlabel, ylabel, ax, ay) -> list[str]:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{_esc(title)}</text>',
    ]
    x0, x1 = _MARGIN_L, width - _MARGIN_R
    y0, y1 = height - _MARGIN_B, _MARGIN_T
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    for v in ax.ticks():
        px = ax(v)
        parts.append(f'<line x1="{px:.1f}" y1="{y0}" x2="{px:.1f}" y2="{y0 + 4}" stroke="black"/>')
        parts.append(f'<text x="{px:.1f}" y="{y0 + 17}" text-anchor="middle">{v:g}</text>')
    for v in ay.ticks():
        py = ay(v)
        parts.append(f'<line x1="{x0 - 4}" y1="{py:.1f}" x2="{x0}" y2="{py:.1f}" stroke="black"/>')
        parts.append(f'<text x="{x0 - 7}" y="{py + 4:.1f}" text-anchor="end">{v:.3g}</text>')
    parts.append(f'<text x="{(x0 + x1) / 2:.1f}" y="{height - 8}" text-anchor="middle">{_esc(xlabel)}</text>')
    parts.append(f'<text x="16" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {(y0 + y1) / 2:.1f})">{_esc(ylabel)}</text>')
    return parts


def svg_line_plot(series, *, title="", xlabel="m", ylabel="error",
                  log_x=True, log_y=True, width=720, height=480) -> str:
    """Render line series (dicts with x, y, optional yerr/label/color/marker)."""
    xs, ys = [], []
    for s in series:
        x, y = _finite_positive(s["x"], s["y"], log_y)
        if x.size:
            xs.append(x)
            ys.append(y)
    if xs:
        all_x = np.concatenate(xs)
        all_y = np.concatenate(ys)
        ax = _Axis(all_x.min(), all_x.max(), _MARGIN_L, width - _MARGIN_R, log_x)
        ay = _Axis(all_y.min(), all_y.max(), height - _MARGIN_B, _MARGIN_T, log_y)
    else:
        ax = _Axis(1.0, 10.0, _MARGIN_L, width - _MARGIN_R, log_x)
        ay = _Axis(0.1, 1.0, height - _MARGIN_B, _MARGIN_T, log_y)
    parts = _frame(width, height, title, xlabel, ylabel, ax, ay)

    for idx, s in enumerate(series):
        color = s.get("color", PALETTE[idx % len(PALETTE)])
        x, y = _finite_positive(s["x"], s["y"], log_y)
        if x.size == 0:
            continue
        if s.get("yerr") is not None:
            yerr = np.asarray(s["yerr"], float)
            xv = np.asarray(s["x"], float)
            yv = np.asarray(s["y"], float)
            for xi, yi, ei in zip(xv, yv, yerr):
                if not (np.isfinite(xi) and np.isfinite(yi) and np.isfinite(ei)):
                    continue
                lo, hi = yi - ei, yi + ei
                if log_y:
                    lo = max(lo, 1e-300)
                    hi = max(hi, 1e-300)
                parts.append(
                    f'<line x1="{ax(xi):.1f}" y1="{ay(lo):.1f}" '
                    f'x2="{ax(xi):.1f}" y2="{ay(hi):.1f}" stroke="{color}" stroke-width="1"/>'
                )
        if s.get("marker"):
            for xi, yi in zip(x, y):
                parts.append(f'<circle cx="{ax(xi):.1f}" cy="{ay(yi):.1f}" r="3" fill="{color}"/>')
        else:
            pts = " ".join(f"{ax(xi):.1f},{ay(yi):.1f}" for xi, yi in zip(x, y))
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.6"/>')
        if s.get("label"):
            ly = _MARGIN_T + 16 * idx
            lx = width - _MARGIN_R - 150
            parts.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 18}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
            parts.append(f'<text x="{lx + 24}" y="{ly + 4}">{_esc(s["label"])}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def svg_histogram(values, *, bins=60, overlay=None, atom=None, title="",
                  xlabel="eigenvalue", ylabel="density", width=720, height=480) -> str:
    """Density-normalized histogram with an optional (x, y) density overlay and
    an optional point mass drawn as a vertical spike at zero."""
    vals = np.asarray(values, float)
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        vals = np.zeros(1)
    counts, edges = np.histogram(vals, bins=bins, density=True)
    top = counts.max() if counts.size and counts.max() > 0 else 1.0
    if overlay is not None:
        oy = np.asarray(overlay[1], float)
        if oy.size:
            top = max(top, float(np.nanmax(oy)))
    ax = _Axis(float(edges[0]), float(edges[-1]), _MARGIN_L, width - _MARGIN_R, False)
    ay = _Axis(0.0, float(top) * 1.05, height - _MARGIN_B, _MARGIN_T, False)
    parts = _frame(width, height, title, xlabel, ylabel, ax, ay)
    y0 = ay(0.0)
    for c, e0, e1 in zip(counts, edges[:-1], edges[1:]):
        x_px = ax(e0)
        w_px = max(ax(e1) - ax(e0), 0.5)
        h_px = y0 - ay(c)
        parts.append(f'<rect x="{x_px:.1f}" y="{ay(c):.1f}" width="{w_px:.1f}" '
                     f'height="{h_px:.1f}" fill="{PALETTE[0]}" fill-opacity="0.55"/>')
    if overlay is not None:
        ox = np.asarray(overlay[0], float)
        oy = np.asarray(overlay[1], float)
        pts = " ".join(f"{ax(xi):.1f},{ay(yi):.1f}" for xi, yi in zip(ox, oy)
                       if np.isfinite(xi) and np.isfinite(yi))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{PALETTE[3]}" stroke-width="1.8"/>')
    if atom:
        parts.append(f'<line x1="{ax(0.0):.1f}" y1="{y0:.1f}" x2="{ax(0.0):.1f}" '
                     f'y2="{ay(top):.1f}" stroke="{PALETTE[3]}" stroke-width="3" stroke-dasharray="4 3"/>')
        parts.append(f'<text x="{ax(0.0) + 5:.1f}" y="{ay(top) + 12:.1f}">atom {atom:.3g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
