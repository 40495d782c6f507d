"""Minimal hand-emitted SVG line plots.

Plotting is a convenience only; CSV files are the contract.  The emitter
draws axes, a handful of ticks and one polyline per series, applying log
scaling itself where requested.
"""

from __future__ import annotations

import math
from pathlib import Path

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 20, 30, 50


def _ticks(lo, hi, log):
    if log:
        lo_e = math.floor(math.log10(lo))
        hi_e = math.ceil(math.log10(hi))
        return [10.0**e for e in range(lo_e, hi_e + 1)]
    span = hi - lo
    if span <= 0:
        return [lo]
    step = 10.0 ** math.floor(math.log10(span / 4))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= 5:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * span:
        out.append(t)
        t += step
    return out


def _fmt(v):
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.1e}"
    return f"{v:g}"


def line_plot(path, x, y, *, title="", xlabel="", ylabel="",
              logx=False, logy=False):
    """Write a single-series line plot as an SVG file."""
    xs = [float(v) for v in x]
    ys = [float(v) for v in y]
    if len(xs) != len(ys) or not xs:
        raise ValueError("need equal, nonempty x and y")
    if logx and min(xs) <= 0:
        raise ValueError("log x-axis requires positive x")
    if logy:
        floor = max(min((v for v in ys if v > 0), default=1e-300), 1e-300)
        ys = [max(v, floor * 1e-3) for v in ys]

    def tx(v):
        return math.log10(v) if logx else v

    def ty(v):
        return math.log10(v) if logy else v

    x0, x1 = min(map(tx, xs)), max(map(tx, xs))
    y0, y1 = min(map(ty, ys)), max(map(ty, ys))
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw = _W - _ML - _MR
    ph = _H - _MT - _MB

    def px(v):
        return _ML + pw * (tx(v) - x0) / (x1 - x0)

    def py(v):
        return _MT + ph * (1.0 - (ty(v) - y0) / (y1 - y0))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W//2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{_ML}" y1="{_MT+ph}" x2="{_ML+pw}" y2="{_MT+ph}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_MT+ph}" stroke="black"/>',
        f'<text x="{_ML+pw//2}" y="{_H-10}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="15" y="{_MT+ph//2}" font-size="12" '
        f'transform="rotate(-90 15 {_MT+ph//2})" text-anchor="middle">{ylabel}</text>',
    ]
    for t in _ticks(min(xs), max(xs), logx):
        if tx(t) < x0 - 1e-12 or tx(t) > x1 + 1e-12:
            continue
        xp = _ML + pw * (tx(t) - x0) / (x1 - x0)
        parts.append(f'<line x1="{xp:.1f}" y1="{_MT+ph}" x2="{xp:.1f}" '
                     f'y2="{_MT+ph+5}" stroke="black"/>')
        parts.append(f'<text x="{xp:.1f}" y="{_MT+ph+18}" text-anchor="middle" '
                     f'font-size="10">{_fmt(t)}</text>')
    for t in _ticks(min(ys), max(ys), logy):
        if ty(t) < y0 - 1e-12 or ty(t) > y1 + 1e-12:
            continue
        yp = _MT + ph * (1.0 - (ty(t) - y0) / (y1 - y0))
        parts.append(f'<line x1="{_ML-5}" y1="{yp:.1f}" x2="{_ML}" '
                     f'y2="{yp:.1f}" stroke="black"/>')
        parts.append(f'<text x="{_ML-8}" y="{yp+3:.1f}" text-anchor="end" '
                     f'font-size="10">{_fmt(t)}</text>')
    pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(xs, ys))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f4e9c" '
                 f'stroke-width="1.5"/>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
