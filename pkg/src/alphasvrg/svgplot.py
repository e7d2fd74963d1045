"""Minimal self-contained SVG line charts with shaded interval bands."""
from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 55


@dataclass
class Series:
    label: str
    x: list
    y: list
    lo: list
    hi: list


def _nice_ticks(lo, hi, n=6):
    span = hi - lo or 1.0
    step = 10 ** math.floor(math.log10(span / n))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= n:
            step *= mult
            break
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * span:
        ticks.append(round(v, 10))
        v += step
    return ticks


def line_chart(series, xlabel="", ylabel="", title="", log_y=False) -> str:
    finite = [v for s in series for v in (*s.y, *s.lo, *s.hi) if math.isfinite(v) and (v > 0 or not log_y)]
    if not finite:
        finite = [1.0]
    xs = [v for s in series for v in s.x]
    x0, x1 = min(xs), max(xs)
    if x0 == x1:
        x0, x1 = x0 - 0.5, x1 + 0.5

    if log_y:
        t = math.log10
        y0, y1 = math.floor(t(min(finite))), math.ceil(t(max(finite)))
        if y0 == y1:
            y1 += 1
        yticks = [(10.0 ** e, float(e)) for e in range(y0, y1 + 1)]
    else:
        t = float
        y0, y1 = min(finite + [0.0]), max(finite)
        yticks = [(v, v) for v in _nice_ticks(y0, y1)]

    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + (x - x0) / (x1 - x0) * pw

    def py(y):
        if log_y and y <= 0:
            y = 10.0 ** y0
        v = t(y) if math.isfinite(y) else y1
        v = min(max(v, y0), y1)
        return TOP + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    for label, v in yticks:
        y = TOP + ph - (v - y0) / (y1 - y0) * ph
        out.append(f'<line x1="{LEFT}" y1="{y:.1f}" x2="{LEFT + pw}" y2="{y:.1f}" stroke="#e5e5e5"/>')
        text = f"{label:g}" if not log_y else f"1e{int(v)}"
        out.append(f'<text x="{LEFT - 6}" y="{y + 4:.1f}" text-anchor="end">{text}</text>')
    for v in _nice_ticks(x0, x1):
        x = px(v)
        out.append(f'<line x1="{x:.1f}" y1="{TOP + ph}" x2="{x:.1f}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.1f}" y="{TOP + ph + 18}" text-anchor="middle">{v:g}</text>')
    out.append(f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')

    for k, s in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        upper = " ".join(f"{px(x):.2f},{py(v):.2f}" for x, v in zip(s.x, s.hi))
        lower = " ".join(f"{px(x):.2f},{py(v):.2f}" for x, v in reversed(list(zip(s.x, s.lo))))
        out.append(f'<polygon points="{upper} {lower}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
        line = " ".join(f"{px(x):.2f},{py(v):.2f}" for x, v in zip(s.x, s.y))
        out.append(f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, v in zip(s.x, s.y):
            out.append(f'<circle cx="{px(x):.2f}" cy="{py(v):.2f}" r="3" fill="{color}"/>')
        ly = TOP + 14 + 16 * k
        out.append(f'<line x1="{LEFT + pw - 150}" y1="{ly - 4}" x2="{LEFT + pw - 130}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{LEFT + pw - 125}" y="{ly}">{escape(s.label)}</text>')

    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text transform="translate(16,{TOP + ph / 2:.1f}) rotate(-90)" '
               f'text-anchor="middle">{escape(ylabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
