"""Standalone SVG line charts for regret traces (no plotting dependency)."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

W, H = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 50


def nice_ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * step:
        if v >= lo - 1e-9 * step:
            ticks.append(round(v, 10))
        v += step
    return ticks


def _fmt(v):
    if abs(v) >= 1e4 or (v != 0 and abs(v) < 1e-2):
        return f"{v:.2g}"
    return f"{v:g}"


def render(rounds, values, band=None, title="regret"):
    """SVG text for ``values`` against ``rounds``; ``band`` is ``(lower, upper)``."""
    ys = list(values) + (list(band[0]) + list(band[1]) if band else [])
    x_lo, x_hi = 0, max(rounds)
    y_lo, y_hi = min(0.0, min(ys)), max(ys)
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    xt, yt = nice_ticks(x_lo, x_hi), nice_ticks(y_lo, y_hi)
    x_hi, y_lo, y_hi = max(x_hi, xt[-1]), min(y_lo, yt[0]), max(y_hi, yt[-1])
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def px(x):
        return LEFT + pw * (x - x_lo) / (x_hi - x_lo)

    def py(y):
        return TOP + ph * (1.0 - (y - y_lo) / (y_hi - y_lo))

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{escape(title)}</text>',
    ]
    if band:
        upper = " ".join(f"L{px(x):.2f},{py(y):.2f}" for x, y in zip(rounds, band[1]))
        lower = " ".join(f"L{px(x):.2f},{py(y):.2f}" for x, y in zip(reversed(rounds), reversed(band[0])))
        out.append(f'<path class="band" d="M{upper[1:]} {lower} Z" fill="#4c72b0" fill-opacity="0.25" stroke="none"/>')
    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(rounds, values))
    out.append(f'<polyline class="regret" points="{pts}" fill="none" stroke="#4c72b0" stroke-width="1.5"/>')
    out.append(f'<g stroke="black" stroke-width="1">'
               f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}"/>'
               f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}"/></g>')
    out.append('<g font-family="sans-serif" font-size="11">')
    for x in xt:
        out.append(f'<line x1="{px(x):.2f}" y1="{TOP + ph}" x2="{px(x):.2f}" y2="{TOP + ph + 5}" stroke="black"/>'
                   f'<text x="{px(x):.2f}" y="{TOP + ph + 18}" text-anchor="middle">{_fmt(x)}</text>')
    for y in yt:
        out.append(f'<line x1="{LEFT - 5}" y1="{py(y):.2f}" x2="{LEFT}" y2="{py(y):.2f}" stroke="black"/>'
                   f'<text x="{LEFT - 8}" y="{py(y) + 4:.2f}" text-anchor="end">{_fmt(y)}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{H - 10}" text-anchor="middle">round</text>')
    out.append(f'<text x="16" y="{TOP + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {TOP + ph / 2:.1f})">pseudo-regret</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
