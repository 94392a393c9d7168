"""Minimal self-contained SVG rendering of a counts-vs-voltage sweep."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 30, 50


def _nice_ticks(lo, hi, n=6):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return list(np.arange(start, hi + step * 1e-9, step))


def render_sweep_svg(voltages, d1, d2, fit_v=None, fit_d1=None, fit_d2=None, markers=(), title=""):
    """Return SVG text: D1 as black squares, D2 as red triangles, fits as lines,
    proper-phase markers as green dashed verticals."""
    v = np.asarray(voltages, float)
    ys = [np.asarray(d1, float), np.asarray(d2, float)]
    if fit_d1 is not None:
        ys += [np.asarray(fit_d1, float), np.asarray(fit_d2, float)]
    x_lo, x_hi = float(v.min()), float(v.max())
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    y_hi = max(float(max(y.max() for y in ys)), 1.0) * 1.05
    y_lo = 0.0
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x):
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return MARGIN_T + ph - (y - y_lo) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle">{escape(title)}</text>')
    for t in _nice_ticks(x_lo, x_hi):
        out.append(f'<line x1="{sx(t):.2f}" y1="{MARGIN_T + ph}" x2="{sx(t):.2f}" y2="{MARGIN_T + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{sx(t):.2f}" y="{MARGIN_T + ph + 16}" text-anchor="middle">{t:g}</text>')
    for t in _nice_ticks(y_lo, y_hi):
        out.append(f'<line x1="{MARGIN_L - 4}" y1="{sy(t):.2f}" x2="{MARGIN_L}" y2="{sy(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_L - 6}" y="{sy(t) + 4:.2f}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{MARGIN_L + pw / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">PZT voltage (V)</text>')
    out.append(f'<text x="16" y="{MARGIN_T + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {MARGIN_T + ph / 2:.1f})">counts</text>')

    for m in markers:
        if x_lo <= m <= x_hi:
            out.append(f'<line class="proper-phase" x1="{sx(m):.2f}" y1="{MARGIN_T}" x2="{sx(m):.2f}" '
                       f'y2="{MARGIN_T + ph}" stroke="green" stroke-dasharray="5,4"/>')

    if fit_v is not None and fit_d1 is not None:
        fv = np.asarray(fit_v, float)
        for ys_fit, color in ((fit_d1, "black"), (fit_d2, "red")):
            pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(fv, ys_fit))
            out.append(f'<polyline class="fit" points="{pts}" fill="none" stroke="{color}" stroke-width="1"/>')

    for x, y in zip(v, ys[0]):
        out.append(f'<rect class="d1" x="{sx(x) - 3:.2f}" y="{sy(y) - 3:.2f}" width="6" height="6" fill="black"/>')
    for x, y in zip(v, ys[1]):
        cx, cy = sx(x), sy(y)
        out.append(f'<polygon class="d2" points="{cx:.2f},{cy - 4:.2f} {cx - 4:.2f},{cy + 3:.2f} '
                   f'{cx + 4:.2f},{cy + 3:.2f}" fill="red"/>')

    lx = MARGIN_L + pw - 90
    out.append(f'<rect x="{lx}" y="{MARGIN_T + 8}" width="6" height="6" fill="black"/>')
    out.append(f'<text x="{lx + 12}" y="{MARGIN_T + 15}">D1 (H)</text>')
    out.append(f'<polygon points="{lx + 3},{MARGIN_T + 22} {lx - 1},{MARGIN_T + 29} {lx + 7},{MARGIN_T + 29}" fill="red"/>')
    out.append(f'<text x="{lx + 12}" y="{MARGIN_T + 30}">D2 (V)</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
