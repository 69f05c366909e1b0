"""Minimal SVG line charts: axes, ticks, labelled polylines."""
import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN = (60, 20, 40, 50)  # left, right, top, bottom
COLORS = ("#1f4e9c", "#c23b22", "#2a8a3e", "#7b3f9e", "#b07a00", "#444444")
DASHES = ("", "6,4", "2,3", "10,3,2,3")


def _ticks(lo, hi, count=5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    first = math.ceil(lo / step - 1e-9) * step
    return [first + k * step for k in range(int((hi - first) / step + 1e-9) + 1)]


def line_chart(series, title="", xlabel="", ylabel="", xlim=None, ylim=None):
    """SVG text for ``series``, a list of ``(label, x, y)``.

    Non-finite points break a polyline into separate segments.
    """
    xs = np.concatenate([np.asarray(x, dtype=float) for _, x, _ in series])
    ys = np.concatenate([np.asarray(y, dtype=float) for _, _, y in series])
    fin = np.isfinite(xs) & np.isfinite(ys)
    x0, x1 = xlim or (float(xs[fin].min()), float(xs[fin].max()))
    y0, y1 = ylim or (min(0.0, float(ys[fin].min())), float(ys[fin].max()))
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0
    left, right, top, bottom = MARGIN
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom
    sx = lambda v: left + (v - x0) / (x1 - x0) * pw
    sy = lambda v: top + ph - (v - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for v in _ticks(x0, x1):
        px = sx(v)
        out.append(f'<line x1="{px:.2f}" y1="{top + ph}" x2="{px:.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{top + ph + 18}" text-anchor="middle">{v:.4g}</text>')
    for v in _ticks(y0, y1):
        py = sy(v)
        out.append(f'<line x1="{left - 5}" y1="{py:.2f}" x2="{left}" y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{py + 4:.2f}" text-anchor="end">{v:.4g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="15" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 15 {top + ph / 2})">{escape(ylabel)}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{top - 12}" text-anchor="middle" '
               f'font-size="14">{escape(title)}</text>')

    for i, (label, x, y) in enumerate(series):
        x = np.asarray(x, dtype=float)
        y = np.clip(np.asarray(y, dtype=float), y0, y1)
        color = COLORS[i % len(COLORS)]
        dash = DASHES[(i // len(COLORS)) % len(DASHES)] or DASHES[i % len(DASHES)]
        ok = np.isfinite(x) & np.isfinite(y)
        # split at gaps
        cuts = np.flatnonzero(~ok)
        for seg in np.split(np.arange(x.size), cuts):
            seg = seg[ok[seg]]
            if seg.size < 2:
                continue
            pts = " ".join(f"{sx(x[j]):.2f},{sy(y[j]):.2f}" for j in seg)
            style = f' stroke-dasharray="{dash}"' if dash else ""
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{style} points="{pts}"/>')
        ly = top + 16 + 16 * i
        out.append(f'<line x1="{left + pw - 120}" y1="{ly - 4}" x2="{left + pw - 95}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw - 90}" y="{ly}">{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_chart(path, series, **kw):
    with open(path, "w") as fh:
        fh.write(line_chart(series, **kw))
