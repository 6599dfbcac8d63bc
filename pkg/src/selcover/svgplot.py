"""Minimal deterministic SVG line charts (stacked panels sharing an x axis)."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH = 640
PANEL_HEIGHT = 220
MARGIN_LEFT = 80
MARGIN_RIGHT = 120
MARGIN_TOP = 30
MARGIN_BOTTOM = 40
COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
DASHES = ("", "6,3", "2,2", "8,3,2,3", "1,3")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out = []
    k = 0
    while start + k * step <= hi + 1e-12 * step:
        out.append(start + k * step)
        k += 1
    return out


def line_panels(panels, xlabel: str, metadata: str = "", title: str = "") -> str:
    """Render panels of ``(ylabel, [(label, xs, ys), ...])`` as one SVG document."""
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    height = PANEL_HEIGHT * len(panels)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
        f'viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">',
        f"<metadata>{escape(metadata)}</metadata>",
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    xs_all = [x for _, series in panels for _, xs, _ in series for x in xs]
    x_lo, x_hi = min(xs_all), max(xs_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    for p, (ylabel, series) in enumerate(panels):
        top = p * PANEL_HEIGHT + MARGIN_TOP
        ys_all = [y for _, _, ys in series for y in ys if math.isfinite(y)]
        y_lo, y_hi = min(ys_all), max(ys_all)
        pad = 0.05 * (y_hi - y_lo) if y_hi > y_lo else max(abs(y_hi), 1.0) * 0.05
        y_lo, y_hi = y_lo - pad, y_hi + pad

        def sx(x):
            return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

        def sy(y):
            return top + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

        out.append(f'<g class="panel" id="panel{p}">')
        out.append(
            f'<rect x="{MARGIN_LEFT}" y="{top}" width="{plot_w}" height="{plot_h}" '
            'fill="none" stroke="#000"/>'
        )
        for t in _ticks(x_lo, x_hi):
            out.append(
                f'<text x="{_fmt(sx(t))}" y="{_fmt(top + plot_h + 14)}" '
                f'text-anchor="middle">{t:g}</text>'
            )
        for t in _ticks(y_lo, y_hi):
            out.append(
                f'<text x="{MARGIN_LEFT - 4}" y="{_fmt(sy(t) + 4)}" text-anchor="end">{t:.3g}</text>'
            )
        out.append(
            f'<text x="16" y="{_fmt(top + plot_h / 2)}" text-anchor="middle" '
            f'transform="rotate(-90 16 {_fmt(top + plot_h / 2)})">{escape(ylabel)}</text>'
        )
        out.append(
            f'<text x="{_fmt(MARGIN_LEFT + plot_w / 2)}" y="{_fmt(top + plot_h + 30)}" '
            f'text-anchor="middle">{escape(xlabel)}</text>'
        )
        for k, (label, xs, ys) in enumerate(series):
            pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, ys) if math.isfinite(y))
            dash = DASHES[k % len(DASHES)]
            dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
            out.append(
                f'<polyline fill="none" stroke="{COLOURS[k % len(COLOURS)]}" '
                f'stroke-width="1.5"{dash_attr} points="{pts}"/>'
            )
            ly = top + 12 + 14 * k
            out.append(
                f'<text x="{MARGIN_LEFT + plot_w + 8}" y="{_fmt(ly)}" '
                f'fill="{COLOURS[k % len(COLOURS)]}">{escape(label)}</text>'
            )
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
