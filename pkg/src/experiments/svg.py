"""
Minimal self-contained SVG plots: one file, inline styles, no external references.
"""

from datetime import datetime, timezone
from typing import Dict, List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

WIDTH = 640
HEIGHT = 480
MARGIN = 60
LINE_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _bounds(values: Sequence[float]) -> Tuple[float, float]:
    lo, hi = min(values), max(values)
    if hi <= lo:
        return lo - 0.5, hi + 0.5
    return lo, hi


def _scale(v: float, lo: float, hi: float, a: float, b: float) -> float:
    return a + (v - lo) / (hi - lo) * (b - a)


def gradient_color(t: float) -> str:
    """Red at t=0 to blue at t=1."""
    t = min(max(t, 0.0), 1.0)
    return f"#{round(255 * (1 - t)):02x}00{round(255 * t):02x}"


def _document(title: str, x_label: str, y_label: str, x_range, y_range, body: List[str], timestamp: bool) -> str:
    x0, x1 = MARGIN, WIDTH - MARGIN
    y0, y1 = HEIGHT - MARGIN, MARGIN
    lines = ['<?xml version="1.0" encoding="UTF-8"?>']
    if timestamp:
        lines.append(f"<!-- generated {datetime.now(timezone.utc).strftime('%Y-%m-%dT%H:%M:%SZ')} -->")
    lines.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">')
    lines.append(f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>')
    lines.append(f'<text x="{WIDTH / 2:.1f}" y="30" text-anchor="middle" font-family="sans-serif" font-size="16">{escape(title)}</text>')
    lines.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="#000000"/>')
    lines.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="#000000"/>')
    for v, anchor_x in ((x_range[0], x0), (x_range[1], x1)):
        lines.append(f'<text x="{anchor_x}" y="{y0 + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">{v:.4g}</text>')
    for v, anchor_y in ((y_range[0], y0), (y_range[1], y1)):
        lines.append(f'<text x="{x0 - 6}" y="{anchor_y + 4}" text-anchor="end" font-family="sans-serif" font-size="11">{v:.4g}</text>')
    lines.append(f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle" font-family="sans-serif" font-size="13">{escape(x_label)}</text>')
    lines.append(
        f'<text x="18" y="{HEIGHT / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {HEIGHT / 2:.1f})">{escape(y_label)}</text>'
    )
    lines.extend(body)
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def scatter(
    xs: Sequence[float],
    ys: Sequence[float],
    title: str,
    x_label: str,
    y_label: str,
    colors: Optional[Sequence[str]] = None,
    timestamp: bool = True,
) -> str:
    x_range, y_range = _bounds(xs), _bounds(ys)
    body = []
    for i, (x, y) in enumerate(zip(xs, ys)):
        cx = _scale(x, *x_range, MARGIN, WIDTH - MARGIN)
        cy = _scale(y, *y_range, HEIGHT - MARGIN, MARGIN)
        fill = colors[i] if colors else LINE_COLORS[0]
        body.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="4" fill="{fill}" fill-opacity="0.8"/>')
    return _document(title, x_label, y_label, x_range, y_range, body, timestamp)


def line_plot(
    xs: Sequence[float],
    series: Dict[str, Sequence[float]],
    title: str,
    x_label: str,
    y_label: str,
    timestamp: bool = True,
) -> str:
    x_range = _bounds(xs)
    y_range = _bounds([v for values in series.values() for v in values])
    body = []
    for k, (name, values) in enumerate(series.items()):
        color = LINE_COLORS[k % len(LINE_COLORS)]
        points = " ".join(
            f"{_scale(x, *x_range, MARGIN, WIDTH - MARGIN):.2f},{_scale(y, *y_range, HEIGHT - MARGIN, MARGIN):.2f}"
            for x, y in zip(xs, values)
        )
        body.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        legend_y = MARGIN + 16 * k
        body.append(f'<line x1="{WIDTH - MARGIN - 120}" y1="{legend_y}" x2="{WIDTH - MARGIN - 100}" y2="{legend_y}" stroke="{color}" stroke-width="2"/>')
        body.append(
            f'<text x="{WIDTH - MARGIN - 95}" y="{legend_y + 4}" font-family="sans-serif" font-size="11">{escape(name)}</text>'
        )
    return _document(title, x_label, y_label, x_range, y_range, body, timestamp)
