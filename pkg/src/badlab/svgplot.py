"""Minimal self-contained SVG charts.

Reports need deterministic bytes (same inputs, same file), so charts are built
by direct string assembly with fixed-precision coordinates rather than through
a plotting library.  Only the two chart elements the reports use are provided:
polyline series and scatter markers, on a single linear-linear axes box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")


@dataclass(frozen=True)
class Series:
    x: Sequence[float]
    y: Sequence[float]
    label: str = ""
    kind: str = "line"  # "line" or "scatter"
    color: Optional[str] = None
    dashed: bool = False


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if not math.isfinite(lo) or not math.isfinite(hi) or lo == hi:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def _fmt(value: float) -> str:
    return f"{value:.4g}"


def render_plot(
    series: Sequence[Series],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    width: int = 640,
    height: int = 420,
) -> str:
    """Render series into a standalone SVG document string."""
    margin_left, margin_right, margin_top, margin_bottom = 62, 16, 34, 46
    plot_w = width - margin_left - margin_right
    plot_h = height - margin_top - margin_bottom

    xs = [v for s in series for v in s.x if math.isfinite(v)]
    ys = [v for s in series for v in s.y if math.isfinite(v)]
    if not xs or not ys:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_lo == x_hi:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_lo == y_hi:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    y_pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def px(x: float) -> float:
        return margin_left + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return margin_top + (y_hi - y) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{margin_left}" y="{margin_top}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="13">{title}</text>'
        )

    for tick in _ticks(x_lo, x_hi):
        x = px(tick)
        parts.append(
            f'<line x1="{x:.2f}" y1="{margin_top + plot_h}" x2="{x:.2f}" '
            f'y2="{margin_top + plot_h + 4}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{margin_top + plot_h + 16}" text-anchor="middle">{_fmt(tick)}</text>'
        )
    for tick in _ticks(y_lo, y_hi):
        y = py(tick)
        parts.append(
            f'<line x1="{margin_left - 4}" y1="{y:.2f}" x2="{margin_left}" y2="{y:.2f}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{margin_left - 7}" y="{y + 3:.2f}" text-anchor="end">{_fmt(tick)}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{margin_left + plot_w / 2:.1f}" y="{height - 10}" text-anchor="middle">{xlabel}</text>'
        )
    if ylabel:
        parts.append(
            f'<text x="14" y="{margin_top + plot_h / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 14 {margin_top + plot_h / 2:.1f})">{ylabel}</text>'
        )

    legend_y = margin_top + 12
    for idx, s in enumerate(series):
        color = s.color or _COLORS[idx % len(_COLORS)]
        points = [
            (px(x), py(y))
            for x, y in zip(s.x, s.y)
            if math.isfinite(x) and math.isfinite(y)
        ]
        if s.kind == "scatter":
            for x, y in points:
                parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="1.6" fill="{color}" fill-opacity="0.45"/>')
        else:
            path = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
            dash = ' stroke-dasharray="5,4"' if s.dashed else ""
            parts.append(
                f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>'
            )
        if s.label:
            swatch_x = margin_left + plot_w - 150
            parts.append(
                f'<rect x="{swatch_x}" y="{legend_y - 8}" width="10" height="10" fill="{color}"/>'
            )
            parts.append(f'<text x="{swatch_x + 14}" y="{legend_y + 1}">{s.label}</text>')
            legend_y += 15
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
