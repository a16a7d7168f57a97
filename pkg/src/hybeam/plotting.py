"""Minimal deterministic SVG line charts.

Hand-rolled on purpose: the output is a pure function of the data, so chart
artifacts can be diffed byte-for-byte in tests and across machines without
dragging in a rendering stack.
"""

from __future__ import annotations

import math

_WIDTH = 720
_HEIGHT = 480
_MARGIN_LEFT = 64
_MARGIN_RIGHT = 176
_MARGIN_TOP = 44
_MARGIN_BOTTOM = 52

_PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#7f7f7f",
    "#bcbd22",
    "#e377c2",
)


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Round tick positions covering [lo, hi] on a 1-2-5 ladder."""
    if not math.isfinite(lo) or not math.isfinite(hi):
        raise ValueError("tick range must be finite")
    if hi <= lo:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / target))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if span / (mult * step) <= target:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    ticks = []
    value = first
    while value <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(value) < 1e-12 * step else value)
        value += step
    return ticks


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def render_line_chart(
    series,
    xlabel: str = "",
    ylabel: str = "",
    title: str = "",
) -> str:
    """Render labeled (xs, ys) series as a standalone SVG document.

    ``series`` is a sequence of ``(label, xs, ys)`` triples; legend order
    follows the input order.  Single-point series render as markers only.
    """
    series = [(str(label), list(map(float, xs)), list(map(float, ys))) for label, xs, ys in series]
    if not series or all(not xs for _, xs, _ in series):
        raise ValueError("nothing to plot")
    for label, xs, ys in series:
        if len(xs) != len(ys):
            raise ValueError(f"series {label!r} has mismatched x/y lengths")
    all_x = [x for _, xs, _ in series for x in xs]
    all_y = [y for _, _, ys in series for y in ys]
    x_lo, x_hi = min(all_x), max(all_x)
    y_lo, y_hi = min(all_y), max(all_y)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    x_pad = 0.04 * (x_hi - x_lo)
    y_pad = 0.06 * (y_hi - y_lo)
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    plot_w = _WIDTH - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = _HEIGHT - _MARGIN_TOP - _MARGIN_BOTTOM

    def px(x: float) -> float:
        return _MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return _MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}" font-family="sans-serif" font-size="12">'
    )
    out.append(f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>')
    if title:
        out.append(
            f'<text x="{_WIDTH / 2:.1f}" y="24" text-anchor="middle" font-size="15">{_escape(title)}</text>'
        )
    for tick in _nice_ticks(x_lo + x_pad, x_hi - x_pad):
        if not x_lo <= tick <= x_hi:
            continue
        x = px(tick)
        out.append(
            f'<line x1="{x:.2f}" y1="{_MARGIN_TOP}" x2="{x:.2f}" '
            f'y2="{_MARGIN_TOP + plot_h}" stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{x:.2f}" y="{_MARGIN_TOP + plot_h + 18}" text-anchor="middle">{_fmt(tick)}</text>'
        )
    for tick in _nice_ticks(y_lo + y_pad, y_hi - y_pad):
        if not y_lo <= tick <= y_hi:
            continue
        y = py(tick)
        out.append(
            f'<line x1="{_MARGIN_LEFT}" y1="{y:.2f}" x2="{_MARGIN_LEFT + plot_w}" '
            f'y2="{y:.2f}" stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_MARGIN_LEFT - 8}" y="{y + 4:.2f}" text-anchor="end">{_fmt(tick)}</text>'
        )
    out.append(
        f'<rect x="{_MARGIN_LEFT}" y="{_MARGIN_TOP}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333333" stroke-width="1"/>'
    )
    if xlabel:
        out.append(
            f'<text x="{_MARGIN_LEFT + plot_w / 2:.1f}" y="{_HEIGHT - 12}" '
            f'text-anchor="middle">{_escape(xlabel)}</text>'
        )
    if ylabel:
        mid_y = _MARGIN_TOP + plot_h / 2
        out.append(
            f'<text x="18" y="{mid_y:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 18 {mid_y:.1f})">{_escape(ylabel)}</text>'
        )
    legend_x = _MARGIN_LEFT + plot_w + 16
    for i, (label, xs, ys) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        points = sorted(zip(xs, ys))
        if len(points) > 1:
            path = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in points)
            out.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="1.8" points="{path}"/>'
            )
        for x, y in points:
            out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="{color}"/>')
        legend_y = _MARGIN_TOP + 10 + 20 * i
        out.append(
            f'<line x1="{legend_x}" y1="{legend_y}" x2="{legend_x + 22}" y2="{legend_y}" '
            f'stroke="{color}" stroke-width="1.8"/>'
        )
        out.append(
            f'<text x="{legend_x + 28}" y="{legend_y + 4}" text-anchor="start">{_escape(label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")
    )
