"""Minimal deterministic SVG plotting for campaign CSV output.

Hand-rolled on purpose: the output must be byte-identical across runs, so no
plotting library with generated element ids or embedded metadata is used.
"""

from __future__ import annotations

import csv
import math

import numpy as np

from .errors import InvalidParameterError

__all__ = ["emit_plot"]

WIDTH, HEIGHT = 640, 440
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 30, 50


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def _ticks(lo: float, hi: float, count: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def emit_plot(csv_path: str, plot_spec: dict, out_path: str) -> str:
    """Render one x/y series from a CSV column pair into a standalone SVG.

    plot_spec keys: x, y (column names), kind ("line" or "scatter"),
    logy (bool), title (optional). Log-y line plots get the least-squares
    slope of log(y) vs x annotated.
    """
    xcol, ycol = plot_spec.get("x"), plot_spec.get("y")
    kind = plot_spec.get("kind", "line")
    logy = bool(plot_spec.get("logy", False))
    if kind not in ("line", "scatter"):
        raise InvalidParameterError(f"unknown plot kind {kind!r}")
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or xcol not in reader.fieldnames or ycol not in reader.fieldnames:
            raise InvalidParameterError(
                f"columns {xcol!r}, {ycol!r} not all present in {csv_path}"
            )
        xs, ys = [], []
        for row in reader:
            try:
                x, y = float(row[xcol]), float(row[ycol])
            except (TypeError, ValueError):
                continue
            if logy and y <= 0:
                continue
            xs.append(x)
            ys.append(y)
    if not xs:
        raise InvalidParameterError("no plottable points in the selected columns")
    pairs = sorted(zip(xs, ys))
    xs = [p[0] for p in pairs]
    ys = [p[1] for p in pairs]
    py = [math.log10(y) for y in ys] if logy else ys
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(py), max(py)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def sx(x):
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_L - MARGIN_R)

    def sy(y):
        return HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN_L}" y1="{HEIGHT - MARGIN_B}" x2="{WIDTH - MARGIN_R}" '
        f'y2="{HEIGHT - MARGIN_B}" stroke="black"/>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" '
        f'y2="{HEIGHT - MARGIN_B}" stroke="black"/>',
    ]
    for t in _ticks(x_lo, x_hi):
        parts.append(
            f'<text x="{_fmt(sx(t))}" y="{HEIGHT - MARGIN_B + 18}" font-size="11" '
            f'text-anchor="middle">{t:.4g}</text>'
        )
    for t in _ticks(y_lo, y_hi):
        label = f"1e{t:.2f}" if logy else f"{t:.4g}"
        parts.append(
            f'<text x="{MARGIN_L - 6}" y="{_fmt(sy(t) + 4)}" font-size="11" '
            f'text-anchor="end">{label}</text>'
        )
    title = plot_spec.get("title", f"{ycol} vs {xcol}")
    parts.append(
        f'<text x="{WIDTH // 2}" y="{MARGIN_T - 10}" font-size="13" '
        f'text-anchor="middle">{title}</text>'
    )
    points = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, py))
    if kind == "line":
        parts.append(f'<polyline fill="none" stroke="#1f4e8c" stroke-width="1.5" points="{points}"/>')
    else:
        for x, y in zip(xs, py):
            parts.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="3" fill="#1f4e8c"/>')
    if logy and len(xs) >= 2:
        slope = float(np.polyfit(np.asarray(xs), np.log(np.asarray(ys)), 1)[0])
        parts.append(
            f'<text x="{WIDTH - MARGIN_R - 6}" y="{MARGIN_T + 14}" font-size="11" '
            f'text-anchor="end">slope {slope!r}</text>'
        )
    parts.append("</svg>")
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
    return out_path
