"""Static SVG charts built from raw markup: a fit/forecast line chart and
a grouped box plot. No charting dependency; every coordinate is rendered
with 6 significant digits so output bytes are stable."""

from __future__ import annotations

import datetime as dt
import math
from typing import Mapping, Sequence

from .analytics import BoxStats, ForecastSummary
from .ingest import Date

WIDTH, HEIGHT = 800, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 78, 24, 48, 58

_PALETTE = ("#4878cf", "#d65f5f", "#6acc65", "#b47cc7", "#c4ad66")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    for mult in (1, 2, 2.5, 5, 10):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * step:
        ticks.append(v)
        v += step
    return ticks


class _Scale:
    def __init__(self, lo: float, hi: float, px_lo: float, px_hi: float):
        self.lo, self.hi = lo, hi
        self.px_lo, self.px_hi = px_lo, px_hi
        self.span = hi - lo if hi > lo else 1.0

    def __call__(self, v: float) -> float:
        return self.px_lo + (v - self.lo) / self.span * (self.px_hi - self.px_lo)


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:g}" y="26" font-size="16" text-anchor="middle">{title}</text>',
    ]


def _axes(parts: list[str], y_ticks: Sequence[float], ys: _Scale,
          x_labels: Sequence[tuple[float, str]]) -> None:
    parts.append(f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" '
                 f'y2="{HEIGHT - MARGIN_B}" stroke="black"/>')
    parts.append(f'<line x1="{MARGIN_L}" y1="{HEIGHT - MARGIN_B}" x2="{WIDTH - MARGIN_R}" '
                 f'y2="{HEIGHT - MARGIN_B}" stroke="black"/>')
    for v in y_ticks:
        y = ys(v)
        parts.append(f'<line x1="{MARGIN_L - 4}" y1="{_fmt(y)}" x2="{MARGIN_L}" '
                     f'y2="{_fmt(y)}" stroke="black"/>')
        parts.append(f'<text x="{MARGIN_L - 8}" y="{_fmt(y + 4)}" font-size="11" '
                     f'text-anchor="end">{_fmt(v)}</text>')
    for x, label in x_labels:
        parts.append(f'<line x1="{_fmt(x)}" y1="{HEIGHT - MARGIN_B}" x2="{_fmt(x)}" '
                     f'y2="{HEIGHT - MARGIN_B + 4}" stroke="black"/>')
        parts.append(f'<text x="{_fmt(x)}" y="{HEIGHT - MARGIN_B + 18}" font-size="11" '
                     f'text-anchor="middle">{label}</text>')


def fit_chart(title: str, observed_dates: Sequence[Date], observed: Sequence[float],
              summary: ForecastSummary) -> str:
    """Observed points, posterior median curve, and the 5-95% band."""
    start = min(min(observed_dates), min(summary.dates))
    end = max(max(observed_dates), max(summary.dates))
    levels = sorted(summary.quantiles)
    lo_band = summary.quantiles[levels[0]]
    hi_band = summary.quantiles[levels[-1]]
    median = summary.quantiles[0.5] if 0.5 in summary.quantiles else summary.mean

    top = max(float(max(hi_band)), float(max(observed)))
    xs = _Scale(0.0, float((end - start).days) or 1.0, MARGIN_L, WIDTH - MARGIN_R)
    ys = _Scale(0.0, top * 1.05, HEIGHT - MARGIN_B, MARGIN_T)

    def px(d: Date) -> float:
        return xs(float((d - start).days))

    parts = _header(title)
    band_pts = [f"{_fmt(px(d))},{_fmt(ys(float(hi_band[i])))}" for i, d in enumerate(summary.dates)]
    band_pts += [f"{_fmt(px(d))},{_fmt(ys(float(lo_band[i])))}"
                 for i, d in reversed(list(enumerate(summary.dates)))]
    parts.append(f'<polygon points="{" ".join(band_pts)}" fill="#4878cf" fill-opacity="0.25" '
                 f'stroke="none"/>')
    median_pts = " ".join(
        f"{_fmt(px(d))},{_fmt(ys(float(median[i])))}" for i, d in enumerate(summary.dates)
    )
    parts.append(f'<polyline points="{median_pts}" fill="none" stroke="#4878cf" stroke-width="2"/>')
    for d, v in zip(observed_dates, observed):
        parts.append(f'<circle cx="{_fmt(px(d))}" cy="{_fmt(ys(float(v)))}" r="2.2" '
                     f'fill="#333333"/>')

    n_x = min(6, len(summary.dates))
    span_days = max((end - start).days, 1)
    x_labels = []
    for i in range(n_x):
        d = start + dt.timedelta(days=round(i * span_days / max(n_x - 1, 1)))
        x_labels.append((px(d), d.isoformat()))
    _axes(parts, _nice_ticks(0.0, top * 1.05), ys, x_labels)
    parts.append(f'<text x="20" y="{HEIGHT / 2:g}" font-size="12" '
                 f'transform="rotate(-90 20 {HEIGHT / 2:g})" text-anchor="middle">'
                 f'cumulative cases</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def grouped_box_chart(title: str, groups: Sequence[str], series: Sequence[str],
                      stats: Mapping[tuple[str, str], BoxStats | None]) -> str:
    """One box per (group, series) pair: groups along x, series colored."""
    values: list[float] = []
    for box in stats.values():
        if box is not None:
            values.extend([box.whisker_low, box.whisker_high])
    if not values:
        values = [-1.0, 1.0]
    lo, hi = min(values), max(values)
    pad = (hi - lo) * 0.1 or 0.1
    ys = _Scale(lo - pad, hi + pad, HEIGHT - MARGIN_B, MARGIN_T)

    plot_w = WIDTH - MARGIN_L - MARGIN_R
    group_w = plot_w / max(len(groups), 1)
    box_w = min(24.0, group_w / (len(series) + 1))

    parts = _header(title)
    if lo <= 0 <= hi:
        zero_y = ys(0.0)
        parts.append(f'<line x1="{MARGIN_L}" y1="{_fmt(zero_y)}" x2="{WIDTH - MARGIN_R}" '
                     f'y2="{_fmt(zero_y)}" stroke="#999999" stroke-dasharray="4 3"/>')
    x_labels = []
    for gi, group in enumerate(groups):
        center = MARGIN_L + (gi + 0.5) * group_w
        x_labels.append((center, group))
        for si, name in enumerate(series):
            box = stats.get((group, name))
            if box is None:
                continue
            color = _PALETTE[si % len(_PALETTE)]
            cx = center + (si - (len(series) - 1) / 2.0) * (box_w + 6)
            x0 = cx - box_w / 2
            parts.append(f'<line x1="{_fmt(cx)}" y1="{_fmt(ys(box.whisker_low))}" '
                         f'x2="{_fmt(cx)}" y2="{_fmt(ys(box.whisker_high))}" stroke="{color}"/>')
            for w in (box.whisker_low, box.whisker_high):
                parts.append(f'<line x1="{_fmt(x0)}" y1="{_fmt(ys(w))}" '
                             f'x2="{_fmt(x0 + box_w)}" y2="{_fmt(ys(w))}" stroke="{color}"/>')
            top_y = ys(box.q3)
            parts.append(f'<rect x="{_fmt(x0)}" y="{_fmt(top_y)}" width="{_fmt(box_w)}" '
                         f'height="{_fmt(ys(box.q1) - top_y)}" fill="{color}" '
                         f'fill-opacity="0.45" stroke="{color}"/>')
            parts.append(f'<line x1="{_fmt(x0)}" y1="{_fmt(ys(box.median))}" '
                         f'x2="{_fmt(x0 + box_w)}" y2="{_fmt(ys(box.median))}" '
                         f'stroke="{color}" stroke-width="2"/>')
    for si, name in enumerate(series):
        color = _PALETTE[si % len(_PALETTE)]
        lx = MARGIN_L + 10 + si * 150
        parts.append(f'<rect x="{lx}" y="{MARGIN_T - 14}" width="12" height="12" '
                     f'fill="{color}" fill-opacity="0.45" stroke="{color}"/>')
        parts.append(f'<text x="{lx + 16}" y="{MARGIN_T - 4}" font-size="11">{name}</text>')
    _axes(parts, _nice_ticks(lo - pad, hi + pad), ys, x_labels)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
