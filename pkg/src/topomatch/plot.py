"""Dependency-free SVG boxplots for Monte Carlo reports.

Boxes span the 25% and 75% quantiles, whiskers the 5% and 95% quantiles,
and values outside the whiskers are drawn as dots. Quantiles use linear
interpolation between order statistics (numpy's default, "type 7").
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .simulate import McReport

QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)

_W_BOX = 60
_MARGIN = 60
_HEIGHT = 360


def box_stats(values) -> dict:
    arr = np.asarray(values, dtype=float)
    q05, q25, q50, q75, q95 = (float(x) for x in np.quantile(arr, QUANTILES, method="linear"))
    outliers = sorted(float(v) for v in arr if v < q05 or v > q95)
    return {"q05": q05, "q25": q25, "q50": q50, "q75": q75, "q95": q95, "outliers": outliers}


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def render_boxplot(report: McReport, metric: str = "accuracy") -> str:
    groups = {
        s: [getattr(r, metric) for r in rows if r.status == "ok"]
        for s, rows in sorted(report.by_sigma().items())
    }
    groups = {s: v for s, v in groups.items() if v}
    if not groups:
        raise ValueError("empty report: nothing to plot")
    stats = {s: box_stats(v) for s, v in groups.items()}
    if metric == "accuracy":
        lo, hi = 0.0, 1.0
    else:
        every = [x for v in groups.values() for x in v]
        lo, hi = min(every), max(every)
        if hi == lo:
            hi = lo + 1.0
    plot_h = _HEIGHT - 2 * _MARGIN

    def y(v: float) -> str:
        return _fmt(_MARGIN + plot_h * (hi - v) / (hi - lo))

    width = 2 * _MARGIN + _W_BOX * len(stats)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{_HEIGHT}" '
        f'viewBox="0 0 {width} {_HEIGHT}" data-metric="{metric}">',
        f'<rect width="{width}" height="{_HEIGHT}" fill="white"/>',
        f'<line x1="{_MARGIN}" y1="{y(lo)}" x2="{_MARGIN}" y2="{y(hi)}" stroke="black"/>',
        f'<text x="{_MARGIN - 6}" y="{y(hi)}" text-anchor="end" font-size="10">{_fmt(hi)}</text>',
        f'<text x="{_MARGIN - 6}" y="{y(lo)}" text-anchor="end" font-size="10">{_fmt(lo)}</text>',
    ]
    for k, (sigma, st) in enumerate(stats.items()):
        cx = _MARGIN + _W_BOX * k + _W_BOX / 2
        left, right = _fmt(cx - _W_BOX * 0.3), _fmt(cx + _W_BOX * 0.3)
        attrs = " ".join(f'data-{q}="{st[q]!r}"' for q in ("q05", "q25", "q50", "q75", "q95"))
        out.append(f'<g class="box" data-sigma="{sigma!r}" data-n="{len(groups[sigma])}" {attrs}>')
        out.append(f'<line x1="{_fmt(cx)}" y1="{y(st["q05"])}" x2="{_fmt(cx)}" y2="{y(st["q25"])}" stroke="black"/>')
        out.append(f'<line x1="{_fmt(cx)}" y1="{y(st["q75"])}" x2="{_fmt(cx)}" y2="{y(st["q95"])}" stroke="black"/>')
        out.append(f'<line x1="{left}" y1="{y(st["q05"])}" x2="{right}" y2="{y(st["q05"])}" stroke="black"/>')
        out.append(f'<line x1="{left}" y1="{y(st["q95"])}" x2="{right}" y2="{y(st["q95"])}" stroke="black"/>')
        top = y(st["q75"])
        height = _fmt(float(y(st["q25"])) - float(top))
        out.append(f'<rect x="{left}" y="{top}" width="{_fmt(_W_BOX * 0.6)}" height="{height}" '
                   'fill="#9ecae1" stroke="black"/>')
        out.append(f'<line x1="{left}" y1="{y(st["q50"])}" x2="{right}" y2="{y(st["q50"])}" stroke="#d62728"/>')
        for v in st["outliers"]:
            out.append(f'<circle class="outlier" cx="{_fmt(cx)}" cy="{y(v)}" r="2" data-value="{v!r}"/>')
        out.append(f'<text x="{_fmt(cx)}" y="{_HEIGHT - _MARGIN + 16}" text-anchor="middle" '
                   f'font-size="10">{_fmt(sigma)}</text>')
        out.append("</g>")
    out.append(f'<text x="{width / 2:g}" y="{_HEIGHT - 12}" text-anchor="middle" font-size="12">sigma</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_boxplot(report: McReport, path, metric: str = "accuracy") -> None:
    Path(path).write_text(render_boxplot(report, metric))
