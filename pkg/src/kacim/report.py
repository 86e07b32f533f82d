"""Experiment reports: CSV rows, JSON summaries and dependency-free SVG charts."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from html import escape
from pathlib import Path


@dataclass
class ExperimentReport:
    command: str
    config: dict
    columns: list
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    duration_s: float = 0.0

    def rows_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_cell(r[c]) for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls(**json.loads(text))

    def write(self, out_dir, stem: str | None = None) -> dict:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = stem or self.command
        paths = {"csv": out / f"{stem}.csv", "json": out / f"{stem}.json"}
        paths["csv"].write_text(self.rows_csv(), encoding="utf-8")
        paths["json"].write_text(self.to_json() + "\n", encoding="utf-8")
        return paths


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")


def line_chart_svg(series: dict, title: str, xlabel: str, ylabel: str,
                   width: int = 640, height: int = 420, log_x: bool = False) -> str:
    """Line chart with error bars.

    ``series`` maps a label to ``(xs, means, stds)``.
    """
    pad_l, pad_r, pad_t, pad_b = 70, 150, 40, 55
    fx = (lambda v: math.log2(v)) if log_x else (lambda v: v)
    xs = [fx(x) for s in series.values() for x in s[0]]
    lo = [m - e for s in series.values() for m, e in zip(s[1], s[2])]
    hi = [m + e for s in series.values() for m, e in zip(s[1], s[2])]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(0.0, min(lo)), max(hi)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b

    def px(x):
        return pad_l + (fx(x) - x0) / (x1 - x0) * pw

    def py(y):
        return pad_t + (1 - (y - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<line x1="{pad_l}" y1="{pad_t + ph}" x2="{pad_l + pw}" y2="{pad_t + ph}" stroke="black"/>',
           f'<line x1="{pad_l}" y1="{pad_t}" x2="{pad_l}" y2="{pad_t + ph}" stroke="black"/>',
           f'<text x="{pad_l + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{escape(xlabel)}</text>',
           f'<text x="16" y="{pad_t + ph / 2:.1f}" text-anchor="middle" '
           f'transform="rotate(-90 16 {pad_t + ph / 2:.1f})">{escape(ylabel)}</text>']
    for i in range(5):
        yv = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{pad_l - 6}" y="{py(yv) + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
        out.append(f'<line x1="{pad_l - 3}" y1="{py(yv):.1f}" x2="{pad_l}" y2="{py(yv):.1f}" stroke="black"/>')
    ticks = sorted({x for s in series.values() for x in s[0]})
    if len(ticks) > 10:
        ticks = ticks[:: math.ceil(len(ticks) / 10)]
    for xv in ticks:
        out.append(f'<text x="{px(xv):.1f}" y="{pad_t + ph + 16}" text-anchor="middle">{xv:g}</text>')
    for j, (label, (sx, sm, se)) in enumerate(series.items()):
        color = PALETTE[j % len(PALETTE)]
        pts = " ".join(f"{px(x):.1f},{py(m):.1f}" for x, m in zip(sx, sm))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, m, e in zip(sx, sm, se):
            out.append(f'<line x1="{px(x):.1f}" y1="{py(m - e):.1f}" x2="{px(x):.1f}" y2="{py(m + e):.1f}" '
                       f'stroke="{color}"/>')
            out.append(f'<circle cx="{px(x):.1f}" cy="{py(m):.1f}" r="2.5" fill="{color}"/>')
        ly = pad_t + 10 + 18 * j
        out.append(f'<line x1="{pad_l + pw + 12}" y1="{ly}" x2="{pad_l + pw + 32}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{pad_l + pw + 38}" y="{ly + 4}">{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
