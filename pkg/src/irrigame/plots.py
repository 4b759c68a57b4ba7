"""Standalone SVG charts, no rendering dependency.

Charts are assembled as plain SVG text with fixed formatting so identical
inputs produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from .sim import SimulationResult

_W, _H = 860, 520
_ML, _MR, _MT, _MB = 70, 190, 42, 52
_PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10 ** np.floor(np.log10(span / max(n, 1)))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if span / (step * mult) <= n:
            step = step * mult
            break
    first = np.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-12 * span:
        ticks.append(float(v))
        v += step
    return ticks or [lo, hi]


class _Chart:
    """One cartesian panel with a right-hand legend."""

    def __init__(self, title: str, xlabel: str, ylabel: str):
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.series: list[tuple[str, np.ndarray, np.ndarray, str, bool]] = []

    def add(self, label: str, xs, ys, dashed: bool = False) -> None:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        color = _PALETTE[len(self.series) % len(_PALETTE)]
        self.series.append((label, xs, ys, color, dashed))

    def render(self, scatter: bool = False, x_ticks: Sequence[float] | None = None) -> str:
        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}">',
            f'<rect width="{_W}" height="{_H}" fill="white"/>',
            f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16">{self.title}</text>',
        ]
        plot_w = _W - _ML - _MR
        plot_h = _H - _MT - _MB
        if not self.series or all(len(xs) == 0 for _, xs, _, _, _ in self.series):
            parts.append(
                f'<text x="{_W / 2:.1f}" y="{_H / 2:.1f}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="14" fill="#888">no data</text></svg>'
            )
            return "\n".join(parts)

        all_x = np.concatenate([xs for _, xs, _, _, _ in self.series if len(xs)])
        all_y = np.concatenate([ys for _, _, ys, _, _ in self.series if len(ys)])
        x_lo, x_hi = float(all_x.min()), float(all_x.max())
        y_lo, y_hi = float(all_y.min()), float(all_y.max())
        if x_hi == x_lo:
            x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
        if y_hi == y_lo:
            y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
        pad = 0.04 * (y_hi - y_lo)
        y_lo, y_hi = y_lo - pad, y_hi + pad

        def sx(v: float) -> float:
            return _ML + (v - x_lo) / (x_hi - x_lo) * plot_w

        def sy(v: float) -> float:
            return _MT + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h

        parts.append(
            f'<rect x="{_ML}" y="{_MT}" width="{plot_w}" height="{plot_h}" '
            'fill="none" stroke="#333" stroke-width="1"/>'
        )
        xt = list(x_ticks) if x_ticks is not None else _nice_ticks(x_lo, x_hi, 8)
        for v in xt:
            if not x_lo - 1e-12 <= v <= x_hi + 1e-12:
                continue
            parts.append(
                f'<line x1="{sx(v):.2f}" y1="{_MT + plot_h}" x2="{sx(v):.2f}" '
                f'y2="{_MT + plot_h + 5}" stroke="#333"/>'
            )
            parts.append(
                f'<text x="{sx(v):.2f}" y="{_MT + plot_h + 20}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="11">{v:g}</text>'
            )
        for v in _nice_ticks(y_lo, y_hi, 6):
            parts.append(
                f'<line x1="{_ML - 5}" y1="{sy(v):.2f}" x2="{_ML}" y2="{sy(v):.2f}" stroke="#333"/>'
            )
            parts.append(
                f'<text x="{_ML - 9}" y="{sy(v):.2f}" text-anchor="end" dominant-baseline="middle" '
                f'font-family="sans-serif" font-size="11">{v:g}</text>'
            )
        parts.append(
            f'<text x="{_ML + plot_w / 2:.1f}" y="{_H - 14}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{self.xlabel}</text>'
        )
        parts.append(
            f'<text x="20" y="{_MT + plot_h / 2:.1f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13" '
            f'transform="rotate(-90 20 {_MT + plot_h / 2:.1f})">{self.ylabel}</text>'
        )

        for idx, (label, xs, ys, color, dashed) in enumerate(self.series):
            if scatter:
                for x, y in zip(xs, ys):
                    parts.append(
                        f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3.5" '
                        f'fill="{color}" fill-opacity="0.75"/>'
                    )
            else:
                pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
                dash = ' stroke-dasharray="6 4"' if dashed else ""
                parts.append(
                    f'<polyline points="{pts}" fill="none" stroke="{color}" '
                    f'stroke-width="1.8"{dash}/>'
                )
            ly = _MT + 14 + 18 * idx
            lx = _W - _MR + 14
            if scatter:
                parts.append(f'<circle cx="{lx + 9}" cy="{ly - 4}" r="3.5" fill="{color}"/>')
            else:
                dash = ' stroke-dasharray="6 4"' if dashed else ""
                parts.append(
                    f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 18}" y2="{ly - 4}" '
                    f'stroke="{color}" stroke-width="1.8"{dash}/>'
                )
            parts.append(
                f'<text x="{lx + 24}" y="{ly}" font-family="sans-serif" font-size="11">{label}</text>'
            )
        parts.append("</svg>")
        return "\n".join(parts)


def render_plots(
    result: SimulationResult,
    report,
    outdir,
    lema_summary: Sequence[tuple[float, float]] | None = None,
) -> list[Path]:
    """Emit the standard chart set; optionally a cap-fraction sweep chart.

    lema_summary is a list of (fraction, aggregate utility) pairs.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    n, t_max = result.n_agents, result.horizon
    years = np.arange(1, t_max + 1)
    paths = []

    chart = _Chart("Summer crop shares at equilibrium", "year", "share of land")
    for i in range(n):
        chart.add(f"agent {i + 1} corn", years, result.strategy.shares[i, 0, :])
    if result.strategy.n_crops >= 3:
        for i in range(n):
            chart.add(f"agent {i + 1} wheat", years, result.strategy.shares[i, 2, :], dashed=True)
    p = outdir / "strategies-vs-year.svg"
    p.write_text(chart.render(x_ticks=years.tolist() if t_max <= 25 else None))
    paths.append(p)

    chart = _Chart("Yearly net gain by agent", "year", "net gain ($)")
    for i in range(n):
        chart.add(f"agent {i + 1}", years, result.net_gain[i])
    p = outdir / "utilities-vs-year.svg"
    p.write_text(chart.render())
    paths.append(p)

    heads = result.heads_matrix()
    head_years = np.array([s.year for s in result.head_states])
    chart = _Chart("Groundwater heads", "year", "head (m)")
    chart.add("boundary", head_years, heads[:, 0], dashed=True)
    for i in range(n):
        chart.add(f"agent {i + 1}", head_years, heads[:, i + 1])
    p = outdir / "heads-vs-year.svg"
    p.write_text(chart.render())
    paths.append(p)

    chart = _Chart("Water pumped vs yearly net gain", "net gain ($)", "pumped (m^3)")
    for i in range(n):
        chart.add(f"agent {i + 1}", result.net_gain[i], result.pumped_m3[i])
    p = outdir / "pumped-vs-utility.svg"
    p.write_text(chart.render(scatter=True))
    paths.append(p)

    if lema_summary is not None:
        fractions = [f for f, _ in lema_summary]
        totals = [u for _, u in lema_summary]
        chart = _Chart("Aggregate utility vs pumping-cap fraction", "cap fraction", "total utility ($)")
        chart.add("all agents", fractions, totals)
        p = outdir / "utility-vs-lema-fraction.svg"
        p.write_text(chart.render(x_ticks=sorted(fractions)))
        paths.append(p)
    return paths
