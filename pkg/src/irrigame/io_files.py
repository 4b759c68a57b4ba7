"""CSV/JSON ingestion and result export.

All emitted files are deterministic: floats are written with 17 significant
digits, rows in fixed order, so identical runs produce byte-identical
output.  Agent and crop indices in CSV files are 1-based (human-facing);
in-memory arrays are 0-based.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .agronomy import CHANNELS, CropResponse, WeatherYear
from .game import EquilibriumReport
from .sim import JointStrategy, SimulationResult

WEATHER_HEADER = [
    "year",
    "precip_annual_mm",
    "precip_summer_mm",
    "precip_winter_mm",
    "solar_summer",
    "solar_winter",
    "tmax_mean_c",
    "tmin_mean_c",
]

TRAINING_HEADER = ["crop", *WEATHER_HEADER, *CHANNELS]


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def load_weather_csv(path) -> list[WeatherYear]:
    """Load a yearly weather series; strict header, no year gaps."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != WEATHER_HEADER:
            raise ValueError(
                f"{path}: expected header {','.join(WEATHER_HEADER)}, got "
                f"{','.join(header) if header else '<empty file>'}"
            )
        out: list[WeatherYear] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(WEATHER_HEADER):
                raise ValueError(f"{path}: row {lineno}: expected {len(WEATHER_HEADER)} columns")
            try:
                year = int(row[0])
                values = [float(v) for v in row[1:]]
            except ValueError:
                raise ValueError(f"{path}: row {lineno}: non-numeric cell") from None
            try:
                record = WeatherYear(year, *values)
            except ValueError as exc:
                raise ValueError(f"{path}: row {lineno}: {exc}") from None
            if out and year != out[-1].year + 1:
                raise ValueError(
                    f"{path}: row {lineno}: year gap {out[-1].year} -> {year}; "
                    "the series must be consecutive"
                )
            out.append(record)
    if not out:
        raise ValueError(f"{path}: no data rows")
    return out


def save_weather_csv(series: Sequence[WeatherYear], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(WEATHER_HEADER)
        for rec in series:
            w.writerow(
                [
                    rec.year,
                    *(
                        _fmt(getattr(rec, f))
                        for f in (
                            "precip_annual",
                            "precip_summer",
                            "precip_winter",
                            "solar_summer",
                            "solar_winter",
                            "tmax_mean",
                            "tmin_mean",
                        )
                    ),
                ]
            )


def load_training_csv(path) -> dict[str, list[tuple[WeatherYear, CropResponse]]]:
    """Load a surrogate training table, grouped by crop."""
    path = Path(path)
    tables: dict[str, list[tuple[WeatherYear, CropResponse]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRAINING_HEADER:
            raise ValueError(f"{path}: expected header {','.join(TRAINING_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(TRAINING_HEADER):
                raise ValueError(f"{path}: row {lineno}: expected {len(TRAINING_HEADER)} columns")
            crop = row[0]
            try:
                year = int(row[1])
                nums = [float(v) for v in row[2:]]
            except ValueError:
                raise ValueError(f"{path}: row {lineno}: non-numeric cell") from None
            try:
                weather = WeatherYear(year, *nums[:7])
                response = CropResponse(*nums[7:])
            except ValueError as exc:
                raise ValueError(f"{path}: row {lineno}: {exc}") from None
            tables.setdefault(crop, []).append((weather, response))
    if not tables:
        raise ValueError(f"{path}: no data rows")
    return tables


def load_series_csv(path) -> list[tuple[float, float]]:
    """Load a (year, value) series for trend fitting."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["year", "value"]:
            raise ValueError(f"{path}: expected header year,value")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise ValueError(f"{path}: row {lineno}: expected 2 columns")
            try:
                out.append((float(row[0]), float(row[1])))
            except ValueError:
                raise ValueError(f"{path}: row {lineno}: non-numeric cell") from None
    if len(out) < 2:
        raise ValueError(f"{path}: need at least 2 rows to fit a trend")
    return out


def save_strategies_csv(strategy: JointStrategy, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["agent", "crop", "year", "share"])
        n, k, t_max = strategy.shares.shape
        for i in range(n):
            for c in range(k):
                for t in range(t_max):
                    w.writerow([i + 1, c + 1, t + 1, _fmt(strategy.shares[i, c, t])])


def load_strategies_csv(path) -> JointStrategy:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["agent", "crop", "year", "share"]:
            raise ValueError(f"{path}: expected header agent,crop,year,share")
        entries = []
        for lineno, row in enumerate(reader, start=2):
            try:
                entries.append((int(row[0]), int(row[1]), int(row[2]), float(row[3])))
            except (ValueError, IndexError):
                raise ValueError(f"{path}: row {lineno}: malformed row") from None
    if not entries:
        raise ValueError(f"{path}: no data rows")
    n = max(e[0] for e in entries)
    k = max(e[1] for e in entries)
    t_max = max(e[2] for e in entries)
    shares = np.full((n, k, t_max), np.nan)
    for i, c, t, v in entries:
        shares[i - 1, c - 1, t - 1] = v
    if np.any(np.isnan(shares)):
        raise ValueError(f"{path}: missing entries; need a full agent x crop x year grid")
    return JointStrategy(shares)


def write_results(
    result: SimulationResult,
    report: EquilibriumReport | None,
    outdir,
    certification: EquilibriumReport | None = None,
    extra: dict | None = None,
) -> list[Path]:
    """Emit strategies.csv, panel.csv, heads.csv, and report.json into a directory."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []

    strategies = outdir / "strategies.csv"
    save_strategies_csv(result.strategy, strategies)
    paths.append(strategies)

    panel = outdir / "panel.csv"
    with open(panel, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            [
                "agent",
                "year",
                "revenue_usd",
                "extraction_cost_usd",
                "production_cost_usd",
                "net_gain_usd",
                "pumped_m3",
            ]
        )
        for i in range(result.n_agents):
            for t in range(result.horizon):
                w.writerow(
                    [
                        i + 1,
                        t + 1,
                        _fmt(result.revenue[i, t]),
                        _fmt(result.extraction_cost[i, t]),
                        _fmt(result.production_cost[i, t]),
                        _fmt(result.net_gain[i, t]),
                        _fmt(result.pumped_m3[i, t]),
                    ]
                )
    paths.append(panel)

    heads = outdir / "heads.csv"
    with open(heads, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["year", "boundary_head_m"]
            + [f"head_{i + 1}_m" for i in range(result.n_agents)]
        )
        for state in result.head_states:
            w.writerow([state.year, _fmt(state.boundary_head)] + [_fmt(h) for h in state.heads])
    paths.append(heads)

    payload = {
        "run": extra or {},
        "solver": report.to_dict() if report is not None else None,
        "certification": certification.to_dict() if certification is not None else None,
        "utilities": [float(u) for u in result.utilities],
        "totals": {
            "revenue_usd": float(result.revenue.sum()),
            "extraction_cost_usd": float(result.extraction_cost.sum()),
            "production_cost_usd": float(result.production_cost.sum()),
            "net_gain_usd": float(result.net_gain.sum()),
            "pumped_m3": float(result.pumped_m3.sum()),
        },
    }
    report_path = outdir / "report.json"
    report_path.write_text(json.dumps(payload, indent=2) + "\n")
    paths.append(report_path)
    return paths


def weather_to_rows(series: Sequence[WeatherYear]) -> list[list]:
    return [
        [
            rec.year,
            rec.precip_annual,
            rec.precip_summer,
            rec.precip_winter,
            rec.solar_summer,
            rec.solar_winter,
            rec.tmax_mean,
            rec.tmin_mean,
        ]
        for rec in series
    ]


def weather_from_rows(rows: Sequence[Sequence]) -> list[WeatherYear]:
    return [WeatherYear(int(r[0]), *[float(v) for v in r[1:]]) for r in rows]
