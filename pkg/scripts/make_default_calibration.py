#!/usr/bin/env python3
"""Regenerate the packaged default calibration (weather, surrogate, configs).

All shipped numbers are synthetic: magnitudes are chosen to be plausible
for western-Kansas irrigated agriculture (corn the thirstiest and highest
revenue crop, sorghum the water-saver, wheat the winter crop) and tuned so
the shipped baseline produces a well-behaved equilibrium.  Deterministic:
rerunning this script reproduces the files byte for byte.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from irrigame.agronomy import (  # noqa: E402
    CHANNELS,
    FEATURE_NAMES,
    N_TERMS,
    TERM_NAMES,
    CropCoefficients,
    SurrogateModel,
    save_surrogate_csv,
)
from irrigame.io_files import save_weather_csv  # noqa: E402
from irrigame.agronomy import WeatherYear  # noqa: E402

DATA = Path(__file__).resolve().parents[1] / "src" / "irrigame" / "data"

TERM_INDEX = {t: i for i, t in enumerate(TERM_NAMES)}
CHANNEL_INDEX = {c: i for i, c in enumerate(CHANNELS)}


def make_weather(seed: int = 1995, years: int = 20, start: int = 1995) -> list[WeatherYear]:
    rng = np.random.default_rng(seed)
    # A drought year followed by a wet recovery (the 2002-2003 pattern) is
    # planted explicitly so the series carries one large year-over-year
    # precipitation swing.
    forced = {2002: (232.0, 118.0, 26.8), 2003: (428.0, 188.0, 23.6)}
    out = []
    for i in range(years):
        year = start + i
        ps = float(np.clip(rng.normal(320.0, 55.0), 220.0, 430.0))
        pw = float(np.clip(rng.normal(160.0, 30.0), 100.0, 230.0))
        ss = float(np.clip(rng.normal(25.0, 1.0), 22.5, 27.5))
        if year in forced:
            ps, pw, ss = forced[year]
        out.append(
            WeatherYear(
                year=year,
                precip_annual=ps + pw,   # the two six-month seasons partition the year
                precip_summer=ps,
                precip_winter=pw,
                solar_summer=ss,
                solar_winter=float(np.clip(rng.normal(12.0, 0.7), 10.0, 14.0)),
                tmax_mean=float(np.clip(rng.normal(21.0, 1.0), 18.0, 24.0)),
                tmin_mean=float(np.clip(rng.normal(5.0, 1.0), 2.0, 8.0)),
            )
        )
    return out


def build_crop(terms_by_channel: dict[str, dict[str, float]], weather) -> CropCoefficients:
    coeffs = np.zeros((len(CHANNELS), N_TERMS))
    for channel, terms in terms_by_channel.items():
        for term, value in terms.items():
            coeffs[CHANNEL_INDEX[channel], TERM_INDEX[term]] = value
    feats = np.array([w.features() for w in weather])
    margin = 0.05 * (feats.max(axis=0) - feats.min(axis=0))
    return CropCoefficients(
        coeffs=coeffs,
        feature_min=feats.min(axis=0) - margin,
        feature_max=feats.max(axis=0) + margin,
        rmse=np.zeros(len(CHANNELS)),
    )


def make_surrogate(weather) -> SurrogateModel:
    # Linear-dominant response surfaces with a mild yield-vs-heat curvature;
    # calibrated around the synthetic weather means (ps=320, pw=160, ss=25,
    # sw=12, tmax=21).
    # Corn is the rain-responsive, water-hungry crop: its yield climbs and
    # its irrigation need falls sharply with summer precipitation, so the
    # corn/sorghum margin swings strongly from dry to wet years.
    corn = {
        "transpiration_mm": {"intercept": 220.0, "precip_summer": 0.25, "solar_summer": 6.0},
        "irrigation_mm": {
            "intercept": 251.0, "precip_summer": -0.55, "solar_summer": 8.0, "tmax_mean": 5.0,
        },
        "evapotranspiration_mm": {"intercept": 220.0, "precip_summer": 1.0625, "solar_summer": 6.0},
        "season_precip_mm": {"precip_summer": 1.0},
        # peak yield near 21 C: -0.15 (tmax - 21)^2 expanded below
        "yield_bu_acre": {
            "intercept": 185.0 - 0.60 * 320.0 - 100.0 - 66.15, "precip_summer": 0.60,
            "solar_summer": 4.0, "tmax_mean": 6.3, "tmax_mean*tmax_mean": -0.15,
        },
    }
    sorghum = {
        "transpiration_mm": {"intercept": 110.0, "precip_summer": 0.25, "solar_summer": 4.4},
        "irrigation_mm": {"intercept": 146.0, "precip_summer": -0.30, "solar_summer": 4.0},
        "evapotranspiration_mm": {"intercept": 110.0, "precip_summer": 0.96875, "solar_summer": 4.4},
        "season_precip_mm": {"precip_summer": 1.0},
        # drought-tolerant: yield slightly better in dry summers
        "yield_bu_acre": {"intercept": 105.0 + 0.06 * 320.0 - 50.0, "precip_summer": -0.06,
                          "solar_summer": 2.0},
    }
    wheat = {
        "transpiration_mm": {"intercept": 60.0, "precip_winter": 0.25, "solar_winter": 6.67},
        "irrigation_mm": {"intercept": 118.0, "precip_winter": -0.35, "solar_winter": 4.0},
        "evapotranspiration_mm": {"intercept": 60.0, "precip_winter": 1.14375, "solar_winter": 6.67},
        "season_precip_mm": {"precip_winter": 1.0},
        "yield_bu_acre": {"intercept": 16.0, "precip_winter": 0.05, "solar_winter": 2.0},
    }
    return SurrogateModel(
        crops=("corn", "sorghum", "wheat"),
        by_crop={
            "corn": build_crop(corn, weather),
            "sorghum": build_crop(sorghum, weather),
            "wheat": build_crop(wheat, weather),
        },
    )


def baseline_config() -> dict:
    n = 5
    coeffs = [[0.0] * (n + 1) for _ in range(n + 1)]
    for a, b in [(1, 2), (2, 3), (3, 4), (4, 5)]:
        coeffs[a][b] = coeffs[b][a] = 0.05
    for i in range(1, n + 1):
        coeffs[0][i] = coeffs[i][0] = 0.02
    return {
        "name": "kansas-baseline",
        "horizon_years": 20,
        "seed": 20260801,
        "discount": 1.0,
        "crops": ["corn", "sorghum", "wheat"],
        "agents": {
            "areas_acres": [1200, 1200, 1000, 1000, 900],
            "surface_elevation_m": [170.0, 170.0, 170.0, 170.0, 170.0],
        },
        "hydrology": {
            "initial_heads_m": [125.0, 113.0, 125.0, 113.0, 118.0],
            "boundary_head_m": 118.8,
            "boundary_drawdown_mm_per_year": 304.8,
            "flow_coefficients": coeffs,
        },
        "market": {
            "corn": {
                "price_ceiling_usd_per_bu": 5.60,
                "price_floor_usd_per_bu": 2.60,
                "supply_scale_bu": 600000.0,
                "trend_tau_years": None,
            },
            "sorghum": {
                "price_ceiling_usd_per_bu": 4.60,
                "price_floor_usd_per_bu": 2.60,
                "supply_scale_bu": 450000.0,
                "trend_tau_years": None,
            },
            "wheat": {
                "price_ceiling_usd_per_bu": 6.20,
                "price_floor_usd_per_bu": 3.80,
                "supply_scale_bu": 300000.0,
                "trend_tau_years": None,
            },
        },
        "production_costs": {
            "corn": {
                "cost_ceiling_usd_per_acre": 460.0,
                "cost_floor_usd_per_acre": 430.0,
                "area_scale_acres": 1000.0,
                "trend_tau_years": None,
            },
            "sorghum": {
                "cost_ceiling_usd_per_acre": 285.0,
                "cost_floor_usd_per_acre": 262.0,
                "area_scale_acres": 1000.0,
                "trend_tau_years": None,
            },
            "wheat": {
                "cost_ceiling_usd_per_acre": 145.0,
                "cost_floor_usd_per_acre": 128.0,
                "area_scale_acres": 1000.0,
                "trend_tau_years": None,
            },
        },
        "energy": {
            "gas_per_m3_per_m_lift": 2.75e-05,
            "pump_efficiency": 0.1,
            "gauge_pressure_psi": 30.0,
            "gas_price_usd": 4.0,
            "gas_trend_tau_years": None,
        },
        "weather_csv": "builtin:weather_1995_2014.csv",
        "surrogate_csv": "builtin:surrogate_default.csv",
        "scenario": "baseline",
        "relaxation": {
            "eta": 0.1,
            "epsilon": 1e-4,
            "max_iters": 500,
            "br_grid": 1e-3,
            "br_sweeps": 8,
            "penalty_growth": 10.0,
        },
    }


def make_small_game() -> tuple[list[WeatherYear], SurrogateModel, dict]:
    weather = [
        WeatherYear(
            year=2001, precip_annual=480.0, precip_summer=320.0, precip_winter=160.0,
            solar_summer=25.0, solar_winter=12.0, tmax_mean=21.0, tmin_mean=5.0,
        )
    ]
    corn = {
        "transpiration_mm": {"intercept": 450.0},
        "irrigation_mm": {"intercept": 380.0},
        "evapotranspiration_mm": {"intercept": 710.0},
        "season_precip_mm": {"intercept": 320.0},
        "yield_bu_acre": {"intercept": 185.0},
    }
    sorghum = {
        "transpiration_mm": {"intercept": 300.0},
        "irrigation_mm": {"intercept": 150.0},
        "evapotranspiration_mm": {"intercept": 530.0},
        "season_precip_mm": {"intercept": 320.0},
        "yield_bu_acre": {"intercept": 105.0},
    }
    surrogate = SurrogateModel(
        crops=("corn", "sorghum"),
        by_crop={
            "corn": build_crop(corn, weather),
            "sorghum": build_crop(sorghum, weather),
        },
    )
    # Calibrated for a clean anti-coordination structure: the corn market is
    # small enough that two corn growers crash the price, and agent 2's deep
    # water table makes corn pumping costly, so the equilibrium sits exactly
    # at the (all-corn, all-sorghum) vertex.  The tight epsilon parks the
    # relaxation iterate on that vertex to float precision.
    config = {
        "name": "small-two-agent-game",
        "horizon_years": 1,
        "seed": 424242,
        "discount": 1.0,
        "crops": ["corn", "sorghum"],
        "agents": {
            "areas_acres": [1200, 1000],
            "surface_elevation_m": [170.0, 170.0],
        },
        "hydrology": {
            "initial_heads_m": [125.0, 95.0],
            "boundary_head_m": 118.8,
            "boundary_drawdown_mm_per_year": 304.8,
            "flow_coefficients": [
                [0.0, 0.02, 0.02],
                [0.02, 0.0, 0.05],
                [0.02, 0.05, 0.0],
            ],
        },
        "market": {
            "corn": {
                "price_ceiling_usd_per_bu": 5.60,
                "price_floor_usd_per_bu": 2.60,
                "supply_scale_bu": 300000.0,
                "trend_tau_years": None,
            },
            "sorghum": {
                "price_ceiling_usd_per_bu": 4.60,
                "price_floor_usd_per_bu": 2.60,
                "supply_scale_bu": 450000.0,
                "trend_tau_years": None,
            },
        },
        "production_costs": {
            "corn": {
                "cost_ceiling_usd_per_acre": 560.0,
                "cost_floor_usd_per_acre": 380.0,
                "area_scale_acres": 1000.0,
                "trend_tau_years": None,
            },
            "sorghum": {
                "cost_ceiling_usd_per_acre": 340.0,
                "cost_floor_usd_per_acre": 230.0,
                "area_scale_acres": 1000.0,
                "trend_tau_years": None,
            },
        },
        "energy": {
            "gas_per_m3_per_m_lift": 2.75e-05,
            "pump_efficiency": 0.1,
            "gauge_pressure_psi": 30.0,
            "gas_price_usd": 4.0,
            "gas_trend_tau_years": None,
        },
        "weather_csv": "builtin:weather_small.csv",
        "surrogate_csv": "builtin:surrogate_small.csv",
        "scenario": {"name": "baseline", "horizon": 1},
        "relaxation": {
            "eta": 0.1,
            "epsilon": 1e-7,
            "max_iters": 500,
            "br_grid": 1e-3,
            "br_sweeps": 8,
            "penalty_growth": 10.0,
        },
    }
    return weather, surrogate, config


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)

    weather = make_weather()
    save_weather_csv(weather, DATA / "weather_1995_2014.csv")
    save_surrogate_csv(make_surrogate(weather), DATA / "surrogate_default.csv")
    (DATA / "baseline_config.json").write_text(json.dumps(baseline_config(), indent=2) + "\n")

    small_weather, small_surrogate, small_config = make_small_game()
    save_weather_csv(small_weather, DATA / "weather_small.csv")
    save_surrogate_csv(small_surrogate, DATA / "surrogate_small.csv")
    (DATA / "small_game_config.json").write_text(json.dumps(small_config, indent=2) + "\n")

    for p in sorted(DATA.iterdir()):
        print(f"wrote {p}")


if __name__ == "__main__":
    main()
