"""Named what-if scenarios resolving base inputs into simulation-ready form.

A scenario transforms the weather features (per-season precipitation and
solar multipliers), picks flat or trended modes for prices, production
costs, and gas, optionally decays the irrigation requirement year over year
(water-efficiency improvements), and may carry pumping-cap fractions.
Applying a scenario re-evaluates the crop surrogate on the transformed
weather and derives each year's net replenishment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .agronomy import (
    CropResponse,
    SurrogateModel,
    WeatherYear,
    estimate_evaporation,
    evaluate_surrogate,
    scale_irrigation,
)
from .econ import CostParams, EnergyParams, MarketParams
from .hydro import FlowNetwork, HydroParams, net_replenishment
from .sim import ScenarioInputs
from .units import mm_to_m

# Trend applied by the population-growth scenario when no fitted time
# constant is available: +2% per year, tau = 1/ln(1.02).
DEFAULT_TREND_TAU = 1.0 / math.log(1.02)

_MODES = ("flat", "trended")


@dataclass(frozen=True)
class ScenarioSpec:
    """A declarative scenario: weather multipliers, trend modes, caps."""

    name: str
    precip_summer_mult: float = 1.0
    precip_winter_mult: float = 1.0
    solar_summer_mult: float = 1.0
    solar_winter_mult: float = 1.0
    price_mode: str = "flat"
    gas_mode: str = "flat"
    cost_mode: str = "flat"
    ir_efficiency_rate: float = 0.0     # yearly fractional decrease of irrigation need
    lema_fractions: tuple[float, ...] = ()
    horizon: int = 20

    def __post_init__(self):
        for f in ("precip_summer_mult", "precip_winter_mult", "solar_summer_mult", "solar_winter_mult"):
            if not getattr(self, f) > 0.0:
                raise ValueError(f"{f} must be > 0")
        for f in ("price_mode", "gas_mode", "cost_mode"):
            if getattr(self, f) not in _MODES:
                raise ValueError(f"{f} must be one of {_MODES}, got {getattr(self, f)!r}")
        if not 0.0 <= self.ir_efficiency_rate < 1.0:
            raise ValueError("ir_efficiency_rate must be in [0, 1)")
        fr = tuple(float(f) for f in self.lema_fractions)
        if any(not 0.0 < f <= 1.0 for f in fr):
            raise ValueError("lema fractions must lie in (0, 1]")
        object.__setattr__(self, "lema_fractions", fr)
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "precip_summer_mult": self.precip_summer_mult,
            "precip_winter_mult": self.precip_winter_mult,
            "solar_summer_mult": self.solar_summer_mult,
            "solar_winter_mult": self.solar_winter_mult,
            "price_mode": self.price_mode,
            "gas_mode": self.gas_mode,
            "cost_mode": self.cost_mode,
            "ir_efficiency_rate": self.ir_efficiency_rate,
            "lema_fractions": list(self.lema_fractions),
            "horizon": self.horizon,
        }

    @staticmethod
    def from_dict(d: dict) -> "ScenarioSpec":
        allowed = {
            "name", "precip_summer_mult", "precip_winter_mult", "solar_summer_mult",
            "solar_winter_mult", "price_mode", "gas_mode", "cost_mode",
            "ir_efficiency_rate", "lema_fractions", "horizon",
        }
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        if "name" not in d:
            raise ValueError("scenario spec needs a name")
        kwargs = dict(d)
        if "lema_fractions" in kwargs:
            kwargs["lema_fractions"] = tuple(kwargs["lema_fractions"])
        return ScenarioSpec(**kwargs)


@dataclass(frozen=True)
class ModelParams:
    """The scenario-independent model calibration."""

    crops: tuple[str, ...]
    areas_m2: np.ndarray
    hydro: HydroParams
    network: FlowNetwork
    market: MarketParams
    costs: CostParams
    energy: EnergyParams
    surrogate: SurrogateModel
    discount: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "crops", tuple(self.crops))
        a = np.array(self.areas_m2, dtype=float, copy=True)
        a.setflags(write=False)
        object.__setattr__(self, "areas_m2", a)
        for crop in self.crops:
            if crop not in self.surrogate.by_crop:
                raise ValueError(f"surrogate model is missing crop {crop!r}")


def transform_weather(weather: WeatherYear, spec: ScenarioSpec) -> WeatherYear:
    """Scale seasonal precipitation/solar and re-derive the annual total.

    The non-seasonal share of annual precipitation is preserved:
    annual' = annual + (summer' - summer) + (winter' - winter).  When the
    two seasons partition the year this reduces to plain scaling.
    """
    ps = weather.precip_summer * spec.precip_summer_mult
    pw = weather.precip_winter * spec.precip_winter_mult
    pa = weather.precip_annual + (ps - weather.precip_summer) + (pw - weather.precip_winter)
    return replace(
        weather,
        precip_annual=pa,
        precip_summer=ps,
        precip_winter=pw,
        solar_summer=weather.solar_summer * spec.solar_summer_mult,
        solar_winter=weather.solar_winter * spec.solar_winter_mult,
    )


def _resolve_market(market: MarketParams, mode: str) -> MarketParams:
    if mode == "flat":
        return replace(market, trend_tau=np.full(market.n_crops, math.inf))
    tau = np.where(np.isfinite(market.trend_tau), market.trend_tau, DEFAULT_TREND_TAU)
    return replace(market, trend_tau=tau)


def _resolve_costs(costs: CostParams, mode: str) -> CostParams:
    if mode == "flat":
        return replace(costs, trend_tau=np.full(costs.n_crops, math.inf))
    tau = np.where(np.isfinite(costs.trend_tau), costs.trend_tau, DEFAULT_TREND_TAU)
    return replace(costs, trend_tau=tau)


def _resolve_energy(energy: EnergyParams, mode: str) -> EnergyParams:
    if mode == "flat":
        return replace(energy, gas_trend_tau=math.inf)
    tau = energy.gas_trend_tau if math.isfinite(energy.gas_trend_tau) else DEFAULT_TREND_TAU
    return replace(energy, gas_trend_tau=tau)


def apply_scenario(
    weather: Sequence[WeatherYear],
    params: ModelParams,
    spec: ScenarioSpec,
) -> ScenarioInputs:
    """Resolve a scenario into fully specified simulation inputs.

    The base weather must cover the scenario horizon; its first `horizon`
    years are used.  Water-efficiency decay multiplies year t's irrigation
    requirement by (1 - rate)^t (t = 1 for the first simulated year).
    """
    t_max = spec.horizon
    if len(weather) < t_max:
        raise ValueError(
            f"weather series covers {len(weather)} years but the scenario needs {t_max}"
        )

    responses: list[tuple[CropResponse, ...]] = []
    replenishment = np.empty(t_max)
    for t in range(t_max):
        year = t + 1
        w = transform_weather(weather[t], spec)
        row = [evaluate_surrogate(params.surrogate, w, crop) for crop in params.crops]
        evap_mm = estimate_evaporation(row, w.precip_annual)
        replenishment[t] = net_replenishment(mm_to_m(w.precip_annual), mm_to_m(evap_mm))
        if spec.ir_efficiency_rate > 0.0:
            factor = (1.0 - spec.ir_efficiency_rate) ** year
            row = [scale_irrigation(r, factor) for r in row]
        responses.append(tuple(row))

    return ScenarioInputs(
        horizon=t_max,
        crops=params.crops,
        areas_m2=params.areas_m2,
        hydro=params.hydro,
        network=params.network,
        responses=tuple(responses),
        market=_resolve_market(params.market, spec.price_mode),
        costs=_resolve_costs(params.costs, spec.cost_mode),
        energy=_resolve_energy(params.energy, spec.gas_mode),
        replenishment_m=replenishment,
        discount=params.discount,
        lema=None,
    )


def builtin_scenarios(horizon: int = 20) -> list[ScenarioSpec]:
    """The shipped scenario library."""
    return [
        ScenarioSpec(name="baseline", horizon=horizon),
        ScenarioSpec(
            name="wet",
            precip_summer_mult=1.20,
            solar_summer_mult=0.95,
            horizon=horizon,
        ),
        ScenarioSpec(
            name="dry",
            precip_summer_mult=0.90,
            precip_winter_mult=0.90,
            solar_summer_mult=1.02,
            solar_winter_mult=1.02,
            horizon=horizon,
        ),
        ScenarioSpec(name="population_growth", price_mode="trended", horizon=horizon),
        ScenarioSpec(name="water_efficiency", ir_efficiency_rate=0.02, horizon=horizon),
        ScenarioSpec(
            name="lema_sweep",
            lema_fractions=(0.95, 0.90, 0.85, 0.80, 0.75, 0.70),
            horizon=horizon,
        ),
    ]


def scenario_by_name(name: str, horizon: int = 20) -> ScenarioSpec:
    for spec in builtin_scenarios(horizon):
        if spec.name == name:
            return spec
    known = [s.name for s in builtin_scenarios(horizon)]
    raise KeyError(f"unknown scenario {name!r}; built-ins are {known}")
