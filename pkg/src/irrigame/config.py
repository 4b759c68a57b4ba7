"""Run configuration: strict JSON loading, unit conversion, defaults.

Configuration files carry the full model calibration.  Conventional units
(acres, mm, $/acre) are accepted and converted to SI exactly once at load;
`save_config` always emits the SI spelling, so a saved-and-reloaded config
is equal to the original with no repeated conversion.  Unknown keys are
rejected with the offending field named.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .econ import CostParams, EnergyParams, MarketParams
from .game import RelaxationConfig
from .hydro import AquiferState, FlowNetwork, HydroParams
from .scenarios import ModelParams, ScenarioSpec, scenario_by_name
from .units import ACRE_M2, MM_PER_M


class ConfigError(ValueError):
    """A configuration file failed validation; the message names the field."""


def builtin_data_path(name: str) -> Path:
    """Path of a data file shipped inside the package."""
    p = resources.files("irrigame.data") / name
    return Path(str(p))


def default_config_path() -> Path:
    return builtin_data_path("baseline_config.json")


def small_game_config_path() -> Path:
    return builtin_data_path("small_game_config.json")


class _Section:
    """A guarded view of one JSON object: typed takes, unknown keys rejected."""

    def __init__(self, data: dict, path: str):
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected an object")
        self._data = dict(data)
        self._path = path

    def child(self, key: str) -> "_Section":
        return _Section(self._take_raw(key), f"{self._path}.{key}")

    def _take_raw(self, key: str):
        if key not in self._data:
            raise ConfigError(f"{self._path}.{key}: missing required field")
        return self._data.pop(key)

    def take_number(self, key: str, default=None, allow_null_as=None) -> float:
        if key not in self._data and default is not None:
            return float(default)
        v = self._take_raw(key)
        if v is None and allow_null_as is not None:
            return float(allow_null_as)
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ConfigError(f"{self._path}.{key}: expected a number, got {v!r}")
        return float(v)

    def take_int(self, key: str, default=None) -> int:
        if key not in self._data and default is not None:
            return int(default)
        v = self._take_raw(key)
        if not isinstance(v, int) or isinstance(v, bool):
            raise ConfigError(f"{self._path}.{key}: expected an integer, got {v!r}")
        return v

    def take_str(self, key: str, default=None) -> str:
        if key not in self._data and default is not None:
            return default
        v = self._take_raw(key)
        if not isinstance(v, str):
            raise ConfigError(f"{self._path}.{key}: expected a string, got {v!r}")
        return v

    def take_number_list(self, key: str) -> list[float]:
        v = self._take_raw(key)
        if not isinstance(v, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
        ):
            raise ConfigError(f"{self._path}.{key}: expected a list of numbers")
        return [float(x) for x in v]

    def take_matrix(self, key: str) -> list[list[float]]:
        v = self._take_raw(key)
        if not isinstance(v, list) or not all(isinstance(r, list) for r in v):
            raise ConfigError(f"{self._path}.{key}: expected a list of rows")
        out = []
        for r in v:
            if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in r):
                raise ConfigError(f"{self._path}.{key}: rows must contain numbers")
            out.append([float(x) for x in r])
        return out

    def take_either_number(self, si_key: str, alt_key: str, convert) -> float:
        """One of two spellings of the same quantity; `convert` maps alt -> SI."""
        has_si, has_alt = si_key in self._data, alt_key in self._data
        if has_si and has_alt:
            raise ConfigError(f"{self._path}: give only one of {si_key!r} / {alt_key!r}")
        if has_si:
            return self.take_number(si_key)
        if has_alt:
            return convert(self.take_number(alt_key))
        raise ConfigError(f"{self._path}: missing {si_key!r} (or {alt_key!r})")

    def take_either_list(self, si_key: str, alt_key: str, convert) -> list[float]:
        has_si, has_alt = si_key in self._data, alt_key in self._data
        if has_si and has_alt:
            raise ConfigError(f"{self._path}: give only one of {si_key!r} / {alt_key!r}")
        if has_si:
            return self.take_number_list(si_key)
        if has_alt:
            return [convert(v) for v in self.take_number_list(alt_key)]
        raise ConfigError(f"{self._path}: missing {si_key!r} (or {alt_key!r})")

    def has(self, key: str) -> bool:
        return key in self._data

    def raw(self, key: str):
        return self._take_raw(key)

    def finish(self) -> None:
        if self._data:
            raise ConfigError(f"{self._path}: unknown keys {sorted(self._data)}")


@dataclass(frozen=True)
class CropMarketConfig:
    price_ceiling_usd_bu: float
    price_floor_usd_bu: float
    supply_scale_bu: float
    trend_tau_years: float   # +inf = flat


@dataclass(frozen=True)
class CropCostConfig:
    cost_ceiling_usd_m2: float
    cost_floor_usd_m2: float
    area_scale_m2: float
    trend_tau_years: float


@dataclass(frozen=True)
class EnergyConfig:
    gas_per_m3_per_m: float
    pump_efficiency: float
    gauge_pressure_psi: float
    gas_price_usd: float
    gas_trend_tau_years: float


@dataclass(frozen=True)
class RelaxationSettings:
    eta: float = 0.1
    epsilon: float = 1e-4
    max_iters: int = 500
    br_grid: float = 1e-3
    br_sweeps: int = 8
    penalty_init: float | None = None
    penalty_growth: float = 10.0

    def to_relaxation_config(self, seed: int) -> RelaxationConfig:
        return RelaxationConfig(
            eta=self.eta,
            epsilon=self.epsilon,
            max_iters=self.max_iters,
            rng_seed=seed,
            br_grid=self.br_grid,
            br_sweeps=self.br_sweeps,
            penalty_init=self.penalty_init,
            penalty_growth=self.penalty_growth,
        )


@dataclass(frozen=True)
class RunConfig:
    """A fully resolved run configuration, SI units throughout."""

    name: str
    horizon_years: int
    seed: int
    discount: float
    crops: tuple[str, ...]
    areas_m2: tuple[float, ...]
    surface_elevation_m: tuple[float, ...]
    initial_heads_m: tuple[float, ...]
    boundary_head_m: float
    boundary_drawdown_m: float
    flow_coefficients: tuple[tuple[float, ...], ...]
    market: tuple[CropMarketConfig, ...]
    production_costs: tuple[CropCostConfig, ...]
    energy: EnergyConfig
    weather_csv: str
    surrogate_csv: str
    scenario: ScenarioSpec
    relaxation: RelaxationSettings

    @property
    def n_agents(self) -> int:
        return len(self.areas_m2)

    def to_model_params(self, surrogate) -> ModelParams:
        """Build the typed parameter objects (validating every invariant)."""
        initial = AquiferState(
            heads=np.array(self.initial_heads_m), boundary_head=self.boundary_head_m, year=1
        )
        hydro = HydroParams(gamma=self.boundary_drawdown_m, initial_state=initial)
        network = FlowNetwork(np.array(self.flow_coefficients))
        market = MarketParams(
            crops=self.crops,
            price_ceiling=[m.price_ceiling_usd_bu for m in self.market],
            price_floor=[m.price_floor_usd_bu for m in self.market],
            supply_scale=[m.supply_scale_bu for m in self.market],
            trend_tau=[m.trend_tau_years for m in self.market],
        )
        costs = CostParams(
            crops=self.crops,
            cost_ceiling=[c.cost_ceiling_usd_m2 for c in self.production_costs],
            cost_floor=[c.cost_floor_usd_m2 for c in self.production_costs],
            area_scale=[c.area_scale_m2 for c in self.production_costs],
            trend_tau=[c.trend_tau_years for c in self.production_costs],
        )
        energy = EnergyParams(
            gas_per_lift=self.energy.gas_per_m3_per_m,
            pump_efficiency=self.energy.pump_efficiency,
            gauge_pressure_psi=self.energy.gauge_pressure_psi,
            gas_price_init=self.energy.gas_price_usd,
            gas_trend_tau=self.energy.gas_trend_tau_years,
            surface_elevation=np.array(self.surface_elevation_m),
        )
        return ModelParams(
            crops=self.crops,
            areas_m2=np.array(self.areas_m2),
            hydro=hydro,
            network=network,
            market=market,
            costs=costs,
            energy=energy,
            surrogate=surrogate,
            discount=self.discount,
        )


def _resolve_data_path(value: str, base_dir: Path) -> str:
    if value.startswith("builtin:"):
        return str(builtin_data_path(value[len("builtin:"):]))
    p = Path(value)
    return str(p if p.is_absolute() else base_dir / p)


def _tau_or_flat(sec: _Section, key: str) -> float:
    v = sec.take_number(key, allow_null_as=math.inf)
    if v == 0.0:
        raise ConfigError(f"trend time constant {key} must be nonzero (null means flat)")
    return v


def _parse_crop_market(sec: _Section) -> CropMarketConfig:
    out = CropMarketConfig(
        price_ceiling_usd_bu=sec.take_number("price_ceiling_usd_per_bu"),
        price_floor_usd_bu=sec.take_number("price_floor_usd_per_bu"),
        supply_scale_bu=sec.take_number("supply_scale_bu", allow_null_as=math.inf),
        trend_tau_years=_tau_or_flat(sec, "trend_tau_years"),
    )
    sec.finish()
    return out


def _parse_crop_cost(sec: _Section) -> CropCostConfig:
    ceiling = sec.take_either_number(
        "cost_ceiling_usd_per_m2", "cost_ceiling_usd_per_acre", lambda v: v / ACRE_M2
    )
    floor = sec.take_either_number(
        "cost_floor_usd_per_m2", "cost_floor_usd_per_acre", lambda v: v / ACRE_M2
    )
    scale = sec.take_either_number(
        "area_scale_m2", "area_scale_acres", lambda v: v * ACRE_M2
    )
    out = CropCostConfig(
        cost_ceiling_usd_m2=ceiling,
        cost_floor_usd_m2=floor,
        area_scale_m2=scale,
        trend_tau_years=_tau_or_flat(sec, "trend_tau_years"),
    )
    sec.finish()
    return out


def load_config(path) -> RunConfig:
    """Load and fully validate a JSON run configuration."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return _parse_config(raw, path.parent)


def config_from_dict(raw: dict) -> RunConfig:
    """Rebuild a RunConfig from its canonical dict form (paths kept verbatim)."""
    return _parse_config(json.loads(json.dumps(raw)), Path("."))


def _parse_config(raw: dict, base_dir: Path) -> RunConfig:
    root = _Section(raw, "config")
    name = root.take_str("name", default="run")
    horizon = root.take_int("horizon_years")
    if horizon < 1:
        raise ConfigError("config.horizon_years: must be >= 1")
    seed = root.take_int("seed", default=0)
    discount = root.take_number("discount", default=1.0)

    crops_raw = root.raw("crops")
    if not isinstance(crops_raw, list) or not all(isinstance(c, str) for c in crops_raw):
        raise ConfigError("config.crops: expected a list of crop names")
    if len(set(crops_raw)) != len(crops_raw):
        raise ConfigError("config.crops: crop names must be unique")
    crops = tuple(crops_raw)

    agents = root.child("agents")
    areas = agents.take_either_list("areas_m2", "areas_acres", lambda v: v * ACRE_M2)
    elevation = agents.take_number_list("surface_elevation_m")
    agents.finish()
    n = len(areas)
    if len(elevation) != n:
        raise ConfigError("config.agents.surface_elevation_m: length must match areas")

    hydrology = root.child("hydrology")
    heads = hydrology.take_number_list("initial_heads_m")
    if len(heads) != n:
        raise ConfigError("config.hydrology.initial_heads_m: length must match areas")
    boundary = hydrology.take_number("boundary_head_m")
    drawdown = hydrology.take_either_number(
        "boundary_drawdown_m_per_year", "boundary_drawdown_mm_per_year", lambda v: v / MM_PER_M
    )
    coeffs = hydrology.take_matrix("flow_coefficients")
    hydrology.finish()
    if len(coeffs) != n + 1 or any(len(r) != n + 1 for r in coeffs):
        raise ConfigError(
            f"config.hydrology.flow_coefficients: must be {(n + 1)}x{(n + 1)} "
            "(row/column 0 is the boundary cell)"
        )

    market_sec = root.child("market")
    market = tuple(_parse_crop_market(market_sec.child(c)) for c in crops)
    market_sec.finish()

    cost_sec = root.child("production_costs")
    costs = tuple(_parse_crop_cost(cost_sec.child(c)) for c in crops)
    cost_sec.finish()

    energy_sec = root.child("energy")
    energy = EnergyConfig(
        gas_per_m3_per_m=energy_sec.take_number("gas_per_m3_per_m_lift"),
        pump_efficiency=energy_sec.take_number("pump_efficiency"),
        gauge_pressure_psi=energy_sec.take_number("gauge_pressure_psi"),
        gas_price_usd=energy_sec.take_number("gas_price_usd"),
        gas_trend_tau_years=_tau_or_flat(energy_sec, "gas_trend_tau_years"),
    )
    energy_sec.finish()

    weather_csv = _resolve_data_path(root.take_str("weather_csv"), base_dir)
    surrogate_csv = _resolve_data_path(root.take_str("surrogate_csv"), base_dir)

    scenario_raw = root.raw("scenario")
    if isinstance(scenario_raw, str):
        scenario = scenario_by_name(scenario_raw, horizon)
    elif isinstance(scenario_raw, dict):
        try:
            scenario = ScenarioSpec.from_dict({"horizon": horizon, **scenario_raw})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config.scenario: {exc}") from None
    else:
        raise ConfigError("config.scenario: expected a name or an inline spec object")

    if root.has("relaxation"):
        relax_sec = root.child("relaxation")
        penalty_init = None
        if relax_sec.has("penalty_init"):
            v = relax_sec.raw("penalty_init")
            if v is not None:
                if not isinstance(v, (int, float)) or isinstance(v, bool):
                    raise ConfigError("config.relaxation.penalty_init: expected a number or null")
                penalty_init = float(v)
        relaxation = RelaxationSettings(
            eta=relax_sec.take_number("eta", default=0.1),
            epsilon=relax_sec.take_number("epsilon", default=1e-4),
            max_iters=relax_sec.take_int("max_iters", default=500),
            br_grid=relax_sec.take_number("br_grid", default=1e-3),
            br_sweeps=relax_sec.take_int("br_sweeps", default=8),
            penalty_init=penalty_init,
            penalty_growth=relax_sec.take_number("penalty_growth", default=10.0),
        )
        relax_sec.finish()
    else:
        relaxation = RelaxationSettings()
    root.finish()

    cfg = RunConfig(
        name=name,
        horizon_years=horizon,
        seed=seed,
        discount=discount,
        crops=crops,
        areas_m2=tuple(areas),
        surface_elevation_m=tuple(elevation),
        initial_heads_m=tuple(heads),
        boundary_head_m=boundary,
        boundary_drawdown_m=drawdown,
        flow_coefficients=tuple(tuple(r) for r in coeffs),
        market=market,
        production_costs=costs,
        energy=energy,
        weather_csv=weather_csv,
        surrogate_csv=surrogate_csv,
        scenario=scenario,
        relaxation=relaxation,
    )
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    """Build every typed parameter object once so each invariant is checked."""
    from .agronomy import CropCoefficients, SurrogateModel, N_FEATURES, N_TERMS, CHANNELS

    dummy = SurrogateModel(
        crops=cfg.crops,
        by_crop={
            c: CropCoefficients(
                coeffs=np.zeros((len(CHANNELS), N_TERMS)),
                feature_min=np.full(N_FEATURES, -np.inf),
                feature_max=np.full(N_FEATURES, np.inf),
                rmse=np.zeros(len(CHANNELS)),
            )
            for c in cfg.crops
        },
    )
    try:
        cfg.to_model_params(dummy)
        cfg.relaxation.to_relaxation_config(cfg.seed)
        if not 0.0 < cfg.discount <= 1.0:
            raise ValueError("discount must be in (0, 1]")
    except ValueError as exc:
        raise ConfigError(f"config: {exc}") from None


def config_to_dict(cfg: RunConfig) -> dict:
    """The canonical SI-unit JSON form of a config (used by save and reports)."""
    return {
        "name": cfg.name,
        "horizon_years": cfg.horizon_years,
        "seed": cfg.seed,
        "discount": cfg.discount,
        "crops": list(cfg.crops),
        "agents": {
            "areas_m2": list(cfg.areas_m2),
            "surface_elevation_m": list(cfg.surface_elevation_m),
        },
        "hydrology": {
            "initial_heads_m": list(cfg.initial_heads_m),
            "boundary_head_m": cfg.boundary_head_m,
            "boundary_drawdown_m_per_year": cfg.boundary_drawdown_m,
            "flow_coefficients": [list(r) for r in cfg.flow_coefficients],
        },
        "market": {
            c: {
                "price_ceiling_usd_per_bu": m.price_ceiling_usd_bu,
                "price_floor_usd_per_bu": m.price_floor_usd_bu,
                "supply_scale_bu": None if math.isinf(m.supply_scale_bu) else m.supply_scale_bu,
                "trend_tau_years": None if math.isinf(m.trend_tau_years) else m.trend_tau_years,
            }
            for c, m in zip(cfg.crops, cfg.market)
        },
        "production_costs": {
            c: {
                "cost_ceiling_usd_per_m2": p.cost_ceiling_usd_m2,
                "cost_floor_usd_per_m2": p.cost_floor_usd_m2,
                "area_scale_m2": None if math.isinf(p.area_scale_m2) else p.area_scale_m2,
                "trend_tau_years": None if math.isinf(p.trend_tau_years) else p.trend_tau_years,
            }
            for c, p in zip(cfg.crops, cfg.production_costs)
        },
        "energy": {
            "gas_per_m3_per_m_lift": cfg.energy.gas_per_m3_per_m,
            "pump_efficiency": cfg.energy.pump_efficiency,
            "gauge_pressure_psi": cfg.energy.gauge_pressure_psi,
            "gas_price_usd": cfg.energy.gas_price_usd,
            "gas_trend_tau_years": (
                None if math.isinf(cfg.energy.gas_trend_tau_years) else cfg.energy.gas_trend_tau_years
            ),
        },
        "weather_csv": cfg.weather_csv,
        "surrogate_csv": cfg.surrogate_csv,
        "scenario": cfg.scenario.to_dict(),
        "relaxation": {
            "eta": cfg.relaxation.eta,
            "epsilon": cfg.relaxation.epsilon,
            "max_iters": cfg.relaxation.max_iters,
            "br_grid": cfg.relaxation.br_grid,
            "br_sweeps": cfg.relaxation.br_sweeps,
            "penalty_init": cfg.relaxation.penalty_init,
            "penalty_growth": cfg.relaxation.penalty_growth,
        },
    }


def save_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n")
