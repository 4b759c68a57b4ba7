import math

import numpy as np
import pytest

from irrigame.agronomy import CropResponse, load_surrogate_csv
from irrigame.config import load_config, default_config_path, small_game_config_path
from irrigame.econ import CostParams, EnergyParams, MarketParams
from irrigame.hydro import AquiferState, FlowNetwork, HydroParams
from irrigame.io_files import load_weather_csv
from irrigame.scenarios import apply_scenario
from irrigame.sim import ScenarioInputs


def make_inputs(
    n_agents=2,
    crops=("corn", "sorghum"),
    horizon=1,
    areas=None,
    heads=None,
    boundary_head=118.8,
    gamma=0.3048,
    coeffs=None,
    responses_row=None,
    price_ceiling=None,
    price_floor=None,
    supply_scale=None,
    cost_ceiling=None,
    cost_floor=None,
    area_scale=None,
    gas_per_lift=1e-5,
    pump_efficiency=0.5,
    gauge_pressure_psi=0.0,
    gas_price=2.0,
    surface_elevation=None,
    replenishment=0.0,
    discount=1.0,
) -> ScenarioInputs:
    """Small hand-specified inputs for unit tests; flat trends throughout."""
    k = len(crops)
    areas = np.array(areas if areas is not None else [1e6] * n_agents, dtype=float)
    heads = np.array(heads if heads is not None else [120.0] * n_agents, dtype=float)
    if coeffs is None:
        coeffs = np.zeros((n_agents + 1, n_agents + 1))
    state = AquiferState(heads=heads, boundary_head=boundary_head, year=1)
    if responses_row is None:
        responses_row = tuple(
            CropResponse(300.0, 200.0, 400.0, 250.0, 150.0) for _ in range(k)
        )
    responses = tuple(tuple(responses_row) for _ in range(horizon))
    market = MarketParams(
        crops=crops,
        price_ceiling=price_ceiling if price_ceiling is not None else [4.0] * k,
        price_floor=price_floor if price_floor is not None else [4.0] * k,
        supply_scale=supply_scale if supply_scale is not None else [math.inf] * k,
        trend_tau=[math.inf] * k,
    )
    costs = CostParams(
        crops=crops,
        cost_ceiling=cost_ceiling if cost_ceiling is not None else [0.1] * k,
        cost_floor=cost_floor if cost_floor is not None else [0.1] * k,
        area_scale=area_scale if area_scale is not None else [math.inf] * k,
        trend_tau=[math.inf] * k,
    )
    energy = EnergyParams(
        gas_per_lift=gas_per_lift,
        pump_efficiency=pump_efficiency,
        gauge_pressure_psi=gauge_pressure_psi,
        gas_price_init=gas_price,
        gas_trend_tau=math.inf,
        surface_elevation=np.array(
            surface_elevation if surface_elevation is not None else [170.0] * n_agents
        ),
    )
    repl = np.full(horizon, replenishment, dtype=float)
    return ScenarioInputs(
        horizon=horizon,
        crops=crops,
        areas_m2=areas,
        hydro=HydroParams(gamma=gamma, initial_state=state),
        network=FlowNetwork(np.asarray(coeffs, dtype=float)),
        responses=responses,
        market=market,
        costs=costs,
        energy=energy,
        replenishment_m=repl,
        discount=discount,
    )


@pytest.fixture(scope="session")
def baseline_bundle():
    """The shipped baseline: config, weather, surrogate, resolved inputs."""
    cfg = load_config(default_config_path())
    weather = load_weather_csv(cfg.weather_csv)
    surrogate = load_surrogate_csv(cfg.surrogate_csv)
    params = cfg.to_model_params(surrogate)
    inputs = apply_scenario(weather, params, cfg.scenario)
    return cfg, weather, surrogate, inputs


@pytest.fixture(scope="session")
def small_game_bundle():
    """The shipped two-agent, one-year fixture."""
    cfg = load_config(small_game_config_path())
    weather = load_weather_csv(cfg.weather_csv)
    surrogate = load_surrogate_csv(cfg.surrogate_csv)
    params = cfg.to_model_params(surrogate)
    inputs = apply_scenario(weather, params, cfg.scenario)
    return cfg, weather, surrogate, inputs
