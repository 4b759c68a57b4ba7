"""Nash-equilibrium irrigation strategies over a shared, declining aquifer.

Farms sharing a groundwater resource choose yearly crop splits to maximize
their own profit; because water flows between farms, equilibrium behavior
over-depletes the aquifer.  This package computes those equilibria by
Nikaido-Isoda relaxation, simulates the coupled aquifer/economy forward,
and evaluates climate, socio-economic, and pumping-cap scenarios.
"""

from .agronomy import (
    CropCoefficients,
    CropResponse,
    SurrogateModel,
    WeatherYear,
    estimate_evaporation,
    evaluate_surrogate,
    fit_surrogate,
    fit_surrogate_model,
    load_surrogate_csv,
    save_surrogate_csv,
)
from .config import (
    ConfigError,
    RunConfig,
    default_config_path,
    load_config,
    save_config,
    small_game_config_path,
)
from .econ import (
    CostParams,
    EnergyParams,
    MarketParams,
    crop_price,
    fit_exponential_trend,
    gas_price,
    production_cost_rate,
    pumping_unit_cost,
)
from .game import (
    EquilibriumReport,
    RelaxationConfig,
    best_response,
    lema_limits,
    nikaido_isoda,
    optimum_response,
    project_to_feasible,
    relax_to_equilibrium,
    verify_equilibrium,
)
from .hydro import (
    AquiferState,
    FlowNetwork,
    HydroParams,
    net_exchange,
    net_replenishment,
    step_heads,
)
from .io_files import load_weather_csv, write_results
from .plots import render_plots
from .scenarios import (
    ModelParams,
    ScenarioSpec,
    apply_scenario,
    builtin_scenarios,
    scenario_by_name,
)
from .sim import (
    JointStrategy,
    LemaConstraint,
    ScenarioInputs,
    SimulationResult,
    depletion,
    harvest_quantity,
    pumped_window,
    run_simulation,
)

__version__ = "0.1.0"
