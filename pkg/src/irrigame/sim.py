"""Forward multi-year simulation of the irrigation economy.

Given each agent's land-fraction plan and the fully resolved model inputs,
the simulator walks the years in order: harvest quantities and the
supply-dependent market prices clear simultaneously within a year, revenue
and the two cost channels follow, and the aquifer heads are then advanced
by that year's depletion.  Utilities are the (optionally discounted) sums
of yearly revenue minus extraction and production costs.

Conventions: agents are 0-based array indices everywhere in this module;
years are 1-based labels t = 1..T (arrays hold them at index t-1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .agronomy import CropResponse
from .econ import (
    CostParams,
    EnergyParams,
    MarketParams,
    crop_prices,
    gas_price,
    production_cost_rates,
)
from .hydro import AquiferState, FlowNetwork, HydroParams, step_heads
from .units import MM_PER_M

_SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class JointStrategy:
    """Land fractions x[i, k, t] for agent i, crop k, year t (all 0-based indices).

    Every entry lies in [0, 1].  Crops 0 and 1 are the summer pair and must
    fill the land exactly: x[i, 0, t] + x[i, 1, t] = 1 (enforced when there
    are at least two crops).  Any further crops use the same land in the
    off-season and are constrained to [0, 1] only.
    """

    shares: np.ndarray   # (N, K, T)

    def __post_init__(self):
        x = np.array(self.shares, dtype=float, copy=True)
        if x.ndim != 3:
            raise ValueError(f"strategy must be (agents, crops, years), got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("strategy entries must be finite")
        if np.any(x < -_SIMPLEX_TOL) or np.any(x > 1.0 + _SIMPLEX_TOL):
            raise ValueError("strategy entries must lie in [0, 1]")
        if x.shape[1] >= 2:
            pair = x[:, 0, :] + x[:, 1, :]
            if np.any(np.abs(pair - 1.0) > _SIMPLEX_TOL):
                worst = float(np.max(np.abs(pair - 1.0)))
                raise ValueError(
                    f"summer crop shares must sum to 1 per agent-year (off by {worst:.3g})"
                )
        x.setflags(write=False)
        object.__setattr__(self, "shares", x)

    @property
    def n_agents(self) -> int:
        return self.shares.shape[0]

    @property
    def n_crops(self) -> int:
        return self.shares.shape[1]

    @property
    def horizon(self) -> int:
        return self.shares.shape[2]

    def replace_agent(self, agent: int, block: np.ndarray) -> "JointStrategy":
        """A new strategy with agent `agent`'s (K, T) block swapped in."""
        x = np.array(self.shares, copy=True)
        x[agent] = block
        return JointStrategy(x)


def random_strategy(n_agents: int, n_crops: int, horizon: int, rng: np.random.Generator) -> JointStrategy:
    """A uniformly random feasible strategy (summer split uniform, extras uniform)."""
    x = np.empty((n_agents, n_crops, horizon))
    alpha = rng.uniform(0.0, 1.0, size=(n_agents, horizon))
    x[:, 0, :] = alpha
    if n_crops >= 2:
        x[:, 1, :] = 1.0 - alpha
    for k in range(2, n_crops):
        x[:, k, :] = rng.uniform(0.0, 1.0, size=(n_agents, horizon))
    return JointStrategy(x)


@dataclass(frozen=True)
class LemaConstraint:
    """Per-agent pumped-volume caps over consecutive multi-year windows.

    windows holds 1-based year labels; together the windows must be
    disjoint, consecutive, and cover 1..T exactly.  limits_m3[i, w] is the
    cap on agent i's total pumped volume over window w.
    """

    windows: tuple[tuple[int, ...], ...]
    limits_m3: np.ndarray   # (N, n_windows)

    def __post_init__(self):
        wins = tuple(tuple(int(y) for y in w) for w in self.windows)
        if not wins or any(not w for w in wins):
            raise ValueError("windows must be non-empty")
        flat = [y for w in wins for y in w]
        horizon = max(flat)
        if sorted(flat) != list(range(1, horizon + 1)):
            raise ValueError("windows must be disjoint and cover years 1..T exactly")
        for w in wins:
            if list(w) != list(range(w[0], w[-1] + 1)):
                raise ValueError(f"window {w} is not a consecutive block of years")
        lim = np.array(self.limits_m3, dtype=float, copy=True)
        if lim.ndim != 2 or lim.shape[1] != len(wins):
            raise ValueError(f"limits must be (agents, {len(wins)}), got shape {lim.shape}")
        if np.any(lim < 0.0):
            raise ValueError("limits must be >= 0")
        lim.setflags(write=False)
        object.__setattr__(self, "windows", wins)
        object.__setattr__(self, "limits_m3", lim)

    @property
    def horizon(self) -> int:
        return max(y for w in self.windows for y in w)

    @property
    def n_agents(self) -> int:
        return self.limits_m3.shape[0]


@dataclass(frozen=True)
class ScenarioInputs:
    """Everything a simulation run needs, resolved per year.

    responses[t][k] is the crop response for year t+1 (post scenario
    transforms); replenishment_m[t] the net head gain in meters for that
    year.  The optional LEMA constraint is carried for the solver; the
    simulator itself never enforces it.
    """

    horizon: int
    crops: tuple[str, ...]
    areas_m2: np.ndarray                      # (N,)
    hydro: HydroParams
    network: FlowNetwork
    responses: tuple[tuple[CropResponse, ...], ...]   # (T, K)
    market: MarketParams
    costs: CostParams
    energy: EnergyParams
    replenishment_m: np.ndarray               # (T,)
    discount: float = 1.0
    lema: "LemaConstraint | None" = None

    def __post_init__(self):
        t, k = int(self.horizon), len(self.crops)
        if t < 1:
            raise ValueError("horizon must be >= 1")
        areas = np.array(self.areas_m2, dtype=float, copy=True)
        n = areas.shape[0]
        if areas.ndim != 1 or np.any(areas <= 0.0):
            raise ValueError("areas_m2 must be a vector of positive areas")
        areas.setflags(write=False)
        object.__setattr__(self, "areas_m2", areas)
        if self.hydro.initial_state.n_agents != n or self.network.n_agents != n:
            raise ValueError("hydrology state/network size must match the number of agents")
        if self.energy.surface_elevation.shape != (n,):
            raise ValueError("surface_elevation must have one entry per agent")
        if self.market.n_crops != k or self.costs.n_crops != k:
            raise ValueError("market/cost parameters must cover every crop")
        rows = tuple(tuple(r) for r in self.responses)
        if len(rows) != t or any(len(r) != k for r in rows):
            raise ValueError(f"responses must be a {t} x {k} table")
        object.__setattr__(self, "responses", rows)
        repl = np.array(self.replenishment_m, dtype=float, copy=True)
        if repl.shape != (t,):
            raise ValueError(f"replenishment_m must have {t} entries")
        repl.setflags(write=False)
        object.__setattr__(self, "replenishment_m", repl)
        if not 0.0 < self.discount <= 1.0:
            raise ValueError("discount must be in (0, 1]")
        if self.lema is not None and (self.lema.horizon != t or self.lema.n_agents != n):
            raise ValueError("LEMA constraint shape must match horizon and agents")
        # Packed (T, K) views used by the hot loops.
        tr = np.array([[r.transpiration_mm for r in row] for row in rows]) / MM_PER_M
        ir = np.array([[r.irrigation_mm for r in row] for row in rows]) / MM_PER_M
        yld = np.array([[r.yield_bu_m2 for r in row] for row in rows])
        for arr in (tr, ir, yld):
            arr.setflags(write=False)
        object.__setattr__(self, "_tr_m", tr)
        object.__setattr__(self, "_ir_m", ir)
        object.__setattr__(self, "_yield_bu_m2", yld)

    @property
    def n_agents(self) -> int:
        return self.areas_m2.shape[0]

    @property
    def n_crops(self) -> int:
        return len(self.crops)

    def transpiration_m(self) -> np.ndarray:
        return self._tr_m

    def irrigation_m(self) -> np.ndarray:
        return self._ir_m

    def yields_bu_m2(self) -> np.ndarray:
        return self._yield_bu_m2


@dataclass(frozen=True)
class SimulationResult:
    """Per-agent, per-year panel of the simulated economy plus head trajectory."""

    strategy: JointStrategy
    revenue: np.ndarray           # (N, T) $
    extraction_cost: np.ndarray   # (N, T) $
    production_cost: np.ndarray   # (N, T) $
    net_gain: np.ndarray          # (N, T) $
    pumped_m3: np.ndarray         # (N, T)
    quantities_bu: np.ndarray     # (N, K, T)
    head_states: tuple[AquiferState, ...]   # T+1 states, initial first
    utilities: np.ndarray         # (N,) discounted totals
    discount: float

    @property
    def n_agents(self) -> int:
        return self.revenue.shape[0]

    @property
    def horizon(self) -> int:
        return self.revenue.shape[1]

    def heads_matrix(self) -> np.ndarray:
        """(T+1, N+1) matrix of heads, column 0 = boundary."""
        return np.array([s.all_heads() for s in self.head_states])


def harvest_quantity(area_m2: float, yield_bu_m2: float, share: float) -> float:
    """Bushels harvested: area * per-area yield * planted fraction."""
    if area_m2 < 0.0 or yield_bu_m2 < 0.0 or not 0.0 <= share <= 1.0 + _SIMPLEX_TOL:
        raise ValueError("harvest inputs must be non-negative with share <= 1")
    return area_m2 * yield_bu_m2 * share

def depletion(strategy: JointStrategy, inputs: ScenarioInputs, agent: int, year: int) -> float:
    """Head loss (meters) of one agent in one year: sum_k (TR_k + IR_k) x_k.

    `year` is the 1-based label.
    """
    if not 1 <= year <= inputs.horizon:
        raise IndexError(f"year must be in 1..{inputs.horizon}, got {year}")
    t = year - 1
    per_crop = inputs.transpiration_m()[t] + inputs.irrigation_m()[t]
    return float(per_crop @ strategy.shares[agent, :, t])


def run_simulation(strategy: JointStrategy, inputs: ScenarioInputs) -> SimulationResult:
    """Simulate the full horizon and return the result panel.

    Prices in each year clear against that year's total supply across all
    agents; pumping cost uses the heads at the start of the year (the water
    actually lifted); heads advance afterwards.
    """
    n, k, t_max = inputs.n_agents, inputs.n_crops, inputs.horizon
    if strategy.n_agents != n or strategy.n_crops != k or strategy.horizon != t_max:
        raise ValueError(
            f"strategy shape {strategy.shares.shape} does not match inputs "
            f"({n} agents, {k} crops, {t_max} years)"
        )

    x = strategy.shares
    areas = inputs.areas_m2
    yields = inputs.yields_bu_m2()
    ir_m = inputs.irrigation_m()
    tr_m = inputs.transpiration_m()
    energy = inputs.energy
    gas_rate = energy.gas_per_lift / energy.pump_efficiency
    pressure_m = energy.pressure_head_m

    revenue = np.zeros((n, t_max))
    extraction = np.zeros((n, t_max))
    production = np.zeros((n, t_max))
    pumped = np.zeros((n, t_max))
    quantities = np.zeros((n, k, t_max))

    state = inputs.hydro.initial_state
    states = [state]
    for t in range(t_max):
        year = t + 1
        xt = x[:, :, t]                                   # (N, K)
        q = areas[:, None] * yields[t][None, :] * xt      # (N, K) bushels
        prices = crop_prices(inputs.market, year, q.sum(axis=0))
        revenue[:, t] = q @ prices
        quantities[:, :, t] = q

        irr_depth = xt @ ir_m[t]                          # (N,) meters
        pumped[:, t] = areas * irr_depth
        g = gas_price(energy, year)
        total_head = energy.surface_elevation - state.heads + pressure_m
        unit_cost = np.maximum(gas_rate * g * total_head, 0.0)
        extraction[:, t] = pumped[:, t] * unit_cost

        planted = areas[:, None] * xt                     # (N, K) m^2
        rates = production_cost_rates(inputs.costs, year, planted)
        production[:, t] = (rates * planted).sum(axis=1)

        d = xt @ (tr_m[t] + ir_m[t])                      # (N,) meters
        state = step_heads(state, inputs.network, inputs.hydro, inputs.replenishment_m[t], d)
        states.append(state)

    net = revenue - extraction - production
    weights = inputs.discount ** np.arange(t_max)
    utilities = net @ weights
    return SimulationResult(
        strategy=strategy,
        revenue=revenue,
        extraction_cost=extraction,
        production_cost=production,
        net_gain=net,
        pumped_m3=pumped,
        quantities_bu=quantities,
        head_states=tuple(states),
        utilities=utilities,
        discount=inputs.discount,
    )


def pumped_window(result: SimulationResult, agent: int, window: Sequence[int]) -> float:
    """Total volume (m^3) agent pumped over a set of 1-based years."""
    years = sorted(set(int(y) for y in window))
    if not years:
        raise ValueError("window must contain at least one year")
    if years[0] < 1 or years[-1] > result.horizon:
        raise IndexError(f"window years must lie in 1..{result.horizon}, got {years}")
    return float(sum(result.pumped_m3[agent, y - 1] for y in years))


def window_pump_totals(result: SimulationResult, lema: LemaConstraint) -> np.ndarray:
    """(N, n_windows) pumped volumes aligned with a LEMA constraint's windows."""
    return np.array(
        [[pumped_window(result, i, w) for w in lema.windows] for i in range(result.n_agents)]
    )
