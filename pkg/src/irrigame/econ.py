"""Crop prices, production costs, pumping energy cost, and trend fitting.

Prices and production costs saturate exponentially: price falls from a
zero-supply ceiling toward a floor as the market-wide supply grows, and the
per-area production cost falls from a small-plot ceiling toward a floor as
the planted area grows (economies of scale).  Both bands drift over the
years by exponential trends e^(t/tau); a time constant of +inf encodes a
flat series, and the supply scale may be +inf to pin prices at the ceiling.

Pumping cost follows the gas-pump formula: gas needed per cubic meter per
meter of total dynamic head, divided by pump efficiency, times the gas
price, times the lift plus the gauge-pressure head (2.31 ft of water per
psi, converted to meters).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .units import M_PER_FT, PSI_TO_FT_WATER

# Gauge pressure converted to meters of water column.
PRESSURE_HEAD_M_PER_PSI = PSI_TO_FT_WATER * M_PER_FT


class NegativeLiftWarning(UserWarning):
    """Pumping head plus pressure head came out negative; cost floored at zero."""


def _per_crop(values, n_crops: int, name: str) -> np.ndarray:
    a = np.array(values, dtype=float, copy=True)
    if a.shape != (n_crops,):
        raise ValueError(f"{name} must have one entry per crop ({n_crops}), got shape {a.shape}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MarketParams:
    """Per-crop price saturation bands and trend time constants.

    price_ceiling is the zero-supply price, price_floor the heavily supplied
    one (both $/bushel at t=0); supply_scale (bushels) sets how fast the
    band is traversed; trend_tau (years) drifts the whole band, +inf = flat.
    """

    crops: tuple[str, ...]
    price_ceiling: np.ndarray
    price_floor: np.ndarray
    supply_scale: np.ndarray
    trend_tau: np.ndarray

    def __post_init__(self):
        k = len(self.crops)
        object.__setattr__(self, "crops", tuple(self.crops))
        for name in ("price_ceiling", "price_floor", "supply_scale", "trend_tau"):
            object.__setattr__(self, name, _per_crop(getattr(self, name), k, name))
        if np.any(self.price_floor < 0.0) or np.any(self.price_ceiling < self.price_floor):
            raise ValueError("prices must satisfy ceiling >= floor >= 0")
        if np.any(self.supply_scale <= 0.0):
            raise ValueError("supply_scale must be > 0 (may be +inf)")
        if np.any(self.trend_tau == 0.0):
            raise ValueError("trend_tau must be nonzero (use +inf for a flat trend)")

    @property
    def n_crops(self) -> int:
        return len(self.crops)


@dataclass(frozen=True)
class CostParams:
    """Per-crop production-cost bands ($/m^2 at t=0) and trend time constants.

    cost_ceiling applies to a vanishing planted area, cost_floor to a large
    one; area_scale (m^2) sets the saturation rate, per agent (the planted
    area of one farm, not the market total, drives the saturation).
    """

    crops: tuple[str, ...]
    cost_ceiling: np.ndarray
    cost_floor: np.ndarray
    area_scale: np.ndarray
    trend_tau: np.ndarray

    def __post_init__(self):
        k = len(self.crops)
        object.__setattr__(self, "crops", tuple(self.crops))
        for name in ("cost_ceiling", "cost_floor", "area_scale", "trend_tau"):
            object.__setattr__(self, name, _per_crop(getattr(self, name), k, name))
        if np.any(self.cost_floor < 0.0) or np.any(self.cost_ceiling < self.cost_floor):
            raise ValueError("costs must satisfy ceiling >= floor >= 0")
        if np.any(self.area_scale <= 0.0):
            raise ValueError("area_scale must be > 0 (may be +inf)")
        if np.any(self.trend_tau == 0.0):
            raise ValueError("trend_tau must be nonzero (use +inf for a flat trend)")

    @property
    def n_crops(self) -> int:
        return len(self.crops)


@dataclass(frozen=True)
class EnergyParams:
    """Gas-powered pumping parameters.

    gas_per_lift: gas units needed to raise one m^3 of water one meter at
    100% efficiency; pump_efficiency divides it.  surface_elevation is the
    per-agent land-surface reference in meters, so elevation minus head is
    the depth water must be lifted.
    """

    gas_per_lift: float          # gas units / (m^3 * m)
    pump_efficiency: float       # in (0, 1]
    gauge_pressure_psi: float
    gas_price_init: float        # $/gas unit at t=0
    gas_trend_tau: float         # years; +inf = flat
    surface_elevation: np.ndarray  # (N,) meters

    def __post_init__(self):
        if not self.gas_per_lift > 0.0:
            raise ValueError("gas_per_lift must be > 0")
        if not 0.0 < self.pump_efficiency <= 1.0:
            raise ValueError("pump_efficiency must be in (0, 1]")
        if not self.gauge_pressure_psi >= 0.0:
            raise ValueError("gauge_pressure_psi must be >= 0")
        if not self.gas_price_init > 0.0:
            raise ValueError("gas_price_init must be > 0")
        if self.gas_trend_tau == 0.0:
            raise ValueError("gas_trend_tau must be nonzero (use +inf for flat)")
        elev = np.array(self.surface_elevation, dtype=float, copy=True)
        if elev.ndim != 1:
            raise ValueError("surface_elevation must be a per-agent vector")
        elev.setflags(write=False)
        object.__setattr__(self, "surface_elevation", elev)

    @property
    def pressure_head_m(self) -> float:
        return self.gauge_pressure_psi * PRESSURE_HEAD_M_PER_PSI


def _trend(tau: float, t: float) -> float:
    # e^(t/tau); tau = +inf gives exactly 1.0
    return math.exp(t / tau) if math.isfinite(tau) else 1.0


def crop_price(params: MarketParams, crop: int, t: float, total_supply: float) -> float:
    """Market price ($/bushel) of crop `crop` in year t at the given total supply.

    price = floor(t) + (ceiling(t) - floor(t)) * exp(-supply / scale), with
    both band edges drifted by e^(t/tau).
    """
    if total_supply < 0.0:
        raise ValueError(f"total supply must be >= 0, got {total_supply}")
    drift = _trend(params.trend_tau[crop], t)
    p0 = params.price_ceiling[crop] * drift
    pinf = params.price_floor[crop] * drift
    return pinf + (p0 - pinf) * math.exp(-total_supply / params.supply_scale[crop])


def crop_prices(params: MarketParams, t: float, total_supply: np.ndarray) -> np.ndarray:
    """Vectorized crop_price over all crops; total_supply has one entry per crop."""
    s = np.asarray(total_supply, dtype=float)
    if np.any(s < 0.0):
        raise ValueError("total supply must be >= 0")
    drift = np.where(np.isfinite(params.trend_tau), np.exp(t / params.trend_tau), 1.0)
    p0 = params.price_ceiling * drift
    pinf = params.price_floor * drift
    return pinf + (p0 - pinf) * np.exp(-s / params.supply_scale)


def production_cost_rate(params: CostParams, crop: int, t: float, irrigated_area: float) -> float:
    """Per-area production cost ($/m^2) of crop `crop` at the agent's planted area."""
    if irrigated_area < 0.0:
        raise ValueError(f"irrigated area must be >= 0, got {irrigated_area}")
    drift = _trend(params.trend_tau[crop], t)
    c0 = params.cost_ceiling[crop] * drift
    cinf = params.cost_floor[crop] * drift
    return cinf + (c0 - cinf) * math.exp(-irrigated_area / params.area_scale[crop])


def production_cost_rates(params: CostParams, t: float, irrigated_area: np.ndarray) -> np.ndarray:
    """Vectorized production_cost_rate; irrigated_area is (..., K) per crop."""
    a = np.asarray(irrigated_area, dtype=float)
    if np.any(a < 0.0):
        raise ValueError("irrigated area must be >= 0")
    drift = np.where(np.isfinite(params.trend_tau), np.exp(t / params.trend_tau), 1.0)
    c0 = params.cost_ceiling * drift
    cinf = params.cost_floor * drift
    return cinf + (c0 - cinf) * np.exp(-a / params.area_scale)


def gas_price(params: EnergyParams, t: float) -> float:
    """Gas price ($/gas unit) in year t: init * e^(t/tau), flat when tau = +inf."""
    return params.gas_price_init * _trend(params.gas_trend_tau, t)


def pumping_unit_cost(params: EnergyParams, agent: int, t: float, head: float) -> float:
    """Cost of extracting one cubic meter of groundwater ($/m^3) for one agent.

    Lift is the agent's surface elevation minus the current head; the gauge
    pressure adds 2.31 ft of water per psi, converted to meters.  A negative
    total head would mean being paid to pump, so the cost is floored at zero
    with a warning.
    """
    lift = params.surface_elevation[agent] - head
    total_head = lift + params.pressure_head_m
    cost = (params.gas_per_lift / params.pump_efficiency) * gas_price(params, t) * total_head
    if total_head < 0.0:
        warnings.warn(
            f"negative total pumping head ({total_head:.3g} m) for agent {agent}; cost floored at 0",
            NegativeLiftWarning,
            stacklevel=2,
        )
        return 0.0
    return float(cost)


def fit_exponential_trend(series) -> tuple[float, float]:
    """Fit v(t) = v0 * e^(t/tau) to (t, value) pairs by log-domain least squares.

    Returns (v0, tau).  A constant series yields tau = +inf (zero rate) and
    v0 equal to the geometric mean, which is then the constant itself.
    Requires at least two points, all values strictly positive.
    """
    pts = [(float(t), float(v)) for t, v in series]
    if len(pts) < 2:
        raise ValueError(f"need at least 2 points to fit a trend, got {len(pts)}")
    for t, v in pts:
        if not v > 0.0:
            raise ValueError(f"trend values must be > 0, got {v} at t={t}")
    ts = np.array([t for t, _ in pts])
    logs = np.log([v for _, v in pts])
    t_mean = ts.mean()
    log_mean = logs.mean()
    denom = np.sum((ts - t_mean) ** 2)
    if denom == 0.0:
        raise ValueError("all time points are identical; trend is undetermined")
    slope = float(np.sum((ts - t_mean) * (logs - log_mean)) / denom)
    v0 = float(np.exp(log_mean - slope * t_mean))
    tau = math.inf if slope == 0.0 else 1.0 / slope
    return v0, tau
