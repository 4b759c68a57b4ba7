"""Lumped-cell groundwater head dynamics.

The aquifer under the farms is modeled as N agent cells plus one
surrounding boundary cell (index 0).  Cells exchange water through a
symmetric network of dimensionless per-year flow coefficients; each year an
agent cell gains the net replenishment, loses whatever its crops depleted,
and moves toward its neighbors' heads in proportion to the head
differences.  The boundary cell is exogenous and drops at a fixed observed
rate per year.

All heads and depths are meters.  Rows/columns of the flow matrix follow
the convention index 0 = boundary cell, 1..N = agent cells.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Slack for the per-row stability bound; loaded matrices are rejected when
# any agent row sums beyond this.
_ROW_SUM_TOL = 1e-12


def _frozen_array(values, ndim: int) -> np.ndarray:
    out = np.array(values, dtype=float, copy=True)
    if out.ndim != ndim:
        raise ValueError(f"expected a {ndim}-D array, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError("array entries must be finite")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class AquiferState:
    """Groundwater heads of the N agent cells plus the boundary cell at one year.

    Negative heads are permitted: they represent depletion below the datum
    and are reported, never clamped.
    """

    heads: np.ndarray      # (N,) agent heads, meters
    boundary_head: float   # surrounding-aquifer head, meters
    year: int = 1

    def __post_init__(self):
        object.__setattr__(self, "heads", _frozen_array(self.heads, 1))
        if not np.isfinite(self.boundary_head):
            raise ValueError("boundary_head must be finite")
        object.__setattr__(self, "boundary_head", float(self.boundary_head))
        object.__setattr__(self, "year", int(self.year))

    @property
    def n_agents(self) -> int:
        return self.heads.shape[0]

    def all_heads(self) -> np.ndarray:
        """Heads with the boundary prepended, so index i matches flow-matrix row i."""
        return np.concatenate(([self.boundary_head], self.heads))


@dataclass(frozen=True)
class FlowNetwork:
    """Symmetric per-year flow-rate constants between cells.

    coeffs[i, j] is the dimensionless fraction of the head difference
    G_j - G_i that enters cell i during one year.  Index 0 is the boundary
    cell.  Every agent row must satisfy sum_j coeffs[i, j] <= 1 so that the
    explicit yearly update stays a convex combination of neighboring heads
    (otherwise the scheme can oscillate and is rejected at load).
    """

    coeffs: np.ndarray   # (N+1, N+1)

    def __post_init__(self):
        c = _frozen_array(self.coeffs, 2)
        if c.shape[0] != c.shape[1] or c.shape[0] < 2:
            raise ValueError(f"flow matrix must be square with >= 2 cells, got {c.shape}")
        if np.any(c < 0.0):
            raise ValueError("flow coefficients must be non-negative")
        if np.any(np.diagonal(c) != 0.0):
            raise ValueError("self-flow coefficients (diagonal) must be zero")
        if not np.array_equal(c, c.T):
            raise ValueError("flow coefficients must be symmetric")
        row_sums = c[1:].sum(axis=1)
        if np.any(row_sums > 1.0 + _ROW_SUM_TOL):
            worst = int(np.argmax(row_sums)) + 1
            raise ValueError(
                f"flow row {worst} sums to {row_sums[worst - 1]:.6g} > 1; "
                "the yearly update would be unstable"
            )
        object.__setattr__(self, "coeffs", c)

    @property
    def n_agents(self) -> int:
        return self.coeffs.shape[0] - 1

    def agent_update_matrix(self) -> np.ndarray:
        """The N x N linear map taking agent heads to next year's exchange-updated heads.

        With B the agent-agent block and s_i the full row sums (boundary
        included), the map is I - diag(s) + B.  Entries are non-negative
        under the row-sum bound, which is what makes the update monotone.
        """
        b = self.coeffs[1:, 1:]
        s = self.coeffs[1:].sum(axis=1)
        return np.eye(self.n_agents) - np.diag(s) + b


@dataclass(frozen=True)
class HydroParams:
    """Boundary drawdown rate plus the initial aquifer state."""

    gamma: float                 # boundary drawdown, meters/year
    initial_state: AquiferState

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma >= 0.0):
            raise ValueError("gamma must be finite and >= 0")
        object.__setattr__(self, "gamma", float(self.gamma))


def net_replenishment(precip_total: float, evaporation_total: float) -> float:
    """Net replenishment R = P - E in meters/year (negative in dry years).

    Both arguments are per-unit-area yearly totals in meters and must be
    non-negative.
    """
    if not (precip_total >= 0.0):
        raise ValueError(f"precipitation must be >= 0, got {precip_total}")
    if not (evaporation_total >= 0.0):
        raise ValueError(f"evaporation must be >= 0, got {evaporation_total}")
    return float(precip_total) - float(evaporation_total)


def net_exchange(state: AquiferState, net: FlowNetwork, agent: int) -> float:
    """Net head gain (meters) of agent cell `agent` from one year of exchange flow.

    `agent` is the 1-based flow-matrix row index, 1 <= agent <= N.  Returns
    sum_j a[agent, j] * (G_j - G_agent) over all other cells including the
    boundary.
    """
    n = state.n_agents
    if net.n_agents != n:
        raise ValueError(f"network has {net.n_agents} agents, state has {n}")
    if not 1 <= agent <= n:
        raise IndexError(f"agent index must be in 1..{n}, got {agent}")
    g = state.all_heads()
    row = net.coeffs[agent]
    return float(row @ g - row.sum() * g[agent])


def step_heads(
    state: AquiferState,
    net: FlowNetwork,
    params: HydroParams,
    replenishment: float,
    depletion,
) -> AquiferState:
    """Advance all heads one year and return the new state.

    Agent cells move by replenishment - depletion + exchange; the boundary
    cell drops by gamma.  `depletion` is a length-N vector of non-negative
    head losses in meters.  The input state is left untouched.
    """
    n = state.n_agents
    if net.n_agents != n:
        raise ValueError(f"network has {net.n_agents} agents, state has {n}")
    d = np.asarray(depletion, dtype=float)
    if d.shape != (n,):
        raise ValueError(f"depletion must have shape ({n},), got {d.shape}")
    if np.any(d < 0.0):
        raise ValueError("depletion entries must be >= 0")
    if not np.isfinite(replenishment):
        raise ValueError("replenishment must be finite")

    g = state.all_heads()
    rows = net.coeffs[1:]
    exchange = rows @ g - rows.sum(axis=1) * g[1:]
    new_heads = state.heads + replenishment - d + exchange
    return AquiferState(
        heads=new_heads,
        boundary_head=state.boundary_head - params.gamma,
        year=state.year + 1,
    )
