"""Nash equilibrium computation by Nikaido-Isoda relaxation.

Each agent's best response to frozen opponents is found by cyclic
coordinate ascent over its per-year scalars (summer corn share, with
sorghum as the complement, plus any winter-crop shares), each scalar
maximized by golden-section search on [0, 1] with the endpoints checked
exactly.  The joint optimum response stacks the per-agent best responses
against the same frozen strategy, and the relaxation iterates
x <- (1-eta) x + eta z(x) until the sup-norm of z(x) - x falls under the
tolerance.  Pumping caps enter as exterior quadratic penalties whose weight
grows whenever a violation persists between relaxation iterations.

Best responses use an exact fast path: with opponents frozen, an agent's
utility depends on its own plan through its harvest (prices clear against
precomputed opponent supply) and through its own depletion, whose effect on
its future heads is linear and is captured once per solve by an influence
kernel built from powers of the head-update matrix.  The fast path and the
reference simulator agree to float precision; tests pin that equivalence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .sim import (
    JointStrategy,
    LemaConstraint,
    ScenarioInputs,
    SimulationResult,
    pumped_window,
    random_strategy,
    run_simulation,
    window_pump_totals,
)

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

# A LEMA window is considered satisfied when the overshoot is within this
# fraction of the limit.
LEMA_FEASIBILITY_TOL = 1e-3


@dataclass(frozen=True)
class RelaxationConfig:
    """Hyperparameters of the relaxation solver and its line searches."""

    eta: float = 0.1              # relaxation step toward the optimum response
    epsilon: float = 1e-4         # sup-norm stopping threshold on z(x) - x
    max_iters: int = 500
    rng_seed: int = 0
    br_grid: float = 1e-3         # coordinate line-search resolution
    br_sweeps: int = 8            # max coordinate sweeps per best response
    penalty_init: float | None = None   # None = scale automatically from the inputs
    penalty_growth: float = 10.0

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must be in (0, 1)")
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0.0 < self.br_grid <= 0.5:
            raise ValueError("br_grid must be in (0, 0.5]")
        if self.br_sweeps < 1:
            raise ValueError("br_sweeps must be >= 1")
        if self.penalty_init is not None and self.penalty_init <= 0.0:
            raise ValueError("penalty_init must be > 0 when given")
        if self.penalty_growth < 1.0:
            raise ValueError("penalty_growth must be >= 1")

    @property
    def line_tol(self) -> float:
        # The line search must resolve finer than the outer stopping
        # threshold or an interior fixed point could never satisfy it.
        return max(min(self.br_grid, self.epsilon / 10.0), 1e-12)


@dataclass(frozen=True)
class EquilibriumReport:
    """What a solve and/or certification run found out about a strategy."""

    converged: bool
    iterations: int
    residual: float                       # sup-norm of z(x) - x
    psi: float                            # joint best-response gain at the final point
    config: RelaxationConfig
    improvements: np.ndarray | None = None      # per-agent $ gain of best found deviation
    improvements_rel: np.ndarray | None = None  # same, relative to |utility|
    certified: bool | None = None
    violations_m3: np.ndarray | None = None     # per-agent worst window overshoot
    feasible: bool | None = None
    penalty_weight: float | None = None

    def to_dict(self) -> dict:
        def arr(a):
            return None if a is None else [float(v) for v in a]

        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "residual": self.residual,
            "psi": self.psi,
            "eta": self.config.eta,
            "epsilon": self.config.epsilon,
            "max_iters": self.config.max_iters,
            "rng_seed": self.config.rng_seed,
            "br_grid": self.config.br_grid,
            "br_sweeps": self.config.br_sweeps,
            "penalty_init": self.config.penalty_init,
            "penalty_growth": self.config.penalty_growth,
            "improvements": arr(self.improvements),
            "improvements_rel": arr(self.improvements_rel),
            "certified": self.certified,
            "violations_m3": arr(self.violations_m3),
            "feasible": self.feasible,
            "penalty_weight": self.penalty_weight,
        }


def project_to_feasible(shares) -> JointStrategy:
    """Euclidean projection of a strategy-shaped tensor onto the feasible set.

    Per agent-year, the summer pair is projected onto the segment
    {x0 + x1 = 1, x >= 0} (closed form), and every other share is clamped
    to [0, 1].  Idempotent on feasible input.
    """
    x = np.array(shares, dtype=float, copy=True)
    if x.ndim != 3:
        raise ValueError(f"expected an (agents, crops, years) tensor, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("strategy entries must be finite")
    out = np.clip(x, 0.0, 1.0)
    if x.shape[1] >= 2:
        first = np.clip((x[:, 0, :] - x[:, 1, :] + 1.0) / 2.0, 0.0, 1.0)
        out[:, 0, :] = first
        out[:, 1, :] = 1.0 - first
    return JointStrategy(out)


def nikaido_isoda(x: JointStrategy, y: JointStrategy, inputs: ScenarioInputs) -> float:
    """Sum over agents of the utility gained by unilaterally switching to y_i.

    Exactly zero when y equals x.  Both strategies must be feasible (the
    JointStrategy constructor enforces that).
    """
    if x.shares.shape != y.shares.shape:
        raise ValueError("strategies must have identical shape")
    base = run_simulation(x, inputs)
    total = 0.0
    for i in range(x.n_agents):
        if np.array_equal(x.shares[i], y.shares[i]):
            continue
        switched = run_simulation(x.replace_agent(i, y.shares[i]), inputs)
        total += float(switched.utilities[i] - base.utilities[i])
    return total


class _AgentObjective:
    """Fast exact evaluation of one agent's utility with opponents frozen.

    Precomputes the opponents' supply panel, the head trajectory the agent
    would see if it pumped nothing, and the influence kernel of its own
    depletion on its own future heads (the head recursion is linear, so the
    kernel is exact).  evaluate() then needs only dense arithmetic on
    (K, T) arrays.
    """

    def __init__(
        self,
        agent: int,
        strategy: JointStrategy,
        inputs: ScenarioInputs,
        lema: LemaConstraint | None = None,
        penalty_weight: float = 0.0,
    ):
        self.agent = agent
        self.inputs = inputs
        n, k, t_max = inputs.n_agents, inputs.n_crops, inputs.horizon
        self.n_crops, self.horizon = k, t_max
        years = np.arange(1, t_max + 1, dtype=float)

        area = float(inputs.areas_m2[agent])
        self.area = area
        self.yields_kt = inputs.yields_bu_m2().T.copy()          # (K, T)
        self.ir_kt = inputs.irrigation_m().T.copy()
        self.dep_kt = self.ir_kt + inputs.transpiration_m().T

        # Opponent supply per crop-year (own column excluded).
        others = [j for j in range(n) if j != agent]
        x_others = strategy.shares[others]                        # (N-1, K, T)
        areas_others = inputs.areas_m2[others]
        self.supply_other = np.einsum(
            "j,tk,jkt->kt", areas_others, inputs.yields_bu_m2(), x_others
        ) if others else np.zeros((k, t_max))

        # Price and cost bands drifted per year (tau = +inf drifts by 1).
        market, costs = inputs.market, inputs.costs
        pdrift = np.exp(years[None, :] / market.trend_tau[:, None])
        self.p0_kt = market.price_ceiling[:, None] * pdrift
        self.pinf_kt = market.price_floor[:, None] * pdrift
        self.supply_scale = market.supply_scale[:, None]
        cdrift = np.exp(years[None, :] / costs.trend_tau[:, None])
        self.c0_kt = costs.cost_ceiling[:, None] * cdrift
        self.cinf_kt = costs.cost_floor[:, None] * cdrift
        self.area_scale = costs.area_scale[:, None]

        energy = inputs.energy
        self.gas_rate = energy.gas_per_lift / energy.pump_efficiency
        self.g_t = energy.gas_price_init * np.exp(years / energy.gas_trend_tau)
        self.head_offset = float(energy.surface_elevation[agent]) + energy.pressure_head_m

        # Heads the agent would see pumping nothing, plus the (T, T)
        # influence kernel of its own depletion on its own future heads.
        m_update = inputs.network.agent_update_matrix()
        boundary_coeff = inputs.network.coeffs[1:, 0]
        dep_tk = inputs.transpiration_m() + inputs.irrigation_m()   # (T, K)
        dep_other = np.zeros((t_max, n))
        for j in others:
            dep_other[:, j] = (strategy.shares[j].T * dep_tk).sum(axis=1)
        heads = np.array(inputs.hydro.initial_state.heads, dtype=float)
        boundary = inputs.hydro.initial_state.boundary_head
        base = np.empty(t_max)
        for t in range(t_max):
            base[t] = heads[agent]
            if t + 1 < t_max:
                heads = (
                    m_update @ heads
                    + boundary_coeff * boundary
                    + inputs.replenishment_m[t]
                    - dep_other[t]
                )
                boundary -= inputs.hydro.gamma
        self.base_heads = base

        powers = np.empty(max(t_max - 1, 1))
        p = np.eye(n)
        for m in range(t_max - 1):
            powers[m] = p[agent, agent]
            p = m_update @ p
        kernel = np.zeros((t_max, t_max))
        for a in range(t_max):
            for b in range(a):
                kernel[a, b] = powers[a - b - 1]
        self.kernel = kernel

        self.weights = inputs.discount ** np.arange(t_max)

        self.penalty_weight = float(penalty_weight)
        if lema is not None:
            masks = np.zeros((len(lema.windows), t_max))
            for w, years_in in enumerate(lema.windows):
                for y in years_in:
                    masks[w, y - 1] = 1.0
            self.window_masks = masks
            self.limits = lema.limits_m3[agent]
        else:
            self.window_masks = None
            self.limits = None

    def utility(self, block: np.ndarray) -> float:
        """Exact discounted utility of the agent for its own (K, T) plan."""
        q = self.area * self.yields_kt * block
        supply = self.supply_other + q
        prices = self.pinf_kt + (self.p0_kt - self.pinf_kt) * np.exp(-supply / self.supply_scale)
        revenue = (prices * q).sum(axis=0)

        irr_depth = (self.ir_kt * block).sum(axis=0)
        dep = (self.dep_kt * block).sum(axis=0)
        heads = self.base_heads - self.kernel @ dep
        unit = np.maximum(self.gas_rate * self.g_t * (self.head_offset - heads), 0.0)
        extraction = self.area * irr_depth * unit

        planted = self.area * block
        rates = self.cinf_kt + (self.c0_kt - self.cinf_kt) * np.exp(-planted / self.area_scale)
        production = (rates * planted).sum(axis=0)

        return float((revenue - extraction - production) @ self.weights)

    def window_pumped(self, block: np.ndarray) -> np.ndarray | None:
        if self.window_masks is None:
            return None
        irr_depth = (self.ir_kt * block).sum(axis=0)
        return self.window_masks @ (self.area * irr_depth)

    def objective(self, block: np.ndarray) -> float:
        """Utility minus the quadratic overshoot penalty (when caps are active)."""
        u = self.utility(block)
        if self.window_masks is None or self.penalty_weight == 0.0:
            return u
        over = np.maximum(self.window_pumped(block) - self.limits, 0.0)
        return u - self.penalty_weight * float(over @ over)


class _SearchState:
    """Incremental objective evaluation for single-coordinate probes.

    A probe of coordinate (crop, year t) only touches year t's revenue,
    production cost, and pumping volume, plus the pumping costs of the
    years after t through the head-influence kernel.  Everything is kept as
    plain Python floats; a probe costs O(K + T - t) scalar operations
    instead of a full dense evaluation.  State is resynchronized from the
    dense evaluator at the start of every sweep to cap float drift.
    """

    def __init__(self, obj: _AgentObjective, block: np.ndarray):
        self.obj = obj
        self.block = block
        t_max = obj.horizon
        self.weights = obj.weights.tolist()
        self.rate_gas = (obj.gas_rate * obj.g_t).tolist()
        self.head_offset = obj.head_offset
        self.area = obj.area
        # kernel column weights: effect of a depletion in year t on year s > t
        self.kernel_pw = [float(obj.kernel[s, 0]) for s in range(1, t_max)] if t_max > 1 else []
        if obj.window_masks is not None:
            self.window_of_year = [
                int(np.argmax(obj.window_masks[:, t])) for t in range(t_max)
            ]
            self.limits = obj.limits.tolist()
        else:
            self.window_of_year = None
            self.limits = None
        self.resync()

    def resync(self) -> None:
        obj, block = self.obj, self.block
        q = obj.area * obj.yields_kt * block
        supply = obj.supply_other + q
        prices = obj.pinf_kt + (obj.p0_kt - obj.pinf_kt) * np.exp(-supply / obj.supply_scale)
        self.rev = (prices * q).sum(axis=0).tolist()
        planted = obj.area * block
        rates = obj.cinf_kt + (obj.c0_kt - obj.cinf_kt) * np.exp(-planted / obj.area_scale)
        self.prod = (rates * planted).sum(axis=0).tolist()
        self.irr = (obj.ir_kt * block).sum(axis=0).tolist()
        self.dep = (obj.dep_kt * block).sum(axis=0).tolist()
        heads = obj.base_heads - obj.kernel @ np.array(self.dep)
        self.heads = heads.tolist()
        self.unit = [
            max(rg * (self.head_offset - h), 0.0)
            for rg, h in zip(self.rate_gas, self.heads)
        ]
        self.ext = [self.area * irr * u for irr, u in zip(self.irr, self.unit)]
        if self.window_of_year is not None:
            pumped = [0.0] * len(self.limits)
            for t, irr in enumerate(self.irr):
                pumped[self.window_of_year[t]] += self.area * irr
            self.pumped = pumped
        self.value = self._total()

    def _total(self) -> float:
        total = sum(
            w * (r - e - p)
            for w, r, e, p in zip(self.weights, self.rev, self.ext, self.prod)
        )
        if self.window_of_year is not None and self.obj.penalty_weight != 0.0:
            over_sq = sum(
                max(0.0, pump - lim) ** 2 for pump, lim in zip(self.pumped, self.limits)
            )
            total -= self.obj.penalty_weight * over_sq
        return total

    def _year_pieces(self, coord, v: float, paired: bool):
        kind, k, t = coord
        obj = self.obj
        shares = self.block[:, t].copy()
        if kind == "summer":
            shares[0] = v
            if paired:
                shares[1] = 1.0 - v
        else:
            shares[k] = v
        rev = prod = irr = dep = 0.0
        for c in range(shares.shape[0]):
            x = shares[c]
            q = self.area * obj.yields_kt[c, t] * x
            s = obj.supply_other[c, t] + q
            price = obj.pinf_kt[c, t] + (obj.p0_kt[c, t] - obj.pinf_kt[c, t]) * math.exp(
                -s / obj.supply_scale[c, 0]
            )
            rev += price * q
            planted = self.area * x
            rate = obj.cinf_kt[c, t] + (obj.c0_kt[c, t] - obj.cinf_kt[c, t]) * math.exp(
                -planted / obj.area_scale[c, 0]
            )
            prod += rate * planted
            irr += obj.ir_kt[c, t] * x
            dep += obj.dep_kt[c, t] * x
        return rev, prod, irr, dep

    def probe(self, coord, v: float, paired: bool) -> float:
        """Objective if coordinate `coord` were set to `v`; state unchanged."""
        kind, k, t = coord
        rev, prod, irr, dep = self._year_pieces(coord, v, paired)
        ext_t = self.area * irr * self.unit[t]
        delta = self.weights[t] * (
            (rev - self.rev[t]) - (ext_t - self.ext[t]) - (prod - self.prod[t])
        )
        d_dep = dep - self.dep[t]
        if d_dep != 0.0:
            offset = self.head_offset
            for s in range(t + 1, len(self.heads)):
                h = self.heads[s] - self.kernel_pw[s - t - 1] * d_dep
                u = self.rate_gas[s] * (offset - h)
                if u < 0.0:
                    u = 0.0
                delta -= self.weights[s] * self.area * self.irr[s] * (u - self.unit[s])
        if self.window_of_year is not None and self.obj.penalty_weight != 0.0:
            w_idx = self.window_of_year[t]
            lim = self.limits[w_idx]
            new_pump = self.pumped[w_idx] + self.area * (irr - self.irr[t])
            delta -= self.obj.penalty_weight * (
                max(0.0, new_pump - lim) ** 2 - max(0.0, self.pumped[w_idx] - lim) ** 2
            )
        return self.value + delta

    def commit(self, coord, v: float, paired: bool) -> None:
        """Set coordinate `coord` to `v` and update the cached state."""
        kind, k, t = coord
        rev, prod, irr, dep = self._year_pieces(coord, v, paired)
        new_value = self.probe(coord, v, paired)
        if kind == "summer":
            self.block[0, t] = v
            if paired:
                self.block[1, t] = 1.0 - v
        else:
            self.block[k, t] = v
        if self.window_of_year is not None:
            self.pumped[self.window_of_year[t]] += self.area * (irr - self.irr[t])
        d_dep = dep - self.dep[t]
        self.rev[t], self.prod[t], self.irr[t], self.dep[t] = rev, prod, irr, dep
        self.ext[t] = self.area * irr * self.unit[t]
        if d_dep != 0.0:
            offset = self.head_offset
            for s in range(t + 1, len(self.heads)):
                h = self.heads[s] - self.kernel_pw[s - t - 1] * d_dep
                self.heads[s] = h
                u = self.rate_gas[s] * (offset - h)
                self.unit[s] = u if u > 0.0 else 0.0
                self.ext[s] = self.area * self.irr[s] * self.unit[s]
        self.value = new_value


def _golden_max(fn, tol: float) -> tuple[float, float]:
    """Golden-section maximization of fn over [0, 1] to interval width tol."""
    a, b = 0.0, 1.0
    h = b - a
    c = b - _INVPHI * h
    d = a + _INVPHI * h
    fc, fd = fn(c), fn(d)
    while h > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = b - _INVPHI * h
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INVPHI * h
            fd = fn(d)
    return (c, fc) if fc >= fd else (d, fd)


def _coordinates(n_crops: int, horizon: int) -> list[tuple[str, int, int]]:
    """Scan order of an agent's free scalars: summer share per year, then winter shares."""
    coords: list[tuple[str, int, int]] = [("summer", 0, t) for t in range(horizon)]
    for k in range(2, n_crops):
        coords.extend(("winter", k, t) for t in range(horizon))
    return coords


def _set_coord(block: np.ndarray, coord: tuple[str, int, int], value: float, paired: bool) -> None:
    kind, k, t = coord
    if kind == "summer":
        block[0, t] = value
        if paired:
            block[1, t] = 1.0 - value
    else:
        block[k, t] = value


def best_response(
    agent: int,
    strategy: JointStrategy,
    inputs: ScenarioInputs,
    lema: LemaConstraint | None = None,
    cfg: RelaxationConfig | None = None,
    penalty_weight: float | None = None,
) -> np.ndarray:
    """The agent's utility-maximizing (K, T) plan against frozen opponents.

    Cyclic coordinate ascent: each scalar is maximized by golden-section
    search on [0, 1], with the endpoints and the incumbent value checked
    exactly so vertex solutions are hit without discretization error.
    Sweeps stop once a full pass gains less than epsilon/10.  The returned
    plan never scores below the agent's incumbent plan.
    """
    cfg = cfg or RelaxationConfig()
    weight = _resolve_penalty(inputs, lema, cfg) if penalty_weight is None else penalty_weight
    obj = _AgentObjective(agent, strategy, inputs, lema, weight if lema is not None else 0.0)
    paired = inputs.n_crops >= 2

    incumbent_block = np.array(strategy.shares[agent], copy=True)
    state = _SearchState(obj, np.array(incumbent_block, copy=True))
    coords = _coordinates(inputs.n_crops, inputs.horizon)
    tol = cfg.line_tol

    for _ in range(cfg.br_sweeps):
        state.resync()
        sweep_start = state.value
        for coord in coords:
            probe = lambda v: state.probe(coord, v, paired)  # noqa: E731
            best_v, best_f = _golden_max(probe, tol)
            for v in (0.0, 1.0):
                f = probe(v)
                if f > best_f:
                    best_v, best_f = v, f
            if best_f > state.value:
                state.commit(coord, best_v, paired)
        if state.value - sweep_start < cfg.epsilon / 10.0:
            break
    # The incremental deltas track the dense objective to float precision;
    # keep the no-regression guarantee authoritative anyway.
    if obj.objective(state.block) < obj.objective(incumbent_block):
        return incumbent_block
    return state.block


def optimum_response(
    strategy: JointStrategy,
    inputs: ScenarioInputs,
    lema: LemaConstraint | None = None,
    cfg: RelaxationConfig | None = None,
    penalty_weight: float | None = None,
) -> JointStrategy:
    """Stack every agent's best response against the same frozen strategy."""
    cfg = cfg or RelaxationConfig()
    blocks = [
        best_response(i, strategy, inputs, lema, cfg, penalty_weight)
        for i in range(strategy.n_agents)
    ]
    return project_to_feasible(np.stack(blocks))


def _resolve_penalty(
    inputs: ScenarioInputs, lema: LemaConstraint | None, cfg: RelaxationConfig
) -> float:
    """Initial penalty weight: configured value, or scaled from typical magnitudes.

    The automatic scale uses the typical per-agent-year net gain against the
    squared typical window volume: strong enough that percent-level
    overshoots hurt, weak enough that the search can still trade pumping
    between years of one window while honing the allocation.
    """
    if lema is None:
        return 0.0
    if cfg.penalty_init is not None:
        return cfg.penalty_init
    n, k, t = inputs.n_agents, inputs.n_crops, inputs.horizon
    even = np.full((n, k, t), 0.5)
    if k >= 2:
        even[:, 1, :] = 0.5
    probe = run_simulation(JointStrategy(even), inputs)
    u_typ = max(float(np.mean(np.abs(probe.net_gain))), 1.0)
    w_typ = max(float(np.mean(window_pump_totals(probe, lema))), 1.0)
    return 1e3 * u_typ / (w_typ * w_typ)


def trim_to_caps(
    strategy: JointStrategy, inputs: ScenarioInputs, lema: LemaConstraint, margin: float = 1e-3
) -> JointStrategy:
    """Scale irrigation-heavy shares down until every window cap is met.

    Per agent and window, a single factor shrinks the corn share (toward
    its summer complement) and any winter shares together; window pumping
    is linear in that factor, so the factor solves in closed form.  Used to
    hand the constrained solver a feasible warm start.
    """
    ir = inputs.irrigation_m()     # (T, K)
    shares = np.array(strategy.shares, copy=True)
    n, k, _ = shares.shape
    for i in range(n):
        area = inputs.areas_m2[i]
        for w, years in enumerate(lema.windows):
            target = lema.limits_m3[i, w] * (1.0 - margin) / area
            ts = [y - 1 for y in years]
            fixed = scalable = 0.0
            for t in ts:
                if k >= 2:
                    fixed += ir[t, 1]
                    scalable += shares[i, 0, t] * (ir[t, 0] - ir[t, 1])
                else:
                    scalable += shares[i, 0, t] * ir[t, 0]
                for c in range(2, k):
                    scalable += shares[i, c, t] * ir[t, c]
            if fixed + scalable <= target or scalable <= 0.0:
                continue
            lam = max((target - fixed) / scalable, 0.0)
            for t in ts:
                shares[i, 0, t] *= lam
                if k >= 2:
                    shares[i, 1, t] = 1.0 - shares[i, 0, t]
                for c in range(2, k):
                    shares[i, c, t] *= lam
    return project_to_feasible(shares)


def relax_to_equilibrium(
    init: JointStrategy | None,
    inputs: ScenarioInputs,
    lema: LemaConstraint | None = None,
    cfg: RelaxationConfig | None = None,
) -> tuple[JointStrategy, EquilibriumReport]:
    """Iterate x <- (1-eta) x + eta z(x) until the optimum response fixes x.

    `init` may be None, in which case a uniformly random feasible strategy
    is drawn from the configured seed.  Every iterate is re-projected for
    numerical hygiene (the feasible set is convex, so this is a no-op up to
    rounding).  Non-convergence is reported, not raised.
    """
    cfg = cfg or RelaxationConfig()
    if lema is not None and lema.horizon != inputs.horizon:
        raise ValueError("LEMA windows must cover the simulation horizon")
    if init is None:
        rng = np.random.default_rng(cfg.rng_seed)
        x = random_strategy(inputs.n_agents, inputs.n_crops, inputs.horizon, rng)
    else:
        x = project_to_feasible(init.shares)
    if lema is not None:
        x = trim_to_caps(x, inputs, lema)

    penalty = _resolve_penalty(inputs, lema, cfg)
    converged = False
    residual = math.inf
    z = x
    prev_violated = False
    iterations = 0
    for iteration in range(1, cfg.max_iters + 1):
        iterations = iteration
        z = optimum_response(x, inputs, lema, cfg, penalty_weight=penalty)
        residual = float(np.max(np.abs(z.shares - x.shares)))
        if residual < cfg.epsilon:
            converged = True
            break
        if iteration == cfg.max_iters:
            break
        x = project_to_feasible((1.0 - cfg.eta) * x.shares + cfg.eta * z.shares)
        if lema is not None:
            violated = _max_violation_fraction(x, inputs, lema) > LEMA_FEASIBILITY_TOL
            if violated and prev_violated:
                penalty *= cfg.penalty_growth
            prev_violated = violated

    psi = _penalized_psi(x, z, inputs, lema, penalty)
    violations = feasible = None
    if lema is not None:
        result = run_simulation(x, inputs)
        over = np.maximum(window_pump_totals(result, lema) - lema.limits_m3, 0.0)
        violations = over.max(axis=1)
        rel = over / np.maximum(lema.limits_m3, 1e-300)
        feasible = bool(np.all(rel <= LEMA_FEASIBILITY_TOL))

    report = EquilibriumReport(
        converged=converged,
        iterations=iterations,
        residual=residual,
        psi=psi,
        config=cfg,
        violations_m3=violations,
        feasible=feasible,
        penalty_weight=penalty if lema is not None else None,
    )
    return x, report


def _max_violation_fraction(x: JointStrategy, inputs: ScenarioInputs, lema: LemaConstraint) -> float:
    result = run_simulation(x, inputs)
    over = np.maximum(window_pump_totals(result, lema) - lema.limits_m3, 0.0)
    return float(np.max(over / np.maximum(lema.limits_m3, 1e-300)))


def _penalized_psi(
    x: JointStrategy,
    z: JointStrategy,
    inputs: ScenarioInputs,
    lema: LemaConstraint | None,
    penalty: float,
) -> float:
    """Joint gain of switching to z, in the objective the best responses used."""
    if lema is None:
        return nikaido_isoda(x, z, inputs)
    total = 0.0
    for i in range(x.n_agents):
        obj = _AgentObjective(i, x, inputs, lema, penalty)
        total += obj.objective(z.shares[i]) - obj.objective(x.shares[i])
    return total


def verify_equilibrium(
    x: JointStrategy,
    inputs: ScenarioInputs,
    lema: LemaConstraint | None = None,
    deviation_grid: float = 0.05,
    cfg: RelaxationConfig | None = None,
    restarts: int = 3,
    certify_tol: float = 1e-3,
) -> EquilibriumReport:
    """Search unilateral deviations and report the best improvement per agent.

    Candidates per agent: a coordinate-ascent best response warm-started at
    the incumbent, fresh coordinate ascents from seeded random restarts,
    and direct single-coordinate probes on the deviation grid.  Candidate
    utilities are re-evaluated with the reference simulator; under active
    pumping caps only cap-respecting deviations count.  Certifies an
    approximate equilibrium when every relative improvement is at most
    `certify_tol`.
    """
    cfg = cfg or RelaxationConfig()
    if not 0.0 < deviation_grid <= 0.5:
        raise ValueError("deviation_grid must be in (0, 0.5]")
    base = run_simulation(x, inputs)
    n = x.n_agents
    penalty = _resolve_penalty(inputs, lema, cfg)
    grid = np.linspace(0.0, 1.0, int(round(1.0 / deviation_grid)) + 1)

    improvements = np.zeros(n)
    for i in range(n):
        obj = _AgentObjective(i, x, inputs, lema, penalty if lema is not None else 0.0)
        paired = inputs.n_crops >= 2
        candidates: list[np.ndarray] = [
            best_response(i, x, inputs, lema, cfg, penalty_weight=penalty)
        ]
        rng = np.random.default_rng(cfg.rng_seed * 1_000_003 + 7919 * i + 1)
        for _ in range(restarts):
            start = random_strategy(1, inputs.n_crops, inputs.horizon, rng).shares[0]
            restarted = x.replace_agent(i, start)
            candidates.append(best_response(i, restarted, inputs, lema, cfg, penalty_weight=penalty))

        best_probe = None
        best_probe_score = -math.inf
        for coord in _coordinates(inputs.n_crops, inputs.horizon):
            for v in grid:
                block = np.array(x.shares[i], copy=True)
                _set_coord(block, coord, float(v), paired)
                score = obj.objective(block)
                if score > best_probe_score:
                    best_probe_score = score
                    best_probe = block
        if best_probe is not None:
            candidates.append(best_probe)

        best_gain = 0.0   # the incumbent itself is always an admissible deviation
        for block in candidates:
            trial = run_simulation(x.replace_agent(i, block), inputs)
            if lema is not None:
                pumps = np.array([pumped_window(trial, i, w) for w in lema.windows])
                over = np.maximum(pumps - lema.limits_m3[i], 0.0)
                if np.any(over > LEMA_FEASIBILITY_TOL * np.maximum(lema.limits_m3[i], 1e-300)):
                    continue
            best_gain = max(best_gain, float(trial.utilities[i] - base.utilities[i]))
        improvements[i] = best_gain

    scale = np.maximum(np.abs(base.utilities), 1.0)
    rel = improvements / scale
    violations = feasible = None
    if lema is not None:
        over = np.maximum(window_pump_totals(base, lema) - lema.limits_m3, 0.0)
        violations = over.max(axis=1)
        feasible = bool(
            np.all(over <= LEMA_FEASIBILITY_TOL * np.maximum(lema.limits_m3, 1e-300))
        )
    return EquilibriumReport(
        converged=True,
        iterations=0,
        residual=float("nan"),
        psi=float("nan"),
        config=cfg,
        improvements=improvements,
        improvements_rel=rel,
        certified=bool(np.all(rel <= certify_tol)),
        violations_m3=violations,
        feasible=feasible,
        penalty_weight=penalty if lema is not None else None,
    )


def five_year_windows(horizon: int) -> tuple[tuple[int, ...], ...]:
    """Consecutive 5-year windows covering 1..horizon (last may be shorter)."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    windows = []
    start = 1
    while start <= horizon:
        end = min(start + 4, horizon)
        windows.append(tuple(range(start, end + 1)))
        start = end + 1
    return tuple(windows)


def lema_limits(baseline: SimulationResult, fraction: float) -> LemaConstraint:
    """Caps at `fraction` of the baseline's pumped volume per 5-year window."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    windows = five_year_windows(baseline.horizon)
    limits = np.array(
        [
            [fraction * pumped_window(baseline, i, w) for w in windows]
            for i in range(baseline.n_agents)
        ]
    )
    return LemaConstraint(windows=windows, limits_m3=limits)
