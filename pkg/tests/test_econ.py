import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irrigame.econ import (
    CostParams,
    EnergyParams,
    MarketParams,
    NegativeLiftWarning,
    crop_price,
    crop_prices,
    fit_exponential_trend,
    gas_price,
    production_cost_rate,
    pumping_unit_cost,
)


def market(p0=5.0, pinf=2.0, qbar=1e5, tau=math.inf):
    return MarketParams(
        crops=("corn",), price_ceiling=[p0], price_floor=[pinf],
        supply_scale=[qbar], trend_tau=[tau],
    )


def costs(c0=0.12, cinf=0.08, abar=1e6, tau=math.inf):
    return CostParams(
        crops=("corn",), cost_ceiling=[c0], cost_floor=[cinf],
        area_scale=[abar], trend_tau=[tau],
    )


def energy(theta=1.0, rho=0.5, psi=30.0, g0=2.0, zeta=math.inf, elevation=(100.0,)):
    return EnergyParams(
        gas_per_lift=theta, pump_efficiency=rho, gauge_pressure_psi=psi,
        gas_price_init=g0, gas_trend_tau=zeta, surface_elevation=np.array(elevation),
    )


class TestCropPrice:
    def test_zero_supply_gives_ceiling(self):
        assert crop_price(market(), 0, 0.0, 0.0) == 5.0

    def test_supply_at_scale_constant(self):
        expected = 2.0 + 3.0 * math.exp(-1.0)
        assert crop_price(market(), 0, 0.0, 1e5) == pytest.approx(expected, rel=1e-14)

    def test_large_supply_approaches_floor(self):
        p = crop_price(market(), 0, 0.0, 100e5)
        assert abs(p - 2.0) <= 1e-6 * 3.0

    def test_negative_supply_rejected(self):
        with pytest.raises(ValueError):
            crop_price(market(), 0, 0.0, -1.0)

    def test_trend_drifts_both_band_edges(self):
        m = market(tau=10.0)
        assert crop_price(m, 0, 10.0, 0.0) == pytest.approx(5.0 * math.e, rel=1e-14)
        assert crop_price(m, 0, 10.0, 1e12) == pytest.approx(2.0 * math.e, rel=1e-6)

    def test_vectorized_matches_scalar(self):
        m = MarketParams(
            crops=("a", "b"), price_ceiling=[5.0, 4.0], price_floor=[2.0, 1.0],
            supply_scale=[1e5, 2e5], trend_tau=[10.0, math.inf],
        )
        supplies = np.array([3e4, 9e4])
        vec = crop_prices(m, 3.0, supplies)
        for k in range(2):
            assert vec[k] == pytest.approx(crop_price(m, k, 3.0, supplies[k]), rel=1e-15)

    @given(
        supply=st.floats(min_value=0.0, max_value=1e7),
        more=st.floats(min_value=1.0, max_value=1e6),
    )
    @settings(max_examples=50, deadline=None)
    def test_bounded_and_decreasing(self, supply, more):
        m = market()
        p1 = crop_price(m, 0, 0.0, supply)
        p2 = crop_price(m, 0, 0.0, supply + more)
        assert 2.0 <= p2 <= p1 <= 5.0

    def test_validation(self):
        with pytest.raises(ValueError):
            market(p0=1.0, pinf=2.0)
        with pytest.raises(ValueError):
            market(qbar=0.0)
        with pytest.raises(ValueError):
            market(tau=0.0)


class TestProductionCost:
    def test_zero_area_gives_ceiling(self):
        assert production_cost_rate(costs(), 0, 0.0, 0.0) == 0.12

    def test_area_at_scale_constant(self):
        expected = 0.08 + 0.04 * math.exp(-1.0)
        assert production_cost_rate(costs(), 0, 0.0, 1e6) == pytest.approx(expected, rel=1e-14)

    def test_degenerate_band_is_constant(self):
        c = costs(c0=0.1, cinf=0.1)
        for area in (0.0, 1e5, 1e8):
            assert production_cost_rate(c, 0, 0.0, area) == pytest.approx(0.1, rel=1e-15)

    def test_negative_area_rejected(self):
        with pytest.raises(ValueError):
            production_cost_rate(costs(), 0, 0.0, -1.0)

    @given(
        area=st.floats(min_value=0.0, max_value=1e8),
        more=st.floats(min_value=1.0, max_value=1e7),
    )
    @settings(max_examples=50, deadline=None)
    def test_bounded_and_non_increasing(self, area, more):
        c = costs()
        r1 = production_cost_rate(c, 0, 0.0, area)
        r2 = production_cost_rate(c, 0, 0.0, area + more)
        assert 0.08 <= r2 <= r1 <= 0.12


class TestGasPrice:
    def test_initial_value(self):
        assert gas_price(energy(), 0.0) == 2.0

    def test_e_folding(self):
        assert gas_price(energy(zeta=10.0), 10.0) == pytest.approx(2.0 * math.e, rel=1e-14)

    def test_flat_mode(self):
        e = energy(zeta=math.inf)
        for t in (0.0, 5.0, 50.0):
            assert gas_price(e, t) == 2.0


class TestPumpingUnitCost:
    def test_zero_lift_zero_pressure_costs_nothing(self):
        e = energy(psi=0.0, elevation=(100.0,))
        assert pumping_unit_cost(e, 0, 0.0, 100.0) == 0.0

    def test_hand_value(self):
        # (1 / 0.5) * 2 * (50 + 2.31 * 30 * 0.3048) = 284.49056
        e = energy(theta=1.0, rho=0.5, psi=30.0, g0=2.0, elevation=(100.0,))
        assert pumping_unit_cost(e, 0, 0.0, 50.0) == pytest.approx(284.49056, abs=1e-9)

    def test_linear_in_gas_price(self):
        lo = pumping_unit_cost(energy(g0=2.0), 0, 0.0, 60.0)
        hi = pumping_unit_cost(energy(g0=4.0), 0, 0.0, 60.0)
        assert hi == pytest.approx(2.0 * lo, rel=1e-12)

    def test_negative_total_head_floors_at_zero_with_warning(self):
        e = energy(psi=0.0, elevation=(100.0,))
        with pytest.warns(NegativeLiftWarning):
            assert pumping_unit_cost(e, 0, 0.0, 130.0) == 0.0

    @given(
        head=st.floats(min_value=-50.0, max_value=90.0),
        drop=st.floats(min_value=0.1, max_value=50.0),
    )
    @settings(max_examples=50, deadline=None)
    def test_non_increasing_in_head(self, head, drop):
        e = energy()
        assert pumping_unit_cost(e, 0, 0.0, head) <= pumping_unit_cost(e, 0, 0.0, head - drop)

    def test_validation(self):
        with pytest.raises(ValueError):
            energy(rho=0.0)
        with pytest.raises(ValueError):
            energy(theta=0.0)
        with pytest.raises(ValueError):
            energy(g0=0.0)


class TestTrendFit:
    def test_generate_then_recover(self):
        ts = range(10)
        series = [(t, 3.0 * math.exp(t / 10.0)) for t in ts]
        v0, tau = fit_exponential_trend(series)
        assert v0 == pytest.approx(3.0, abs=1e-6)
        assert tau == pytest.approx(10.0, abs=1e-6)

    def test_log_domain_residual_is_tiny_on_noiseless_data(self):
        series = [(t, 7.5 * math.exp(t / -4.0)) for t in range(8)]
        v0, tau = fit_exponential_trend(series)
        for t, v in series:
            assert abs(math.log(v) - (math.log(v0) + t / tau)) <= 1e-9

    def test_constant_series_has_zero_rate(self):
        v0, tau = fit_exponential_trend([(t, 4.2) for t in range(6)])
        assert math.isinf(tau)
        assert v0 == pytest.approx(4.2, rel=1e-12)

    def test_scaling_series_scales_v0_only(self):
        base = [(t, 2.0 * math.exp(t / 7.0)) for t in range(9)]
        scaled = [(t, 5.0 * v) for t, v in base]
        v0a, taua = fit_exponential_trend(base)
        v0b, taub = fit_exponential_trend(scaled)
        assert v0b == pytest.approx(5.0 * v0a, rel=1e-9)
        assert taub == pytest.approx(taua, rel=1e-9)

    def test_decaying_series_gets_negative_tau(self):
        _, tau = fit_exponential_trend([(t, 10.0 * math.exp(-t / 5.0)) for t in range(6)])
        assert tau == pytest.approx(-5.0, rel=1e-9)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            fit_exponential_trend([(0, 1.0)])
        with pytest.raises(ValueError):
            fit_exponential_trend([(0, 1.0), (1, -2.0)])
        with pytest.raises(ValueError):
            fit_exponential_trend([(0, 1.0), (0, 2.0)])
