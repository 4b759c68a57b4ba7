import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irrigame.agronomy import CropResponse, estimate_evaporation
from irrigame.hydro import (
    AquiferState,
    FlowNetwork,
    HydroParams,
    net_exchange,
    net_replenishment,
    step_heads,
)
from irrigame.units import mm_to_m


def chain_network(n, inner=0.1, boundary=0.0):
    coeffs = np.zeros((n + 1, n + 1))
    for i in range(1, n):
        coeffs[i, i + 1] = coeffs[i + 1, i] = inner
    for i in range(1, n + 1):
        coeffs[0, i] = coeffs[i, 0] = boundary
    return FlowNetwork(coeffs)


class TestTypes:
    def test_heads_must_be_finite(self):
        with pytest.raises(ValueError):
            AquiferState(heads=np.array([1.0, np.nan]), boundary_head=100.0)

    def test_negative_heads_are_allowed(self):
        state = AquiferState(heads=np.array([-5.0, 3.0]), boundary_head=-2.0)
        assert state.heads[0] == -5.0

    def test_network_rejects_negative_coefficient(self):
        with pytest.raises(ValueError, match="non-negative"):
            FlowNetwork(np.array([[0.0, -0.1], [-0.1, 0.0]]))

    def test_network_rejects_self_flow(self):
        coeffs = np.zeros((3, 3))
        coeffs[1, 1] = 0.1
        with pytest.raises(ValueError, match="diagonal"):
            FlowNetwork(coeffs)

    def test_network_rejects_asymmetry(self):
        coeffs = np.zeros((3, 3))
        coeffs[1, 2] = 0.1
        with pytest.raises(ValueError, match="symmetric"):
            FlowNetwork(coeffs)

    def test_network_rejects_unstable_row(self):
        coeffs = np.zeros((3, 3))
        coeffs[1, 2] = coeffs[2, 1] = 0.7
        coeffs[1, 0] = coeffs[0, 1] = 0.5
        with pytest.raises(ValueError, match="unstable"):
            FlowNetwork(coeffs)

    def test_gamma_must_be_non_negative(self):
        state = AquiferState(heads=np.array([1.0]), boundary_head=0.0)
        with pytest.raises(ValueError):
            HydroParams(gamma=-0.1, initial_state=state)


class TestNetReplenishment:
    def test_direct_subtraction(self):
        assert net_replenishment(0.5, 0.2) == pytest.approx(0.3, abs=1e-15)

    def test_zero_when_equal(self):
        assert net_replenishment(0.37, 0.37) == 0.0

    def test_negative_in_dry_years(self):
        assert net_replenishment(0.1, 0.4) < 0.0

    def test_rejects_negative_inputs(self):
        with pytest.raises(ValueError):
            net_replenishment(-0.1, 0.2)
        with pytest.raises(ValueError):
            net_replenishment(0.1, -0.2)

    def test_matches_evaporation_estimate_chain(self):
        # Evaporation from the in-season ratio, then R = P - E, against hand
        # arithmetic: E = 482.6 * 150 / 400 = 180.975 mm, R = 0.301625 m.
        responses = [
            CropResponse(200.0, 100.0, 300.0, 250.0, 50.0),   # ET - TR = 100
            CropResponse(150.0, 80.0, 200.0, 150.0, 40.0),    # ET - TR = 50
        ]
        evap_mm = estimate_evaporation(responses, 482.6)
        r = net_replenishment(mm_to_m(482.6), mm_to_m(evap_mm))
        assert r == pytest.approx(0.301625, abs=1e-12)


class TestNetExchange:
    def test_equal_heads_give_zero(self):
        state = AquiferState(heads=np.array([7.0, 7.0, 7.0]), boundary_head=7.0)
        net = chain_network(3, inner=0.2, boundary=0.1)
        for agent in (1, 2, 3):
            assert net_exchange(state, net, agent) == 0.0

    def test_two_agent_hand_value(self):
        state = AquiferState(heads=np.array([10.0, 0.0]), boundary_head=0.0)
        net = chain_network(2, inner=0.1, boundary=0.0)
        assert net_exchange(state, net, 1) == pytest.approx(-1.0, abs=1e-12)
        assert net_exchange(state, net, 2) == pytest.approx(1.0, abs=1e-12)

    def test_boundary_only_coupling(self):
        # a_{1,0} = 0.05, G_0 = 118.8, G_1 = 125.0 -> 0.05 * (118.8 - 125.0)
        state = AquiferState(heads=np.array([125.0]), boundary_head=118.8)
        coeffs = np.array([[0.0, 0.05], [0.05, 0.0]])
        assert net_exchange(state, FlowNetwork(coeffs), 1) == pytest.approx(-0.31, rel=1e-12)

    def test_agent_index_out_of_range(self):
        state = AquiferState(heads=np.array([1.0, 2.0]), boundary_head=0.0)
        net = chain_network(2)
        with pytest.raises(IndexError):
            net_exchange(state, net, 0)
        with pytest.raises(IndexError):
            net_exchange(state, net, 3)


class TestStepHeads:
    def test_boundary_drawdown_is_exactly_gamma(self):
        state = AquiferState(heads=np.array([100.0, 90.0]), boundary_head=118.8)
        params = HydroParams(gamma=0.3048, initial_state=state)
        net = chain_network(2, inner=0.0)
        out = step_heads(state, net, params, 0.0, np.zeros(2))
        assert out.boundary_head == pytest.approx(118.8 - 0.3048, abs=1e-12)
        np.testing.assert_array_equal(out.heads, state.heads)
        assert out.year == state.year + 1

    def test_two_agent_exchange_hand_value(self):
        state = AquiferState(heads=np.array([10.0, 0.0]), boundary_head=0.0)
        params = HydroParams(gamma=0.0, initial_state=state)
        net = chain_network(2, inner=0.1)
        out = step_heads(state, net, params, 0.0, np.zeros(2))
        np.testing.assert_allclose(out.heads, [9.0, 1.0], atol=1e-12)

    def test_replenishment_cancels_depletion(self):
        state = AquiferState(heads=np.array([50.0, 50.0, 50.0]), boundary_head=50.0)
        params = HydroParams(gamma=0.0, initial_state=state)
        net = chain_network(3, inner=0.1, boundary=0.05)
        out = step_heads(state, net, params, 0.1, np.full(3, 0.1))
        np.testing.assert_allclose(out.heads, state.heads, atol=1e-12)

    def test_input_state_is_not_modified(self):
        heads = np.array([10.0, 0.0])
        state = AquiferState(heads=heads, boundary_head=5.0)
        params = HydroParams(gamma=0.5, initial_state=state)
        step_heads(state, chain_network(2, inner=0.1), params, 0.2, np.array([0.1, 0.0]))
        np.testing.assert_array_equal(state.heads, [10.0, 0.0])
        assert state.boundary_head == 5.0

    def test_rejects_negative_depletion(self):
        state = AquiferState(heads=np.array([1.0, 1.0]), boundary_head=0.0)
        params = HydroParams(gamma=0.0, initial_state=state)
        with pytest.raises(ValueError):
            step_heads(state, chain_network(2), params, 0.0, np.array([-0.1, 0.0]))

    def test_rejects_length_mismatch(self):
        state = AquiferState(heads=np.array([1.0, 1.0]), boundary_head=0.0)
        params = HydroParams(gamma=0.0, initial_state=state)
        with pytest.raises(ValueError):
            step_heads(state, chain_network(2), params, 0.0, np.zeros(3))


head_arrays = st.lists(
    st.floats(min_value=-50.0, max_value=200.0, allow_nan=False), min_size=2, max_size=6
)


class TestProperties:
    @given(heads=head_arrays, inner=st.floats(min_value=0.0, max_value=0.45))
    @settings(max_examples=50, deadline=None)
    def test_conservation_in_closed_symmetric_network(self, heads, inner):
        n = len(heads)
        state = AquiferState(heads=np.array(heads), boundary_head=0.0)
        params = HydroParams(gamma=0.0, initial_state=state)
        net = chain_network(n, inner=inner, boundary=0.0)
        total = state.heads.sum()
        for _ in range(50):
            state = step_heads(state, net, params, 0.0, np.zeros(n))
            assert abs(state.heads.sum() - total) < 1e-9

    @given(heads=head_arrays, boundary=st.floats(min_value=-50.0, max_value=200.0))
    @settings(max_examples=50, deadline=None)
    def test_discrete_maximum_principle(self, heads, boundary):
        n = len(heads)
        state = AquiferState(heads=np.array(heads), boundary_head=boundary)
        params = HydroParams(gamma=0.0, initial_state=state)
        net = chain_network(n, inner=0.3, boundary=0.1)
        out = step_heads(state, net, params, 0.0, np.zeros(n))
        g = state.all_heads()
        for i in range(1, n + 1):
            neighborhood = np.concatenate(([g[i]], g[net.coeffs[i] > 0.0]))
            assert neighborhood.min() - 1e-12 <= out.heads[i - 1] <= neighborhood.max() + 1e-12

    @given(heads=head_arrays, shift=st.floats(min_value=-100.0, max_value=100.0))
    @settings(max_examples=50, deadline=None)
    def test_translation_invariance(self, heads, shift):
        n = len(heads)
        net = chain_network(n, inner=0.2, boundary=0.1)
        depletion = np.linspace(0.0, 0.5, n)
        base = AquiferState(heads=np.array(heads), boundary_head=12.0)
        moved = AquiferState(heads=np.array(heads) + shift, boundary_head=12.0 + shift)
        params = HydroParams(gamma=0.1, initial_state=base)
        out_base = step_heads(base, net, params, 0.25, depletion)
        out_moved = step_heads(moved, net, params, 0.25, depletion)
        np.testing.assert_allclose(out_moved.heads, out_base.heads + shift, atol=1e-9)

    def test_determinism(self):
        state = AquiferState(heads=np.array([101.3, 99.8, 100.7]), boundary_head=100.0)
        params = HydroParams(gamma=0.3048, initial_state=state)
        net = chain_network(3, inner=0.17, boundary=0.03)
        d = np.array([0.3, 0.1, 0.2])
        a = step_heads(state, net, params, 0.11, d)
        b = step_heads(state, net, params, 0.11, d)
        np.testing.assert_array_equal(a.heads, b.heads)
        assert a.boundary_head == b.boundary_head
