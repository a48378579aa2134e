"""Water-filling optimizer, top-K rule and baseline schedulers."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fleet_weights, grid_min_objective, make_fleet
from uoi_sim.core import TerminalParams
from uoi_sim.multi import (AoIState, FleetConfig, StationaryPolicy,
                           allocation_widths, index_coefficients, kkt_residual,
                           multi_update_index, schedule_aoi,
                           schedule_round_robin, schedule_stationary,
                           schedule_topk, step_aoi, fleet_uoi_bound, waterfill,
                           waterfill_from_widths)


def test_waterfill_examples():
    assert waterfill_from_widths(np.array([1.0, 1.0]), 1).pi == pytest.approx([0.5, 0.5])
    assert waterfill_from_widths(np.array([3.0, 1.0]), 1).pi == pytest.approx([0.75, 0.25])
    assert waterfill_from_widths(np.array([10.0, 1.0, 1.0]), 2).pi == pytest.approx(
        [1.0, 0.5, 0.5])


def test_waterfill_brute_force_small():
    for d, k in [((1.0, 1.0), 1), ((3.0, 1.0), 1), ((10.0, 1.0, 1.0), 2),
                 ((0.4, 2.2, 1.3), 1)]:
        pol = waterfill_from_widths(np.array(d), k)
        assert pol.objective <= grid_min_objective(np.array(d), k) + 1e-6
        assert kkt_residual(np.array(d), k, pol) < 1e-6


def test_waterfill_k_at_least_n_gives_all_ones():
    pol = waterfill_from_widths(np.array([2.0, 0.1, 1.0]), 3)
    assert pol.pi == pytest.approx([1.0, 1.0, 1.0])
    pol = waterfill_from_widths(np.array([2.0, 0.1]), 5)
    assert pol.pi == pytest.approx([1.0, 1.0])


def test_waterfill_zero_width_terminal_gets_zero(caplog):
    with caplog.at_level("WARNING"):
        pol = waterfill_from_widths(np.array([1.0, 0.0, 1.0]), 1)
    assert pol.pi[1] == 0.0
    assert pol.pi[[0, 2]] == pytest.approx([0.5, 0.5])
    assert "zero width" in caplog.text


def test_waterfill_proportional_case():
    # whenever max d_i / sum d <= 1/K the Cauchy-Schwarz split is optimal
    rng = np.random.default_rng(8)
    for _ in range(50):
        n = rng.integers(2, 6)
        d = rng.uniform(0.5, 1.5, size=n)
        k = 1
        if d.max() / d.sum() <= 1.0 / k:
            pol = waterfill_from_widths(d, k)
            assert pol.pi == pytest.approx(k * d / d.sum(), abs=1e-9)


def test_multi_update_index_examples():
    unit = TerminalParams(id=0, p=1.0, sigma2=1.0, omega_bar=1.0, pi=1.0)
    assert multi_update_index(unit, omega_next=1.0, q=2.0) == pytest.approx(4.0)
    assert multi_update_index(unit, omega_next=50.0, q=0.0) == 0.0
    t = TerminalParams(id=0, p=0.7, sigma2=1.0, omega_bar=5.95, pi=0.2)
    assert multi_update_index(t, omega_next=100.0, q=1.0) == pytest.approx(95.585)


def test_multi_update_index_rejects_unscheduled_terminal():
    t = TerminalParams(id=3, p=0.7, sigma2=1.0, omega_bar=1.0, pi=None)
    with pytest.raises(ValueError):
        multi_update_index(t, omega_next=1.0, q=1.0)


def test_schedule_topk_examples():
    assert set(schedule_topk(np.array([5.0, 1.0, 9.0]), 2)) == {2, 0}
    assert schedule_topk(np.array([5.0, 5.0, 1.0]), 1) == [0]
    assert schedule_topk(np.array([3.0]), 2) == [0]


@settings(max_examples=50)
@given(values=st.lists(st.floats(min_value=0, max_value=1e6), min_size=1, max_size=12),
       k=st.integers(1, 12),
       scale=st.floats(min_value=1e-3, max_value=1e3))
def test_topk_scale_invariance_and_feasibility(values, k, scale):
    v = np.array(values)
    ids = schedule_topk(v, k)
    assert len(ids) == min(k, len(v))
    assert ids == schedule_topk(v * scale, k)


def test_fleet_uoi_bound_examples():
    fleet2 = FleetConfig(terminals=(
        TerminalParams(id=0, p=1.0, sigma2=1.0, omega_bar=1.0),
        TerminalParams(id=1, p=1.0, sigma2=1.0, omega_bar=1.0)), k=1)
    pol = StationaryPolicy(pi=np.array([0.5, 0.5]), objective=4.0)
    assert fleet_uoi_bound(fleet2, pol) == pytest.approx(2.0)

    fleet1 = FleetConfig(terminals=(
        TerminalParams(id=0, p=1.0, sigma2=1.0, omega_bar=1.0),), k=1)
    assert fleet_uoi_bound(fleet1, StationaryPolicy(np.array([1.0]), 1.0)) == pytest.approx(1.0)

    fleet_w = FleetConfig(terminals=(
        TerminalParams(id=0, p=1.0, sigma2=1.0, omega_bar=1.0),
        TerminalParams(id=1, p=1.0, sigma2=1.0, omega_bar=4.0)), k=1)
    pol = waterfill(fleet_w)
    assert pol.pi == pytest.approx([1 / 3, 2 / 3], abs=1e-9)
    assert fleet_uoi_bound(fleet_w, pol) == pytest.approx(4.5)


def test_round_robin_examples():
    assert schedule_round_robin(0, 4, 2) == [0, 1]
    assert schedule_round_robin(1, 4, 2) == [2, 3]
    assert schedule_round_robin(1, 3, 2) == [2, 0]


def test_schedule_aoi_examples():
    fleet = FleetConfig(terminals=(
        TerminalParams(id=0, p=0.5, sigma2=1.0, omega_bar=1.0),
        TerminalParams(id=1, p=1.0, sigma2=1.0, omega_bar=1.0)), k=1)
    # scores tie at 6: lowest id wins
    assert schedule_aoi(AoIState(delta=np.array([3, 2])), fleet) == [0]
    unit = FleetConfig(terminals=(
        TerminalParams(id=0, p=1.0, sigma2=1.0, omega_bar=1.0),
        TerminalParams(id=1, p=1.0, sigma2=1.0, omega_bar=1.0)), k=1)
    assert schedule_aoi(AoIState(delta=np.array([1, 5])), unit) == [1]
    both = FleetConfig(terminals=unit.terminals, k=2)
    assert set(schedule_aoi(AoIState(delta=np.array([1, 5])), both)) == {0, 1}


def test_aoi_recursion():
    aoi = AoIState.fresh(3)
    aoi = step_aoi(aoi, np.array([False, True, False]))
    assert aoi.delta.tolist() == [2, 1, 2]
    aoi = step_aoi(aoi, np.array([False, False, False]))
    assert aoi.delta.tolist() == [3, 2, 3]


def test_scheme_equivalence_with_subset_enumeration():
    """Top-K by update index maximizes the drift-minimizing subset objective
    sum (theta_i + w_i) p_i q_i^2 with theta_i = omega_bar_i (1 - p pi)/(p pi),
    checked against exhaustive enumeration of all C(N, K) subsets."""
    rng = np.random.default_rng(77)
    for _ in range(25):
        n = int(rng.integers(2, 7))
        k = int(rng.integers(1, n + 1))
        fleet = make_fleet(n, k=k)
        pi = waterfill(fleet).pi
        p = fleet.array("p")
        omega_bar = fleet.array("omega_bar")
        theta = omega_bar * (1.0 - p * pi) / (p * pi)
        q = rng.normal(0, 3, size=n)
        w_next = rng.choice([1.0, 100.0], size=n)
        terms = (theta + w_next) * p * q ** 2
        indices = (index_coefficients(fleet, pi) + w_next) * p * q ** 2
        assert indices == pytest.approx(terms)  # Definition-2 index == subset term
        best = max(sum(terms[list(sub)]) for sub in
                   itertools.combinations(range(n), min(k, n)))
        chosen = schedule_topk(indices, k)
        assert sum(terms[chosen]) == pytest.approx(best)


def test_waterfill_random_instances_against_grid_oracle():
    rng = np.random.default_rng(123)
    for _ in range(20):
        n = int(rng.integers(2, 5))
        k = int(rng.integers(1, n + 1))
        d = rng.uniform(0.2, 3.0, size=n)
        pol = waterfill_from_widths(d, k)
        assert pol.objective <= grid_min_objective(d, k) + 1e-6
        assert kkt_residual(d, k, pol) < 1e-6


def test_stationary_schedule_marginals_and_feasibility():
    fleet = make_fleet(6, k=2)
    pi = waterfill(fleet).pi
    rng = np.random.default_rng(5)
    counts = np.zeros(6)
    trials = 20000
    for _ in range(trials):
        ids = schedule_stationary(pi, float(rng.random()))
        assert len(ids) <= 2
        counts[ids] += 1
    assert counts / trials == pytest.approx(pi, abs=0.01)
