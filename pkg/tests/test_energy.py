"""Every per-slot energy term, checked against hand-evaluated values."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greenedge.energy import (
    BsParams,
    CacheModel,
    ConstraintViolation,
    MecParams,
    bs_energy,
    caching_energy,
    container_energy,
    driver_count,
    driver_energy,
    hawkes_intensity,
    link_energy,
    link_power,
    make_alloc,
    min_rate_for,
    objective,
    offload_energy,
    radio_rate_for,
    round_trip,
    switching_energy,
    total_edge_cost,
    transfer_time,
)

REL = 1e-9


def close(a, b, rel=REL):
    return abs(a - b) <= rel * max(1.0, abs(b))


SMALL_BS = BsParams(base_energy=100.0, load_coeff=1.0, sleep_residual=0.0)
# 40 MHz keeps the spectral exponent of tens-of-Mbit loads inside the guard
PARAMS = MecParams(bandwidth_hz=40e6)


# ---------------------------------------------------------------------------
# base stations
# ---------------------------------------------------------------------------


def test_bs_energy_active_zero_load():
    assert bs_energy(True, 0.0, SMALL_BS) == 100.0


def test_bs_energy_sleeping_draws_nothing_at_zero_residual():
    assert bs_energy(False, 0.0, SMALL_BS) == 0.0


def test_bs_energy_affine_in_load():
    assert bs_energy(True, 50.0, SMALL_BS) == 150.0


def test_bs_energy_sleeping_station_cannot_carry_load():
    with pytest.raises(ValueError, match="sleeping"):
        bs_energy(False, 1.0, SMALL_BS)


def test_bs_energy_residual_fraction():
    p = BsParams(base_energy=100.0, load_coeff=1.0, sleep_residual=0.25)
    assert bs_energy(False, 0.0, p) == 25.0


# ---------------------------------------------------------------------------
# containers
# ---------------------------------------------------------------------------


def test_container_energy_peak_rate_draws_peak_energy():
    alloc = make_alloc(80.0, PARAMS, rate=105.0)
    assert close(container_energy([alloc], PARAMS), 10.0)


def test_container_energy_idle_draws_idle_energy():
    alloc = make_alloc(0.0, PARAMS)
    assert alloc.utilization == 0.0
    assert close(container_energy([alloc], PARAMS), 4.0)


def test_container_energy_mid_rate():
    alloc = make_alloc(30.0, PARAMS, rate=50.0)
    assert close(container_energy([alloc], PARAMS), 5.360544217687075)


def test_container_energy_empty_fleet_is_free():
    assert container_energy([], PARAMS) == 0.0


def test_container_energy_monotone_in_rate():
    costs = [
        container_energy([make_alloc(10.0, PARAMS, rate=r)], PARAMS)
        for r in sorted(PARAMS.rate_set)
    ]
    assert costs == sorted(costs)


def test_alloc_rejects_utilization_above_one():
    with pytest.raises(ValueError, match="utilization"):
        make_alloc(10.0, PARAMS, rate=200.0)


# ---------------------------------------------------------------------------
# rate switching
# ---------------------------------------------------------------------------


def test_switching_identical_vectors_cost_nothing():
    assert switching_energy([50.0, 70.0], [50.0, 70.0], 0.005) == 0.0


def test_switching_single_step():
    assert close(switching_energy([50.0], [70.0], 0.005), 2.0)


def test_switching_is_symmetric():
    prev, new = [0.0, 50.0, 105.0], [90.0, 70.0, 0.0]
    assert switching_energy(prev, new, 0.005) == switching_energy(new, prev, 0.005)


def test_switching_pads_missing_containers_with_zero_rate():
    # spinning a third container up from nothing costs the same as 0 -> 50
    assert close(switching_energy([50.0, 50.0], [50.0, 50.0, 50.0], 0.005), 12.5)


# ---------------------------------------------------------------------------
# NIC offload engine
# ---------------------------------------------------------------------------


def test_offload_energy_off_is_zero():
    assert offload_energy(False, 500.0, PARAMS) == 0.0


def test_offload_energy_idle():
    assert close(offload_energy(True, 0.0, PARAMS), 13.1)


def test_offload_energy_with_traffic():
    assert close(offload_energy(True, 100.0, PARAMS), 13.107142857142858)


# ---------------------------------------------------------------------------
# radio links
# ---------------------------------------------------------------------------


def test_radio_rate_zero_load_needs_no_link():
    assert radio_rate_for(0.0, PARAMS) == 0.0
    assert link_power(0.0, PARAMS) == 0.0


def test_radio_rate_from_transfer_budget():
    # 1 Mbit with 0.2 s for the two transfers -> 10 Mbit/s
    assert close(radio_rate_for(1.0, PARAMS), 10.0)


def test_link_power_at_two_bits_per_hz():
    # r/W = 2 makes the power exactly 3x the noise floor
    p = MecParams(bandwidth_hz=1e6)
    floor = p.bandwidth_hz * p.noise_density / p.channel_gain
    assert close(link_power(2.0, p), 3.0 * floor)


def test_link_power_overflow_guard_names_the_problem():
    p = MecParams(bandwidth_hz=1e6)
    with pytest.raises(ConstraintViolation, match="guard"):
        link_power(100.0, p)


def test_link_energy_empty_is_zero():
    assert link_energy([], PARAMS) == 0.0


def test_link_energy_transfer_time_is_half_the_budget():
    alloc = make_alloc(40.0, PARAMS)
    assert close(transfer_time(alloc.load, alloc.radio_rate), PARAMS.transfer_budget / 2.0)


def test_link_energy_additivity():
    one = link_energy([make_alloc(24.0, PARAMS)], PARAMS)
    two = link_energy([make_alloc(24.0, PARAMS)] * 2, PARAMS)
    assert close(two, 2.0 * one)


def test_link_energy_enforces_total_rate_cap():
    p = MecParams(bandwidth_hz=40e6, rate_cap=500.0)
    allocs = [make_alloc(80.0, p) for _ in range(2)]  # 800 Mbit/s each... over the cap
    with pytest.raises(ConstraintViolation, match="cap"):
        link_energy(allocs, p)


def test_round_trip_meets_deadline_exactly():
    alloc = make_alloc(56.0, PARAMS)
    assert close(round_trip(alloc.load, alloc.radio_rate, PARAMS), PARAMS.deadline)


# ---------------------------------------------------------------------------
# optical drivers
# ---------------------------------------------------------------------------


def test_driver_count_five_targets():
    assert driver_count(5, PARAMS) == 2


def test_driver_count_zero_targets():
    assert driver_count(0, PARAMS) == 0


def test_driver_count_large_omega_limit():
    # sigma * N -> 0 drives omega to infinity and the count to ceil(1/0.96)
    p = MecParams(bandwidth_hz=40e6, reconfig_seconds=1e-12)
    assert driver_count(1, p) == 2


def test_driver_count_clamped_to_installed_drivers():
    p = MecParams(bandwidth_hz=40e6, max_drivers=3, reconfig_seconds=10.0)
    for n in range(1, 200):
        assert 1 <= driver_count(n, p) <= 3


def test_driver_energy_no_output():
    assert driver_energy(2, 0.0, PARAMS) == 0.0


def test_driver_energy_uniform_split():
    assert close(driver_energy(2, 16.0, PARAMS), 16.0)


def test_driver_energy_halving_rate_doubles_cost():
    p = MecParams(bandwidth_hz=40e6, driver_target_rate=0.5)
    assert close(driver_energy(2, 16.0, p), 2.0 * driver_energy(2, 16.0, PARAMS))


def test_driver_energy_requires_a_driver():
    with pytest.raises(ConstraintViolation, match="driver"):
        driver_energy(0, 1.0, PARAMS)


# ---------------------------------------------------------------------------
# content cache
# ---------------------------------------------------------------------------


def test_hawkes_no_events():
    assert hawkes_intensity(5.0, CacheModel()) == 0.0


def test_hawkes_event_at_lag_zero():
    model = CacheModel(events=((3.0, 10.0),), decay_slots=4.0)
    assert close(hawkes_intensity(3.0, model), 2.5)


def test_hawkes_future_events_do_not_count():
    model = CacheModel(events=((7.0, 10.0),))
    assert hawkes_intensity(3.0, model) == 0.0


def test_hawkes_decays_toward_spontaneous_rate():
    model = CacheModel(spontaneous_rate=1.0, events=((0.0, 10.0),), decay_slots=4.0)
    values = [hawkes_intensity(float(t), model) for t in range(0, 30)]
    assert all(a >= b for a, b in zip(values, values[1:]))
    assert values[-1] >= 1.0


def test_caching_energy_zero_intensity():
    assert caching_energy(0.0, CacheModel()) == 0.0


def test_caching_energy_product():
    assert close(caching_energy(10.0, CacheModel(energy_per_view=0.5)), 5.0)


def test_caching_energy_linear_in_intensity():
    model = CacheModel(energy_per_view=0.37)
    assert close(caching_energy(6.0, model), 3.0 * caching_energy(2.0, model))


# ---------------------------------------------------------------------------
# the combined breakdown
# ---------------------------------------------------------------------------


def test_total_cost_all_off_system():
    p = BsParams(base_energy=100.0, load_coeff=1.0, sleep_residual=0.1)
    breakdown = total_edge_cost(
        bs_active=[False, False, False],
        bs_loads=[0.0, 0.0, 0.0],
        bs_params=p,
        allocs=[],
        prev_rates=[],
        nic_active=False,
        inbound_mbit=0.0,
        outbound_mbit=0.0,
        n_drivers=0,
        mec_params=PARAMS,
    )
    assert close(breakdown.edge, 3 * 0.1 * 100.0)
    assert breakdown.mec == 0.0


def test_total_cost_worked_slot():
    """Two stations and three containers against an independent recomputation."""
    allocs = [
        make_alloc(40.0, PARAMS, rate=105.0),
        make_alloc(24.0, PARAMS, rate=70.0),
        make_alloc(8.0, PARAMS, rate=50.0),
    ]
    breakdown = total_edge_cost(
        bs_active=[True, True],
        bs_loads=[30.0, 50.0],
        bs_params=SMALL_BS,
        allocs=allocs,
        prev_rates=[50.0, 50.0, 0.0],
        nic_active=True,
        inbound_mbit=72.0,
        outbound_mbit=16.0,
        n_drivers=2,
        mec_params=PARAMS,
        cache_intensity=10.0,
        cache_model=CacheModel(energy_per_view=0.5),
    )
    assert breakdown.bs == (130.0, 150.0)
    assert close(breakdown.comm, 280.0)
    assert close(breakdown.container, 22.02721088435374)
    assert close(breakdown.switching, 29.625)
    assert close(breakdown.offload, 13.105142857142857)
    assert close(breakdown.link, 3.4683096698620797e-11)
    assert close(breakdown.driver, 16.0)
    assert close(breakdown.caching, 5.0)
    assert close(breakdown.mec, 85.75735374153128)
    assert close(breakdown.edge, 365.7573537415313)


def test_total_cost_components_sum_exactly():
    breakdown = total_edge_cost(
        bs_active=[True, False],
        bs_loads=[42.0, 0.0],
        bs_params=SMALL_BS,
        allocs=[make_alloc(33.6, PARAMS)],
        prev_rates=[50.0],
        nic_active=True,
        inbound_mbit=33.6,
        outbound_mbit=33.6,
        n_drivers=1,
        mec_params=PARAMS,
    )
    parts = (
        breakdown.container
        + breakdown.switching
        + breakdown.offload
        + breakdown.link
        + breakdown.driver
        + breakdown.caching
    )
    assert breakdown.mec == parts
    assert breakdown.edge == breakdown.comm + breakdown.mec


@settings(max_examples=150, deadline=None)
@given(
    loads=st.lists(st.floats(min_value=0.0, max_value=80.0), min_size=0, max_size=5),
    prev=st.lists(st.floats(min_value=0.0, max_value=105.0), min_size=0, max_size=5),
    bs_load=st.floats(min_value=0.0, max_value=500.0),
    inbound=st.floats(min_value=0.0, max_value=400.0),
    nic=st.booleans(),
)
def test_every_term_is_non_negative(loads, prev, bs_load, inbound, nic):
    allocs = [make_alloc(l, PARAMS) for l in loads]
    breakdown = total_edge_cost(
        bs_active=[True],
        bs_loads=[bs_load],
        bs_params=SMALL_BS,
        allocs=allocs,
        prev_rates=prev,
        nic_active=nic,
        inbound_mbit=inbound,
        outbound_mbit=sum(loads),
        n_drivers=1 if sum(loads) > 0 else 0,
        mec_params=PARAMS,
    )
    for name in ("container", "switching", "offload", "link", "driver", "caching"):
        assert getattr(breakdown, name) >= 0.0
    assert all(v >= 0.0 for v in breakdown.bs)
    assert breakdown.edge >= 0.0


# ---------------------------------------------------------------------------
# the slot objective
# ---------------------------------------------------------------------------


def test_objective_balanced_with_full_admission():
    assert close(objective(0.5, 100.0, 60.0, 60.0), 50.0)


def test_objective_pure_qos():
    assert close(objective(1.0, 12345.0, 10.0, 4.0), 36.0)


def test_objective_pure_energy():
    assert close(objective(0.0, 777.0, 10.0, 0.0), 777.0)


def test_objective_rejects_weight_outside_unit_interval():
    with pytest.raises(ValueError):
        objective(1.5, 1.0, 1.0, 1.0)


# ---------------------------------------------------------------------------
# processing rates
# ---------------------------------------------------------------------------


def test_min_rate_zero_load():
    assert min_rate_for(0.0, PARAMS) == 0.0


def test_min_rate_picks_smallest_sufficient():
    # 30 Mbit needs 37.5 Mbit/s, the smallest set member above that is 50
    assert min_rate_for(30.0, PARAMS) == 50.0


def test_min_rate_exact_boundary():
    # 40 Mbit / 0.8 s = 50 Mbit/s exactly
    assert min_rate_for(40.0, PARAMS) == 50.0


def test_min_rate_rejects_impossible_load():
    with pytest.raises(ConstraintViolation, match="top rate"):
        min_rate_for(90.0, PARAMS)  # needs 112.5 Mbit/s, top is 105
