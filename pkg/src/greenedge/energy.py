"""Per-slot energy model for the edge system.

Conventions used by every routine here:

* energy is joules per slot,
* workloads are Mbit per slot (1 MB = 8 Mbit),
* rates are Mbit/s, except radio bandwidth which is in Hz,
* times are seconds.

The edge total splits into the radio side (one term per base station) and
the server side (containers, rate switching, NIC offload, radio links back
to the users, optical drivers toward the base stations, and content
caching). Each term has its own routine so callers can report them
separately; ``total_edge_cost`` combines them without duplicating any
formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from ._validation import check_fraction, check_non_negative, require

MBIT_PER_MB = 8.0
GBIT_PER_MBIT = 1e-3


class ConstraintViolation(ValueError):
    """A hard operating constraint would be violated."""


@dataclass(frozen=True)
class BsParams:
    """Radio-side energy model of one base station."""

    base_energy: float = 160e3  # J per slot while powered on
    load_coeff: float = 600.0  # J per Mbit carried
    sleep_residual: float = 0.0  # fraction of base_energy drawn while off

    def __post_init__(self) -> None:
        check_non_negative(self.base_energy, "base_energy")
        check_non_negative(self.load_coeff, "load_coeff")
        check_fraction(self.sleep_residual, "sleep_residual")


@dataclass(frozen=True)
class MecParams:
    """Server-side parameters. Defaults follow the reference deployment."""

    max_containers: int = 20  # C_max
    min_containers: int = 1  # floor kept alive even when idle
    idle_energy: float = 4.0  # J per slot per running container
    peak_energy: float = 10.0  # J per slot at the top processing rate
    rate_set: tuple[float, ...] = (0.0, 50.0, 70.0, 90.0, 105.0)  # Mbit/s
    switch_coeff: float = 0.005  # J per (Mbit/s)^2 of rate change
    nic_idle_energy: float = 13.1  # J per slot while the offload engine is on
    nic_share: float = 0.1  # fraction of inbound traffic the NIC handles
    nic_efficiency: float = 1.4  # Gbit processed per joule
    proc_time_limit: float = 0.8  # seconds available for computation per slot
    deadline: float = 1.0  # seconds, end-to-end round-trip bound
    bandwidth_hz: float = 1e6  # per-container radio bandwidth W_c
    noise_density: float = 10.0 ** (-20.4)  # W/Hz (-174 dBm/Hz)
    channel_gain: float = 1.0
    rate_cap: float = 1e4  # Mbit/s, total radio rate budget
    exp_guard: float = 60.0  # largest tolerated exponent in the power law
    max_load: float = 80.0  # Mbit per container per slot (10 MB)
    max_drivers: int = 6
    driver_energy_rate: float = 1.0  # J/s drawn by one active optical driver
    driver_target_rate: float = 1.0  # Mbit/s sustained toward each station
    delay_factor: float = 0.96
    reconfig_seconds: float = 0.02  # optical reconfiguration delay sigma
    batch_slots: float = 1.0  # output batching interval rho

    def __post_init__(self) -> None:
        require(self.max_containers >= 1, "max_containers must be >= 1")
        require(
            1 <= self.min_containers <= self.max_containers,
            "min_containers must lie in [1, max_containers]",
        )
        require(len(self.rate_set) > 0 and min(self.rate_set) >= 0.0, "rate_set must be non-negative")
        require(max(self.rate_set) > 0.0, "rate_set needs a positive top rate")
        require(0.0 < self.proc_time_limit < self.deadline, "need 0 < proc_time_limit < deadline")
        check_non_negative(self.idle_energy, "idle_energy")
        require(self.peak_energy >= self.idle_energy, "peak_energy must be >= idle_energy")
        check_non_negative(self.switch_coeff, "switch_coeff")
        require(self.bandwidth_hz > 0, "bandwidth_hz must be positive")
        require(self.nic_efficiency > 0, "nic_efficiency must be positive")
        require(self.max_drivers >= 1, "max_drivers must be >= 1")
        require(self.driver_target_rate > 0, "driver_target_rate must be positive")
        require(0.0 < self.delay_factor <= 1.0, "delay_factor must lie in (0, 1]")
        require(self.reconfig_seconds > 0, "reconfig_seconds must be positive")
        require(self.batch_slots > 0, "batch_slots must be positive")

    @property
    def max_rate(self) -> float:
        return max(self.rate_set)

    @property
    def transfer_budget(self) -> float:
        """Seconds available for the two radio transfers of a request."""
        return self.deadline - self.proc_time_limit


@dataclass(frozen=True)
class ContainerAlloc:
    """Work assigned to one running container for one slot."""

    load: float  # Mbit admitted this slot
    rate: float  # processing rate f_c in Mbit/s, from the finite set
    radio_rate: float  # downlink rate r_c in Mbit/s
    utilization: float  # psi_c = (f_c / f_max)^2

    def __post_init__(self) -> None:
        check_non_negative(self.load, "load")
        check_non_negative(self.rate, "rate")
        check_non_negative(self.radio_rate, "radio_rate")
        require(0.0 <= self.utilization <= 1.0 + 1e-12, f"utilization out of [0, 1]: {self.utilization}")


@dataclass(frozen=True)
class CacheModel:
    """Self-exciting view-rate model for cached content.

    ``events`` are (time, weight) pairs; the intensity at time t adds
    weight * exp(-(t - t_i) / decay) / decay for every event at t_i <= t,
    on top of the spontaneous rate.
    """

    spontaneous_rate: float = 0.0  # views per slot with no events
    decay_slots: float = 4.0
    energy_per_view: float = 0.5  # transfer plus cache write, J
    events: tuple[tuple[float, float], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        check_non_negative(self.spontaneous_rate, "spontaneous_rate")
        require(self.decay_slots > 0, "decay_slots must be positive")
        check_non_negative(self.energy_per_view, "energy_per_view")
        for t, w in self.events:
            check_non_negative(w, "event weight")


@dataclass(frozen=True)
class CostBreakdown:
    """All edge energy terms for one slot, in joules."""

    bs: tuple[float, ...]  # one entry per base station
    container: float
    switching: float
    offload: float
    link: float
    driver: float
    caching: float

    @property
    def comm(self) -> float:
        return sum(self.bs)

    @property
    def mec(self) -> float:
        return self.container + self.switching + self.offload + self.link + self.driver + self.caching

    @property
    def edge(self) -> float:
        return self.comm + self.mec


def bs_energy(active: bool, load_mbit: float, params: BsParams) -> float:
    """Energy of one base station for one slot.

    An active station draws its base energy plus an affine load term; a
    sleeping one draws only the configured residual and must carry no load.
    """
    check_non_negative(load_mbit, "load_mbit")
    if not active:
        if load_mbit > 0.0:
            raise ValueError("a sleeping base station cannot carry load")
        return params.sleep_residual * params.base_energy
    return params.base_energy + params.load_coeff * load_mbit


def min_rate_for(load_mbit: float, params: MecParams) -> float:
    """Smallest rate in the finite set that finishes *load_mbit* in time.

    The processing time load / rate must fit the per-slot budget; zero load
    maps to the zero rate.
    """
    check_non_negative(load_mbit, "load_mbit")
    if load_mbit == 0.0:
        return 0.0
    needed = load_mbit / params.proc_time_limit
    for rate in sorted(params.rate_set):
        if rate > 0.0 and rate >= needed - 1e-12:
            return rate
    raise ConstraintViolation(
        f"load {load_mbit} Mbit needs rate {needed:.3f} Mbit/s, above the top rate {params.max_rate}"
    )


def radio_rate_for(load_mbit: float, params: MecParams) -> float:
    """Downlink rate that exactly meets the round-trip deadline.

    Uplink and downlink transfers of a request take load / rate each; the
    deadline leaves transfer_budget seconds for the two of them, so the
    tight choice is 2 * load / transfer_budget. Zero load needs no link.
    """
    check_non_negative(load_mbit, "load_mbit")
    if load_mbit == 0.0:
        return 0.0
    return 2.0 * load_mbit / params.transfer_budget


def make_alloc(load_mbit: float, params: MecParams, rate: float | None = None) -> ContainerAlloc:
    """Bundle one container's slot allocation, deriving rates from the load."""
    if rate is None:
        rate = min_rate_for(load_mbit, params)
    utilization = (rate / params.max_rate) ** 2
    return ContainerAlloc(
        load=load_mbit,
        rate=rate,
        radio_rate=radio_rate_for(load_mbit, params),
        utilization=utilization,
    )


def container_energy(allocs: Sequence[ContainerAlloc], params: MecParams) -> float:
    """Idle-plus-utilization energy of the running containers."""
    total = 0.0
    for alloc in allocs:
        total += params.idle_energy + alloc.utilization * (params.peak_energy - params.idle_energy)
    return total


def switching_energy(
    prev_rates: Sequence[float], rates: Sequence[float], coeff: float
) -> float:
    """Quadratic penalty on per-container processing-rate changes.

    Containers present on only one side are treated as running at rate zero
    on the other, which charges spin-up and spin-down at the same rate.
    """
    check_non_negative(coeff, "coeff")
    n = max(len(prev_rates), len(rates))
    total = 0.0
    for i in range(n):
        before = prev_rates[i] if i < len(prev_rates) else 0.0
        after = rates[i] if i < len(rates) else 0.0
        total += coeff * (after - before) ** 2
    return total


def offload_energy(nic_active: bool, inbound_mbit: float, params: MecParams) -> float:
    """NIC offload engine energy: zero when off, idle plus traffic when on."""
    check_non_negative(inbound_mbit, "inbound_mbit")
    if not nic_active:
        return 0.0
    inbound_gbit = inbound_mbit * GBIT_PER_MBIT
    return params.nic_idle_energy + params.nic_share * inbound_gbit / params.nic_efficiency


def link_power(radio_rate_mbps: float, params: MecParams) -> float:
    """Transmission power (W) sustaining *radio_rate_mbps* on one link."""
    check_non_negative(radio_rate_mbps, "radio_rate_mbps")
    if radio_rate_mbps == 0.0:
        return 0.0
    exponent = radio_rate_mbps * 1e6 / params.bandwidth_hz
    if exponent > params.exp_guard:
        raise ConstraintViolation(
            f"spectral load {exponent:.1f} bit/s/Hz exceeds the guard {params.exp_guard}; "
            "the power law would overflow"
        )
    floor = params.bandwidth_hz * params.noise_density / params.channel_gain
    return floor * (2.0 ** exponent - 1.0)


def transfer_time(load_mbit: float, radio_rate_mbps: float) -> float:
    """Seconds to move *load_mbit* over a link at *radio_rate_mbps*."""
    check_non_negative(load_mbit, "load_mbit")
    if load_mbit == 0.0:
        return 0.0
    require(radio_rate_mbps > 0.0, "positive load needs a positive radio rate")
    return load_mbit / radio_rate_mbps


def round_trip(load_mbit: float, radio_rate_mbps: float, params: MecParams) -> float:
    """Worst-case round trip: uplink, full processing budget, downlink."""
    return 2.0 * transfer_time(load_mbit, radio_rate_mbps) + params.proc_time_limit


def link_energy(allocs: Sequence[ContainerAlloc], params: MecParams) -> float:
    """Radio energy of all container links for one slot, with the rate cap."""
    total_rate = sum(a.radio_rate for a in allocs)
    if total_rate > params.rate_cap * (1.0 + 1e-12):
        raise ConstraintViolation(
            f"total radio rate {total_rate:.1f} Mbit/s exceeds the cap {params.rate_cap}"
        )
    total = 0.0
    for a in allocs:
        if a.load == 0.0:
            continue
        total += 2.0 * link_power(a.radio_rate, params) * transfer_time(a.load, a.radio_rate)
    return total


def driver_count(n_targets: int, params: MecParams) -> int:
    """Optical drivers needed to reach *n_targets* stations in time.

    The count balances reconfiguration overhead against parallelism and is
    clamped to the installed drivers; no targets means no driver runs.
    """
    require(n_targets >= 0, "n_targets must be >= 0")
    if n_targets == 0:
        return 0
    omega = math.sqrt(params.batch_slots / (params.reconfig_seconds * n_targets))
    raw = math.ceil((1.0 / params.delay_factor) * ((omega + 1.0) / omega) ** 2)
    return max(1, min(params.max_drivers, raw))


def driver_energy(n_drivers: int, outbound_mbit: float, params: MecParams) -> float:
    """Energy of the active optical drivers pushing results back out.

    The outbound volume is split uniformly across drivers; each runs for
    share / target_rate seconds at its fixed power draw.
    """
    require(n_drivers >= 0, "n_drivers must be >= 0")
    check_non_negative(outbound_mbit, "outbound_mbit")
    if outbound_mbit == 0.0:
        return 0.0
    if n_drivers == 0:
        raise ConstraintViolation("outbound traffic present but no optical driver active")
    share = outbound_mbit / n_drivers
    return n_drivers * params.driver_energy_rate * share / params.driver_target_rate


def hawkes_intensity(t: float, model: CacheModel) -> float:
    """Expected content views per slot at time *t* (slots)."""
    rate = model.spontaneous_rate
    for t_i, weight in model.events:
        if t_i <= t:
            rate += weight * math.exp(-(t - t_i) / model.decay_slots) / model.decay_slots
    return rate


def caching_energy(intensity: float, model: CacheModel) -> float:
    """Energy of serving and refreshing cached content at *intensity*."""
    check_non_negative(intensity, "intensity")
    return intensity * model.energy_per_view


def total_edge_cost(
    bs_active: Sequence[bool],
    bs_loads: Sequence[float],
    bs_params: BsParams,
    allocs: Sequence[ContainerAlloc],
    prev_rates: Sequence[float],
    nic_active: bool,
    inbound_mbit: float,
    outbound_mbit: float,
    n_drivers: int,
    mec_params: MecParams,
    cache_intensity: float = 0.0,
    cache_model: CacheModel | None = None,
) -> CostBreakdown:
    """Combine every per-slot energy term into one breakdown.

    This is the single evaluation path used by the controller's search, the
    baselines and the reporting code, so their numbers agree bit for bit.
    """
    require(len(bs_active) == len(bs_loads), "bs_active and bs_loads must align")
    cache = cache_model or CacheModel()
    return CostBreakdown(
        bs=tuple(bs_energy(a, l, bs_params) for a, l in zip(bs_active, bs_loads)),
        container=container_energy(allocs, mec_params),
        switching=switching_energy(prev_rates, [a.rate for a in allocs], mec_params.switch_coeff),
        offload=offload_energy(nic_active, inbound_mbit, mec_params),
        link=link_energy(allocs, mec_params),
        driver=driver_energy(n_drivers, outbound_mbit, mec_params),
        caching=caching_energy(cache_intensity, cache),
    )


def objective(weight: float, edge_energy: float, demand_mbit: float, admitted_mbit: float) -> float:
    """Scalar slot cost: weighted energy plus squared admission shortfall."""
    check_fraction(weight, "weight")
    check_non_negative(demand_mbit, "demand_mbit")
    check_non_negative(admitted_mbit, "admitted_mbit")
    shortfall = demand_mbit - admitted_mbit
    return (1.0 - weight) * edge_energy + weight * shortfall * shortfall
