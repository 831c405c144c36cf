"""Slot-by-slot control of base stations and the edge server.

Three control laws share one action vocabulary and one application path:

* the forecast-driven limited-lookahead controller expands a small tree of
  candidate actions over the forecast horizon and commits the first step of
  the cheapest branch,
* the reactive resource manager scales containers against a fixed headroom
  and toggles stations on load thresholds, one at a time,
* the max-provision baseline pins every resource at its dimensioned peak.

An action fixes the station on/off pattern (with an explicit reroute map
for sleeping stations), the container count and per-container work, the
NIC offload state, the optical driver count, the admission decision and
the grid-energy purchases. Validation of the operating constraints and the
state update are shared by every law, so a cost computed in the search is
exactly the cost charged when the action is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

from . import battery as bat
from . import energy
from ._validation import check_fraction, require
from .battery import Battery
from .energy import BsParams, CacheModel, ConstraintViolation, MecParams


class InfeasibleScenario(RuntimeError):
    """No action satisfies the operating constraints, even the fallback."""


class CapacityExceeded(ConstraintViolation):
    """Demand exceeds what the full container fleet can absorb."""


# ---------------------------------------------------------------------------
# configuration and state types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ControllerConfig:
    """Everything the control laws need that does not change during a run."""

    bs_params: BsParams = BsParams()
    mec_params: MecParams = MecParams()
    battery_template: Battery = Battery(level=343e3)
    mec_battery_template: Battery = Battery(level=343e3)
    weight: float = 0.5  # objective trade-off Gamma
    horizon: int = 3  # lookahead depth T
    admission_grid: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    sensitive_fraction: float = 0.8
    cache_model: CacheModel = CacheModel()
    bs_load_peaks: tuple[float, ...] = ()  # per-station dimensioning peaks, Mbit
    # an absorber must clear the battery floor by this much at the forecast
    # loads, so that realized loads running above forecast cannot push it
    # under the floor
    absorb_margin: float = 15e3
    # fraction of the forecast harvest the purchase planner trusts; below 1
    # it buys whenever the level plus the discounted harvest misses the
    # upper threshold, so a disappointing harvest cannot strand a station
    purchase_caution: float = 0.5
    # inflation applied to forecast loads when capping how much traffic a
    # single absorber may take on (realized arrivals can run this far above
    # the forecast before the battery-floor guarantee breaks)
    absorb_load_slack: float = 0.4
    # reactive-baseline knobs
    irmc_headroom: float = 0.5  # fraction of max_load a container may carry
    irmc_sleep_threshold: float = 0.3  # sleep below this fraction of the peak
    irmc_wake_threshold: float = 0.5  # wake above this fraction of the peak

    def __post_init__(self) -> None:
        check_fraction(self.weight, "weight")
        require(self.horizon >= 1, "horizon must be >= 1")
        require(len(self.admission_grid) >= 1, "admission_grid must not be empty")
        for v in self.admission_grid:
            check_fraction(v, "admission_grid entry")
        require(
            sorted(set(self.admission_grid)) == sorted(self.admission_grid),
            "admission_grid entries must be unique",
        )
        check_fraction(self.sensitive_fraction, "sensitive_fraction")
        check_fraction(self.purchase_caution, "purchase_caution")
        require(self.absorb_load_slack >= 0.0, "absorb_load_slack must be >= 0")
        require(0.0 < self.irmc_headroom <= 1.0, "irmc_headroom must lie in (0, 1]")


@dataclass(frozen=True)
class SystemState:
    """Snapshot of everything the controller can observe at a slot boundary."""

    slot: int
    bs_active: tuple[bool, ...]
    bs_levels: tuple[float, ...]  # per-station battery charge, J
    mec_level: float
    containers: int
    prev_rates: tuple[float, ...]
    backlog: float = 0.0  # delay-tolerant work waiting at the server, Mbit
    pending_output: float = 0.0  # processed results not yet shipped, Mbit

    def __post_init__(self) -> None:
        require(len(self.bs_active) == len(self.bs_levels), "bs_active and bs_levels must align")
        require(self.containers >= 1, "containers must be >= 1")
        require(self.backlog >= -1e-9, "backlog must be non-negative")
        require(self.pending_output >= -1e-9, "pending_output must be non-negative")

    @property
    def n_bs(self) -> int:
        return len(self.bs_active)


@dataclass(frozen=True)
class StepForecasts:
    """Forecasts consumed during one decision, indexed by lookahead depth.

    Loads and harvests carry horizon + 1 entries because interval tests at
    the deepest level still need next-slot projections; the other fields
    carry horizon entries. Entry 0 always refers to the decision slot.
    """

    demand: tuple[float, ...]  # delay-sensitive arrivals at the server, Mbit
    tolerant: tuple[float, ...]  # delay-tolerant arrivals, Mbit
    bs_load: tuple[tuple[float, ...], ...]  # per depth, per station, Mbit
    bs_harvest: tuple[tuple[float, ...], ...]  # per depth, per station, J
    mec_harvest: tuple[float, ...]
    ue_targets: tuple[tuple[int, ...], ...]  # per depth, per tracked user
    cache_intensity: tuple[float, ...] = ()

    def check(self, horizon: int, n_bs: int) -> None:
        require(len(self.demand) >= horizon, "demand forecast shorter than the horizon")
        require(len(self.tolerant) >= horizon, "tolerant forecast shorter than the horizon")
        require(len(self.bs_load) >= horizon + 1, "station load forecast needs horizon + 1 slots")
        require(len(self.bs_harvest) >= horizon + 1, "harvest forecast needs horizon + 1 slots")
        require(len(self.mec_harvest) >= horizon, "server harvest forecast shorter than horizon")
        require(len(self.ue_targets) >= horizon, "user target forecast shorter than horizon")
        for row in self.bs_load:
            require(len(row) == n_bs, "station load row width must equal the station count")
        for row in self.bs_harvest:
            require(len(row) == n_bs, "harvest row width must equal the station count")

    def cache_at(self, k: int) -> float:
        return self.cache_intensity[k] if k < len(self.cache_intensity) else 0.0


@dataclass(frozen=True)
class ControlInput:
    """One slot's worth of decisions, fully determined."""

    bs_active: tuple[bool, ...]
    reroute: tuple[int, ...]  # serving station per station; -1 only for idle orphans
    containers: int
    loads: tuple[float, ...]  # per-container work, Mbit
    rates: tuple[float, ...]  # per-container processing rate, Mbit/s
    nic_active: bool
    drivers: int
    admitted: float  # delay-sensitive Mbit accepted
    tolerant_served: float  # backlog drained this slot, Mbit
    admission_fraction: float
    bs_purchases: tuple[float, ...]
    mec_purchase: float
    load_override: tuple[float, ...] | None = None  # dimensioned station loads

    def __post_init__(self) -> None:
        require(len(self.loads) == self.containers, "loads must have one entry per container")
        require(len(self.rates) == self.containers, "rates must have one entry per container")
        require(len(self.reroute) == len(self.bs_active), "reroute must cover every station")
        total = sum(self.loads)
        require(
            abs(total - (self.admitted + self.tolerant_served)) <= 1e-9 * max(1.0, total),
            "container loads must sum to admitted plus drained work",
        )

    @property
    def n_active(self) -> int:
        return sum(1 for a in self.bs_active if a)


@dataclass
class SearchStats:
    """Bookkeeping from one decision, mostly for tests and reports."""

    nodes_expanded: int = 0
    actions_generated: int = 0
    actions_pruned: int = 0
    depth_widths: tuple[int, ...] = ()
    max_branch: int = 0
    fallback: bool = False
    best_cost: float = math.nan  # accumulated objective of the committed branch


@dataclass(frozen=True)
class SearchNode:
    state: SystemState
    cost: float
    first_action: ControlInput | None
    depth: int


# ---------------------------------------------------------------------------
# interval analysis
# ---------------------------------------------------------------------------


def operating_interval(level_next: float, theta_next: float) -> float:
    """Slots a station can sustain its projected draw on stored energy alone.

    Below 1.0 the station cannot survive the coming slot without buying
    energy, which marks it as a switch-off candidate.
    """
    require(level_next >= 0.0, "level_next must be non-negative")
    require(theta_next >= 0.0, "theta_next must be non-negative")
    if theta_next == 0.0:
        return math.inf
    return level_next / theta_next


def absorption_interval(level_next: float, theta_combined_next: float) -> float:
    """Same ratio for a neighbor that would also carry a sleeper's load.

    At or above 1.0 the neighbor can absorb the extra load on green energy
    and the sleeper may stay off.
    """
    return operating_interval(level_next, theta_combined_next)


def _project_no_purchase(
    level: float, harvested: float, consumed: float, template: Battery
) -> float:
    new_level, _, _ = bat.project_level(
        level, template.capacity, template.leakage, harvested, consumed, 0.0
    )
    return new_level


# ---------------------------------------------------------------------------
# provisioning
# ---------------------------------------------------------------------------


def provision_containers(expected_mbit: float, params: MecParams) -> tuple[float, ...]:
    """Pack an expected workload into the fewest containers that hold it.

    All but the last container are filled to the per-container cap; the
    count is clamped to the configured fleet bounds. Zero demand keeps the
    minimum fleet alive at zero load.
    """
    require(expected_mbit >= 0.0, "expected_mbit must be non-negative")
    cap = params.max_load
    if expected_mbit > params.max_containers * cap * (1.0 + 1e-12):
        raise CapacityExceeded(
            f"expected load {expected_mbit:.3f} Mbit exceeds fleet capacity "
            f"{params.max_containers * cap:.3f} Mbit; reduce admission"
        )
    needed = max(params.min_containers, math.ceil(expected_mbit / cap - 1e-12))
    count = min(needed, params.max_containers)
    loads = [cap] * (count - 1)
    loads.append(expected_mbit - cap * (count - 1))
    if loads[-1] < 0.0:  # expected below the cap of the mandatory minimum fleet
        loads = [expected_mbit] + [0.0] * (count - 1)
    return tuple(loads)


def rates_for(
    loads: Sequence[float],
    params: MecParams,
    prev_rates: Sequence[float] | None = None,
) -> tuple[float, ...]:
    """Processing rates for a load assignment.

    Without history every container gets the smallest admissible rate. With
    *prev_rates* a rate that must rise still jumps straight to the needed
    value, but a rate that may fall descends one step of the rate set per
    slot; the switching cost is quadratic in the jump, so spreading a large
    descent over a few slots is cheaper than paying it at once.
    """
    if prev_rates is None:
        return tuple(energy.min_rate_for(load, params) for load in loads)
    ladder = sorted(set(params.rate_set))
    out = []
    for c, load in enumerate(loads):
        floor_rate = energy.min_rate_for(load, params)
        prev = prev_rates[c] if c < len(prev_rates) else 0.0
        if prev <= floor_rate + 1e-9:
            out.append(floor_rate)
            continue
        below = [r for r in ladder if r < prev - 1e-9]
        out.append(max(floor_rate, below[-1] if below else floor_rate))
    return tuple(out)


# ---------------------------------------------------------------------------
# routing sleeping stations onto awake neighbors
# ---------------------------------------------------------------------------


def _safe_absorb_limit(cfg: ControllerConfig) -> float:
    """Largest combined load one station may carry without risking its floor.

    The purchase policy guarantees a station enters the slot at or above
    the upper threshold (or would have been topped up to it), so its level
    after the slot is at least up_threshold - consumption even if no
    harvest materializes. Keeping consumption within the threshold span
    therefore keeps A3 out of reach of any forecast error; the slack term
    covers realized loads running above the forecast ones.
    """
    if cfg.bs_params.load_coeff <= 0.0:
        return math.inf
    span = (
        cfg.battery_template.up_threshold
        - cfg.battery_template.low_threshold
        - cfg.bs_params.base_energy
    )
    if span <= 0.0:
        return 0.0
    return span / cfg.bs_params.load_coeff / (1.0 + cfg.absorb_load_slack)


@dataclass(frozen=True)
class ServingPlan:
    """Result of routing sleepers onto awake neighbors for one slot."""

    served_now: tuple[float, ...]  # load each station carries this slot
    served_next: tuple[float, ...]  # same assignment at next-slot loads
    reroute: tuple[int, ...]
    orphans: tuple[int, ...]


def resolve_serving(
    modes: Sequence[bool],
    state: SystemState,
    fc: StepForecasts,
    k: int,
    cfg: ControllerConfig,
    *,
    green_gate: bool = True,
) -> ServingPlan:
    """Assign every sleeping station's users to an awake neighbor.

    Sleepers are processed in station order. With the green gate on (the
    lookahead law) each picks the neighbor with the best absorption
    interval given the assignments made so far, and a neighbor only
    qualifies while that interval stays at or above one, so absorption
    never forces an energy purchase. With the gate off (the reactive law
    and the fallback) routing is plain load balancing onto the least
    loaded neighbor. Sleepers nobody can host are reported as orphans,
    never silently dropped.
    """
    n = len(modes)
    loads_now = fc.bs_load[k]
    loads_next = fc.bs_load[k + 1]
    harvest_now = fc.bs_harvest[k]
    carried_now = [loads_now[i] if modes[i] else 0.0 for i in range(n)]
    carried_next = [loads_next[i] if modes[i] else 0.0 for i in range(n)]
    reroute = [i if modes[i] else -1 for i in range(n)]
    orphans: list[int] = []
    active = [i for i in range(n) if modes[i]]
    load_limit = _safe_absorb_limit(cfg)
    for j in range(n):
        if modes[j]:
            continue
        if not active:
            orphans.append(j)
            continue
        if green_gate:
            floor = cfg.battery_template.low_threshold + cfg.absorb_margin
            best_idx, best_x = -1, -math.inf
            for i in active:
                if (
                    carried_now[i] + loads_now[j] > load_limit
                    or carried_next[i] + loads_next[j] > load_limit
                ):
                    continue
                theta_now = energy.bs_energy(True, carried_now[i] + loads_now[j], cfg.bs_params)
                theta_next = energy.bs_energy(True, carried_next[i] + loads_next[j], cfg.bs_params)
                level_next = _project_no_purchase(
                    state.bs_levels[i], harvest_now[i], theta_now, cfg.battery_template
                )
                if level_next < floor:
                    continue
                x = absorption_interval(level_next, theta_next)
                if x > best_x + 1e-12:
                    best_idx, best_x = i, x
            if best_x < 1.0:
                orphans.append(j)
                continue
        else:
            best_idx = min(active, key=lambda i: (carried_now[i], i))
        reroute[j] = best_idx
        carried_now[best_idx] += loads_now[j]
        carried_next[best_idx] += loads_next[j]
    return ServingPlan(
        served_now=tuple(carried_now),
        served_next=tuple(carried_next),
        reroute=tuple(reroute),
        orphans=tuple(orphans),
    )


def _stabilize_modes(
    modes: Sequence[bool],
    state: SystemState,
    fc: StepForecasts,
    k: int,
    cfg: ControllerConfig,
    *,
    green_gate: bool = True,
) -> tuple[tuple[bool, ...], ServingPlan]:
    """Wake orphaned sleepers until every user has a serving station."""
    current = list(modes)
    for _ in range(len(current) + 1):
        plan = resolve_serving(current, state, fc, k, cfg, green_gate=green_gate)
        loaded_orphans = [
            j for j in plan.orphans if fc.bs_load[k][j] > 0.0 or fc.bs_load[k + 1][j] > 0.0
        ]
        if not loaded_orphans:
            return tuple(current), plan
        for j in loaded_orphans:
            current[j] = True
    raise InfeasibleScenario("orphan resolution failed to converge")  # pragma: no cover


def wake_candidates(state: SystemState, fc: StepForecasts, k: int, cfg: ControllerConfig) -> tuple[int, ...]:
    """Sleeping stations worth considering for a wake-up this slot.

    A station qualifies when at least one tracked user is heading toward it
    and its battery would clear the deficiency threshold next slot.
    """
    targets = set(fc.ue_targets[k])
    out = []
    for n in range(state.n_bs):
        if state.bs_active[n] or n not in targets:
            continue
        idle_draw = cfg.bs_params.sleep_residual * cfg.bs_params.base_energy
        level_next = _project_no_purchase(
            state.bs_levels[n], fc.bs_harvest[k][n], idle_draw, cfg.battery_template
        )
        if level_next > cfg.battery_template.low_threshold:
            out.append(n)
    return tuple(out)


# ---------------------------------------------------------------------------
# building concrete actions
# ---------------------------------------------------------------------------


def _planned_purchases(
    state: SystemState, fc: StepForecasts, k: int, cfg: ControllerConfig
) -> tuple[tuple[float, ...], float]:
    trust = cfg.purchase_caution
    bs = tuple(
        bat.plan_purchase(
            replace(cfg.battery_template, level=state.bs_levels[n]),
            trust * fc.bs_harvest[k][n],
        )
        for n in range(state.n_bs)
    )
    mec = bat.plan_purchase(
        replace(cfg.mec_battery_template, level=state.mec_level),
        trust * fc.mec_harvest[k],
    )
    return bs, mec


def build_control(
    modes: Sequence[bool],
    reroute: Sequence[int],
    fraction: float,
    demand: float,
    tolerant_in: float,
    state: SystemState,
    purchases: tuple[tuple[float, ...], float],
    cfg: ControllerConfig,
    *,
    containers: int | None = None,
    rate_floor: float | None = None,
    headroom: float = 1.0,
    even_split: bool = False,
    load_override: tuple[float, ...] | None = None,
    rate_memory: bool = False,
) -> ControlInput:
    """Derive the full action from the genuinely free decisions.

    The free decisions are the station pattern and the admission fraction
    (plus, for the baselines, a fixed container count or rate floor). The
    container fleet, per-container work, processing rates, NIC state and
    driver count all follow mechanically, so the search only branches on
    what actually matters.
    """
    params = cfg.mec_params
    cap = params.max_load * headroom
    admitted = fraction * demand
    if containers is None:
        loads = provision_containers(admitted, params)
        count = len(loads)
    else:
        count = containers
        admitted = min(admitted, count * cap)
    spare = count * cap - admitted
    drained = min(state.backlog, max(0.0, spare))
    total = admitted + drained
    if even_split:
        share = total / count
        loads = tuple([share] * count)
    elif containers is not None:
        packed = [cap] * int(total // cap)
        if len(packed) < count:
            packed.append(total - cap * len(packed))
        packed.extend([0.0] * (count - len(packed)))
        loads = tuple(packed[:count])
    else:
        loads = provision_containers(total, params)
        count = len(loads)
        if rate_memory and count < state.containers and total > 0.9 * count * cap:
            # scale-down damping: forecast noise around a packing boundary
            # would otherwise open and close a container every other slot,
            # and each flip costs quadratic switching energy
            count = min(state.containers, count + 1)
            packed = [cap] * int(total // cap)
            if len(packed) < count:
                packed.append(total - cap * len(packed))
            packed.extend([0.0] * (count - len(packed)))
            loads = tuple(packed[:count])
    rates = list(rates_for(loads, params, state.prev_rates if rate_memory else None))
    if rate_floor is not None:
        rates = [max(r, rate_floor) for r in rates]
    inbound = admitted + tolerant_in
    emit = _emits_output(state.slot, params)
    outbound = state.pending_output + total if emit else 0.0
    n_targets = sum(1 for m in modes if m)
    drivers = energy.driver_count(n_targets, params) if outbound > 0.0 else 0
    return ControlInput(
        bs_active=tuple(bool(m) for m in modes),
        reroute=tuple(reroute),
        containers=count,
        loads=tuple(loads),
        rates=tuple(rates),
        nic_active=inbound > 0.0,
        drivers=drivers,
        admitted=admitted,
        tolerant_served=drained,
        admission_fraction=fraction,
        bs_purchases=purchases[0],
        mec_purchase=purchases[1],
        load_override=load_override,
    )


def _emits_output(slot: int, params: MecParams) -> bool:
    period = max(1, round(params.batch_slots))
    return (slot + 1) % period == 0


def enumerate_actions(
    state: SystemState, fc: StepForecasts, k: int, cfg: ControllerConfig
) -> list[ControlInput]:
    """All candidate actions for one tree node.

    Station plans: keep the current pattern (with forced wake-ups for
    sleepers nobody can host), switch off the worst sustained-interval
    station whose load a neighbor can absorb, or wake one candidate that
    users are moving toward. Each plan is crossed with the admission grid.
    """
    purchases = _planned_purchases(state, fc, k, cfg)
    keep_modes, keep_plan = _stabilize_modes(state.bs_active, state, fc, k, cfg)
    plans: list[tuple[tuple[bool, ...], ServingPlan]] = [(keep_modes, keep_plan)]

    # switch-off plans: stations that cannot survive the coming slot on
    # stored-plus-harvested energy alone. One plan turns off just the worst
    # of them, one turns off every candidate at once (the stabilizer wakes
    # back whichever of them no neighbor can absorb); the tree keeps both
    # because the cautious move sometimes beats the aggressive one.
    off_candidates: list[tuple[float, int]] = []
    for n in range(state.n_bs):
        if not keep_modes[n]:
            continue
        theta_now = energy.bs_energy(True, keep_plan.served_now[n], cfg.bs_params)
        theta_next = energy.bs_energy(True, keep_plan.served_next[n], cfg.bs_params)
        level_next = _project_no_purchase(
            state.bs_levels[n], fc.bs_harvest[k][n], theta_now, cfg.battery_template
        )
        interval = operating_interval(level_next, theta_next)
        if interval < 1.0:
            off_candidates.append((interval, n))
    off_candidates.sort()
    if off_candidates and sum(keep_modes) > 1:
        worst_idx = off_candidates[0][1]
        trial = list(keep_modes)
        trial[worst_idx] = False
        off_modes, off_plan = _stabilize_modes(trial, state, fc, k, cfg)
        if not off_modes[worst_idx] and all(off_modes != m for m, _ in plans):
            plans.append((off_modes, off_plan))
    if len(off_candidates) > 1 and sum(keep_modes) > 1:
        trial = list(keep_modes)
        for _, n in off_candidates[: sum(keep_modes) - 1]:
            trial[n] = False
        batch_modes, batch_plan = _stabilize_modes(trial, state, fc, k, cfg)
        if sum(batch_modes) >= 1 and all(batch_modes != m for m, _ in plans):
            plans.append((batch_modes, batch_plan))

    for candidate in wake_candidates(state, fc, k, cfg):
        if keep_modes[candidate]:
            continue
        trial = list(keep_modes)
        trial[candidate] = True
        woken, woken_plan = _stabilize_modes(trial, state, fc, k, cfg)
        if all(woken != m for m, _ in plans):
            plans.append((woken, woken_plan))

    fleet_cap = cfg.mec_params.max_containers * cfg.mec_params.max_load
    actions = []
    for modes, plan in plans:
        for fraction in cfg.admission_grid:
            if fraction * fc.demand[k] > fleet_cap * (1.0 + 1e-12):
                continue
            actions.append(
                build_control(
                    modes,
                    plan.reroute,
                    fraction,
                    fc.demand[k],
                    fc.tolerant[k],
                    state,
                    purchases,
                    cfg,
                    rate_memory=True,
                )
            )
    return actions


# ---------------------------------------------------------------------------
# constraint validation
# ---------------------------------------------------------------------------


def validate(
    action: ControlInput, state: SystemState, fc: StepForecasts, k: int, cfg: ControllerConfig
) -> list[str]:
    """Check every operating constraint; an empty list means feasible."""
    params = cfg.mec_params
    issues: list[str] = []
    if not params.min_containers <= action.containers <= params.max_containers:
        issues.append(
            f"containers {action.containers} outside "
            f"[{params.min_containers}, {params.max_containers}]"
        )
    rate_values = sorted(set(params.rate_set))
    for c, (load, rate) in enumerate(zip(action.loads, action.rates)):
        if load < -1e-9 or load > params.max_load * (1.0 + 1e-9):
            issues.append(f"container {c} load {load:.3f} Mbit outside [0, {params.max_load}]")
        if rate < -1e-9 or rate > params.max_rate * (1.0 + 1e-9):
            issues.append(f"container {c} rate {rate:.3f} outside [0, {params.max_rate}]")
        if min(abs(rate - rv) for rv in rate_values) > 1e-9:
            issues.append(f"container {c} rate {rate:.3f} not in the configured rate set")
        if load > 0.0:
            if rate <= 0.0:
                issues.append(f"container {c} has load but no processing rate")
            elif load / rate > params.proc_time_limit * (1.0 + 1e-9):
                issues.append(
                    f"container {c} processing time {load / rate:.4f}s exceeds "
                    f"the {params.proc_time_limit}s budget"
                )
            radio = energy.radio_rate_for(load, params)
            round_trip = 2.0 * (load / radio) + params.proc_time_limit
            if abs(round_trip - params.deadline) > 1e-9:
                issues.append(f"container {c} round trip {round_trip:.6f}s misses the deadline")
    total_radio = sum(energy.radio_rate_for(l, params) for l in action.loads)
    if total_radio > params.rate_cap * (1.0 + 1e-9):
        issues.append(f"total radio rate {total_radio:.1f} exceeds the cap {params.rate_cap}")
    if action.admitted < -1e-9 or action.admitted > fc.demand[k] * (1.0 + 1e-9) + 1e-9:
        issues.append(f"admitted {action.admitted:.3f} outside [0, demand {fc.demand[k]:.3f}]")
    if action.tolerant_served > state.backlog + 1e-9:
        issues.append("drained more backlog than exists")

    for n in range(state.n_bs):
        if not action.bs_active[n]:
            target = action.reroute[n]
            if target >= 0 and not action.bs_active[target]:
                issues.append(f"station {n} rerouted to sleeping station {target}")
            if target < 0 and fc.bs_load[k][n] > 0.0:
                issues.append(f"station {n} is off with load and no serving neighbor")

    served = _served_loads(action, fc.bs_load[k])
    for n in range(state.n_bs):
        try:
            consumed = energy.bs_energy(action.bs_active[n], served[n], cfg.bs_params)
        except ValueError as exc:
            issues.append(f"station {n}: {exc}")
            continue
        available = state.bs_levels[n] + fc.bs_harvest[k][n] + action.bs_purchases[n]
        if consumed > available + 1e-6:
            issues.append(
                f"station {n} draw {consumed:.1f} J exceeds available {available:.1f} J"
            )
            continue
        level_next, _, _ = bat.project_level(
            state.bs_levels[n],
            cfg.battery_template.capacity,
            cfg.battery_template.leakage,
            fc.bs_harvest[k][n],
            consumed,
            action.bs_purchases[n],
        )
        if level_next < cfg.battery_template.low_threshold - 1e-6:
            issues.append(
                f"station {n} battery would end at {level_next:.1f} J, "
                f"below the floor {cfg.battery_template.low_threshold:.1f} J"
            )
    try:
        mec_cost = _mec_cost(action, state, fc, k, cfg)
    except ConstraintViolation as exc:
        issues.append(str(exc))
        return issues
    if mec_cost > state.mec_level + 1e-6:
        issues.append(
            f"server draw {mec_cost:.1f} J exceeds its stored energy {state.mec_level:.1f} J"
        )
    return issues


def _served_loads(action: ControlInput, loads_now: Sequence[float]) -> tuple[float, ...]:
    if action.load_override is not None:
        return action.load_override
    served = [0.0] * len(action.bs_active)
    for j, target in enumerate(action.reroute):
        if target >= 0:
            served[target] += loads_now[j]
    return tuple(served)


def _mec_cost(
    action: ControlInput, state: SystemState, fc: StepForecasts, k: int, cfg: ControllerConfig
) -> float:
    params = cfg.mec_params
    allocs = [energy.make_alloc(l, params, rate=r) for l, r in zip(action.loads, action.rates)]
    emit = _emits_output(state.slot, params)
    outbound = state.pending_output + sum(action.loads) if emit else 0.0
    return (
        energy.container_energy(allocs, params)
        + energy.switching_energy(state.prev_rates, action.rates, params.switch_coeff)
        + energy.offload_energy(action.nic_active, action.admitted + fc.tolerant[k], params)
        + energy.link_energy(allocs, params)
        + energy.driver_energy(action.drivers, outbound, params)
        + energy.caching_energy(fc.cache_at(k), cfg.cache_model)
    )


# ---------------------------------------------------------------------------
# applying an action
# ---------------------------------------------------------------------------


def apply_action(
    state: SystemState,
    action: ControlInput,
    fc: StepForecasts,
    k: int,
    cfg: ControllerConfig,
    *,
    with_ledger: bool = False,
) -> tuple[SystemState, energy.CostBreakdown, list[bat.EnergyLedgerEntry]]:
    """Charge an action's energy, step every battery and roll the state.

    The same routine serves the lookahead tree (with forecast values) and
    the simulation loop (with realized values), so planned and charged
    costs come from identical code.
    """
    served = _served_loads(action, fc.bs_load[k])
    params = cfg.mec_params
    allocs = [energy.make_alloc(l, params, rate=r) for l, r in zip(action.loads, action.rates)]
    emit = _emits_output(state.slot, params)
    outbound = state.pending_output + sum(action.loads) if emit else 0.0
    breakdown = energy.total_edge_cost(
        action.bs_active,
        served,
        cfg.bs_params,
        allocs,
        state.prev_rates,
        action.nic_active,
        action.admitted + fc.tolerant[k],
        outbound,
        action.drivers,
        params,
        cache_intensity=fc.cache_at(k),
        cache_model=cfg.cache_model,
    )
    entries: list[bat.EnergyLedgerEntry] = []
    new_levels = []
    for n in range(state.n_bs):
        template = replace(cfg.battery_template, level=state.bs_levels[n])
        stepped, entry = bat.step(
            template,
            fc.bs_harvest[k][n],
            breakdown.bs[n],
            action.bs_purchases[n],
            slot=state.slot,
            site=f"bs{n}",
        )
        new_levels.append(stepped.level)
        if with_ledger:
            entries.append(entry)
    mec_template = replace(cfg.mec_battery_template, level=state.mec_level)
    mec_stepped, mec_entry = bat.step(
        mec_template,
        fc.mec_harvest[k],
        breakdown.mec,
        action.mec_purchase,
        slot=state.slot,
        site="mec",
    )
    if with_ledger:
        entries.append(mec_entry)
    backlog = state.backlog + fc.tolerant[k] - action.tolerant_served
    require(backlog >= -1e-6, "backlog went negative")
    pending = 0.0 if emit else state.pending_output + sum(action.loads)
    next_state = SystemState(
        slot=state.slot + 1,
        bs_active=action.bs_active,
        bs_levels=tuple(new_levels),
        mec_level=mec_stepped.level,
        containers=action.containers,
        prev_rates=action.rates,
        backlog=max(0.0, backlog),
        pending_output=pending,
    )
    return next_state, breakdown, entries


predict_next_state = apply_action


# ---------------------------------------------------------------------------
# the three control laws
# ---------------------------------------------------------------------------


def _rank_key(node: SearchNode) -> tuple:
    action = node.first_action
    assert action is not None
    return (
        node.cost,
        -action.admitted,
        action.n_active,
        tuple(0 if a else 1 for a in action.bs_active),
        -action.tolerant_served,
    )


def genm_step(
    state: SystemState, fc: StepForecasts, cfg: ControllerConfig
) -> tuple[ControlInput, SearchStats]:
    """One decision of the limited-lookahead law.

    Breadth-first expansion of every feasible action sequence over the
    forecast horizon; the first action of the cheapest accumulated-cost
    branch is committed. Ties prefer higher admission, then fewer active
    stations, then the lexicographically smallest off-pattern.
    """
    fc.check(cfg.horizon, state.n_bs)
    stats = SearchStats()
    frontier = [SearchNode(state=state, cost=0.0, first_action=None, depth=0)]
    widths = []
    for k in range(cfg.horizon):
        next_frontier: list[SearchNode] = []
        for node in frontier:
            stats.nodes_expanded += 1
            actions = enumerate_actions(node.state, fc, k, cfg)
            stats.actions_generated += len(actions)
            stats.max_branch = max(stats.max_branch, len(actions))
            for action in actions:
                if validate(action, node.state, fc, k, cfg):
                    stats.actions_pruned += 1
                    continue
                try:
                    child, breakdown, _ = apply_action(node.state, action, fc, k, cfg)
                except (bat.EnergyDeficit, ConstraintViolation):
                    stats.actions_pruned += 1
                    continue
                slot_cost = energy.objective(
                    cfg.weight, breakdown.edge, fc.demand[k], action.admitted
                )
                next_frontier.append(
                    SearchNode(
                        state=child,
                        cost=node.cost + slot_cost,
                        first_action=node.first_action or action,
                        depth=k + 1,
                    )
                )
        if not next_frontier:
            break
        frontier = next_frontier
        widths.append(len(frontier))
    stats.depth_widths = tuple(widths)
    survivors = [n for n in frontier if n.first_action is not None]
    if not survivors:
        stats.fallback = True
        action = _fallback_action(state, fc, cfg)
        if validate(action, state, fc, 0, cfg):
            raise InfeasibleScenario(
                "no feasible action exists, including the keep-everything fallback"
            )
        return action, stats
    best = min(survivors, key=_rank_key)
    assert best.first_action is not None
    stats.best_cost = best.cost
    return best.first_action, stats


def _fallback_action(state: SystemState, fc: StepForecasts, cfg: ControllerConfig) -> ControlInput:
    """Last resort: keep the pattern, admit nothing, buy energy everywhere."""
    purchases = _planned_purchases(state, fc, 0, cfg)
    modes, plan = _stabilize_modes(state.bs_active, state, fc, 0, cfg, green_gate=False)
    return build_control(
        modes, plan.reroute, 0.0, fc.demand[0], fc.tolerant[0], state, purchases, cfg,
        rate_memory=True,
    )


def irmc_step(
    state: SystemState, fc: StepForecasts, cfg: ControllerConfig
) -> tuple[ControlInput, SearchStats]:
    """One decision of the reactive resource manager.

    Containers are scaled to the next-slot demand under a fixed headroom
    margin, shrinking at most one per slot. Stations sleep when their own
    forecast load falls below a fraction of their dimensioning peak and the
    least-loaded neighbor takes their users; they wake symmetrically. The
    NIC offload engine is simply left on. No admission control, no
    lookahead, no energy awareness beyond the hard constraints.
    """
    fc.check(1, state.n_bs)
    stats = SearchStats(nodes_expanded=1)
    params = cfg.mec_params
    # without harvest forecasts the purchase rule cannot risk waiting for
    # energy that may not arrive, so it tops every battery up whenever the
    # level alone sits below the upper threshold
    bs_buy = tuple(
        bat.plan_purchase(replace(cfg.battery_template, level=state.bs_levels[n]), 0.0)
        for n in range(state.n_bs)
    )
    mec_buy = bat.plan_purchase(replace(cfg.mec_battery_template, level=state.mec_level), 0.0)
    purchases = (bs_buy, mec_buy)
    peaks = cfg.bs_load_peaks or tuple([max(fc.bs_load[0]) or 1.0] * state.n_bs)

    modes = list(state.bs_active)
    for n in range(state.n_bs):
        if not modes[n] and fc.bs_load[0][n] >= cfg.irmc_wake_threshold * peaks[n]:
            modes[n] = True
    sleep_candidates = [
        n
        for n in range(state.n_bs)
        if modes[n] and fc.bs_load[0][n] < cfg.irmc_sleep_threshold * peaks[n]
    ]
    sleep_candidates.sort(key=lambda n: (fc.bs_load[0][n], n))
    chosen_off = None
    if sleep_candidates and sum(modes) > 1:
        chosen_off = sleep_candidates[0]
        modes[chosen_off] = False
    modes_t, plan = _stabilize_modes(modes, state, fc, 0, cfg, green_gate=False)

    cap = params.max_load * cfg.irmc_headroom
    demand = fc.demand[0]
    offered = demand + state.backlog  # arrivals plus queued work, the usual scaling signal
    needed = max(params.min_containers, math.ceil(offered / cap - 1e-12))
    needed = min(needed, params.max_containers)
    if needed < state.containers:
        count = state.containers - 1  # shed capacity one container at a time
    else:
        count = needed

    def build(modes_b, reroute_b):
        return build_control(
            modes_b,
            reroute_b,
            1.0,
            demand,
            fc.tolerant[0],
            state,
            purchases,
            cfg,
            containers=count,
            headroom=cfg.irmc_headroom,
            even_split=True,
        )

    action = build(modes_t, plan.reroute)
    if validate(action, state, fc, 0, cfg) and chosen_off is not None:
        # the sleep move broke a constraint; revoke it and keep the wake-ups
        modes[chosen_off] = True
        modes_t, plan = _stabilize_modes(modes, state, fc, 0, cfg, green_gate=False)
        action = build(modes_t, plan.reroute)
    if validate(action, state, fc, 0, cfg):
        raise InfeasibleScenario("reactive manager found no feasible action")
    return action, stats


def max_provision_step(
    state: SystemState, fc: StepForecasts, cfg: ControllerConfig
) -> tuple[ControlInput, SearchStats]:
    """The no-management baseline: everything runs at its dimensioned peak.

    Every station stays on and is charged for its peak capacity, the full
    container fleet runs at the top processing rate, the NIC stays on and
    all demand is admitted.
    """
    fc.check(1, state.n_bs)
    stats = SearchStats(nodes_expanded=1)
    params = cfg.mec_params
    purchases = _planned_purchases(state, fc, 0, cfg)
    modes = tuple([True] * state.n_bs)
    reroute = tuple(range(state.n_bs))
    peaks = cfg.bs_load_peaks or fc.bs_load[0]
    action = build_control(
        modes,
        reroute,
        1.0,
        fc.demand[0],
        fc.tolerant[0],
        state,
        purchases,
        cfg,
        containers=params.max_containers,
        rate_floor=params.max_rate,
        load_override=tuple(peaks),
    )
    if validate(action, state, fc, 0, cfg):
        raise InfeasibleScenario("max-provision baseline is infeasible for this scenario")
    return action, stats


class GenmController:
    """Estimator-style wrapper around the lookahead law."""

    def __init__(self, cfg: ControllerConfig):
        self.cfg = cfg

    def decide(self, state: SystemState, fc: StepForecasts) -> tuple[ControlInput, SearchStats]:
        return genm_step(state, fc, self.cfg)

    def realize(self, action: ControlInput, state: SystemState, actual: StepForecasts) -> ControlInput:
        """Re-derive the mechanical parts of a decision at realized traffic.

        The committed decisions (station pattern, routing, container count,
        admission fraction, purchases) stand; loads, rates, NIC state and
        drivers follow the realized arrivals instead of the forecast ones.
        """
        return build_control(
            action.bs_active,
            action.reroute,
            action.admission_fraction,
            actual.demand[0],
            actual.tolerant[0],
            state,
            (action.bs_purchases, action.mec_purchase),
            self.cfg,
            containers=action.containers,
            rate_memory=True,
        )


class IrmcController:
    """Stateful wrapper for the reactive law.

    The law itself is forecast-free: each decision is based on the last
    realized measurements (persistence), so the wrapper records what
    actually happened each slot and feeds it to the next decision. The
    very first slot has no measurement yet and falls back to the provided
    forecast bundle.
    """

    def __init__(self, cfg: ControllerConfig):
        self.cfg = cfg
        self._measured: StepForecasts | None = None

    def decide(self, state: SystemState, fc: StepForecasts) -> tuple[ControlInput, SearchStats]:
        return irmc_step(state, self._measured or fc, self.cfg)

    def realize(self, action: ControlInput, state: SystemState, actual: StepForecasts) -> ControlInput:
        self._measured = StepForecasts(
            demand=(actual.demand[0],),
            tolerant=(actual.tolerant[0],),
            bs_load=(actual.bs_load[0], actual.bs_load[0]),
            bs_harvest=(actual.bs_harvest[0], actual.bs_harvest[0]),
            mec_harvest=(actual.mec_harvest[0],),
            ue_targets=(actual.ue_targets[0],),
            cache_intensity=(actual.cache_at(0),),
        )
        return build_control(
            action.bs_active,
            action.reroute,
            action.admission_fraction,
            actual.demand[0],
            actual.tolerant[0],
            state,
            (action.bs_purchases, action.mec_purchase),
            self.cfg,
            containers=action.containers,
            headroom=self.cfg.irmc_headroom,
            even_split=True,
        )


class MaxProvisionController:
    def __init__(self, cfg: ControllerConfig):
        self.cfg = cfg

    def decide(self, state: SystemState, fc: StepForecasts) -> tuple[ControlInput, SearchStats]:
        return max_provision_step(state, fc, self.cfg)

    def realize(self, action: ControlInput, state: SystemState, actual: StepForecasts) -> ControlInput:
        return build_control(
            action.bs_active,
            action.reroute,
            action.admission_fraction,
            actual.demand[0],
            actual.tolerant[0],
            state,
            (action.bs_purchases, action.mec_purchase),
            self.cfg,
            containers=self.cfg.mec_params.max_containers,
            rate_floor=self.cfg.mec_params.max_rate,
            load_override=action.load_override,
        )


CONTROLLERS = {
    "genm": GenmController,
    "irmc": IrmcController,
    "max_provision": MaxProvisionController,
}
