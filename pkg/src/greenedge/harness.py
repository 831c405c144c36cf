"""Scenario synthesis, the simulation loop, comparisons and reports.

A scenario is generated from a seed: per-station traffic (one of four day
shapes, scaled to a peak), per-station solar and wind harvest whose scale
grows linearly across the station index (so every cluster size contains the
same mix of energy-poor and energy-rich sites), one harvest trace for the
server, and a handful of tracked users walking between stations.

The run loop is strictly causal. At each slot boundary the active control
law decides on forecast values; the decision's mechanical parts are then
re-derived at the realized values, validated, charged and logged. Reports
are plain rows plus an energy ledger and can be written as CSV or text;
identical seeds produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from . import battery as bat
from . import controller as ctl
from . import energy, forecast, traces
from ._validation import require
from .controller import (
    CONTROLLERS,
    ControllerConfig,
    InfeasibleScenario,
    StepForecasts,
    SystemState,
)
from .energy import BsParams, CacheModel, MecParams

SLOTS_PER_DAY = traces.SLOTS_PER_DAY


@dataclass(frozen=True)
class ScenarioConfig:
    """Every knob of a run; flat so a key=value file maps onto it directly."""

    # scenario shape
    n_bs: int = 12
    days: int = 1
    slot_seconds: float = 1800.0
    seed: int = 1
    algorithm: str = "genm"  # genm | irmc | max_provision
    # objective and search
    weight: float = 0.5
    horizon: int = 3
    admission_grid: tuple[float, ...] = (0.0, 0.5, 1.0)
    sensitive_fraction: float = 0.8
    predictor: str = "seasonal_naive"  # oracle | seasonal_naive | lstm
    # traffic
    bs_load_peak: float = 20.0  # Mbit per slot at the busiest slot
    traffic_noise: float = 0.05
    # harvest
    solar_peak: float = 500e3  # J per slot at the sunniest site
    wind_peak: float = 170e3
    harvest_scale_min: float = 0.05
    harvest_scale_max: float = 1.0
    harvest_noise: float = 0.1
    mec_solar_peak: float = 2e3
    # station energy model
    bs_base_energy: float = 160e3
    bs_load_coeff: float = 600.0
    bs_sleep_residual: float = 0.0
    # batteries
    battery_capacity: float = 490e3
    battery_low_fraction: float = 0.3
    battery_up_fraction: float = 0.7
    battery_leakage: float = 2e-6
    # server parameters
    max_containers: int = 20
    min_containers: int = 1
    idle_energy: float = 4.0
    peak_energy: float = 10.0
    rate_set: tuple[float, ...] = (0.0, 50.0, 70.0, 90.0, 105.0)
    switch_coeff: float = 0.005
    nic_idle_energy: float = 13.1
    nic_share: float = 0.1
    nic_efficiency: float = 1.4
    proc_time_limit: float = 0.8
    deadline: float = 1.0
    bandwidth_hz: float = 40e6
    rate_cap: float = 1e4
    max_load_per_container: float = 80.0
    max_drivers: int = 6
    driver_energy_rate: float = 1.0
    driver_target_rate: float = 1.0
    delay_factor: float = 0.96
    reconfig_seconds: float = 0.02
    batch_slots: float = 1.0
    # content cache
    cache_spontaneous: float = 0.0
    cache_decay_slots: float = 4.0
    cache_energy_per_view: float = 0.5
    cache_events: tuple[tuple[float, float], ...] = ()
    # tracked users
    n_ues: int = 4
    # reactive baseline
    irmc_headroom: float = 0.5
    irmc_sleep_threshold: float = 0.3
    irmc_wake_threshold: float = 0.5
    # predictor training
    predictor_window: int = 48
    predictor_hidden: int = 32
    predictor_epochs: int = 20
    predictor_batch: int = 4
    predictor_lr: float = 0.01
    predictor_train_fraction: float = 0.7

    def __post_init__(self) -> None:
        require(self.n_bs >= 1, "n_bs must be >= 1")
        require(self.days >= 1, "days must be >= 1")
        require(self.algorithm in CONTROLLERS, f"unknown algorithm {self.algorithm!r}")
        require(
            self.predictor in ("oracle", "seasonal_naive", "lstm"),
            f"unknown predictor {self.predictor!r}",
        )
        require(
            0.0 < self.battery_low_fraction < self.battery_up_fraction < 1.0,
            "battery thresholds must satisfy 0 < low < up < 1",
        )
        require(self.n_ues >= 0, "n_ues must be >= 0")

    def mec_params(self) -> MecParams:
        return MecParams(
            max_containers=self.max_containers,
            min_containers=self.min_containers,
            idle_energy=self.idle_energy,
            peak_energy=self.peak_energy,
            rate_set=self.rate_set,
            switch_coeff=self.switch_coeff,
            nic_idle_energy=self.nic_idle_energy,
            nic_share=self.nic_share,
            nic_efficiency=self.nic_efficiency,
            proc_time_limit=self.proc_time_limit,
            deadline=self.deadline,
            bandwidth_hz=self.bandwidth_hz,
            rate_cap=self.rate_cap,
            max_load=self.max_load_per_container,
            max_drivers=self.max_drivers,
            driver_energy_rate=self.driver_energy_rate,
            driver_target_rate=self.driver_target_rate,
            delay_factor=self.delay_factor,
            reconfig_seconds=self.reconfig_seconds,
            batch_slots=self.batch_slots,
        )

    def bs_params(self) -> BsParams:
        return BsParams(
            base_energy=self.bs_base_energy,
            load_coeff=self.bs_load_coeff,
            sleep_residual=self.bs_sleep_residual,
        )

    def battery_template(self) -> bat.Battery:
        return bat.Battery(
            level=self.battery_up_fraction * self.battery_capacity,
            capacity=self.battery_capacity,
            low_threshold=self.battery_low_fraction * self.battery_capacity,
            up_threshold=self.battery_up_fraction * self.battery_capacity,
            leakage=self.battery_leakage,
        )

    def cache_model(self) -> CacheModel:
        return CacheModel(
            spontaneous_rate=self.cache_spontaneous,
            decay_slots=self.cache_decay_slots,
            energy_per_view=self.cache_energy_per_view,
            events=self.cache_events,
        )


@dataclass
class Scenario:
    """Synthesized inputs for one run. Slot 0 of the run maps to trace index
    ``base`` so the forecasters always have a full window of history."""

    cfg: ScenarioConfig
    base: int
    slots: int
    traffic: list[np.ndarray]  # per station, Mbit per slot
    solar: list[np.ndarray]  # per station, J per slot
    wind: list[np.ndarray]
    harvest: list[np.ndarray]  # solar + wind
    mec_harvest: np.ndarray
    bs_peaks: tuple[float, ...]
    ue_paths: np.ndarray  # (n_ues, total trace length) station indices

    def controller_config(self) -> ControllerConfig:
        cfg = self.cfg
        return ControllerConfig(
            bs_params=cfg.bs_params(),
            mec_params=cfg.mec_params(),
            battery_template=cfg.battery_template(),
            mec_battery_template=cfg.battery_template(),
            weight=cfg.weight,
            horizon=cfg.horizon,
            admission_grid=cfg.admission_grid,
            sensitive_fraction=cfg.sensitive_fraction,
            cache_model=cfg.cache_model(),
            bs_load_peaks=self.bs_peaks,
            irmc_headroom=cfg.irmc_headroom,
            irmc_sleep_threshold=cfg.irmc_sleep_threshold,
            irmc_wake_threshold=cfg.irmc_wake_threshold,
        )


def build_scenario(cfg: ScenarioConfig) -> Scenario:
    """Generate every trace a run needs, deterministically from the seed."""
    warmup_days = max(1, math.ceil(cfg.predictor_window / SLOTS_PER_DAY))
    total_days = warmup_days + cfg.days + 1  # one spare day covers lookahead
    base = warmup_days * SLOTS_PER_DAY
    slots = cfg.days * SLOTS_PER_DAY
    n = cfg.n_bs

    traffic, solar, wind, harvest = [], [], [], []
    peaks = []
    for i in range(n):
        cluster = (i % 4) + 1
        shape = traces.synthesize_profile(
            cluster, total_days, seed=[cfg.seed, 100 + i], noise_level=cfg.traffic_noise
        )
        load = shape.as_array() * cfg.bs_load_peak
        traffic.append(load)
        peaks.append(float(load.max()) if load.size else 0.0)
        span = cfg.harvest_scale_max - cfg.harvest_scale_min
        scale = cfg.harvest_scale_min + span * (i / max(1, n - 1))
        s = traces.synthesize_harvest(
            "solar",
            total_days,
            seed=[cfg.seed, 200 + i],
            peak_joules=cfg.solar_peak * scale,
            noise_level=cfg.harvest_noise,
            site_id=f"bs{i}",
        ).as_array()
        w = traces.synthesize_harvest(
            "wind",
            total_days,
            seed=[cfg.seed, 300 + i],
            peak_joules=cfg.wind_peak * scale,
            noise_level=cfg.harvest_noise,
            site_id=f"bs{i}",
        ).as_array()
        solar.append(s)
        wind.append(w)
        harvest.append(s + w)
    mec = traces.synthesize_harvest(
        "solar",
        total_days,
        seed=[cfg.seed, 999],
        peak_joules=cfg.mec_solar_peak,
        noise_level=cfg.harvest_noise,
        site_id="mec",
    ).as_array()

    rng = np.random.default_rng([cfg.seed, 7777])
    length = total_days * SLOTS_PER_DAY
    paths = np.zeros((cfg.n_ues, length), dtype=int)
    for u in range(cfg.n_ues):
        pos = u % n
        for t in range(length):
            paths[u, t] = pos
            move = rng.integers(0, 3)  # stay, step down, step up
            if move == 1:
                pos = (pos - 1) % n
            elif move == 2:
                pos = (pos + 1) % n
    return Scenario(
        cfg=cfg,
        base=base,
        slots=slots,
        traffic=traffic,
        solar=solar,
        wind=wind,
        harvest=harvest,
        mec_harvest=mec,
        bs_peaks=tuple(peaks),
        ue_paths=paths,
    )


# ---------------------------------------------------------------------------
# forecast providers
# ---------------------------------------------------------------------------


class _SeriesForecaster:
    """Wraps one series with a predictor operating on its normalized form."""

    def __init__(self, values: np.ndarray, predictor, horizon: int):
        self.values = values
        self.scale = float(values.max())
        self.norm = values / self.scale if self.scale > 0 else values
        self.predictor = predictor
        self.horizon = horizon

    def forecast(self, at: int) -> np.ndarray:
        """Predicted values for slots at, at+1, ... using history before at."""
        if self.scale <= 0:
            return np.zeros(self.horizon)
        window = self.norm[:at]
        out = np.asarray(self.predictor.predict(window), dtype=float)
        return np.clip(out[: self.horizon], 0.0, 1.0) * self.scale


class ForecastProvider:
    """Builds the per-decision forecast bundle for a scenario."""

    def __init__(self, scn: Scenario):
        self.scn = scn
        self.cfg = scn.cfg
        self.depth = scn.cfg.horizon + 1  # interval tests peek one slot past the horizon
        self.cache_model = scn.cfg.cache_model()
        kind = scn.cfg.predictor
        if kind == "oracle":
            self.site_load = None
            self.site_harvest = None
            self.mec = None
            return
        self.site_load = [
            _SeriesForecaster(v, self._make_predictor(kind, f"load{i}", v), self.depth)
            for i, v in enumerate(scn.traffic)
        ]
        self.site_harvest = [
            _SeriesForecaster(v, self._make_predictor(kind, f"harvest{i}", v), self.depth)
            for i, v in enumerate(scn.harvest)
        ]
        self.mec = _SeriesForecaster(
            scn.mec_harvest, self._make_predictor(kind, "mec", scn.mec_harvest), self.depth
        )

    def _make_predictor(self, kind: str, name: str, values: np.ndarray):
        cfg = self.cfg
        if kind == "seasonal_naive":
            return forecast.SeasonalNaivePredictor(period=SLOTS_PER_DAY, horizon=self.depth)
        pcfg = forecast.PredictorConfig(
            window=cfg.predictor_window,
            horizon=self.depth,
            hidden_units=cfg.predictor_hidden,
            epochs=cfg.predictor_epochs,
            batch_size=cfg.predictor_batch,
            train_fraction=cfg.predictor_train_fraction,
            learning_rate=cfg.predictor_lr,
            seed=cfg.seed,
        )
        scale = float(values.max())
        series = values / scale if scale > 0 else values
        return forecast.fit_predictor(series, pcfg, kind="lstm")

    def at(self, t: int) -> StepForecasts:
        """Forecast bundle for the decision entering run slot *t*."""
        scn, cfg = self.scn, self.cfg
        tau = scn.base + t
        n = cfg.n_bs
        if cfg.predictor == "oracle":
            load_rows = [
                tuple(scn.traffic[i][tau + k] for i in range(n)) for k in range(self.depth)
            ]
            harvest_rows = [
                tuple(scn.harvest[i][tau + k] for i in range(n)) for k in range(self.depth)
            ]
            mec_row = tuple(scn.mec_harvest[tau + k] for k in range(self.depth))
        else:
            site_load = [f.forecast(tau) for f in self.site_load]
            site_harvest = [f.forecast(tau) for f in self.site_harvest]
            load_rows = [tuple(site_load[i][k] for i in range(n)) for k in range(self.depth)]
            harvest_rows = [
                tuple(site_harvest[i][k] for i in range(n)) for k in range(self.depth)
            ]
            mec_row = tuple(self.mec.forecast(tau)[k] for k in range(self.depth))
        demand = tuple(cfg.sensitive_fraction * sum(row) for row in load_rows)
        tolerant = tuple((1.0 - cfg.sensitive_fraction) * sum(row) for row in load_rows)
        targets = tuple(
            tuple(int(v) for v in scn.ue_paths[:, tau + k]) for k in range(self.depth)
        )
        cache = tuple(
            energy.hawkes_intensity(float(t + k), self.cache_model) for k in range(self.depth)
        )
        return StepForecasts(
            demand=demand,
            tolerant=tolerant,
            bs_load=tuple(load_rows),
            bs_harvest=tuple(harvest_rows),
            mec_harvest=mec_row,
            ue_targets=targets,
            cache_intensity=cache,
        )

    def actual(self, t: int) -> StepForecasts:
        """Realized values of run slot *t* (plus the next slot for intervals)."""
        scn, cfg = self.scn, self.cfg
        tau = scn.base + t
        n = cfg.n_bs
        load_rows = [tuple(scn.traffic[i][tau + k] for i in range(n)) for k in range(2)]
        harvest_rows = [tuple(scn.harvest[i][tau + k] for i in range(n)) for k in range(2)]
        total = sum(load_rows[0])
        return StepForecasts(
            demand=(cfg.sensitive_fraction * total,),
            tolerant=((1.0 - cfg.sensitive_fraction) * total,),
            bs_load=tuple(load_rows),
            bs_harvest=tuple(harvest_rows),
            mec_harvest=(float(scn.mec_harvest[tau]),),
            ue_targets=(tuple(int(v) for v in scn.ue_paths[:, tau]),),
            cache_intensity=(energy.hawkes_intensity(float(t), self.cache_model),),
        )


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

REPORT_COLUMNS = (
    "slot",
    "algorithm",
    "L_in",
    "C",
    "M",
    "zeta",
    "active_bs_count",
    "J",
    "theta_edge",
    "theta_mec",
    "theta_comm",
    "demand",
    "tolerant_served",
    "backlog",
    "admission_fraction",
    "fallback",
)


@dataclass
class RunReport:
    config: dict
    algorithm: str
    slots: int
    rows: list[dict]
    ledger: list[bat.EnergyLedgerEntry]
    violations: int = 0
    violation_messages: list[str] = field(default_factory=list)
    fallback_slots: list[int] = field(default_factory=list)
    totals: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        return [row[name] for row in self.rows]


def initial_state(scn: Scenario) -> SystemState:
    template = scn.cfg.battery_template()
    return SystemState(
        slot=0,
        bs_active=tuple([True] * scn.cfg.n_bs),
        bs_levels=tuple([template.level] * scn.cfg.n_bs),
        mec_level=template.level,
        containers=scn.cfg.min_containers,
        prev_rates=tuple([0.0] * scn.cfg.min_containers),
    )


def run_scenario(cfg: ScenarioConfig, scenario: Scenario | None = None) -> RunReport:
    """Simulate one full run of the configured control law."""
    scn = scenario or build_scenario(cfg)
    ccfg = scn.controller_config()
    provider = ForecastProvider(scn)
    law = CONTROLLERS[cfg.algorithm](ccfg)
    state = initial_state(scn)
    rows: list[dict] = []
    ledger: list[bat.EnergyLedgerEntry] = []
    violations = 0
    messages: list[str] = []
    fallback_slots: list[int] = []
    qos_shortfall = 0.0

    for t in range(scn.slots):
        fc = provider.at(t)
        action, stats = law.decide(state, fc)
        if stats.fallback:
            fallback_slots.append(t)
        actual = provider.actual(t)
        applied = law.realize(action, state, actual)
        issues = ctl.validate(applied, state, actual, 0, ccfg)
        if issues:
            violations += len(issues)
            messages.extend(f"slot {t}: {msg}" for msg in issues[:4])
        state, breakdown, entries = ctl.apply_action(
            state, applied, actual, 0, ccfg, with_ledger=True
        )
        ledger.extend(entries)
        slot_cost = energy.objective(
            cfg.weight, breakdown.edge, actual.demand[0], applied.admitted
        )
        qos_shortfall += actual.demand[0] - applied.admitted
        rows.append(
            {
                "slot": t,
                "algorithm": cfg.algorithm,
                "L_in": applied.admitted,
                "C": applied.containers,
                "M": applied.drivers,
                "zeta": int(applied.nic_active),
                "active_bs_count": applied.n_active,
                "J": slot_cost,
                "theta_edge": breakdown.edge,
                "theta_mec": breakdown.mec,
                "theta_comm": breakdown.comm,
                "demand": actual.demand[0],
                "tolerant_served": applied.tolerant_served,
                "backlog": state.backlog,
                "admission_fraction": applied.admission_fraction,
                "fallback": int(stats.fallback),
            }
        )

    totals = {
        "theta_edge": sum(r["theta_edge"] for r in rows),
        "theta_mec": sum(r["theta_mec"] for r in rows),
        "theta_comm": sum(r["theta_comm"] for r in rows),
        "J": sum(r["J"] for r in rows),
        "qos_shortfall_mbit": qos_shortfall,
        "mean_active_bs": sum(r["active_bs_count"] for r in rows) / max(1, len(rows)),
        "ledger_closure": bat.total_closure_error(ledger, cfg.battery_leakage),
    }
    return RunReport(
        config=asdict(cfg),
        algorithm=cfg.algorithm,
        slots=scn.slots,
        rows=rows,
        ledger=ledger,
        violations=violations,
        violation_messages=messages,
        fallback_slots=fallback_slots,
        totals=totals,
    )


# ---------------------------------------------------------------------------
# comparisons and sweeps
# ---------------------------------------------------------------------------


@dataclass
class ComparisonReport:
    config: dict
    algorithm: str
    baseline: str
    overall: dict  # edge / mec / comm savings fractions
    hourly: list[dict]  # hour of day -> savings fractions
    run: RunReport
    baseline_run: RunReport


def _savings(a: float, b: float) -> float:
    if b <= 0.0:
        return 0.0
    return 1.0 - a / b


def compare(
    cfg: ScenarioConfig, baseline: str = "max_provision", scenario: Scenario | None = None
) -> ComparisonReport:
    """Run the configured law and a baseline on identical traces."""
    require(baseline in CONTROLLERS, f"unknown baseline {baseline!r}")
    scn = scenario or build_scenario(cfg)
    run = run_scenario(cfg, scn)
    base_cfg = replace(cfg, algorithm=baseline)
    base_run = run_scenario(base_cfg, scn)
    overall = {
        "edge": _savings(run.totals["theta_edge"], base_run.totals["theta_edge"]),
        "mec": _savings(run.totals["theta_mec"], base_run.totals["theta_mec"]),
        "comm": _savings(run.totals["theta_comm"], base_run.totals["theta_comm"]),
    }
    hourly = []
    for hour in range(24):
        idx = [
            i
            for i in range(len(run.rows))
            if (i % SLOTS_PER_DAY) // 2 == hour
        ]
        row = {"hour": hour}
        for key in ("theta_edge", "theta_mec", "theta_comm"):
            a = sum(run.rows[i][key] for i in idx)
            b = sum(base_run.rows[i][key] for i in idx)
            row[key.replace("theta_", "") + "_savings"] = _savings(a, b)
        hourly.append(row)
    return ComparisonReport(
        config=asdict(cfg),
        algorithm=cfg.algorithm,
        baseline=baseline,
        overall=overall,
        hourly=hourly,
        run=run,
        baseline_run=base_run,
    )


def sweep_bs_group(cfg: ScenarioConfig, sizes: Sequence[int]) -> list[dict]:
    """Savings of the configured law vs max-provision across cluster sizes."""
    require(len(sizes) >= 1, "sizes must not be empty")
    out = []
    for size in sizes:
        cmp_report = compare(replace(cfg, n_bs=int(size)))
        out.append(
            {
                "n_bs": int(size),
                "edge_savings": cmp_report.overall["edge"],
                "mec_savings": cmp_report.overall["mec"],
                "comm_savings": cmp_report.overall["comm"],
            }
        )
    return out


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def emit_report(report: RunReport, path: str, fmt: str = "csv") -> None:
    """Write a run report; CSV for machines, text for people."""
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(REPORT_COLUMNS)
            for row in report.rows:
                writer.writerow([_fmt(row[c]) for c in REPORT_COLUMNS])
        return
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    buf = io.StringIO()
    buf.write(f"algorithm: {report.algorithm}\n")
    buf.write(f"slots: {report.slots}\n")
    for key in sorted(report.totals):
        buf.write(f"{key}: {_fmt(report.totals[key])}\n")
    buf.write(f"violations: {report.violations}\n")
    buf.write(f"fallback_slots: {len(report.fallback_slots)}\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def parse_report_csv(path: str) -> list[dict]:
    """Read back an emit_report CSV into typed rows."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != REPORT_COLUMNS:
            raise ValueError(f"{path}: unexpected report columns {reader.fieldnames}")
        for raw in reader:
            row: dict = {}
            for key, value in raw.items():
                if key in ("slot", "C", "M", "zeta", "active_bs_count", "fallback"):
                    row[key] = int(value)
                elif key == "algorithm":
                    row[key] = value
                else:
                    row[key] = float(value)
            rows.append(row)
    return rows


def emit_comparison(cmp_report: ComparisonReport, path: str, fmt: str = "csv") -> None:
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["hour", "edge_savings", "mec_savings", "comm_savings"])
            for row in cmp_report.hourly:
                writer.writerow(
                    [
                        row["hour"],
                        _fmt(row["edge_savings"]),
                        _fmt(row["mec_savings"]),
                        _fmt(row["comm_savings"]),
                    ]
                )
            writer.writerow(
                [
                    "overall",
                    _fmt(cmp_report.overall["edge"]),
                    _fmt(cmp_report.overall["mec"]),
                    _fmt(cmp_report.overall["comm"]),
                ]
            )
        return
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    with open(path, "w") as fh:
        fh.write(f"{cmp_report.algorithm} vs {cmp_report.baseline}\n")
        for key in ("edge", "mec", "comm"):
            fh.write(f"{key} savings: {100.0 * cmp_report.overall[key]:.1f}%\n")


def emit_sweep(rows: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n_bs", "edge_savings", "mec_savings", "comm_savings"])
        for row in rows:
            writer.writerow(
                [
                    row["n_bs"],
                    _fmt(row["edge_savings"]),
                    _fmt(row["mec_savings"]),
                    _fmt(row["comm_savings"]),
                ]
            )


def export_ledger(report: RunReport, path: str) -> None:
    bat.write_ledger_csv(report.ledger, path)


# ---------------------------------------------------------------------------
# forecast evaluation
# ---------------------------------------------------------------------------


def forecast_accuracy(cfg: ScenarioConfig, kinds: Sequence[str] = ("traffic", "solar", "wind")) -> list[dict]:
    """Held-out forecast error per series kind for the configured predictor.

    Traffic is evaluated on the normalized aggregate demand series, solar
    and wind on the normalized trace of the best-harvesting site.
    """
    require(cfg.predictor in ("seasonal_naive", "lstm"), "forecast evaluation needs a real predictor")
    scn = build_scenario(cfg)
    pcfg = forecast.PredictorConfig(
        window=cfg.predictor_window,
        horizon=cfg.horizon,
        hidden_units=cfg.predictor_hidden,
        epochs=cfg.predictor_epochs,
        batch_size=cfg.predictor_batch,
        train_fraction=cfg.predictor_train_fraction,
        learning_rate=cfg.predictor_lr,
        seed=cfg.seed,
    )
    series_by_kind = {
        "traffic": np.sum(scn.traffic, axis=0),
        "solar": scn.solar[-1],
        "wind": scn.wind[-1],
    }
    out = []
    for kind in kinds:
        require(kind in series_by_kind, f"unknown series kind {kind!r}")
        values = series_by_kind[kind]
        scale = float(values.max())
        series = values / scale if scale > 0 else values
        predictor = forecast.fit_predictor(series, pcfg, kind=cfg.predictor)
        result = forecast.evaluate(predictor, series, pcfg)
        for step, value in enumerate(result["horizon_rmse"], start=1):
            out.append({"kind": kind, "step": step, "rmse": value})
        out.append({"kind": kind, "step": 0, "rmse": result["overall"]})
    return out


def emit_forecast_eval(rows: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "step", "rmse"])
        for row in rows:
            writer.writerow([row["kind"], row["step"], _fmt(row["rmse"])])
