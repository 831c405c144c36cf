"""Scenario synthesis, the run loop, comparisons, sweeps and report files."""

from dataclasses import replace

import numpy as np
import pytest

from greenedge.harness import (
    SLOTS_PER_DAY,
    ForecastProvider,
    REPORT_COLUMNS,
    ScenarioConfig,
    build_scenario,
    compare,
    emit_comparison,
    emit_forecast_eval,
    emit_report,
    emit_sweep,
    export_ledger,
    forecast_accuracy,
    initial_state,
    parse_report_csv,
    run_scenario,
    sweep_bs_group,
)

TINY = ScenarioConfig(n_bs=3, days=1, seed=7, algorithm="genm", horizon=2, predictor="oracle")


@pytest.fixture(scope="module")
def tiny_run():
    return run_scenario(TINY)


# ---------------------------------------------------------------------------
# scenario synthesis
# ---------------------------------------------------------------------------


def test_scenario_shapes_and_indexing():
    scn = build_scenario(TINY)
    total = (1 + TINY.days + 1) * SLOTS_PER_DAY  # warmup + run + lookahead spare
    assert scn.base == SLOTS_PER_DAY
    assert scn.slots == TINY.days * SLOTS_PER_DAY
    assert len(scn.traffic) == TINY.n_bs
    assert all(trace.shape == (total,) for trace in scn.traffic)
    assert scn.mec_harvest.shape == (total,)
    assert scn.ue_paths.shape == (TINY.n_ues, total)
    assert np.all(scn.ue_paths >= 0) and np.all(scn.ue_paths < TINY.n_bs)


def test_scenario_harvest_is_solar_plus_wind():
    scn = build_scenario(TINY)
    for s, w, h in zip(scn.solar, scn.wind, scn.harvest):
        assert np.array_equal(h, s + w)


def test_scenario_peaks_match_traffic():
    scn = build_scenario(TINY)
    assert scn.bs_peaks == tuple(float(t.max()) for t in scn.traffic)


def test_scenario_is_deterministic():
    a = build_scenario(TINY)
    b = build_scenario(TINY)
    for x, y in zip(a.traffic, b.traffic):
        assert np.array_equal(x, y)
    for x, y in zip(a.harvest, b.harvest):
        assert np.array_equal(x, y)
    assert np.array_equal(a.ue_paths, b.ue_paths)


def test_initial_state_starts_topped_up_and_all_on():
    scn = build_scenario(TINY)
    state = initial_state(scn)
    expected = TINY.battery_up_fraction * TINY.battery_capacity
    assert state.bs_active == (True,) * TINY.n_bs
    assert state.bs_levels == (expected,) * TINY.n_bs
    assert state.mec_level == expected
    assert state.containers == TINY.min_containers
    assert state.prev_rates == (0.0,) * TINY.min_containers


def test_oracle_provider_reproduces_the_traces():
    scn = build_scenario(TINY)
    provider = ForecastProvider(scn)
    fc = provider.at(5)
    tau = scn.base + 5
    for k in range(TINY.horizon + 1):
        assert fc.bs_load[k] == tuple(scn.traffic[i][tau + k] for i in range(TINY.n_bs))
        assert fc.bs_harvest[k] == tuple(scn.harvest[i][tau + k] for i in range(TINY.n_bs))
    total = sum(fc.bs_load[0])
    assert fc.demand[0] == pytest.approx(TINY.sensitive_fraction * total)
    assert fc.tolerant[0] == pytest.approx((1.0 - TINY.sensitive_fraction) * total)
    actual = provider.actual(5)
    assert actual.bs_load[0] == fc.bs_load[0]
    assert actual.demand[0] == pytest.approx(fc.demand[0])


# ---------------------------------------------------------------------------
# the run loop
# ---------------------------------------------------------------------------


def test_run_covers_every_slot_cleanly(tiny_run):
    assert tiny_run.slots == SLOTS_PER_DAY
    assert [row["slot"] for row in tiny_run.rows] == list(range(SLOTS_PER_DAY))
    assert tiny_run.violations == 0
    assert tiny_run.fallback_slots == []


def test_run_ledger_covers_every_site_and_closes(tiny_run):
    assert len(tiny_run.ledger) == SLOTS_PER_DAY * (TINY.n_bs + 1)
    assert tiny_run.totals["ledger_closure"] <= 1e-6


def test_run_totals_aggregate_the_rows(tiny_run):
    for key in ("theta_edge", "theta_mec", "theta_comm", "J"):
        assert tiny_run.totals[key] == pytest.approx(sum(r[key] for r in tiny_run.rows))
    assert tiny_run.totals["mean_active_bs"] <= TINY.n_bs


def test_run_keeps_batteries_inside_their_range(tiny_run):
    capacity = TINY.battery_capacity
    floor = TINY.battery_low_fraction * capacity
    for entry in tiny_run.ledger:
        assert -1e-9 <= entry.level_after <= capacity * (1.0 + 1e-12)
        if entry.site != "mec":
            assert entry.level_after >= floor - 1e-6


def test_max_provision_pins_the_fleet_every_slot():
    report = run_scenario(replace(TINY, algorithm="max_provision"))
    assert all(row["C"] == TINY.max_containers for row in report.rows)
    assert all(row["active_bs_count"] == TINY.n_bs for row in report.rows)
    assert all(row["admission_fraction"] == 1.0 for row in report.rows)
    assert report.violations == 0


def test_zero_traffic_day_idles_the_server():
    report = run_scenario(replace(TINY, bs_load_peak=0.0))
    assert all(row["C"] == TINY.min_containers for row in report.rows)
    assert all(row["M"] == 0 for row in report.rows)
    assert all(row["zeta"] == 0 for row in report.rows)
    assert report.totals["qos_shortfall_mbit"] == pytest.approx(0.0)


def test_identical_seeds_give_identical_reports(tmp_path):
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    emit_report(run_scenario(TINY), str(first), fmt="csv")
    emit_report(run_scenario(TINY), str(second), fmt="csv")
    assert first.read_bytes() == second.read_bytes()


def test_different_seeds_give_different_traffic():
    a = build_scenario(TINY)
    b = build_scenario(replace(TINY, seed=8))
    assert not np.array_equal(a.traffic[0], b.traffic[0])


# ---------------------------------------------------------------------------
# comparisons and sweeps
# ---------------------------------------------------------------------------


def test_compare_against_itself_yields_zero_savings():
    result = compare(TINY, baseline="genm")
    assert result.overall == {"edge": 0.0, "mec": 0.0, "comm": 0.0}


def test_compare_has_one_row_per_hour():
    result = compare(replace(TINY, algorithm="max_provision"))
    assert [row["hour"] for row in result.hourly] == list(range(24))
    for row in result.hourly:
        assert set(row) == {"hour", "edge_savings", "mec_savings", "comm_savings"}


def test_sweep_carries_one_row_per_size():
    rows = sweep_bs_group(replace(TINY, algorithm="max_provision"), sizes=(2, 3))
    assert [r["n_bs"] for r in rows] == [2, 3]
    assert all(r["edge_savings"] == 0.0 for r in rows)  # the law is its own baseline


def test_sweep_rejects_an_empty_size_list():
    with pytest.raises(ValueError, match="sizes"):
        sweep_bs_group(TINY, sizes=())


# ---------------------------------------------------------------------------
# report files
# ---------------------------------------------------------------------------


def test_report_csv_round_trip(tiny_run, tmp_path):
    path = tmp_path / "report.csv"
    emit_report(tiny_run, str(path), fmt="csv")
    rows = parse_report_csv(str(path))
    assert len(rows) == len(tiny_run.rows)
    for parsed, original in zip(rows, tiny_run.rows):
        assert parsed["slot"] == original["slot"]
        assert parsed["algorithm"] == original["algorithm"]
        for key in ("C", "M", "zeta", "active_bs_count", "fallback"):
            assert parsed[key] == original[key]
            assert isinstance(parsed[key], int)
        for key in ("J", "theta_edge", "theta_mec", "theta_comm", "demand"):
            assert parsed[key] == pytest.approx(original[key], rel=1e-10)


def test_report_csv_has_the_documented_header(tiny_run, tmp_path):
    path = tmp_path / "report.csv"
    emit_report(tiny_run, str(path), fmt="csv")
    header = path.read_text().splitlines()[0]
    assert header == ",".join(REPORT_COLUMNS)
    assert len(path.read_text().splitlines()) == 1 + SLOTS_PER_DAY


def test_parse_rejects_a_foreign_header(tmp_path):
    path = tmp_path / "junk.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError, match="columns"):
        parse_report_csv(str(path))


def test_text_report_summarizes_totals(tiny_run, tmp_path):
    path = tmp_path / "report.txt"
    emit_report(tiny_run, str(path), fmt="text")
    text = path.read_text()
    assert "algorithm: genm" in text
    assert "theta_edge:" in text
    assert "violations: 0" in text


def test_report_rejects_unknown_formats(tiny_run, tmp_path):
    with pytest.raises(ValueError, match="format"):
        emit_report(tiny_run, str(tmp_path / "x"), fmt="yaml")


def test_comparison_csv_and_text(tmp_path):
    result = compare(replace(TINY, algorithm="max_provision"))
    csv_path = tmp_path / "cmp.csv"
    emit_comparison(result, str(csv_path), fmt="csv")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "hour,edge_savings,mec_savings,comm_savings"
    assert len(lines) == 1 + 24 + 1  # header, hours, overall
    assert lines[-1].startswith("overall,")
    text_path = tmp_path / "cmp.txt"
    emit_comparison(result, str(text_path), fmt="text")
    assert "edge savings:" in text_path.read_text()


def test_sweep_csv_schema(tmp_path):
    rows = [{"n_bs": 5, "edge_savings": 0.5, "mec_savings": 0.25, "comm_savings": 0.5}]
    path = tmp_path / "sweep.csv"
    emit_sweep(rows, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "n_bs,edge_savings,mec_savings,comm_savings"
    assert lines[1] == "5,0.5,0.25,0.5"


def test_ledger_export_schema(tiny_run, tmp_path):
    path = tmp_path / "ledger.csv"
    export_ledger(tiny_run, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "slot,site,H,theta,E,b_before,b_after"
    assert len(lines) == 1 + len(tiny_run.ledger)


# ---------------------------------------------------------------------------
# forecast evaluation
# ---------------------------------------------------------------------------


def test_forecast_accuracy_rows_cover_steps_and_overall():
    cfg = replace(TINY, predictor="seasonal_naive", days=2, horizon=3)
    rows = forecast_accuracy(cfg, kinds=("traffic",))
    steps = [row["step"] for row in rows]
    assert steps == [1, 2, 3, 0]
    assert all(row["rmse"] >= 0.0 for row in rows)


def test_forecast_accuracy_rejects_unknown_kinds():
    cfg = replace(TINY, predictor="seasonal_naive")
    with pytest.raises(ValueError, match="kind"):
        forecast_accuracy(cfg, kinds=("tides",))


def test_forecast_accuracy_needs_a_real_predictor():
    with pytest.raises(ValueError, match="predictor"):
        forecast_accuracy(TINY, kinds=("traffic",))


def test_forecast_eval_csv(tmp_path):
    rows = [{"kind": "traffic", "step": 1, "rmse": 0.0125}]
    path = tmp_path / "eval.csv"
    emit_forecast_eval(rows, str(path))
    assert path.read_text().splitlines() == ["kind,step,rmse", "traffic,1,0.0125"]
