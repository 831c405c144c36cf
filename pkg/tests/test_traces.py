"""Trace loading, resampling and synthesis."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greenedge import traces
from greenedge.traces import (
    SiteTrace,
    aggregate_to_slots,
    cluster_profile,
    denormalize,
    load_trace_csv,
    normalize,
    save_trace_csv,
    split_delay_sensitive,
    synthesize_harvest,
    synthesize_profile,
)

MIN10 = 600.0
MIN15 = 900.0
MIN30 = 1800.0


def make_trace(values, kind="traffic", slot_seconds=MIN30):
    return SiteTrace(site_id="t", kind=kind, slot_seconds=slot_seconds, values=tuple(values))


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


def test_aggregate_sums_consecutive_triples():
    out = aggregate_to_slots([1, 2, 3, 4, 5, 6], MIN10, MIN30)
    assert out.values == (6.0, 15.0)
    assert out.slot_seconds == MIN30


def test_aggregate_pairwise_sums():
    out = aggregate_to_slots([1, 1, 1, 1], MIN15, MIN30)
    assert out.values == (2.0, 2.0)


def test_aggregate_length_arithmetic():
    out = aggregate_to_slots([0.5] * 96, MIN15, MIN30)
    assert len(out) == 48


def test_aggregate_drops_trailing_partial_slot():
    out = aggregate_to_slots([1, 2, 3, 4, 5], MIN10, MIN30)
    assert out.values == (6.0,)


def test_aggregate_rejects_non_integer_ratio():
    with pytest.raises(ValueError, match="integer multiple"):
        aggregate_to_slots([1, 2, 3], 700.0, MIN30)


def test_aggregate_rejects_empty_series():
    with pytest.raises(ValueError):
        aggregate_to_slots([], MIN10, MIN30)


def test_aggregate_accepts_site_trace_input():
    src = make_trace([1, 2, 3, 4, 5, 6], slot_seconds=MIN10)
    out = aggregate_to_slots(src, target_seconds=MIN30)
    assert out.values == (6.0, 15.0)
    assert out.site_id == src.site_id


@settings(max_examples=200, deadline=None)
@given(
    values=st.lists(st.floats(min_value=0.0, max_value=1e6), min_size=6, max_size=60),
    factor=st.integers(min_value=1, max_value=6),
)
def test_aggregate_conserves_mass(values, factor):
    out = aggregate_to_slots(values, 600.0, 600.0 * factor)
    consumed = len(out) * factor
    expected = float(np.sum(np.asarray(values[:consumed])))
    total = sum(out.values)
    assert abs(total - expected) <= 1e-9 * max(1.0, abs(expected))


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------


def test_normalize_divides_by_peak():
    out = normalize(make_trace([0, 5, 10]))
    assert out.values == (0.0, 0.5, 1.0)
    assert out.normalized and out.scale == 10.0


def test_normalize_constant_trace():
    assert normalize(make_trace([3, 3])).values == (1.0, 1.0)


def test_normalize_round_trip_is_identity():
    original = make_trace([0.3, 1.7, 4.4, 0.1])
    back = denormalize(normalize(original))
    for a, b in zip(back.values, original.values):
        assert abs(a - b) <= 1e-12 * max(1.0, abs(b))


def test_normalize_rejects_all_zero_trace():
    with pytest.raises(ValueError, match="maximum"):
        normalize(make_trace([0.0, 0.0]))


def test_denormalize_passes_through_unnormalized_trace():
    t = make_trace([1.0, 2.0])
    assert denormalize(t) is t


# ---------------------------------------------------------------------------
# synthesis
# ---------------------------------------------------------------------------


def test_synthesize_profile_zero_noise_reproduces_shape():
    out = synthesize_profile(1, days=1, seed=7, noise_level=0.0)
    assert out.values == cluster_profile(1).shape
    assert len(out) == 48


def test_synthesize_profile_deterministic():
    a = synthesize_profile(2, days=3, seed=11, noise_level=0.1)
    b = synthesize_profile(2, days=3, seed=11, noise_level=0.1)
    assert a.values == b.values


def test_synthesize_profile_noise_stays_within_three_sigma():
    # > 1e4 slots in total; the noise draws are clipped at three sigmas
    shape = np.asarray(cluster_profile(3).shape)
    checked = 0
    for seed in range(21):
        out = synthesize_profile(3, days=10, seed=seed, noise_level=0.1)
        values = out.as_array().reshape(10, 48)
        for day in values:
            positive = shape > 0
            rel = np.abs(day[positive] - shape[positive]) / shape[positive]
            assert rel.max() <= 0.3 + 1e-12
            assert np.all(day[~positive] == 0.0)
            checked += 48
    assert checked >= 10_000


def test_synthesize_profile_rejects_unknown_cluster():
    with pytest.raises(ValueError, match="cluster_id"):
        synthesize_profile(9, days=1, seed=0)


def test_cluster_profiles_cover_four_shapes():
    for cid in (1, 2, 3, 4):
        profile = cluster_profile(cid)
        assert len(profile.shape) == 48
        assert max(profile.shape) == 1.0


def test_synthesize_harvest_solar_is_zero_at_night():
    out = synthesize_harvest("solar", days=1, seed=3, peak_joules=1000.0)
    values = out.as_array()
    assert values[:10].max() == 0.0  # before dawn
    assert values[20:28].max() > 0.0  # midday


def test_synthesize_harvest_wind_never_sleeps():
    out = synthesize_harvest("wind", days=1, seed=3, peak_joules=1000.0, noise_level=0.0)
    assert out.as_array().min() > 0.0


def test_synthesize_harvest_rejects_unknown_kind():
    with pytest.raises(ValueError, match="solar or wind"):
        synthesize_harvest("tidal", days=1, seed=0, peak_joules=1.0)


# ---------------------------------------------------------------------------
# workload split
# ---------------------------------------------------------------------------


def test_split_default_fraction():
    assert split_delay_sensitive(100.0) == (80.0, 20.0)


def test_split_zero_load():
    assert split_delay_sensitive(0.0) == (0.0, 0.0)


def test_split_half_fraction():
    assert split_delay_sensitive(10.0, fraction=0.5) == (5.0, 5.0)


def test_split_rejects_negative_load():
    with pytest.raises(ValueError, match="non-negative"):
        split_delay_sensitive(-1.0)


@settings(max_examples=200, deadline=None)
@given(
    load=st.floats(min_value=0.0, max_value=1e9),
    fraction=st.floats(min_value=0.0, max_value=1.0),
)
def test_split_partitions_the_load(load, fraction):
    sensitive, tolerant = split_delay_sensitive(load, fraction)
    assert sensitive >= 0.0 and tolerant >= 0.0
    assert abs(sensitive + tolerant - load) <= 1e-12 * max(1.0, load)


# ---------------------------------------------------------------------------
# CSV round trips
# ---------------------------------------------------------------------------


def test_load_csv_two_rows(tmp_path):
    path = tmp_path / "ok.csv"
    path.write_text("timestamp,value\n0,1.5\n1,2.5\n")
    out = load_trace_csv(str(path))
    assert out.values == (1.5, 2.5)


def test_load_csv_negative_value_names_the_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("timestamp,value\n0,1.0\n1,-3.0\n")
    with pytest.raises(ValueError, match="line 3"):
        load_trace_csv(str(path))


def test_load_csv_non_numeric_value_names_the_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("timestamp,value\n0,1.0\n1,oops\n")
    with pytest.raises(ValueError, match="line 3"):
        load_trace_csv(str(path))


def test_load_csv_rejects_non_monotone_timestamps(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("timestamp,value\n5,1.0\n5,2.0\n")
    with pytest.raises(ValueError, match="strictly increasing"):
        load_trace_csv(str(path))


def test_load_csv_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time,load\n0,1.0\n")
    with pytest.raises(ValueError, match="header"):
        load_trace_csv(str(path))


def test_load_csv_accepts_iso_timestamps(tmp_path):
    path = tmp_path / "iso.csv"
    path.write_text(
        "timestamp,value\n2024-05-01T00:00:00,4.0\n2024-05-01T00:15:00,5.0\n"
    )
    out = load_trace_csv(str(path), slot_seconds=MIN15)
    assert out.values == (4.0, 5.0)


def test_csv_then_aggregate_pipeline(tmp_path):
    # a 15-minute solar file resampled onto the simulator's half-hour grid
    path = tmp_path / "solar.csv"
    rows = ["timestamp,value"] + [f"{i},{float(i % 4)}" for i in range(96)]
    path.write_text("\n".join(rows) + "\n")
    fine = load_trace_csv(str(path), kind="solar", slot_seconds=MIN15)
    coarse = aggregate_to_slots(fine, target_seconds=MIN30)
    assert len(coarse) == 48
    assert coarse.kind == "solar"
    assert sum(coarse.values) == sum(fine.values)


def test_save_then_load_round_trip(tmp_path):
    original = make_trace([0.25, 1.75, 3.125])
    path = tmp_path / "trace.csv"
    save_trace_csv(original, str(path))
    back = load_trace_csv(str(path))
    assert back.values == original.values


# ---------------------------------------------------------------------------
# construction guards
# ---------------------------------------------------------------------------


def test_trace_rejects_negative_values():
    with pytest.raises(ValueError, match="slot 1"):
        make_trace([1.0, -0.5])


def test_trace_rejects_unknown_kind():
    with pytest.raises(ValueError, match="kind"):
        make_trace([1.0], kind="rainfall")


def test_normalized_trace_rejects_values_above_one():
    with pytest.raises(ValueError, match="exceeds 1"):
        SiteTrace(
            site_id="t", kind="traffic", slot_seconds=MIN30, values=(0.5, 1.2), normalized=True
        )


def test_trace_as_array_is_float64():
    arr = make_trace([1, 2]).as_array()
    assert arr.dtype == np.float64
    assert math.isclose(arr.sum(), 3.0)
