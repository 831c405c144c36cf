"""Workload and harvest time series: loading, resampling, synthesis.

All series are half-open slot grids: entry i covers [i*slot_seconds,
(i+1)*slot_seconds). Traffic values are Mbit per slot, harvest values are
joules per slot. Normalized traces live in [0, 1] and remember the scale
they were divided by so they can be inverted.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from datetime import datetime
from importlib import resources
from typing import Sequence

import numpy as np

from ._validation import require

TRACE_KINDS = ("traffic", "solar", "wind")

# day geometry used throughout: 30-minute slots, 48 per day
SLOTS_PER_DAY = 48
DEFAULT_SLOT_SECONDS = 1800.0


@dataclass(frozen=True)
class SiteTrace:
    """A per-site time series on a fixed slot grid."""

    site_id: str
    kind: str  # one of TRACE_KINDS
    slot_seconds: float
    values: tuple[float, ...]
    normalized: bool = False
    scale: float = 1.0  # divisor applied when normalized, 1.0 otherwise

    def __post_init__(self) -> None:
        require(self.kind in TRACE_KINDS, f"unknown trace kind {self.kind!r}")
        require(self.slot_seconds > 0, "slot_seconds must be positive")
        require(len(self.values) > 0, "trace must contain at least one slot")
        for i, v in enumerate(self.values):
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"trace value at slot {i} must be finite and >= 0, got {v}")
            if self.normalized and v > 1.0 + 1e-12:
                raise ValueError(f"normalized trace value at slot {i} exceeds 1: {v}")

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class ClusterProfile:
    """One canonical day shape (48 half-hour slots, peak normalized to 1)."""

    cluster_id: int
    shape: tuple[float, ...]

    def __post_init__(self) -> None:
        require(len(self.shape) == SLOTS_PER_DAY, "cluster shape must have 48 slots")
        for v in self.shape:
            require(0.0 <= v <= 1.0, f"cluster shape values must lie in [0, 1], got {v}")


def _load_cluster_table() -> dict[int, tuple[float, ...]]:
    table: dict[int, list[float]] = {}
    path = resources.files("greenedge.data").joinpath("cluster_shapes.csv")
    with path.open("r") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            table.setdefault(int(row["cluster_id"]), []).append(float(row["value"]))
    return {cid: tuple(vals) for cid, vals in table.items()}


_CLUSTER_CACHE: dict[int, tuple[float, ...]] | None = None


def cluster_profile(cluster_id: int) -> ClusterProfile:
    """Return the bundled day shape for one of the four usage clusters."""
    global _CLUSTER_CACHE
    if _CLUSTER_CACHE is None:
        _CLUSTER_CACHE = _load_cluster_table()
    if cluster_id not in _CLUSTER_CACHE:
        raise ValueError(f"cluster_id must be one of {sorted(_CLUSTER_CACHE)}, got {cluster_id}")
    return ClusterProfile(cluster_id=cluster_id, shape=_CLUSTER_CACHE[cluster_id])


def aggregate_to_slots(
    series: Sequence[float] | SiteTrace,
    source_seconds: float | None = None,
    target_seconds: float = DEFAULT_SLOT_SECONDS,
    *,
    site_id: str = "aggregate",
    kind: str = "traffic",
) -> SiteTrace:
    """Sum a finer-resolution series into coarser slots.

    The target resolution must be an integer multiple of the source
    resolution; each output slot is the sum of the source samples it covers
    and any trailing partial slot is dropped.
    """
    if isinstance(series, SiteTrace):
        if source_seconds is None:
            source_seconds = series.slot_seconds
        site_id, kind = series.site_id, series.kind
        values = series.values
    else:
        values = tuple(float(v) for v in series)
    require(source_seconds is not None and source_seconds > 0, "source resolution must be positive")
    require(target_seconds > 0, "target resolution must be positive")
    ratio = target_seconds / source_seconds
    factor = round(ratio)
    if factor < 1 or abs(ratio - factor) > 1e-9:
        raise ValueError(
            f"target resolution {target_seconds}s is not an integer multiple "
            f"of source resolution {source_seconds}s"
        )
    require(len(values) > 0, "cannot aggregate an empty series")
    n_out = len(values) // factor
    if n_out == 0:
        raise ValueError(
            f"series of {len(values)} samples is shorter than one target slot ({factor} samples)"
        )
    arr = np.asarray(values[: n_out * factor], dtype=float)
    sums = arr.reshape(n_out, factor).sum(axis=1)
    return SiteTrace(
        site_id=site_id,
        kind=kind,
        slot_seconds=float(target_seconds),
        values=tuple(float(v) for v in sums),
    )


def normalize(trace: SiteTrace) -> SiteTrace:
    """Scale a trace by its maximum so values lie in [0, 1]."""
    peak = max(trace.values)
    if peak <= 0.0:
        raise ValueError("cannot normalize a trace whose maximum is not positive")
    values = tuple(v / peak for v in trace.values)
    return replace(trace, values=values, normalized=True, scale=peak)


def denormalize(trace: SiteTrace) -> SiteTrace:
    """Invert normalize(); returns the trace in original units."""
    if not trace.normalized:
        return trace
    values = tuple(v * trace.scale for v in trace.values)
    return replace(trace, values=values, normalized=False, scale=1.0)


def synthesize_profile(
    cluster_id: int,
    days: int,
    seed: int,
    noise_level: float = 0.1,
    *,
    site_id: str | None = None,
) -> SiteTrace:
    """Tile a cluster day shape over *days* with multiplicative noise.

    Noise draws are standard normals clipped to three sigmas, so every slot
    stays within +-3*noise_level (relative) of the underlying shape and the
    result is reproducible for a given seed.
    """
    require(days >= 1, "days must be >= 1")
    require(0.0 <= noise_level < 1.0 / 3.0, "noise_level must lie in [0, 1/3)")
    profile = cluster_profile(cluster_id)
    base = np.tile(np.asarray(profile.shape, dtype=float), days)
    rng = np.random.default_rng(seed)
    g = np.clip(rng.standard_normal(base.size), -3.0, 3.0)
    values = base * (1.0 + noise_level * g)
    values = np.clip(values, 0.0, None)
    return SiteTrace(
        site_id=site_id or f"cluster{cluster_id}",
        kind="traffic",
        slot_seconds=DEFAULT_SLOT_SECONDS,
        values=tuple(float(v) for v in values),
        normalized=False,
    )


def solar_day_shape() -> np.ndarray:
    """Normalized solar harvest day shape: daylight bell centered at noon."""
    hours = np.arange(SLOTS_PER_DAY) * 0.5
    out = np.zeros(SLOTS_PER_DAY)
    daylight = np.abs(hours - 12.0) < 6.0
    out[daylight] = np.cos(np.pi * (hours[daylight] - 12.0) / 12.0) ** 1.5
    return out


def wind_day_shape() -> np.ndarray:
    """Normalized wind harvest day shape: broad, stronger overnight."""
    hours = np.arange(SLOTS_PER_DAY) * 0.5
    out = 0.55 + 0.22 * np.sin(2.0 * np.pi * (hours + 4.0) / 24.0)
    out += 0.06 * np.sin(4.0 * np.pi * (hours + 1.0) / 24.0)
    return np.clip(out, 0.0, 1.0)


def synthesize_harvest(
    kind: str,
    days: int,
    seed: int,
    peak_joules: float,
    noise_level: float = 0.1,
    *,
    site_id: str = "site",
) -> SiteTrace:
    """Generate a solar or wind harvest trace (joules per slot)."""
    require(kind in ("solar", "wind"), f"harvest kind must be solar or wind, got {kind!r}")
    require(days >= 1, "days must be >= 1")
    require(peak_joules >= 0.0, "peak_joules must be non-negative")
    shape = solar_day_shape() if kind == "solar" else wind_day_shape()
    base = np.tile(shape, days) * peak_joules
    rng = np.random.default_rng(seed)
    g = np.clip(rng.standard_normal(base.size), -3.0, 3.0)
    values = np.clip(base * (1.0 + noise_level * g), 0.0, None)
    return SiteTrace(
        site_id=site_id,
        kind=kind,
        slot_seconds=DEFAULT_SLOT_SECONDS,
        values=tuple(float(v) for v in values),
    )


def split_delay_sensitive(load: float, fraction: float = 0.8) -> tuple[float, float]:
    """Split a load value into (delay-sensitive, delay-tolerant) parts."""
    require(load >= 0.0, f"load must be non-negative, got {load}")
    require(0.0 <= fraction <= 1.0, f"fraction must lie in [0, 1], got {fraction}")
    sensitive = fraction * load
    return sensitive, load - sensitive


def _parse_timestamp(token: str, line_no: int) -> float:
    token = token.strip()
    try:
        return float(token)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(token).timestamp()
    except ValueError:
        raise ValueError(
            f"line {line_no}: timestamp {token!r} is neither numeric nor ISO-8601"
        ) from None


def load_trace_csv(
    path: str,
    *,
    kind: str = "traffic",
    slot_seconds: float = DEFAULT_SLOT_SECONDS,
    site_id: str | None = None,
) -> SiteTrace:
    """Read a trace from a two-column CSV with header ``timestamp,value``.

    Timestamps may be integers (slot indices) or ISO-8601 strings; they must
    be strictly increasing. Values must be non-negative numbers. Malformed
    rows raise ValueError naming the offending line.
    """
    values: list[float] = []
    prev_ts: float | None = None
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["timestamp", "value"]:
            raise ValueError(f"{path}: expected header 'timestamp,value', got {header}")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise ValueError(f"line {line_no}: expected two columns, got {row}")
            ts = _parse_timestamp(row[0], line_no)
            if prev_ts is not None and ts <= prev_ts:
                raise ValueError(f"line {line_no}: timestamps must be strictly increasing")
            prev_ts = ts
            try:
                value = float(row[1])
            except ValueError:
                raise ValueError(f"line {line_no}: value {row[1]!r} is not a number") from None
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"line {line_no}: value must be finite and >= 0, got {value}")
            values.append(value)
    if not values:
        raise ValueError(f"{path}: trace contains no data rows")
    return SiteTrace(
        site_id=site_id or path,
        kind=kind,
        slot_seconds=slot_seconds,
        values=tuple(values),
    )


def save_trace_csv(trace: SiteTrace, path: str) -> None:
    """Write a trace in the same two-column format load_trace_csv reads."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "value"])
        for i, v in enumerate(trace.values):
            writer.writerow([i, f"{v:.12g}"])
