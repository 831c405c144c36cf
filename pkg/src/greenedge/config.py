"""Plain key=value run configuration files.

The format is deliberately boring: one `key = value` per line, `#` comments,
blank lines ignored. Keys are the fields of ScenarioConfig; values are
coerced to the field's type. Tuples are comma separated ("0, 0.5, 1"); the
cache event list uses `time:weight` items ("2:1.5, 6:0.8").
"""

from __future__ import annotations

import dataclasses
from typing import get_args, get_origin

from .harness import ScenarioConfig


class ConfigError(ValueError):
    pass


_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}


def _coerce(name: str, raw: str, annotation) -> object:
    raw = raw.strip()
    origin = get_origin(annotation)
    if origin is tuple:
        inner = get_args(annotation)[0]
        if get_origin(inner) is tuple:  # tuple of (time, weight) pairs
            items = []
            for part in filter(None, (p.strip() for p in raw.split(","))):
                try:
                    t, w = part.split(":")
                    items.append((float(t), float(w)))
                except ValueError:
                    raise ConfigError(
                        f"{name}: expected time:weight items, got {part!r}"
                    ) from None
            return tuple(items)
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        try:
            return tuple(inner(p) for p in parts)
        except ValueError:
            raise ConfigError(f"{name}: could not parse {raw!r} as numbers") from None
    if annotation is bool:
        lowered = raw.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    if annotation is int:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{name}: expected an integer, got {raw!r}") from None
    if annotation is float:
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{name}: expected a number, got {raw!r}") from None
    return raw  # str


# dataclasses stores string annotations under `from __future__ import
# annotations`; map the ones ScenarioConfig uses back to real types.
_TYPE_BY_NAME = {
    "int": int,
    "float": float,
    "str": str,
    "bool": bool,
    "tuple[float, ...]": tuple[float, ...],
    "tuple[tuple[float, float], ...]": tuple[tuple[float, float], ...],
}


def _resolved(field: dataclasses.Field):
    annotation = field.type
    if isinstance(annotation, str):
        try:
            return _TYPE_BY_NAME[annotation]
        except KeyError:
            raise ConfigError(f"unsupported field type {annotation!r} for {field.name}") from None
    return annotation


def parse_assignments(pairs: dict[str, str]) -> dict[str, object]:
    """Coerce raw string assignments against the ScenarioConfig schema."""
    out: dict[str, object] = {}
    for name, raw in pairs.items():
        if name not in _FIELDS:
            known = ", ".join(sorted(_FIELDS))
            raise ConfigError(f"unknown configuration key {name!r} (known keys: {known})")
        out[name] = _coerce(name, raw, _resolved(_FIELDS[name]))
    return out


def load_config(path: str, overrides: dict[str, str] | None = None) -> ScenarioConfig:
    """Read a config file, apply overrides, return a validated ScenarioConfig."""
    pairs: dict[str, str] = {}
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{line_no}: expected key = value, got {line.rstrip()!r}")
            key, _, value = stripped.partition("=")
            key = key.strip()
            if key in pairs:
                raise ConfigError(f"{path}:{line_no}: duplicate key {key!r}")
            pairs[key] = value.strip()
    if overrides:
        pairs.update(overrides)
    kwargs = parse_assignments(pairs)
    try:
        return ScenarioConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def config_from_overrides(overrides: dict[str, str]) -> ScenarioConfig:
    """Build a config from defaults plus command-line overrides only."""
    kwargs = parse_assignments(overrides)
    try:
        return ScenarioConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
