"""JSON run configuration: parsing, defaults, echo, and param paths.

The JSON file mirrors SimConfig field names in snake_case.  Unknown keys
and wrong types are rejected with the offending field named, so a typo
never silently falls back to a default.
"""

from __future__ import annotations

import json
import typing
from dataclasses import asdict
from enum import Enum
from pathlib import Path
from types import UnionType
from typing import Any

from .controller import ControllerConfig
from .errors import ConfigError
from .servesim import PathAConfig, PathBConfig, SimConfig
from .workload import WorkloadConfig

_SECTIONS = {
    "path_a": PathAConfig,
    "path_b": PathBConfig,
    "controller": ControllerConfig,
    "workload": WorkloadConfig,
}


def _coerce(name: str, value: Any, target: Any) -> Any:
    if isinstance(target, UnionType):  # e.g. int | None
        members = typing.get_args(target)
        if value is None and type(None) in members:
            return None
        target = next(m for m in members if m is not type(None))
    if isinstance(target, type) and issubclass(target, Enum):
        if isinstance(value, str):
            try:
                return target(value.upper())
            except ValueError:
                pass
        choices = ", ".join(m.value for m in target)
        raise ConfigError(f"field '{name}': expected one of [{choices}], got {value!r}")
    if target is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f"field '{name}': expected a boolean, got {value!r}")
    if target is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"field '{name}': expected an integer, got {value!r}")
        return value
    if target is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"field '{name}': expected a number, got {value!r}")
        return float(value)
    return value


def _build_section(cls: type, data: dict, prefix: str) -> Any:
    types = typing.get_type_hints(cls)
    kwargs = {}
    for key, value in data.items():
        if key not in types:
            raise ConfigError(f"unknown field '{prefix}{key}'")
        kwargs[key] = _coerce(f"{prefix}{key}", value, types[key])
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        raise ConfigError(f"{prefix[:-1]}: {exc}") from None


_TOP_INTS = {"seed", "concurrency", "p95_window"}
_TOP_FLOATS = {"horizon_s", "baseline_power_w", "ewma_lambda", "grid_intensity_kg_per_kwh"}


def parse_config(data: dict) -> SimConfig:
    """Build a validated SimConfig from a JSON-shaped dict."""
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be a JSON object, got {type(data).__name__}")
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"field '{key}' must be an object")
            kwargs[key] = _build_section(_SECTIONS[key], value, f"{key}.")
        elif key in _TOP_INTS:
            kwargs[key] = _coerce(key, value, int)
        elif key in _TOP_FLOATS:
            kwargs[key] = _coerce(key, value, float)
        else:
            raise ConfigError(f"unknown field '{key}'")
    return SimConfig(**kwargs)


def load_config(path: str | Path) -> SimConfig:
    """Read and validate a JSON config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    return parse_config(data)


def effective_config_dict(config: SimConfig) -> dict:
    """The fully defaulted config as plain JSON-ready data."""
    data = asdict(config)
    data["controller"]["direction"] = config.controller.direction.value
    data["controller"]["utility_proxy"] = config.controller.utility_proxy.value
    data["controller"]["routing"] = config.controller.routing.value
    data["workload"]["mode"] = config.workload.mode.value
    if data["workload"].get("seed") is None:
        data["workload"].pop("seed", None)
    return data


def dump_config(config: SimConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(effective_config_dict(config), indent=2) + "\n")


def set_param_path(data: dict, path: str, value: Any) -> None:
    """Assign ``value`` at a dotted path like 'controller.beta' in-place.

    Every segment except the leaf must already exist; the leaf must be an
    existing field so sweeps cannot invent config keys.
    """
    parts = path.split(".")
    node = data
    for part in parts[:-1]:
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"unknown config path '{path}'")
        node = node[part]
    if not isinstance(node, dict) or parts[-1] not in node:
        raise ConfigError(f"unknown config path '{path}'")
    node[parts[-1]] = value
