"""Strict JSON loaders for game fixtures and sweep grids.

Every mapping level rejects unknown keys so a typo in a fixture fails the
run instead of silently falling back to a default.  Parse errors carry the
line and column of the offending byte.
"""

from __future__ import annotations

import json

from .channel import ChannelMatrix
from .efficiency import (
    EfficiencyModel,
    ExponentialEfficiency,
    RationalSigmoidEfficiency,
)
from .errors import ConfigError
from .game import GameInstance
from .sweep import SweepConfig

_INSTANCE_KEYS = {"sigma2", "rates", "gains", "efficiency"}
_SWEEP_KEYS = {
    "K_list", "rho_list", "theta_list", "trials", "seed",
    "sigma2", "rates", "efficiency", "modes", "mean_gain",
}
_EFFICIENCY_KEYS = {"exponential": {"model", "M"}, "rational_sigmoid": {"model"}}


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config {path!r} is not valid JSON: line {exc.lineno} "
            f"column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path!r} must hold a JSON object at top level")
    return data


def _check_keys(mapping, allowed, context):
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(
            f"unknown key(s) in {context}: {sorted(unknown)}; allowed: {sorted(allowed)}"
        )


def _real(value, context):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{context} must be a number, got {value!r}")
    return float(value)


def _real_list(value, context):
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{context} must be a non-empty list, got {value!r}")
    return [_real(v, f"{context} entry") for v in value]


def _int(value, context):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{context} must be an integer, got {value!r}")
    return value


def efficiency_from_mapping(mapping) -> EfficiencyModel:
    """Build an efficiency model from ``{"model": ..., ...}``."""
    if not isinstance(mapping, dict):
        raise ConfigError(f"efficiency must be an object, got {mapping!r}")
    model = mapping.get("model")
    if model not in _EFFICIENCY_KEYS:
        raise ConfigError(
            f"efficiency model must be one of {sorted(_EFFICIENCY_KEYS)}, got {model!r}"
        )
    _check_keys(mapping, _EFFICIENCY_KEYS[model], f"efficiency ({model})")
    if model == "exponential":
        return ExponentialEfficiency(M=_int(mapping.get("M", 100), "efficiency M"))
    return RationalSigmoidEfficiency()


def _rates(mapping, context):
    raw = mapping.get("rates", [1.0, 1.0])
    rates = _real_list(raw, f"{context} rates")
    if len(rates) != 2:
        raise ConfigError(f"{context} rates must list exactly 2 values, got {raw!r}")
    return (rates[0], rates[1])


def instance_from_mapping(mapping) -> GameInstance:
    _check_keys(mapping, _INSTANCE_KEYS, "instance config")
    for key in ("sigma2", "gains", "efficiency"):
        if key not in mapping:
            raise ConfigError(f"instance config is missing required key {key!r}")
    gains = mapping["gains"]
    if not isinstance(gains, list) or len(gains) != 2:
        raise ConfigError("gains must be a list of two per-carrier rows")
    rows = [_real_list(row, "gains row") for row in gains]
    return GameInstance(
        channel=ChannelMatrix(gains=rows),
        sigma2=_real(mapping["sigma2"], "sigma2"),
        rates=_rates(mapping, "instance"),
        efficiency=efficiency_from_mapping(mapping["efficiency"]),
    )


def load_instance_config(path) -> GameInstance:
    """Read a single-game fixture: explicit gains, noise, rates, efficiency."""
    return instance_from_mapping(load_json(path))


def sweep_from_mapping(mapping) -> SweepConfig:
    _check_keys(mapping, _SWEEP_KEYS, "sweep config")
    if "K_list" not in mapping:
        raise ConfigError("sweep config is missing required key 'K_list'")
    raw_k = mapping["K_list"]
    if not isinstance(raw_k, list) or not raw_k:
        raise ConfigError(f"K_list must be a non-empty list, got {raw_k!r}")
    kwargs = {
        "K_list": tuple(_int(k, "K_list entry") for k in raw_k),
        "efficiency": efficiency_from_mapping(
            mapping.get("efficiency", {"model": "exponential", "M": 100})
        ),
        "rates": _rates(mapping, "sweep"),
    }
    if "rho_list" in mapping:
        kwargs["rho_list"] = tuple(_real_list(mapping["rho_list"], "rho_list"))
    if "theta_list" in mapping:
        kwargs["theta_list"] = tuple(_real_list(mapping["theta_list"], "theta_list"))
    if "trials" in mapping:
        kwargs["trials"] = _int(mapping["trials"], "trials")
    if "seed" in mapping:
        kwargs["seed"] = _int(mapping["seed"], "seed")
    if "sigma2" in mapping:
        kwargs["sigma2"] = _real(mapping["sigma2"], "sigma2")
    if "mean_gain" in mapping:
        kwargs["mean_gain"] = _real(mapping["mean_gain"], "mean_gain")
    if "modes" in mapping:
        modes = mapping["modes"]
        if not isinstance(modes, list) or not all(isinstance(m, str) for m in modes):
            raise ConfigError(f"modes must be a list of strings, got {modes!r}")
        kwargs["modes"] = tuple(modes)
    return SweepConfig(**kwargs)


def load_sweep_config(path) -> SweepConfig:
    """Read a sweep grid; channel gains are sampled, not listed."""
    return sweep_from_mapping(load_json(path))
