"""Run configuration: one JSON file with env / rewards / train / sfm /
paths sections, dotted --set overrides, and strict unknown-key
rejection so a typo cannot silently fall back to a default."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

from .env import EnvConfig
from .rewards import RewardCoefficients
from .sfm import SfmConfig
from .training import TrainConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PathsConfig:
    out_dir: str = "out"
    checkpoint: str = ""
    suite: str = ""


@dataclass(frozen=True)
class RunConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    rewards: RewardCoefficients = field(default_factory=RewardCoefficients)
    train: TrainConfig = field(default_factory=TrainConfig)
    sfm: SfmConfig = field(default_factory=SfmConfig)
    paths: PathsConfig = field(default_factory=PathsConfig)


_SECTIONS = {
    "env": EnvConfig,
    "rewards": RewardCoefficients,
    "train": TrainConfig,
    "sfm": SfmConfig,
    "paths": PathsConfig,
}


def _build_section(cls, data: dict, section: str):
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {sorted(unknown)}")
    coerced = {}
    for key, value in data.items():
        if key == "kappa":
            value = tuple(value)
        coerced[key] = value
    try:
        return cls(**coerced)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid value in [{section}]: {e}") from e


def config_from_dict(data: dict) -> RunConfig:
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
    sections = {}
    for name, cls in _SECTIONS.items():
        sections[name] = _build_section(cls, data.get(name, {}), name)
    return RunConfig(**sections)


def config_to_dict(cfg: RunConfig) -> dict:
    out = {}
    for name in _SECTIONS:
        section = dataclasses.asdict(getattr(cfg, name))
        if "kappa" in section:
            section["kappa"] = list(section["kappa"])
        out[name] = section
    return out


def load_config(path: str | None, overrides: list[str] = ()) -> RunConfig:
    """Load the JSON config (defaults when path is None) and apply
    repeatable dotted overrides like train.seed=3."""
    if path is None:
        data = {}
    else:
        with open(path) as f:
            text = f.read()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
    data = _apply_overrides(data, overrides)
    return config_from_dict(data)


def _apply_overrides(data: dict, overrides) -> dict:
    data = json.loads(json.dumps(data))  # deep copy
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override '{item}' must look like section.key=value")
        dotted, _, raw = item.partition("=")
        keys = dotted.split(".")
        if len(keys) != 2:
            raise ConfigError(f"override key '{dotted}' must be section.key")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        data.setdefault(keys[0], {})[keys[1]] = value
    return data


def config_hash(cfg: RunConfig) -> str:
    canonical = json.dumps(config_to_dict(cfg), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]
