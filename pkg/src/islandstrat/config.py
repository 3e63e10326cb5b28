"""Experiment configuration: a JSON document with strict keys."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .exceptions import ConfigError
from .island import PeConfig, SurfaceConfig, TreatmentConfig
from .mesh import MeshConfig

_SECTIONS = {
    "mesh": MeshConfig,
    "pe": PeConfig,
    "treatment": TreatmentConfig,
    "surface": SurfaceConfig,
}


@dataclass(frozen=True)
class ExperimentConfig:
    mesh: MeshConfig = field(default_factory=MeshConfig)
    pe: PeConfig = field(default_factory=PeConfig)
    treatment: TreatmentConfig = field(default_factory=TreatmentConfig)
    surface: SurfaceConfig = field(default_factory=SurfaceConfig)
    seed: int = 0
    sample_per_pe: int | None = None
    subsample_total: int | None = None
    exact_tracking: bool = False

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed: must be a 64-bit unsigned integer")
        if self.sample_per_pe is not None and not 0 < self.sample_per_pe <= self.pe.pop_size:
            raise ConfigError("sample_per_pe: must lie in [1, pe.pop_size]")
        if self.subsample_total is not None and self.subsample_total < 1:
            raise ConfigError("subsample_total: must be positive")

    @property
    def per_pe(self) -> int:
        return self.pe.pop_size if self.sample_per_pe is None else self.sample_per_pe

    def to_dict(self) -> dict:
        out = {}
        for name, _ in _SECTIONS.items():
            section = dataclasses.asdict(getattr(self, name))
            if name == "surface":
                section["policy"] = self.surface.policy.value
            out[name] = section
        out.update(
            seed=self.seed,
            sample_per_pe=self.sample_per_pe,
            subsample_total=self.subsample_total,
            exact_tracking=self.exact_tracking,
        )
        return out

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _typed(key, value, expected):
    if expected in ("int", int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
    elif expected in ("float", float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        value = float(value)
    elif expected in ("bool", bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false, got {value!r}")
    return value


def _section(name, cls, raw):
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected an object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in raw.items():
        if key not in fields:
            raise ConfigError(f"{name}.{key}: unknown key")
        kwargs[key] = _typed(f"{name}.{key}", value, fields[key].type)
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        raise ConfigError(f"{name}: {exc}") from None


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    kwargs = {}
    scalars = {"seed": "int", "sample_per_pe": "int", "subsample_total": "int", "exact_tracking": "bool"}
    for key, value in raw.items():
        if key in _SECTIONS:
            kwargs[key] = _section(key, _SECTIONS[key], value)
        elif key in scalars:
            kwargs[key] = value if value is None and key != "seed" else _typed(key, value, scalars[key])
        else:
            raise ConfigError(f"{key}: unknown key")
    if "seed" not in raw:
        raise ConfigError("seed: required")
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return config_from_dict(raw)
