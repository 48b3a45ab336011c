"""Pipeline configuration: defaults, key=value / JSON files, flag overrides."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .graphbuild import SCHEMES, THREE_CLASS
from .raster import DEFAULT_THRESHOLD
from .skeleton import DEFAULT_MAX_SPUR_LEN, DEFAULT_METHOD
from .trace import DEFAULT_MERGE_RADIUS, DEFAULT_SPIKE_THRESHOLD

PRESETS = ("gs3", "gs4", "gs5", "gcn", "mlp")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    threshold: int = DEFAULT_THRESHOLD
    thinning: str = DEFAULT_METHOD
    max_spur_len: int = DEFAULT_MAX_SPUR_LEN
    spike_threshold: float = DEFAULT_SPIKE_THRESHOLD
    merge_radius: float = DEFAULT_MERGE_RADIUS
    n: int = 4
    scheme: str = THREE_CLASS.name
    preset: str = "gs3"
    learning_rate: float = 1e-3
    weight_decay: float = 5e-4
    max_epochs: int = 2000
    batch_size: int = 16
    split: float = 0.8
    seed: int = 0

    def validate(self) -> "PipelineConfig":
        if self.n < 4:
            raise ConfigError("n must be at least 4")
        if self.preset not in PRESETS:
            raise ConfigError(f"preset must be one of {', '.join(PRESETS)}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {', '.join(SCHEMES)}")
        if not 0 < self.split < 1:
            raise ConfigError("split must lie strictly between 0 and 1")
        if self.learning_rate <= 0 or self.max_epochs <= 0 or self.batch_size <= 0:
            raise ConfigError("learning_rate, max_epochs and batch_size must be positive")
        if self.weight_decay < 0 or self.merge_radius < 0 or self.max_spur_len < 0:
            raise ConfigError("weight_decay, merge_radius and max_spur_len must be non-negative")
        if not 0 <= self.threshold <= 256:
            raise ConfigError("threshold must lie in [0, 256]")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **overrides) -> "PipelineConfig":
        return from_mapping({**self.to_dict(), **overrides})


_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _coerce(key: str, value):
    kind = _TYPES[key]
    try:
        if kind == "int":
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if kind == "float":
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key}: {value!r}") from None


def from_mapping(values: dict) -> PipelineConfig:
    unknown = sorted(set(values) - set(_TYPES))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    return PipelineConfig(**{k: _coerce(k, v) for k, v in values.items()}).validate()


def parse_text(text: str) -> dict:
    """JSON object, or one ``key = value`` per line (``#`` starts a comment)."""
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return data
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k] = v
    return out


def load_config(path=None, overrides: dict | None = None) -> PipelineConfig:
    values: dict = {}
    if path is not None:
        values.update(parse_text(Path(path).read_text(encoding="utf-8")))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return from_mapping(values)


def describe_defaults() -> str:
    d = PipelineConfig()
    return "\n".join(f"  {f.name} = {getattr(d, f.name)}" for f in fields(PipelineConfig))
