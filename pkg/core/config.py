from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, is_dataclass, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from core.errors import ConfigError


@dataclass(frozen=True)
class GenerationConfig:
    alphabet: tuple[str, ...] = tuple("abcdefgh")
    depth_min: int = 3
    depth_max: int = 6
    max_variables: int = 8


@dataclass(frozen=True)
class SimplifyConfig:
    depth_threshold: int = 2
    max_steps: int = 30


@dataclass(frozen=True)
class DatasetConfig:
    seed: int = 0
    train: int = 50_000
    dev: int = 1_000
    test: int = 2_000
    workers: int = 1
    curated_per_rule: int = 0


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str = "https://api.openai.com/v1"
    model: str = "gpt-4o-mini"
    api_key_env: str = "OPENAI_API_KEY"
    timeout: float = 60.0
    max_retries: int = 5
    backoff: float = 1.0
    temperature: float = 0.0
    max_in_flight: int = 4


@dataclass(frozen=True)
class ReportConfig:
    plots: bool = True
    pdf: bool = False


@dataclass(frozen=True)
class RunConfig:
    generation: GenerationConfig = field(default_factory=GenerationConfig)
    simplify: SimplifyConfig = field(default_factory=SimplifyConfig)
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    endpoint: EndpointConfig = field(default_factory=EndpointConfig)
    report: ReportConfig = field(default_factory=ReportConfig)
    lexicon_path: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), default=list)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def splits(self) -> dict[str, int]:
        return {"train": self.dataset.train, "dev": self.dataset.dev, "test": self.dataset.test}


def _merge(obj: Any, values: Mapping[str, Any], where: str) -> Any:
    known = {f.name: f for f in fields(obj)}
    updates = {}
    for key, value in values.items():
        if key not in known:
            raise ConfigError(f"unknown config key {where}{key!r}")
        current = getattr(obj, key)
        if is_dataclass(current):
            if not isinstance(value, Mapping):
                raise ConfigError(f"config key {where}{key!r} must be a mapping")
            updates[key] = _merge(current, value, f"{where}{key}.")
        elif isinstance(current, tuple):
            updates[key] = tuple(value)
        else:
            updates[key] = value
    return replace(obj, **updates)


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """Defaults, then the YAML file, then explicit overrides (nested mappings)."""
    cfg = RunConfig()
    if path:
        with open(path, "r", encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
        if not isinstance(raw, Mapping):
            raise ConfigError(f"{path}: top level must be a mapping")
        cfg = _merge(cfg, raw, "")
    if overrides:
        cfg = _merge(cfg, overrides, "")
    if cfg.generation.depth_min > cfg.generation.depth_max:
        raise ConfigError("generation.depth_min exceeds generation.depth_max")
    if cfg.simplify.depth_threshold < 1 or cfg.simplify.max_steps < 1:
        raise ConfigError("simplify.depth_threshold and simplify.max_steps must be >= 1")
    return cfg
