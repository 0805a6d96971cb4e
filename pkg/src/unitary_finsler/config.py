"""Experiment configuration: built-in defaults, then a JSON file, then command-line flags."""
from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from unitary_finsler.errors import ConfigError
from unitary_finsler.norms import FinslerNorm

LOGGER = logging.getLogger(__name__)

CONFIG_ENV = "UNITARY_FINSLER_CONFIG"
THREADS_ENV = "UNITARY_FINSLER_THREADS"
RADIUS_POLICIES = ("exact", "conservative")
FORMATS = ("csv", "json")
NORMS = ("operator", "schatten")
LIFTING_MODES = ("finite-rank", "projection", "nilpotent")


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 42
    dim: int = 4
    trials: int = 10
    p: int = 4
    norm: str = "operator"
    normalized: bool = False
    grid: int = 64
    radius_policy: str = "conservative"
    out: Optional[str] = None
    format: str = "csv"
    mode: str = "finite-rank"
    matrix: Optional[str] = None
    restarts: int = 8
    timing: bool = False
    threads: int = 1

    @property
    def finsler_norm(self) -> FinslerNorm:
        return FinslerNorm.parse(self.norm, self.p, self.normalized)

    def echo(self) -> Dict[str, Any]:
        """Config as written into run summaries; thread count and output path never change results."""
        payload = asdict(self)
        payload.pop("threads")
        payload.pop("out")
        return payload

    def validate(self) -> "ExperimentConfig":
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be in [0, 2**64), got {self.seed}")
        if not 2 <= self.dim <= 64:
            raise ConfigError(f"dim must be in [2, 64], got {self.dim}")
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        if self.p < 2 or self.p % 2:
            raise ConfigError(f"p must be an even integer >= 2, got {self.p}")
        if self.grid < 3:
            raise ConfigError(f"grid must be at least 3, got {self.grid}")
        if self.restarts < 1:
            raise ConfigError(f"restarts must be at least 1, got {self.restarts}")
        if self.threads < 1:
            raise ConfigError(f"threads must be at least 1, got {self.threads}")
        for name, value, allowed in (
            ("radius_policy", self.radius_policy, RADIUS_POLICIES),
            ("format", self.format, FORMATS),
            ("norm", self.norm, NORMS),
            ("mode", self.mode, LIFTING_MODES),
        ):
            if value not in allowed:
                raise ConfigError(f"{name} must be one of {', '.join(allowed)}, got {value!r}")
        return self


def load_config(path: str | Path) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as config_file:
            payload = json.load(config_file)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc.msg} (line {exc.lineno}, column {exc.colno})") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return payload


def _apply(config: ExperimentConfig, overrides: Mapping[str, Any], source: str) -> ExperimentConfig:
    known = {field.name: field.type for field in fields(ExperimentConfig)}
    changes = {}
    for key, value in overrides.items():
        if value is None:
            continue
        name = key.replace("-", "_")
        if name not in known:
            raise ConfigError(f"unknown setting {key!r} in {source}")
        default = getattr(config, name)
        if isinstance(default, bool) and not isinstance(value, bool):
            raise ConfigError(f"{key} in {source} must be true or false")
        if isinstance(default, int) and not isinstance(default, bool):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{key} in {source} must be an integer")
        changes[name] = value
    return replace(config, **changes)


def thread_count(environ: Mapping[str, str]) -> int:
    raw = environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        threads = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from exc
    if threads < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return threads


def build_config(
    flags: Mapping[str, Any],
    config_path: Optional[str | Path] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> ExperimentConfig:
    environ = os.environ if environ is None else environ
    config = replace(ExperimentConfig(), threads=thread_count(environ))
    path = config_path or environ.get(CONFIG_ENV)
    if path:
        LOGGER.debug("Loading config from %s", path)
        config = _apply(config, load_config(path), str(path))
    return _apply(config, flags, "command line").validate()
