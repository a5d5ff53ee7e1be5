"""Run configuration: defaults, config file, command-line flags, environment.

Precedence, lowest to highest: built-in defaults, then the JSON config file,
then command-line flags, then environment variables.  Environment variables
carry credentials only (``VERDICTFACTS_API_KEY``); everything else flows
through the config file and flags.  The effective configuration is printable
and, fed back as a config file, reproduces itself.
"""

from __future__ import annotations

import copy
import json
import os
from pathlib import Path
from typing import Any

from .llm import ProviderConfig, ReplayProvider, StubProvider

ENV_API_KEY = "VERDICTFACTS_API_KEY"

DEFAULTS: dict[str, Any] = {
    "ingest": {
        "year_min": 2018,
        "year_max": 2022,
        "coverage_thresholds": [0.9],
    },
    "fetch": {
        "endpoint": None,
        "max_retries": 3,
        "request_interval": 0.0,
        "workers": 1,
        "timeout": 30.0,
    },
    "markers": {
        "path": None,  # null selects the packaged default marker set
    },
    "provider": {
        "backend": "stub",  # stub | replay | http
        "model_name": "stub",
        "temperature": 0.0,
        "max_output_tokens": 2048,
        "input_usd_per_million_tokens": 0.10,
        "output_usd_per_million_tokens": 0.40,
        "chars_per_token": 4.0,
        "endpoint": None,
        "max_retries": 1,
        "max_doc_chars": None,
        "replay_path": None,
        "concurrency": 1,
    },
    "pipeline": {
        "ground_threshold": 0.5,
        "concurrency": 1,
    },
}


class ConfigError(Exception):
    pass


def _deep_merge(base: dict, overlay: dict) -> dict:
    merged = copy.deepcopy(base)
    for key, value in overlay.items():
        if key in merged and isinstance(merged[key], dict) and isinstance(value, dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def load_config(path: str | Path | None = None) -> dict:
    """Defaults merged with an optional JSON config file."""
    config = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ConfigError(f"config {path} must be a JSON object")
        unknown = set(payload) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"config {path} has unknown sections: {sorted(unknown)}")
        config = _deep_merge(config, payload)
    return config


def apply_overrides(config: dict, overrides: dict[str, Any]) -> dict:
    """Apply ``section.key -> value`` overrides (used for CLI flags)."""
    merged = copy.deepcopy(config)
    for dotted, value in overrides.items():
        if value is None:
            continue
        section, _, key = dotted.partition(".")
        if section not in merged or key not in merged[section]:
            raise ConfigError(f"unknown config entry {dotted!r}")
        merged[section][key] = value
    return merged


def render_config(config: dict) -> str:
    """Effective configuration as JSON, suitable to feed back as a config file."""
    return json.dumps(config, indent=2, sort_keys=True)


def api_key_from_env() -> str | None:
    return os.environ.get(ENV_API_KEY)


def provider_config_from(config: dict) -> ProviderConfig:
    p = config["provider"]
    return ProviderConfig(
        model_name=p["model_name"],
        temperature=float(p["temperature"]),
        max_output_tokens=int(p["max_output_tokens"]),
        input_usd_per_million_tokens=float(p["input_usd_per_million_tokens"]),
        output_usd_per_million_tokens=float(p["output_usd_per_million_tokens"]),
        chars_per_token=float(p["chars_per_token"]),
        max_doc_chars=p["max_doc_chars"],
        endpoint=p["endpoint"],
        max_retries=int(p["max_retries"]),
    )


def make_provider(config: dict):
    """Instantiate the configured generation backend."""
    backend = config["provider"]["backend"]
    if backend == "stub":
        return StubProvider(canned=None)
    if backend == "replay":
        replay_path = config["provider"]["replay_path"]
        if not replay_path:
            raise ConfigError("provider.replay_path is required for the replay backend")
        return ReplayProvider(replay_path, strict=False)
    if backend == "http":
        from .llm import HttpProvider

        return HttpProvider(provider_config_from(config), api_key=api_key_from_env())
    raise ConfigError(f"unknown provider backend {backend!r}")
