"""Run configuration: YAML defaults, JSON user config, CLI overrides."""
import json
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.corpus.schemas import SynthConfig
from src.errors import ConfigError
from src.model.schemas import ModelConfig
from src.objective.schemas import TrainConfig
from src.pseudo.schemas import PseudoConfig


DEFAULT_SETTINGS_PATH = Path(__file__).parent.parent / "config" / "settings.yaml"
EFFECTIVE_CONFIG = "effective_config.json"


class RunConfig(BaseModel):
    """All sections of a run; unknown keys are rejected at every level."""

    model_config = ConfigDict(extra="forbid")

    synth: SynthConfig = Field(default_factory=SynthConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    pseudo: PseudoConfig = Field(default_factory=PseudoConfig)


def deep_merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge ``update`` into a copy of ``base``."""
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_settings(path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """Load the YAML settings file (run defaults + logging)."""
    path = Path(path) if path is not None else DEFAULT_SETTINGS_PATH
    try:
        with open(path, encoding="utf-8") as f:
            settings = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: invalid YAML: {e}") from None
    if not isinstance(settings, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    return settings


def load_run_config(
    config_path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
    settings: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """
    Resolve the effective run configuration.

    Args:
        config_path: Optional JSON config with ``synth``/``model``/``train``/``pseudo`` sections
        overrides: Values from command-line flags (highest precedence)
        settings: Parsed settings.yaml (loaded from the default path if omitted)

    Returns:
        Validated RunConfig

    Raises:
        ConfigError: On invalid JSON, unknown keys or out-of-range values
    """
    settings = load_settings() if settings is None else settings
    merged: Dict[str, Any] = settings.get("run", {}) or {}

    if config_path is not None:
        try:
            with open(config_path, encoding="utf-8") as f:
                user = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{config_path}: invalid JSON: {e}") from None
        if not isinstance(user, dict):
            raise ConfigError(f"{config_path}: expected a JSON object")
        merged = deep_merge(merged, user)

    if overrides:
        merged = deep_merge(merged, overrides)

    try:
        return RunConfig.model_validate(merged)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        raise ConfigError(f"config {location}: {first['msg']}") from None


def write_effective_config(cfg: RunConfig, out_dir: Union[str, Path]) -> Path:
    """Echo the resolved configuration into ``out_dir/effective_config.json``."""
    path = Path(out_dir) / EFFECTIVE_CONFIG
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(cfg.model_dump(mode="json"), indent=2) + "\n", encoding="utf-8")
    return path
