"""Configuration loading for Tresse."""

from pathlib import Path
from typing import Any

import yaml
from pydantic import ValidationError

from tresse.exceptions import ConfigError
from tresse.models.config import TresseConfig

CONFIG_FILENAMES = ["tresse.yml", "tresse.yaml"]


def load_config(config_path: Path | None = None, overrides: dict[str, Any] | None = None) -> TresseConfig:
    """Load and validate the Tresse configuration.

    A missing file is not an error: defaults apply.

    Args:
        config_path: Optional path to a config file. If not provided,
                     searches for tresse.yml or tresse.yaml in cwd.
        overrides: Nested values (e.g. from CLI flags) applied on top of the file.

    Returns:
        Validated TresseConfig instance.

    Raises:
        ConfigError: If the file cannot be read or is invalid.
    """
    if config_path is None:
        config_path = _locate_config()
    elif not config_path.exists():
        raise ConfigError(f"Config file not found: {config_path}")

    raw_data: dict[str, Any] = {}
    if config_path is not None:
        try:
            with open(config_path) as f:
                loaded = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"Invalid YAML in config file: {e}") from e
        except OSError as e:
            raise ConfigError(f"Could not read config file: {e}") from e
        if loaded is not None:
            if not isinstance(loaded, dict):
                raise ConfigError("Config file must contain a mapping")
            raw_data = loaded

    if overrides:
        raw_data = _merge(raw_data, overrides)

    try:
        return TresseConfig(**raw_data)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration:\n{_describe_errors(e)}") from e


def _merge(base: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    """Merge nested override values into a config mapping, skipping None."""
    merged = dict(base)
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict):
            current = merged.get(key)
            merged[key] = _merge(current if isinstance(current, dict) else {}, value)
        else:
            merged[key] = value
    return merged


def _locate_config(directory: Path | None = None) -> Path | None:
    """The first of CONFIG_FILENAMES present in ``directory`` (default cwd)."""
    directory = directory or Path.cwd()
    return next((directory / name for name in CONFIG_FILENAMES if (directory / name).is_file()), None)


def _describe_errors(error: ValidationError) -> str:
    """One line per offending setting, ``key = value: reason``.

    Cross-field failures have no key and are reported as ``(config)``.
    """
    lines = []
    for err in error.errors():
        key = ".".join(str(part) for part in err["loc"]) or "(config)"
        reason = err["msg"].removeprefix("Value error, ")
        if err["loc"] and err["type"] != "missing":
            lines.append(f"  {key} = {err['input']!r}: {reason}")
        else:
            lines.append(f"  {key}: {reason}")
    return "\n".join(lines)
