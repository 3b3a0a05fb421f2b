"""Configuration management for fusestyle."""

from pathlib import Path
from typing import Any

import tomli
import tomli_w
from pydantic import ValidationError

from ..errors import ConfigError
from ..models.config import TrainConfig


def _parse_scalar(value: str) -> Any:
    """Interpret a CLI value as a TOML scalar, falling back to a bare string."""
    try:
        return tomli.loads(f"v = {value}")["v"]
    except tomli.TOMLDecodeError:
        return value


class ConfigManager:
    """Load, save and edit training configuration files."""

    @staticmethod
    def load(path: Path) -> TrainConfig:
        """
        Load a training configuration.

        Both nested tables (``[loss]``) and flat dotted keys
        (``loss.style = 15``) are accepted. ``FUSESTYLE_*`` environment
        variables override file values.

        Args:
            path: TOML file

        Returns:
            Validated TrainConfig

        Raises:
            ConfigError: File missing, not TOML, or failing validation
        """
        if not path.is_file():
            raise ConfigError(f"Config file not found: {path}")
        try:
            with open(path, "rb") as f:
                data = tomli.load(f)
        except tomli.TOMLDecodeError as e:
            raise ConfigError(f"{path}: {e}") from e
        try:
            return TrainConfig(**data)
        except ValidationError as e:
            raise ConfigError(f"{path}: {e}") from e

    @staticmethod
    def save(config: TrainConfig, path: Path) -> None:
        """
        Save a training configuration.

        Args:
            config: TrainConfig to save
            path: Destination TOML file
        """
        path.parent.mkdir(parents=True, exist_ok=True)
        data = config.model_dump(mode="json", exclude_none=True)
        with open(path, "wb") as f:
            tomli_w.dump(data, f)

    @staticmethod
    def from_snapshot(data: dict[str, Any]) -> TrainConfig:
        """Rebuild a config from a checkpoint snapshot, ignoring the environment."""
        try:
            return TrainConfig.model_validate(data)
        except ValidationError as e:
            raise ConfigError(f"Invalid config snapshot: {e}") from e

    @staticmethod
    def get_value(config: TrainConfig, key: str) -> Any | None:
        """
        Get a configuration value.

        Args:
            config: Loaded configuration
            key: Configuration key (dot notation, e.g., 'loss.style')

        Returns:
            Configuration value or None
        """
        value: Any = config
        for part in key.split("."):
            value = getattr(value, part, None)
            if value is None:
                break
        return value

    @staticmethod
    def set_value(path: Path, key: str, value: str) -> TrainConfig:
        """
        Set a configuration value in a file, validating the result.

        Args:
            path: TOML file (created with defaults if missing)
            key: Configuration key (dot notation)
            value: Value as typed on the command line

        Returns:
            The updated configuration

        Raises:
            ConfigError: Unknown key or invalid value
        """
        config = ConfigManager.load(path) if path.exists() else TrainConfig()
        data = config.model_dump(mode="json", exclude_none=True)

        parts = key.split(".")
        node = data
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                raise ConfigError(f"Unknown configuration key: {key}")
            node = node[part]
        if parts[-1] not in node:
            raise ConfigError(f"Unknown configuration key: {key}")
        node[parts[-1]] = _parse_scalar(value)

        try:
            updated = TrainConfig.model_validate(data)
        except ValidationError as e:
            raise ConfigError(f"Invalid value for {key}: {e}") from e
        ConfigManager.save(updated, path)
        return updated
