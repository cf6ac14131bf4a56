"""
Application settings for the simulator.

Settings are read from, in order of priority:
1. Environment variables
2. YAML configuration file
3. Default values

Scenario files are separate documents; see :mod:`ivwsn.scenario`.
"""
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

logger = logging.getLogger(__name__)

DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_OUTPUT_DIR = "out"


class Config:
    """Configuration manager for the simulator."""

    def __init__(self, config_path: Optional[str] = None) -> None:
        """
        Initialize configuration.

        Args:
            config_path: Optional path to configuration file.
                        If None, searches for:
                        - ./ivwsn.yaml, ./ivwsn.yml
                        - ~/.ivwsn/config.yaml
        """
        self.config_path = config_path
        self._config: Dict[str, Any] = {}
        self._load_config()

    def _load_config(self) -> None:
        """Load configuration from file if it exists."""
        possible_paths = [
            Path.cwd() / "ivwsn.yaml",
            Path.cwd() / "ivwsn.yml",
            Path.home() / ".ivwsn" / "config.yaml",
        ]
        if self.config_path:
            config_file: Optional[Path] = Path(self.config_path)
        else:
            config_file = next((p for p in possible_paths if p.exists()), None)

        if config_file and config_file.exists():
            try:
                with open(config_file, "r", encoding="utf-8") as f:
                    self._config = yaml.safe_load(f) or {}
                logger.info(f"Loaded configuration from: {config_file}")
                logger.debug(f"Config content: {self._config}")
            except (OSError, yaml.YAMLError) as e:
                logger.warning(f"Failed to load config file {config_file}: {e}")
                self._config = {}
        elif self.config_path:
            logger.warning(f"Configuration file not found: {self.config_path}")
        else:
            logger.debug(f"No configuration file found in {[str(p) for p in possible_paths]}, using defaults")

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value.

        Args:
            key: Configuration key in dot notation, e.g. 'sweep.workers';
                 the environment variable SWEEP_WORKERS overrides it
            default: Default value if not found
        """
        env_value = os.getenv(key.upper().replace(".", "_"))
        if env_value is not None:
            return env_value

        value: Any = self._config
        for k in key.split("."):
            if not isinstance(value, dict):
                return default
            value = value.get(k)
            if value is None:
                return default
        return value

    def get_log_level(self) -> str:
        return str(self.get("logging.level", DEFAULT_LOG_LEVEL))

    def get_output_dir(self) -> str:
        return str(self.get("output.dir", DEFAULT_OUTPUT_DIR))

    def get_sweep_workers(self) -> int:
        """Worker processes for sweeps; invalid values fall back to 1."""
        try:
            return max(1, int(self.get("sweep.workers", 1)))
        except (TypeError, ValueError):
            logger.warning(f"Invalid sweep.workers {self.get('sweep.workers')!r}, using 1")
            return 1

    def get_templates_dir(self) -> Optional[str]:
        value = self.get("templates.dir")
        return str(value) if value else None


# Global config instance
_config_instance: Optional[Config] = None


def get_config(config_path: Optional[str] = None) -> Config:
    """
    Get or create global configuration instance.

    Args:
        config_path: Optional path to configuration file; forces a reload
    """
    global _config_instance
    if _config_instance is None or config_path is not None:
        _config_instance = Config(config_path)
    return _config_instance
