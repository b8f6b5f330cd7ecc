"""
Defaults Loader
Loads simulator defaults from defaults.yaml
"""

import yaml
import logging
from pathlib import Path
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)

SECTIONS = ("grid", "time", "solver", "analysis", "output")


class DefaultsLoader:
    """Loads and serves the defaults file section by section"""

    def __init__(self, config_path: Optional[str] = None):
        """
        Initialize defaults loader

        Args:
            config_path: Path to defaults.yaml
        """
        if config_path is None:
            config_path = Path(__file__).parent.parent / "defaults.yaml"

        self.config_path = Path(config_path)
        self.config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from YAML file"""
        try:
            with open(self.config_path, 'r') as f:
                config = yaml.safe_load(f) or {}
            logger.debug(f"Loaded defaults from {self.config_path}")
        except FileNotFoundError:
            logger.warning(f"Defaults file not found: {self.config_path}; using built-in defaults")
            return self._get_default_config()
        except yaml.YAMLError as e:
            logger.error(f"Error parsing defaults file {self.config_path}: {e}")
            return self._get_default_config()

        if not isinstance(config, dict):
            logger.error(f"Defaults file {self.config_path} must hold a mapping; using built-in defaults")
            return self._get_default_config()
        unknown = set(config) - set(SECTIONS)
        if unknown:
            logger.warning(f"Ignoring unknown sections in {self.config_path}: {', '.join(sorted(unknown))}")
        return config

    def _get_default_config(self) -> Dict[str, Any]:
        """Built-in defaults used when the file is missing or unreadable"""
        return {section: {} for section in SECTIONS}

    def get_section(self, name: str) -> Dict[str, Any]:
        """
        Get one section of the defaults

        Args:
            name: One of grid, time, solver, analysis, output

        Returns:
            Mapping of overrides (empty when the section is absent)
        """
        if name not in SECTIONS:
            raise KeyError(f"Unknown defaults section '{name}'")
        section = self.config.get(name) or {}
        if not isinstance(section, dict):
            logger.warning(f"Section '{name}' in {self.config_path} is not a mapping; ignoring it")
            return {}
        return section


# Global instance
_loader: Optional[DefaultsLoader] = None


def get_defaults_loader() -> DefaultsLoader:
    """Get global defaults loader instance"""
    global _loader
    if _loader is None:
        _loader = DefaultsLoader()
    return _loader
