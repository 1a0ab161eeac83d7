"""Search settings loader: JSON defaults on disk, overridable from the environment."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from pydantic import Field
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config" / "search_defaults.json"


class SearchSettings(BaseSettings):
    """Guards and budgets shared by every search in the toolkit."""

    model_config = SettingsConfigDict(env_prefix="TOURNEY_", env_file=".env", extra="ignore")

    enumeration_guard: int = Field(default=12, ge=1)
    hk_depth_guard: int = Field(default=10, ge=0)
    max_subset_size: Optional[int] = Field(default=None, ge=0)
    max_candidates: Optional[int] = Field(default=None, ge=1)
    on_exhaustion: str = Field(default="fail", pattern=r"^(fail|return-best-found)$")
    orbit_pruning: bool = True
    workers: int = Field(default=1, ge=1)
    log_level: str = "INFO"

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        # environment beats the JSON file, which arrives as init kwargs
        return env_settings, dotenv_settings, init_settings, file_secret_settings


class SearchConfigRegistry:
    """Loads and caches search settings from disk with sane defaults."""

    def __init__(self, config_path: Path | str | None = None):
        self.config_path = Path(config_path) if config_path else DEFAULT_CONFIG_PATH
        self._cache: SearchSettings | None = None

    def load(self, force_reload: bool = False) -> SearchSettings:
        if self._cache is not None and not force_reload:
            return self._cache

        file_values: Dict[str, Any] = {}
        if self.config_path.exists():
            try:
                file_values = self._parse_config(json.loads(self.config_path.read_text()))
                logger.info("Loaded search settings from %s", self.config_path)
            except (ValueError, TypeError) as exc:
                logger.warning("Failed to load search settings %s: %s", self.config_path, exc)
                file_values = {}
        else:
            logger.info("Using built-in search settings defaults")

        try:
            self._cache = SearchSettings(**file_values)
        except ValueError as exc:
            logger.warning("Invalid values in %s, using defaults: %s", self.config_path, exc)
            self._cache = SearchSettings()
        return self._cache

    def _parse_config(self, data: Dict[str, Any]) -> Dict[str, Any]:
        if not isinstance(data, dict):
            raise ValueError("top-level JSON value must be an object")
        known = set(SearchSettings.model_fields)
        unknown = sorted(set(data) - known)
        if unknown:
            logger.warning("Ignoring unknown search settings: %s", ", ".join(unknown))
        # null means "use the default / no cap"
        return {key: value for key, value in data.items() if key in known and value is not None}


_registry = SearchConfigRegistry()


def get_settings(config_path: str | Path | None = None) -> SearchSettings:
    """Process-wide settings, or a one-off load when a path is given."""
    if config_path is not None:
        return SearchConfigRegistry(config_path).load()
    return _registry.load()


def use_config(config_path: str | Path | None = None) -> SearchSettings:
    """Point the process-wide settings at another file (None: the default) and reload."""
    global _registry
    _registry = SearchConfigRegistry(config_path)
    return _registry.load()
