"""Configuration management for spinwigner.

Uses Pydantic Settings for type-safe config. Config is read from
~/.config/spinwigner/config.yaml (or an explicit path); environment variables
are deliberately not a source so that every run is described by its flags
and config file.
"""

from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict


def get_config_dir() -> Path:
    """Get the spinwigner config directory (not created)."""
    return Path.home() / ".config" / "spinwigner"


class LimitSettings(BaseModel):
    """Size caps that keep dense linear algebra at desk scale."""

    max_dimension: int = Field(default=256, ge=2)
    max_grid_points: int = Field(default=10_000_000, ge=1)
    max_frame_dimension: int = Field(default=4096, ge=4)  # D² of the frame operator
    max_qubits: int = Field(default=10, ge=1)
    chunk_size: int = Field(default=256, ge=1)  # phase points per evaluation batch


class ToleranceSettings(BaseModel):
    """Numeric tolerances for contracts and verification thresholds."""

    hermitian: float = 1e-12
    imaginary: float = 1e-10
    unitary: float = 1e-10
    trace: float = 1e-12
    positivity: float = 1e-10
    state: float = 1e-8
    frame_cutoff: float = 1e-8
    verify: float = 1e-10
    self_duality: float = 1e-9
    reconstruction: float = 1e-8


class Settings(BaseSettings):
    """Main application settings."""

    limits: LimitSettings = Field(default_factory=LimitSettings)
    tolerances: ToleranceSettings = Field(default_factory=ToleranceSettings)
    debug: bool = False

    model_config = SettingsConfigDict(extra="ignore")

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (init_settings,)

    @classmethod
    def from_yaml(cls, path: Path | None = None) -> "Settings":
        """Load settings from a YAML file; missing file means defaults."""
        if path is None:
            path = get_config_dir() / "config.yaml"

        data: dict[str, Any] = {}
        if path.exists():
            with open(path) as f:
                data = yaml.safe_load(f) or {}

        return cls(**data)

    def save(self, path: Path | None = None) -> None:
        """Save settings to a YAML file."""
        if path is None:
            path = get_config_dir() / "config.yaml"

        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            yaml.dump(self.model_dump(mode="json"), f, default_flow_style=False)


# Global settings instance, lazily loaded
_settings: Settings | None = None


def get_settings() -> Settings:
    """Get the global settings instance."""
    global _settings
    if _settings is None:
        _settings = Settings.from_yaml()
    return _settings


def reload_settings(path: Path | None = None) -> Settings:
    """Reload settings from disk."""
    global _settings
    _settings = Settings.from_yaml(path)
    return _settings


def use_settings(settings: Settings) -> Settings:
    """Install an explicit settings instance as the global one."""
    global _settings
    _settings = settings
    return _settings
