"""Tests for settings loading."""

import pytest
from pydantic import ValidationError

from spinwigner.config import Settings, get_settings, reload_settings


def test_defaults():
    """Test default caps and tolerances."""
    settings = Settings()
    assert settings.limits.max_dimension == 256
    assert settings.limits.chunk_size == 256
    assert settings.tolerances.verify == 1e-10
    assert settings.tolerances.reconstruction == 1e-8
    assert settings.debug is False


def test_yaml_round_trip(tmp_path):
    """Test saving and loading a settings file."""
    path = tmp_path / "nested" / "config.yaml"
    original = Settings(limits={"max_dimension": 64}, debug=True)
    original.save(path)
    loaded = Settings.from_yaml(path)
    assert loaded.limits.max_dimension == 64
    assert loaded.debug is True
    assert loaded.tolerances == original.tolerances


def test_missing_file_gives_defaults(tmp_path):
    """Test that an absent config file is not an error."""
    assert Settings.from_yaml(tmp_path / "absent.yaml") == Settings()


def test_environment_is_ignored(monkeypatch):
    """Test that environment variables do not change settings."""
    monkeypatch.setenv("DEBUG", "true")
    assert Settings().debug is False


def test_invalid_values_rejected(tmp_path):
    """Test validation of config values."""
    path = tmp_path / "config.yaml"
    path.write_text("limits:\n  chunk_size: 0\n")
    with pytest.raises(ValidationError):
        Settings.from_yaml(path)


def test_reload_installs_global(tmp_path):
    """Test that reload_settings replaces the global instance."""
    path = tmp_path / "config.yaml"
    path.write_text("limits:\n  max_qubits: 3\n")
    reload_settings(path)
    assert get_settings().limits.max_qubits == 3
