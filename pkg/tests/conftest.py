"""Shared fixtures for spinwigner tests."""

import numpy as np
import pytest

from spinwigner.config import Settings, use_settings


@pytest.fixture(autouse=True)
def default_settings():
    """Run every test on default settings, ignoring any user config file."""
    settings = use_settings(Settings())
    yield settings
    use_settings(Settings())


@pytest.fixture
def rng():
    """Fixed-seed generator."""
    return np.random.default_rng(1234)
