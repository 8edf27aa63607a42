"""Pytest fixtures for spin-circuits tests.

Common fixtures for noise models, MCP contexts and a clean environment.
"""

import json
from unittest.mock import MagicMock

import pytest

from spin_circuits.config import Settings
from spin_circuits.models.simulation import NoiseModel


@pytest.fixture
def default_noise():
    """The packaged default noise model."""
    return NoiseModel.default()


@pytest.fixture
def gate_noise():
    """Gate noise only, perfect readout."""
    return NoiseModel(p1=0.001, p2=0.02)


@pytest.fixture
def noise_file(tmp_path, default_noise):
    """Default noise model written to a JSON file."""
    path = tmp_path / "noise.json"
    path.write_text(json.dumps(default_noise.model_dump()))
    return path


@pytest.fixture(autouse=True)
def reset_environment_for_tests(monkeypatch):
    """Reset environment variables for each test.

    This fixture automatically runs before each test so that no developer
    settings leak into results.
    """
    monkeypatch.setenv("SPIN_CIRCUITS_THREADS", "1")
    monkeypatch.setenv("SPIN_CIRCUITS_LOG_LEVEL", "WARNING")
    monkeypatch.delenv("SPIN_CIRCUITS_NOISE", raising=False)


@pytest.fixture
def mcp_context(default_noise):
    """Mock MCP context carrying the server lifespan state."""
    context = MagicMock()
    context.request_context.lifespan_context = {
        "settings": Settings(threads=1, log_level="WARNING"),
        "noise": default_noise,
    }
    return context
