"""Shared test fixtures for the heralded-entanglement test suite.

Provides:
- config: the TestConfig class (small fixed Monte Carlo budgets)
- rng: a numpy Generator seeded from TestConfig.SEED
- cli / runner: the click group built in testing mode and a CliRunner
- write_config: writes a dict as a JSON config under tmp_path
- equal_cavity: g0 = g1 cavity parameters
- adiabatic_profile / adiabatic_cavity / adiabatic_emission: the
  slow-drive operating point, integrated once per session
"""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from app import create_cli
from app.config import TestConfig
from app.models.pulse import CavityParams, PulseProfile
from app.services import pulse_service


@pytest.fixture(scope="session")
def config():
    return TestConfig


@pytest.fixture
def rng(config):
    return np.random.default_rng(config.SEED)


@pytest.fixture(scope="session")
def cli():
    """Click group configured for testing."""
    return create_cli("testing")


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def write_config(tmp_path):
    """Return a helper that dumps a dict to tmp_path/<name> and returns the path."""

    def _write(data, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)

    return _write


@pytest.fixture
def equal_cavity():
    return CavityParams(g0=1.0, g1=1.0, kappa=10.0)


# --- Adiabatic operating point ---
# κ = 10·|g0|, sin² ramp, κT = 2000 and κ·dt = 0.04.

@pytest.fixture(scope="session")
def adiabatic_cavity():
    return CavityParams(g0=1.0e6, g1=1.0e7, kappa=1.0e7)


@pytest.fixture(scope="session")
def adiabatic_profile():
    return PulseProfile.sin_squared(omega_max=1.0e6, duration=2.0e-4, n_points=50001)


@pytest.fixture(scope="session")
def adiabatic_emission(adiabatic_profile, adiabatic_cavity):
    return pulse_service.simulate_single_atom_emission(adiabatic_profile, adiabatic_cavity)
