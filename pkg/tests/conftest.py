"""Pytest configuration and fixtures for testing."""

import numpy as np
import pytest

from app.services.protocol import random_hermitian, run_protocol
from app.services.quantum.hamiltonians import CustomModel, DriveSchedule, TwoLevelModel
from app.services.quantum.oscillator import OscillatorSpec


@pytest.fixture(name="rng")
def rng_fixture() -> np.random.Generator:
    """Seeded generator so every random test instance is reproducible."""
    return np.random.default_rng(20240917)


@pytest.fixture(name="random_model")
def random_model_fixture(rng: np.random.Generator) -> CustomModel:
    """Dim-4 model interpolating between two random Hermitian endpoints."""
    return CustomModel.linear(random_hermitian(rng, 4), random_hermitian(rng, 4))


@pytest.fixture(name="random_run")
def random_run_fixture(random_model: CustomModel):
    """Smoothstep protocol on the random model at beta = 0.7."""
    schedule = DriveSchedule(duration=1.5, shape="smoothstep", start=0.0, end=1.0)
    return run_protocol(random_model, schedule, beta=0.7, steps=400)


@pytest.fixture(name="two_level_run")
def two_level_run_fixture():
    """Driven qubit, linear ramp lambda: -1 -> 1."""
    schedule = DriveSchedule(duration=2.0, shape="linear", start=-1.0, end=1.0)
    return run_protocol(TwoLevelModel(delta=0.5), schedule, beta=1.3, steps=1000)


@pytest.fixture(name="fig1_spec")
def fig1_spec_fixture() -> OscillatorSpec:
    return OscillatorSpec(omega_0=1.0, omega_tau=2.0)


@pytest.fixture(name="config_file")
def config_file_fixture(tmp_path):
    """Write an INI run config and return its path."""

    def write(text: str):
        path = tmp_path / "run.ini"
        path.write_text(text)
        return path

    return write
