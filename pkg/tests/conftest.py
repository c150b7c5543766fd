"""Shared fixtures for the workhorse models and domains."""
import numpy as np
import pytest

from turinglab import DomainSpec, SchnakenbergParams, custom_model, schnakenberg_model


@pytest.fixture(scope="session")
def model_main():
    """Turing-capable reference instance used across the suite."""
    return schnakenberg_model(SchnakenbergParams(a=0.2, b=1.3, r=1.0))


@pytest.fixture(scope="session")
def model_case_b():
    """Kinetics-stable instance that is not Turing-capable (a11 < 0)."""
    return schnakenberg_model(SchnakenbergParams(a=1.0, b=0.5, r=1.0))


@pytest.fixture(scope="session")
def rect():
    return DomainSpec.rectangle(10.0, 5.0)


@pytest.fixture(scope="session")
def interval():
    return DomainSpec.interval(5.58)


@pytest.fixture(scope="session")
def zero_kinetics():
    """Pure-diffusion model: every reaction coefficient is zero."""
    z2 = np.zeros((2, 2))
    z3 = np.zeros((2, 2, 2))
    return custom_model((1.0, 1.0), z2, (z2, z2), (z3, z3), label="diffusion-only")
