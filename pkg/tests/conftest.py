"""Shared fixtures and helpers for the test suite."""

import numpy as np
import pytest

from tdswanson.model import CoefficientScenario, FunctionSpec


def commutator(a, b):
    return a @ b - b @ a


def make_const_scenario(omega, alpha, beta):
    """Scenario with three constant coefficients."""
    return CoefficientScenario(
        FunctionSpec("constant", value=omega),
        FunctionSpec("constant", value=alpha),
        FunctionSpec("constant", value=beta),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20250825)


@pytest.fixture
def drive_scenario():
    """Mildly driven complex scenario used across flow tests."""
    return CoefficientScenario(
        FunctionSpec("sinusoid", amplitude=0.05 + 0.02j, frequency=1.3,
                     phase=0.2, offset=1.0),
        FunctionSpec("sinusoid", amplitude=0.04, frequency=0.9, phase=-0.4,
                     offset=0.18 + 0.03j),
        FunctionSpec("constant", value=0.05 - 0.02j),
    )


@pytest.fixture
def real_scenario():
    """Real-coefficient scenario (constant omega, slowly varying couplings)."""
    return CoefficientScenario(
        FunctionSpec("constant", value=1.0),
        FunctionSpec("polynomial", coeffs=(0.2, 0.0, 0.01)),
        FunctionSpec("constant", value=0.05),
    )
