"""Tests for coefficient specs, scenarios, and the Hamiltonian matrix."""

import math

import numpy as np
import pytest

from tdswanson.exceptions import ConfigError, DomainError
from tdswanson.model import (
    CoefficientScenario,
    FunctionSpec,
    eval_coefficients,
    function_spec_from_json,
    hamiltonian_matrix,
    hermiticity_flags,
    scenario_from_json,
)

from conftest import make_const_scenario


# ---------------------------------------------------------------------------
# FunctionSpec evaluation
# ---------------------------------------------------------------------------

def test_constant_and_derivative():
    f = FunctionSpec("constant", value=2.5 - 1j)
    assert f(3.0) == 2.5 - 1j
    assert f.derivative(3.0) == 0


def test_polynomial_value_and_derivative():
    f = FunctionSpec("polynomial", coeffs=(1.0, 0.0, 3.0))  # 1 + 3 t^2
    assert f(2.0) == pytest.approx(13.0)
    assert f.derivative(2.0) == pytest.approx(12.0)


def test_sinusoid_value_and_derivative():
    f = FunctionSpec("sinusoid", amplitude=0.5, frequency=2.0, phase=0.3,
                     offset=1.0)
    t = 0.7
    expect = 0.5 * np.exp(1j * (2.0 * t + 0.3)) + 1.0
    assert f(t) == pytest.approx(expect)
    assert f.derivative(t) == pytest.approx(2j * 0.5 * np.exp(1j * (2.0 * t + 0.3)))


def test_tabulated_spline_reproduces_smooth_function():
    ts = np.linspace(0.0, 2.0, 41)
    f = FunctionSpec("tabulated", times=tuple(ts),
                     values=tuple(np.sin(ts) + 0.5j * ts))
    assert f(1.234) == pytest.approx(math.sin(1.234) + 0.617j, abs=2e-7)
    assert f.derivative(1.234) == pytest.approx(math.cos(1.234) + 0.5j, abs=2e-5)


def test_tabulated_linear_interpolation():
    f = FunctionSpec("tabulated", times=(0.0, 1.0, 2.0), values=(0.0, 2.0, 2.0),
                     interpolation="linear")
    assert f(0.5) == pytest.approx(1.0)
    assert f.derivative(0.5) == pytest.approx(2.0)
    assert f(1.5) == pytest.approx(2.0)
    assert f.derivative(1.5) == pytest.approx(0.0)


def test_tabulated_domain_enforced():
    f = FunctionSpec("tabulated", times=(0.0, 1.0), values=(0.0, 1.0),
                     interpolation="linear")
    with pytest.raises(DomainError):
        f(1.5)


def test_parity_detection():
    assert FunctionSpec("constant", value=1.0).parity_even() is True
    assert FunctionSpec("polynomial", coeffs=(1.0, 0.0, 2.0)).parity_even() is True
    assert FunctionSpec("polynomial", coeffs=(1.0, 1.0)).parity_even() is False
    assert FunctionSpec("sinusoid", amplitude=1.0, frequency=2.0).parity_even() is False
    assert FunctionSpec("sinusoid", amplitude=1.0, frequency=0.0).parity_even() is True
    assert FunctionSpec("tabulated", times=(0.0, 1.0), values=(0.0, 1.0),
                        interpolation="linear").parity_even() is None


def test_scaled_preserves_shape():
    f = FunctionSpec("sinusoid", amplitude=0.5, frequency=2.0, phase=0.3,
                     offset=1.0)
    g = f.scaled(3.0)
    assert g(0.7) == pytest.approx(3.0 * f(0.7))
    assert g.derivative(0.7) == pytest.approx(3.0 * f.derivative(0.7))


# ---------------------------------------------------------------------------
# JSON parsing
# ---------------------------------------------------------------------------

def test_function_spec_from_json_complex_pairs():
    f = function_spec_from_json({"kind": "constant", "value": [1.0, -2.0]})
    assert f(0.0) == 1.0 - 2.0j


def test_function_spec_from_json_bad_kind_cites_path():
    with pytest.raises(ConfigError) as err:
        function_spec_from_json({"kind": "fourier"}, "$.omega")
    assert "$.omega.kind" in str(err.value)


def test_scenario_from_json_missing_coefficient_cites_path():
    with pytest.raises(ConfigError) as err:
        scenario_from_json({"omega": {"kind": "constant", "value": 1.0}}, "$")
    assert "$.alpha" in str(err.value)


def test_scenario_from_json_round_trip():
    obj = {
        "omega": {"kind": "constant", "value": 1.0},
        "alpha": {"kind": "sinusoid", "amplitude": 0.1, "frequency": 1.0},
        "beta": {"kind": "constant", "value": [0.0, 0.05]},
        "t_start": 0.0, "t_stop": 5.0,
    }
    scen = scenario_from_json(obj)
    om, al, be, polar = eval_coefficients(scen, 1.0)
    assert om == 1.0
    assert be == 0.05j
    assert polar.alpha_abs == pytest.approx(0.1)


# ---------------------------------------------------------------------------
# scenario evaluation and the Hamiltonian
# ---------------------------------------------------------------------------

def test_eval_coefficients_polar_consistency(drive_scenario):
    om, al, be, polar = eval_coefficients(drive_scenario, 0.8)
    assert polar.omega_abs * np.exp(1j * polar.varphi_omega) == pytest.approx(om)
    assert polar.alpha_abs * np.exp(1j * polar.varphi_alpha) == pytest.approx(al)
    assert polar.beta_abs * np.exp(1j * polar.varphi_beta) == pytest.approx(be)


def test_scenario_domain_error():
    scen = CoefficientScenario(
        FunctionSpec("constant", value=1.0),
        FunctionSpec("tabulated", times=(0.0, 1.0), values=(0.1, 0.1),
                     interpolation="linear"),
        FunctionSpec("constant", value=0.0),
    )
    with pytest.raises(DomainError):
        eval_coefficients(scen, 2.0)


def test_hamiltonian_matrix_structure():
    scen = make_const_scenario(2.0, 0.3, 0.1j)
    h = hamiltonian_matrix(scen, 0.0, 5)
    # diagonal omega*(n + 1/2)
    assert np.allclose(np.diag(h), 2.0 * (np.arange(5) + 0.5))
    # alpha on the second superdiagonal: alpha * sqrt((n+1)(n+2))
    assert h[0, 2] == pytest.approx(0.3 * math.sqrt(2.0))
    assert h[1, 3] == pytest.approx(0.3 * math.sqrt(6.0))
    # beta on the second subdiagonal
    assert h[2, 0] == pytest.approx(0.1j * math.sqrt(2.0))
    # nothing on the first off-diagonals
    assert abs(h[0, 1]) == 0 and abs(h[1, 0]) == 0


def test_hermiticity_flags_hermitian_case():
    scen = make_const_scenario(1.0, 0.2 + 0.1j, 0.2 - 0.1j)
    is_h, is_pt = hermiticity_flags(scen, 0.0)
    assert is_h is True
    assert is_pt is True  # constants are even


def test_hermiticity_flags_non_hermitian_odd_polynomial():
    scen = CoefficientScenario(
        FunctionSpec("polynomial", coeffs=(1.0, 1.0)),  # 1 + t, odd part present
        FunctionSpec("constant", value=0.3),
        FunctionSpec("constant", value=0.1),
    )
    is_h, is_pt = hermiticity_flags(scen, 0.0)
    assert is_h is False  # alpha != conj(beta)
    assert is_pt is False


def test_hermiticity_flags_unknown_for_tabulated():
    scen = CoefficientScenario(
        FunctionSpec("constant", value=1.0),
        FunctionSpec("tabulated", times=(-5.0, 5.0), values=(0.1, 0.1),
                     interpolation="linear"),
        FunctionSpec("constant", value=0.1),
    )
    _, is_pt = hermiticity_flags(scen, 0.0)
    assert is_pt is None
