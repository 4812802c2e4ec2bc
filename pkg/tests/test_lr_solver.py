"""Tests for the invariant-based solver and the analytic driven-phase family."""

import math

import numpy as np
import pytest

from tdswanson import (
    FunctionSpec,
    analytic_phi_case,
    assemble_U,
    evolution_operator,
    evolve_lr,
    hamiltonian_matrix,
    integrate_metric,
    interior_norm,
    omega_eff,
    phi_from_epsilon,
    psi_solution,
    psi_superposition,
    squeeze_rhs,
)
from tdswanson.exceptions import (
    IntegrationError,
    SingularFlowError,
    SqueezeSingularityError,
)
from tdswanson.lr_solver import R_MIN

from conftest import make_const_scenario

DIM = 40

# degree-9 Taylor polynomial of 0.3 sin t: a convenient real drive (the
# analytic family holds for any real f, so polynomial exactness is enough)
DRIVE = FunctionSpec("polynomial", coeffs=(
    0.0, 0.3, 0.0, -0.05, 0.0, 0.0025, 0.0,
    -5.952380952380953e-05, 0.0, 8.267195767195768e-07))


@pytest.fixture(scope="module")
def lr_run():
    scen = make_const_scenario(1.0, 0.2, 0.05)
    phi0 = phi_from_epsilon(0.9, 0.1)
    metric = integrate_metric(scen, 0.9, phi0, 0.0, (0.0, 1.0, 101),
                              rtol=1e-11, atol=1e-11)
    return scen, evolve_lr(metric, 0.3, 0.0, 0.2 + 0.1j)


# ---------------------------------------------------------------------------
# squeeze system
# ---------------------------------------------------------------------------

def test_squeeze_rhs_formulas():
    r, phi_s, w, kappa, zeta = 0.5, 0.3, 1.2, 0.4, 0.7
    d_r, d_phi_s = squeeze_rhs(r, phi_s, w, kappa, zeta)
    assert d_r == pytest.approx(-2.0 * kappa * math.sin(zeta + phi_s))
    assert d_phi_s == pytest.approx(
        -2.0 * w - 4.0 * kappa * math.cos(zeta + phi_s) / math.tanh(2.0 * r))


def test_squeeze_rhs_singularity_guard():
    with pytest.raises(SqueezeSingularityError):
        squeeze_rhs(1e-9, 0.0, 1.0, 0.5, 0.0)  # active drive at r -> 0
    # drive switched off by the phase: finite limit, d_phi_s = -2W
    d_r, d_phi_s = squeeze_rhs(1e-9, 0.0, 1.0, 0.5, math.pi / 2.0)
    assert d_r == pytest.approx(-1.0)
    assert d_phi_s == pytest.approx(-2.0)


def test_omega_eff_formula():
    r, phi_s, w, kappa, zeta = 0.5, 0.3, 1.2, 0.4, 0.7
    assert omega_eff(r, phi_s, w, kappa, zeta) == pytest.approx(
        w + 2.0 * kappa * math.tanh(r) * math.cos(zeta + phi_s))


# ---------------------------------------------------------------------------
# joint evolution
# ---------------------------------------------------------------------------

def test_evolve_lr_conserves_theta_modulus(lr_run):
    _, lr = lr_run
    drift = max(abs(abs(s.theta) - abs(0.2 + 0.1j)) for s in lr.states)
    assert drift < 1e-14


def test_evolve_lr_initial_data(lr_run):
    _, lr = lr_run
    assert lr.states[0].varpi == 0.0
    assert lr.states[0].r == pytest.approx(0.3)
    assert lr.states[0].theta == pytest.approx(0.2 + 0.1j)


def test_evolve_lr_tracks_metric_flow(lr_run):
    _, lr = lr_run
    dphi = max(abs(a.phi_cap - b.phi_cap)
               for a, b in zip(lr.metric_states, lr.metric.states))
    assert dphi < 1e-8  # joint system re-integrates the same flow


def test_evolve_lr_dense_state_matches_grid(lr_run):
    _, lr = lr_run
    mstate, lstate, om = lr.state_at(lr.times[50])
    assert lstate.r == lr.states[50].r
    assert lstate.phi_s == lr.states[50].phi_s
    assert om == lr.Omega[50]
    assert mstate.phi_cap == lr.metric_states[50].phi_cap


def test_evolve_lr_input_validation(lr_run):
    _, lr = lr_run
    with pytest.raises(ValueError):
        evolve_lr(lr.metric, R_MIN / 2.0, 0.0, 0.1)
    scen = make_const_scenario(1.0, 0.6, 0.0)
    halted = integrate_metric(scen, 0.7, 0.25, 2.5, (0.0, 6.0, 121))
    assert halted.halted is not None
    with pytest.raises(ValueError):
        evolve_lr(halted, 0.3, 0.0, 0.1)


# ---------------------------------------------------------------------------
# operator assembly and seeded solutions
# ---------------------------------------------------------------------------

def test_assemble_U_unitary(lr_run):
    _, lr = lr_run
    u = assemble_U(lr.states[50], DIM)
    assert interior_norm(u.conj().T @ u - np.eye(DIM)) < 1e-12


def test_evolution_operator_unitary(lr_run):
    _, lr = lr_run
    v = evolution_operator(lr.states[50], lr.states[0], DIM)
    assert interior_norm(v.conj().T @ v - np.eye(DIM)) < 1e-12
    # at equal times it collapses to the identity
    v0 = evolution_operator(lr.states[0], lr.states[0], DIM)
    assert interior_norm(v0 - np.eye(DIM)) < 1e-12


def test_psi_solution_satisfies_original_tdse(lr_run):
    """The mapped-back solution solves i dpsi/dt = H psi (stencil check)."""
    scen, lr = lr_run
    t, dt = 0.73, 1e-3
    h_mat = hamiltonian_matrix(scen, t, DIM)

    def psi(tt):
        return psi_solution(0, tt, lr, DIM)

    dpsi = (psi(t - 2 * dt) - 8.0 * psi(t - dt) + 8.0 * psi(t + dt)
            - psi(t + 2 * dt)) / (12.0 * dt)
    res = 1j * dpsi - h_mat @ psi(t)
    guard = DIM // 5
    assert np.linalg.norm(res[:DIM - guard]) < 1e-6


def test_psi_superposition_matches_column_sum(lr_run):
    _, lr = lr_run
    c = np.zeros(DIM, complex)
    c[0], c[2] = 0.6, 0.8j
    t = 0.73
    via_op = psi_superposition(c, t, lr, DIM)
    via_sum = (0.6 * psi_solution(0, t, lr, DIM)
               + 0.8j * psi_solution(2, t, lr, DIM))
    assert np.linalg.norm(via_op - via_sum) < 1e-12


def test_psi_solution_index_validation(lr_run):
    _, lr = lr_run
    with pytest.raises(ValueError):
        psi_solution(DIM, 0.5, lr, DIM)
    with pytest.raises(ValueError):
        psi_superposition(np.zeros(3), 0.5, lr, DIM)


# ---------------------------------------------------------------------------
# analytic driven-phase family
# ---------------------------------------------------------------------------

def test_analytic_family_stays_on_curve():
    res = analytic_phi_case(DRIVE, 0.4, 0.5, 0.7, 0.9, 0.3, 0.1,
                            (0.0, 1.3, 131))
    assert res.v_const == pytest.approx(0.4)
    assert res.motion_constant == pytest.approx(0.5 * math.cos(0.3), rel=1e-13)
    assert res.max_deviation < 1e-6
    # curve() agrees with the stored samples
    k = 65
    assert res.curve(float(res.varsigma[k])) == pytest.approx(
        float(res.curve_values[k]), rel=1e-12)


def test_analytic_family_zero_drive():
    f0 = FunctionSpec("constant", value=0.0)
    res = analytic_phi_case(f0, 0.4, 0.5, 0.7, 0.9, 0.3, 0.1, (0.0, 1.3, 131))
    assert res.max_deviation < 1e-6


def test_analytic_family_degenerate_start():
    # cos(varsigma0 - v) = 0 makes the invariant curve degenerate
    with pytest.raises(SingularFlowError):
        analytic_phi_case(DRIVE, 0.4, 0.5, 0.4 + math.pi / 2.0, 0.9, 0.3, 0.1,
                          (0.0, 1.0, 11))


def test_analytic_family_blow_up_reported():
    # past the secant pole the squeeze strength diverges; the stepper failure
    # surfaces as IntegrationError rather than silent nonsense
    with pytest.raises(IntegrationError):
        analytic_phi_case(DRIVE, 0.4, 0.5, 0.7, 0.9, 0.3, 0.1, (0.0, 2.0, 201))


def test_analytic_family_rejects_complex_drive():
    f_bad = FunctionSpec("sinusoid", amplitude=0.3, frequency=1.0)
    with pytest.raises(ValueError):
        analytic_phi_case(f_bad, 0.4, 0.5, 0.7, 0.9, 0.3, 0.1, (0.0, 1.0, 11))
