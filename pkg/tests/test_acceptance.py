"""End-to-end acceptance checks, one test per shipped guarantee.

Each test prints a single PASS/FAIL line with every measured figure next to
its bound (run pytest with ``-s`` to see the lines on passing runs too) and
then asserts those bounds, including wall-clock budgets where a guarantee
carries one.  All sampling is seeded; every check is deterministic.
"""

import math
import time

import numpy as np

from tdswanson.fock_su11 import (
    dyson_map_exponential,
    dyson_map_product,
    guard_band,
    interior_norm,
    metric_state,
    rel_diff,
)
from tdswanson.lr_solver import analytic_phi_case, evolve_lr, psi_solution
from tdswanson.metric_flow import (
    epsilon_from_phi_forms,
    hermitized_W_V,
    integrate_metric,
)
from tdswanson.model import (
    CoefficientScenario,
    FunctionSpec,
    PolarCoefficients,
    eval_coefficients,
    hamiltonian_matrix,
)
from tdswanson.observables import (
    metric_operator_quadrature,
    observable_O,
    quasi_XP,
    quasi_hermiticity_check,
    rho_metric,
    static_real_O,
    static_real_XP,
)
from tdswanson.oracle import (
    _stencil_derivative,
    dyson_residual,
    invariant_transfer_check,
    lr_vs_direct,
    rho_norm_series,
)
from tdswanson.static_metric import (
    epsilon_static_real,
    forbidden_band,
    phi_from_epsilon,
    recover_angles,
    solve_phi_cubic,
    static_residuals,
)

SEED = 20250825

# Real-coefficient non-Hermitian scenario shared by the propagation and
# invariant-transfer checks (criteria 5 and 6).
CROSS_SCEN = CoefficientScenario(
    FunctionSpec("constant", value=1.0),
    FunctionSpec("constant", value=0.2),
    FunctionSpec("constant", value=0.05),
)
CROSS_Z = 0.9
CROSS_GRID = (0.0, 2.0, 401)


def _verdict(num, label, checks, runtime=None):
    """Print one acceptance line, then assert every (name, value, bound)."""
    ok = all(value <= bound for _, value, bound in checks)
    body = "; ".join(f"{name} {value:.3e} (bound {bound:g})"
                     for name, value, bound in checks)
    tail = "" if runtime is None else f" [{runtime:.2f} s]"
    print(f"acceptance {num} {label}: {'PASS' if ok else 'FAIL'} -- {body}{tail}")
    for name, value, bound in checks:
        assert value <= bound, (
            f"criterion {num} ({label}): {name} = {value:.6e} exceeds {bound:g}"
        )


# ---------------------------------------------------------------------------
# 1. exponential map vs three-factor product on the truncated ladder
# ---------------------------------------------------------------------------

def test_criterion_1_factorized_map_matches_exponential():
    rng = np.random.default_rng(SEED)
    dim = 30
    t0 = time.perf_counter()
    worst = 0.0
    accepted = 0
    draws = 0
    while accepted < 50:
        draws += 1
        assert draws < 5000, "admissible-sample search exhausted"
        eps = rng.uniform(-1.5, 1.5)
        if abs(eps) < 1e-3:
            continue
        amp = rng.uniform(0.0, 0.45 * abs(eps))
        mu = amp * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
        # Predictive truncation gate: the exponential route is trustworthy at
        # this dimension only when the squeeze tail decays fast enough.  The
        # estimate is confirmed by a Cauchy check against dimension 36.
        a = 2.0 * amp / abs(eps)
        r_s = np.arctanh(a) / 2.0
        xi = abs(eps) * math.sqrt(1.0 - a * a)
        if eps > 0:
            err_est = math.e ** 2 * math.tanh(r_s) ** 7 * math.exp(13.0 * xi)
        else:
            err_est = 3.0 * (math.tanh(r_s) * math.exp(-xi)) ** 7
        if err_est >= 1e-9:
            continue
        exp_dim = dyson_map_exponential(eps, mu, dim)
        exp_up = dyson_map_exponential(eps, mu, dim + 6)
        cauchy = (np.linalg.norm(exp_up[:24, :24] - exp_dim[:24, :24])
                  / max(1.0, interior_norm(exp_dim)))
        if cauchy > 1e-10:
            continue
        accepted += 1
        worst = max(worst, rel_diff(exp_dim, dyson_map_product(eps, mu, dim)))
    runtime = time.perf_counter() - t0
    _verdict(1, "factorized vs exponential map", [
        ("route mismatch", worst, 1e-8),
        ("runtime [s]", runtime, 10.0),
    ], runtime)


# ---------------------------------------------------------------------------
# 2. hermitization certificate along integrated flows
# ---------------------------------------------------------------------------

def _const(value):
    return FunctionSpec("constant", value=value)


def _sin(amplitude, frequency, phase, offset):
    return FunctionSpec("sinusoid", amplitude=amplitude, frequency=frequency,
                        phase=phase, offset=offset)


def _poly(*coeffs):
    return FunctionSpec("polynomial", coeffs=coeffs)


def test_criterion_2_hermitization_certificate():
    runs = [
        # (scenario, mode, z_abs, phi_cap0, varphi0, grid)
        (CoefficientScenario(_const(1.0), _const(0.2), _const(0.05)),
         "complex", 0.9, phi_from_epsilon(0.9, 0.1), 0.0, (0.0, 2.0, 201)),
        (CoefficientScenario(_sin(0.05 + 0.02j, 1.3, 0.2, 1.0),
                             _sin(0.04, 0.9, -0.4, 0.18 + 0.03j),
                             _const(0.05 - 0.02j)),
         "complex", 0.7, 0.3, 0.4, (0.0, 3.0, 151)),
        (CoefficientScenario(_const(1.0), _const(0.15 + 0.1j),
                             _const(0.05 - 0.02j)),
         "complex", 0.5, phi_from_epsilon(0.5, -0.5), 1.1, (0.0, 2.0, 101)),
        (CoefficientScenario(_poly(1.0, 0.1, 0.02),
                             _sin(0.06, 1.1, 0.5, 0.2 + 0.05j),
                             _const(0.07 + 0.01j)),
         "complex", 0.6, 0.15, 0.3, (0.0, 2.0, 101)),
        (CoefficientScenario(_const(1.0 + 0.03j), _const(0.2), _const(0.1)),
         "complex", 0.7, 0.25, 0.9, (0.0, 1.5, 101)),
        (CoefficientScenario(_const(1.2), _const(0.1 + 0.02j),
                             _sin(0.05, 0.7, -0.2, 0.12 - 0.03j)),
         "complex", 0.4, phi_from_epsilon(0.4, 0.4), 0.5, (0.0, 2.0, 101)),
        (CoefficientScenario(_const(1.0), _poly(0.2, 0.0, 0.01), _const(0.05)),
         "real", 0.6, 0.2, 0.8, (0.0, 3.0, 151)),
        (CoefficientScenario(_const(2.0), _const(0.6), _const(0.2)),
         "real", 0.7, 0.2, 0.5, (0.0, 2.0, 101)),
        (CoefficientScenario(_poly(1.0, 0.05), _poly(0.25, -0.03),
                             _poly(0.1, 0.02)),
         "real", 0.5, 0.15, 0.7, (0.0, 2.0, 101)),
        (CoefficientScenario(_const(1.0), _const(0.2), _const(0.05)),
         "real", 0.9, phi_from_epsilon(0.9, 0.1), 0.0, (0.0, 2.0, 201)),
    ]
    t0 = time.perf_counter()
    worst_imw = 0.0
    worst_tv = 0.0
    for scen, mode, z_abs, p0, v0, grid in runs:
        traj = integrate_metric(scen, z_abs, p0, v0, grid, mode=mode,
                                rtol=1e-10, atol=1e-10)
        assert traj.halted is None, f"certificate run halted: {traj.halted}"
        worst_imw = max(worst_imw, float(np.max(traj.res_imW)))
        worst_tv = max(worst_tv, float(np.max(traj.res_TVstar)))
    runtime = time.perf_counter() - t0
    _verdict(2, "hermitization certificate (10 flows)", [
        ("max |Im W|", worst_imw, 1e-8),
        ("max |T - conj(V)|", worst_tv, 1e-8),
        ("runtime [s]", runtime, 30.0),
    ], runtime)


# ---------------------------------------------------------------------------
# 3. strength-inversion dual forms and the feasibility boundary
# ---------------------------------------------------------------------------

def test_criterion_3_strength_inversion_forms_and_boundary():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    samples = 0
    while samples < 1000:
        z = rng.uniform(0.05, 0.95)
        s = math.sqrt(1.0 - z * z)
        if rng.uniform() < 0.5:
            phi = (1.0 - s) / z * rng.uniform(0.02, 0.98)
        else:
            phi = (1.0 + s) / z * (1.0 + rng.uniform(1e-3, 2.0))
        forms, reason = epsilon_from_phi_forms(z, phi)
        assert forms is not None, f"sampled point infeasible: {reason}"
        eps_at, eps_log = forms
        worst = max(worst, abs(eps_at - eps_log) / max(1.0, abs(eps_at)))
        samples += 1

    # Feasibility flips exactly at |z| (1 + Phi^2) = 2 Phi; probe both sides
    # at 1e-12 offsets on both squeeze branches.
    misclassified = 0
    for phi in np.concatenate([np.linspace(0.05, 0.9, 60),
                               np.linspace(1.15, 3.0, 60)]):
        z_star = 2.0 * phi / (1.0 + phi * phi)
        inside, _ = epsilon_from_phi_forms(z_star + 1e-12, float(phi))
        outside, _ = epsilon_from_phi_forms(z_star - 1e-12, float(phi))
        if inside is None or outside is not None:
            misclassified += 1
    _verdict(3, "strength inversion dual forms", [
        ("form disagreement (1000 samples)", worst, 1e-12),
        ("boundary misclassifications / 240", float(misclassified), 0.0),
    ])


# ---------------------------------------------------------------------------
# 4. static solutions: cubic roots, recovered angles, forbidden band
# ---------------------------------------------------------------------------

def _cubic_residual(a, r):
    return abs(((a * r + (2.0 - a * a)) * r - 3.0 * a) * r + a * a)


def test_criterion_4_static_roots_angles_and_band():
    worst_cubic = 0.0
    for z in np.arange(0.0, 0.95, 0.1):
        for root in solve_phi_cubic(float(z)):
            worst_cubic = max(worst_cubic, _cubic_residual(float(z), root))
    # |z| = 1 sits outside the solver's domain (the state itself degenerates
    # there), but the cubic still factors; check its roots directly.
    for root in np.roots([1.0, 1.0, -3.0, 1.0]):
        worst_cubic = max(worst_cubic, _cubic_residual(1.0, float(root.real)))

    band = forbidden_band(2.0, 0.6, 0.2)
    polars = [
        PolarCoefficients(2.0, 0.0, 0.6, 0.0, 0.2, 0.0),
        PolarCoefficients(2.0, 0.0, 0.6, 0.3, 0.2, -0.3),
        PolarCoefficients(2.0, 0.0, 0.6, -0.45, 0.2, 0.45),
    ]
    retained = 0
    worst_static = 0.0
    for z in np.arange(0.1, 0.95, 0.1):
        z = float(z)
        if band.contains(z):
            continue
        eps = epsilon_static_real(z, 2.0, 0.6, 0.2)
        phi = phi_from_epsilon(z, eps)
        for polar in polars:
            angles, diag = recover_angles(phi, z, polar)
            assert diag.status == "ok"
            for angle in angles:
                retained += 1
                worst_static = max(worst_static, max(
                    abs(r) for r in static_residuals(phi, angle, z, polar)))
    assert retained == 18, f"expected 18 retained angles, got {retained}"

    worst_band = 0.0
    for om, s in ((1.0, 0.2), (2.0, 0.45), (0.7, 0.1), (1.5, 0.6)):
        collapsed = forbidden_band(om, s, s)
        worst_band = max(worst_band,
                         abs(collapsed.z_plus - collapsed.z_minus),
                         abs(collapsed.z_minus - 2.0 * s / om))
    _verdict(4, f"static roots, angles ({retained} retained), band", [
        ("cubic back-substitution", worst_cubic, 1e-10),
        ("static residuals at retained angles", worst_static, 1e-8),
        ("equal-coupling band collapse", worst_band, 1e-12),
    ])


# ---------------------------------------------------------------------------
# 5. closed-form solution vs direct propagation
# ---------------------------------------------------------------------------

def test_criterion_5_closed_form_vs_direct_propagation():
    dim = 60
    t0 = time.perf_counter()
    phi0 = phi_from_epsilon(CROSS_Z, 0.1)
    report = lr_vs_direct(0, CROSS_SCEN, CROSS_Z, phi0, 0.0, 0.3, 0.0,
                          0.2 + 0.1j, CROSS_GRID, dim,
                          rtol=1e-11, atol=1e-12)
    lr = report.lr_traj
    r_max = max(s.r for s in lr.states)

    psi_series = [psi_solution(0, float(t), lr, dim) for t in lr.times]
    rho_series = [rho_metric(ms, dim) for ms in lr.metric_states]
    norms = rho_norm_series(psi_series, rho_series)
    drift = float(np.max(np.abs(norms - norms[0]))) / max(1.0, abs(norms[0]))

    worst_fd = 0.0
    for t_probe in (0.3, 0.65, 1.0, 1.35, 1.7):
        dpsi = _stencil_derivative(
            lambda tt: psi_solution(0, tt, lr, dim), t_probe, 1e-3)
        h_mat = hamiltonian_matrix(CROSS_SCEN, t_probe, dim)
        residual = dpsi + 1j * (h_mat @ psi_solution(0, t_probe, lr, dim))
        worst_fd = max(worst_fd, interior_norm(residual))
    runtime = time.perf_counter() - t0
    _verdict(5, "closed form vs direct propagation", [
        ("route discrepancy", report.max_discrepancy, 1e-5),
        ("squeeze amplitude", r_max, 1.5),
        ("metric-norm drift", drift, 1e-7),
        ("local propagation residual", worst_fd, 1e-6),
        ("runtime [s]", runtime, 60.0),
    ], runtime)


# ---------------------------------------------------------------------------
# 6. invariant transfer between the two pictures
# ---------------------------------------------------------------------------

def test_criterion_6_invariant_transfer():
    dim = 80
    phi0 = phi_from_epsilon(CROSS_Z, 0.1)
    traj = integrate_metric(CROSS_SCEN, CROSS_Z, phi0, 0.0, CROSS_GRID,
                            rtol=1e-11, atol=1e-12)
    lr = evolve_lr(traj, 0.3, 0.0, 0.2 + 0.1j)
    worst_orig = worst_herm = worst_gap = 0.0
    for t_probe in (0.3, 0.65, 1.0, 1.35, 1.7, 1.9):
        res_orig, res_herm, gap = invariant_transfer_check(lr, dim, t_probe,
                                                           guard=16)
        worst_orig = max(worst_orig, res_orig)
        worst_herm = max(worst_herm, res_herm)
        worst_gap = max(worst_gap, gap)
    _verdict(6, "invariant transfer", [
        ("original-picture residual", worst_orig, 1e-6),
        ("hermitized-picture residual", worst_herm, 1e-6),
        ("spectrum gap", worst_gap, 1e-8),
    ])


# ---------------------------------------------------------------------------
# 7. quasi-Hermitian observables
# ---------------------------------------------------------------------------

def test_criterion_7_quasi_hermitian_observables():
    dim = 60
    omega = 1.0
    twisted = metric_state(0.5, phi_from_epsilon(0.5, -0.5), 1.1)
    aligned = metric_state(0.5, phi_from_epsilon(0.5, -1.0), 0.0)

    worst_comm = worst_qh = worst_form = 0.0
    for state in (twisted, aligned):
        x_op, p_op = quasi_XP(state, omega, dim)
        comm = x_op @ p_op - p_op @ x_op - 1j * np.eye(dim)
        worst_comm = max(worst_comm, interior_norm(comm))
        rho = rho_metric(state, dim)
        for candidate in (x_op, p_op, observable_O(state, omega, dim)):
            worst_qh = max(worst_qh, quasi_hermiticity_check(candidate, rho))
        worst_form = max(worst_form, rel_diff(
            metric_operator_quadrature(state, omega, dim), rho))

    x_static, p_static = static_real_XP(0.5, -1.0, omega, dim)
    x_gen, p_gen = quasi_XP(aligned, omega, dim)
    termwise = max(float(np.max(np.abs(x_static - x_gen))),
                   float(np.max(np.abs(p_static - p_gen))),
                   float(np.max(np.abs(static_real_O(0.5, omega, dim)
                                       - observable_O(aligned, omega, dim)))))
    _verdict(7, "quasi-Hermitian observables", [
        ("canonical commutator defect", worst_comm, 1e-8),
        ("quasi-Hermiticity residual", worst_qh, 1e-8),
        ("metric route disagreement", worst_form, 1e-8),
        ("static specialization termwise", termwise, 1e-12),
    ])


# ---------------------------------------------------------------------------
# 8. analytic reduction: the flow rides its invariant curve
# ---------------------------------------------------------------------------

# Odd polynomial tracking 0.3 sin t on [0, 2] to machine-level accuracy, so
# the drive is exactly real with an exactly real derivative.
DRIVE = _poly(0.0, 0.3, 0.0, -0.05, 0.0, 0.0025, 0.0,
              -5.952380952380953e-05, 0.0, 8.267195767195768e-07)


def test_criterion_8_analytic_reduction_invariant_curve():
    # Same initial point and drive, opposite coupling asymmetry: the angle
    # coordinate runs monotonically in opposite directions, so the two runs
    # jointly sweep the reachable stretch of one invariant curve.
    run_a = analytic_phi_case(DRIVE, 0.4, 0.5, 0.7, 0.9, 0.3, 0.1,
                              (0.0, 1.6, 161))
    run_b = analytic_phi_case(DRIVE, 0.4, 0.5, 0.7, 0.9, 0.05, 0.4,
                              (0.0, 2.0, 201))
    angle_a = run_a.varsigma - run_a.v_const
    angle_b = run_b.varsigma - run_b.v_const
    span = max(angle_a.max(), angle_b.max()) - min(angle_a.min(),
                                                   angle_b.min())
    _verdict(8, "analytic reduction invariant curve", [
        ("curve deviation (falling branch)", run_a.max_deviation, 1e-6),
        ("curve deviation (rising branch)", run_b.max_deviation, 1e-6),
        ("motion-constant mismatch",
         abs(run_a.motion_constant - run_b.motion_constant), 1e-12),
        ("swept-angle shortfall [rad]", max(0.0, 1.6 - span), 0.0),
    ])


# ---------------------------------------------------------------------------
# 9. Hermitian limit
# ---------------------------------------------------------------------------

def test_criterion_9_hermitian_limit_is_identity():
    scen = CoefficientScenario(
        _poly(1.0, 0.1, 0.02),
        _sin(0.2, 0.7, 0.3, 0.0),
        _sin(0.2, -0.7, -0.3, 0.0),   # exactly conj(alpha) for all t
    )
    state = metric_state(0.0, 0.0, 0.0)
    assert state.feasible
    worst_w = worst_v = worst_t = 0.0
    for t in np.linspace(0.0, 2.0, 9):
        om, al, be, polar = eval_coefficients(scen, float(t))
        herm = hermitized_W_V(state, polar)
        worst_w = max(worst_w, abs(herm.W - abs(om)))
        worst_v = max(worst_v, abs(herm.V - al))
        worst_t = max(worst_t, abs(herm.T - be))
    dim = 40
    identity = np.eye(dim, dtype=complex)
    residual = dyson_residual(lambda t: identity,
                              lambda t: hamiltonian_matrix(scen, t, dim),
                              lambda t: hamiltonian_matrix(scen, t, dim), 1.0)
    _verdict(9, "Hermitian limit", [
        ("W vs |omega|", worst_w, 1e-12),
        ("V vs alpha", worst_v, 1e-12),
        ("T vs beta", worst_t, 1e-12),
        ("map defining-relation residual", residual, 1e-10),
    ])
