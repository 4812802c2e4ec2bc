"""Invariant-based (Lewis-Riesenfeld style) solutions of the transformed model.

Once the metric flow holds, the transformed Hamiltonian is the Hermitian
quadratic oscillator ``h = W (N + 1/2) + V a^2 + conj(V) a^dag^2`` with
``V = kappa e^{i zeta}``.  Its Schroedinger solutions are generated by the
unitary

``U(t) = exp(-i varpi / 2) S[xi] D[theta] R[varpi]``

with squeeze parameter ``xi = r e^{i phi_s}``, displacement ``theta``, and
rotation angle ``varpi = integral of Omega``.  The squeeze pair obeys

``dr/dt     = -2 kappa sin(zeta + phi_s)``
``dphi_s/dt = -2 W - 4 kappa coth(2 r) cos(zeta + phi_s)``

and the effective frequency is

``Omega = W + 2 kappa tanh(r) cos(zeta + phi_s)``.

The displacement phase follows ``theta(t) = theta(0) exp(-i varpi(t))``, so
``|theta|`` is conserved by construction.  Solutions of the original
non-Hermitian model are recovered through the Dyson map,
``psi_n(t) = eta^{-1}(t) U(t) |n>``.

:func:`evolve_lr` integrates the metric and squeeze variables as one joint
six-dimensional system (re-running the metric equations rather than
interpolating a stored trajectory), which keeps the two stages phase-locked
to stepper accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm, solve

from .exceptions import IntegrationError, SingularFlowError, SqueezeSingularityError
from .fock_su11 import MetricState, annihilation_operator, dyson_map, metric_state, metric_state_from_lambda
from .metric_flow import (
    MetricTrajectory,
    _metric_rhs_full,
    hermitized_W_V,
)
from .model import FunctionSpec, eval_coefficients

__all__ = [
    "LRState",
    "LRTrajectory",
    "squeeze_rhs",
    "omega_eff",
    "evolve_lr",
    "assemble_U",
    "evolution_operator",
    "psi_solution",
    "psi_superposition",
    "AnalyticPhiResult",
    "analytic_phi_case",
]

R_MIN = 1e-8  # squeeze amplitudes below this are treated as singular


@dataclass(frozen=True)
class LRState:
    """Squeeze/displacement/rotation variables at one instant."""

    r: float
    phi_s: float
    theta: complex
    varpi: float


@dataclass
class LRTrajectory:
    """Joint metric + invariant-solver trajectory on a shared grid."""

    times: np.ndarray
    states: List[LRState]
    Omega: np.ndarray
    metric_states: List[MetricState]
    metric: MetricTrajectory
    theta0: complex
    _dense: Optional[object] = None

    def state_at(self, t: float) -> Tuple[MetricState, LRState, float]:
        """``(metric state, LR state, Omega)`` at an arbitrary time."""
        if self._dense is None:
            raise ValueError("trajectory carries no dense solution")
        p, varphi, l0, r, phi_s, varpi = self._dense(t)
        mstate = metric_state_from_lambda(float(p), float(varphi), float(l0))
        _, _, _, polar = eval_coefficients(self.metric.scenario, t)
        herm = hermitized_W_V(mstate, polar, mode=self.metric.mode)
        lstate = LRState(r=float(r), phi_s=float(phi_s),
                         theta=self.theta0 * np.exp(-1j * varpi),
                         varpi=float(varpi))
        return mstate, lstate, omega_eff(lstate.r, lstate.phi_s,
                                         herm.W, herm.kappa, herm.zeta)


def squeeze_rhs(r: float, phi_s: float, W: float, kappa: float,
                zeta: float) -> Tuple[float, float]:
    """Right-hand side of the squeeze-parameter system.

    Raises:
        SqueezeSingularityError: if ``r <= R_MIN`` while the drive
            ``kappa cos(zeta + phi_s)`` is non-negligible (the ``coth``
            term diverges).
    """
    drive = kappa * math.cos(zeta + phi_s)
    if r <= R_MIN:
        if abs(drive) > 1e-14:
            raise SqueezeSingularityError(
                f"squeeze amplitude r = {r:.3g} at the coth singularity "
                f"with active drive {drive:.3g}"
            )
        return -2.0 * kappa * math.sin(zeta + phi_s), -2.0 * W
    d_r = -2.0 * kappa * math.sin(zeta + phi_s)
    d_phi_s = -2.0 * W - 4.0 * drive / math.tanh(2.0 * r)
    return d_r, d_phi_s


def omega_eff(r: float, phi_s: float, W: float, kappa: float,
              zeta: float) -> float:
    """Effective rotation frequency ``W + 2 kappa tanh(r) cos(zeta + phi_s)``."""
    return W + 2.0 * kappa * math.tanh(r) * math.cos(zeta + phi_s)


def evolve_lr(metric_traj: MetricTrajectory, r0: float, phi_s0: float,
              theta0: complex, rtol: Optional[float] = None,
              atol: Optional[float] = None,
              method: Optional[str] = None) -> LRTrajectory:
    """Integrate the squeeze variables jointly with the metric flow.

    The metric trajectory supplies the scenario, initial data, grid, and
    tolerances; the metric equations are re-integrated here as part of one
    six-dimensional system ``(Phi, varphi, lambda_zero, r, phi_s, varpi)``
    so that no interpolation error enters the squeeze drive.  The rotation
    angle ``varpi`` is accumulated by the same adaptive stepper.

    Raises:
        ValueError: if ``r0 <= R_MIN`` (start clear of the singular axis) or
            the metric trajectory was halted.
    """
    if r0 <= R_MIN:
        raise ValueError(f"r0 must exceed {R_MIN:.0e}")
    if metric_traj.halted is not None:
        raise ValueError(
            f"metric trajectory halted at t = {metric_traj.halted.t_halt:.6g} "
            f"({metric_traj.halted.reason}); cannot extend with LR variables"
        )
    scen = metric_traj.scenario
    mode = metric_traj.mode
    times = metric_traj.times
    rtol = metric_traj.rtol if rtol is None else rtol
    atol = metric_traj.atol if atol is None else atol
    method = metric_traj.method if method is None else method

    def rhs(t, y):
        mstate = metric_state_from_lambda(y[0], y[1], y[2])
        _, _, _, polar = eval_coefficients(scen, t)
        d_p, d_v, d_l0 = _metric_rhs_full(mstate, polar)
        herm = hermitized_W_V(mstate, polar, mode=mode)
        d_r, d_phi_s = squeeze_rhs(y[3], y[4], herm.W, herm.kappa, herm.zeta)
        d_varpi = omega_eff(y[3], y[4], herm.W, herm.kappa, herm.zeta)
        return [d_p, d_v, d_l0, d_r, d_phi_s, d_varpi]

    s0 = metric_traj.states[0]
    y0 = [s0.phi_cap, s0.varphi, s0.lambda_zero, float(r0), float(phi_s0), 0.0]
    sol = solve_ivp(rhs, (times[0], times[-1]), y0, method=method,
                    t_eval=times, rtol=rtol, atol=atol, dense_output=True)
    if not sol.success:
        t_last = float(sol.t[-1]) if sol.t.size else float(times[0])
        raise IntegrationError(f"joint stepper failed: {sol.message}", t_last=t_last)

    states: List[LRState] = []
    mstates: List[MetricState] = []
    omegas = np.zeros(times.size)
    for i, t in enumerate(times):
        p, varphi, l0, r, phi_s, varpi = sol.y[:, i]
        mstate = metric_state_from_lambda(p, varphi, l0)
        _, _, _, polar = eval_coefficients(scen, t)
        herm = hermitized_W_V(mstate, polar, mode=mode)
        states.append(LRState(r=float(r), phi_s=float(phi_s),
                              theta=complex(theta0) * np.exp(-1j * varpi),
                              varpi=float(varpi)))
        mstates.append(mstate)
        omegas[i] = omega_eff(r, phi_s, herm.W, herm.kappa, herm.zeta)
    return LRTrajectory(times=times, states=states, Omega=omegas,
                        metric_states=mstates, metric=metric_traj,
                        theta0=complex(theta0), _dense=sol.sol)


# ---------------------------------------------------------------------------
# operator assembly
# ---------------------------------------------------------------------------

def assemble_U(lr_state: LRState, dim: int) -> np.ndarray:
    """Unitary ``exp(-i varpi/2) S[xi] D[theta] R[varpi]`` on the truncated space."""
    a = annihilation_operator(dim)
    ad = a.T.copy()
    xi = lr_state.r * np.exp(1j * lr_state.phi_s)
    squeeze = expm((xi * (ad @ ad) - np.conj(xi) * (a @ a)) / 2.0)
    displace = expm(lr_state.theta * ad - np.conj(lr_state.theta) * a)
    rotate = np.diag(np.exp(-1j * lr_state.varpi * np.arange(dim)))
    return np.exp(-0.5j * lr_state.varpi) * (squeeze @ displace @ rotate)


def evolution_operator(lr_state_t: LRState, lr_state_0: LRState,
                       dim: int) -> np.ndarray:
    """Two-time evolution operator ``U(t) U(0)^dag`` of the transformed model."""
    u_t = assemble_U(lr_state_t, dim)
    u_0 = assemble_U(lr_state_0, dim)
    return u_t @ u_0.conj().T


def psi_solution(n: int, t: float, lr_traj: LRTrajectory, dim: int) -> np.ndarray:
    """Solution of the original non-Hermitian model seeded by Fock state ``n``.

    ``psi_n(t) = eta^{-1}(t) U(t) |n>``, evaluated through the trajectory's
    dense representation (so ``t`` need not be a grid point).
    """
    if not 0 <= n < dim:
        raise ValueError(f"Fock index n = {n} outside [0, {dim})")
    mstate, lstate, _ = lr_traj.state_at(t)
    u = assemble_U(lstate, dim)
    eta = dyson_map(mstate, dim)
    return solve(eta, u[:, n])


def psi_superposition(coeffs0: np.ndarray, t: float, lr_traj: LRTrajectory,
                      dim: int) -> np.ndarray:
    """Solution seeded by a superposition over the transformed-model modes.

    ``psi(t) = eta^{-1}(t) U(t) U(0)^dag v(0)`` with ``v(0) = U(0) c``; the
    evolution-operator route is kept explicit so it can be cross-checked
    against summing :func:`psi_solution` columns.
    """
    c = np.asarray(coeffs0, dtype=complex)
    if c.shape != (dim,):
        raise ValueError("coeffs0 must be a length-dim vector")
    mstate, lstate, _ = lr_traj.state_at(t)
    mstate0, lstate0, _ = lr_traj.state_at(float(lr_traj.times[0]))
    v_op = evolution_operator(lstate, lstate0, dim)
    v0 = assemble_U(lstate0, dim) @ c
    eta = dyson_map(mstate, dim)
    return solve(eta, v_op @ v0)


# ---------------------------------------------------------------------------
# analytic flow family
# ---------------------------------------------------------------------------

@dataclass
class AnalyticPhiResult:
    """Closed-form check data for the driven-phase analytic family."""

    v_const: float
    motion_constant: float        # C = Phi0 * cos(varsigma0 - v)
    times: np.ndarray
    varsigma: np.ndarray
    phi_cap: np.ndarray
    varphi: np.ndarray
    curve_values: np.ndarray      # C / cos(varsigma - v) on the grid
    max_deviation: float

    def curve(self, varsigma: float) -> float:
        """Predicted ``Phi`` on the invariant curve at phase ``varsigma``."""
        return self.motion_constant / math.cos(varsigma - self.v_const)


def analytic_phi_case(f: FunctionSpec, phi_alpha0, phi_cap0: float,
                      varphi0: float, z_abs: float, alpha_abs: float,
                      beta_abs: float, grid, rtol: float = 1e-10,
                      atol: float = 1e-10) -> AnalyticPhiResult:
    """Integrate the analytically solvable driven-phase family and compare.

    The family ties the coefficient phases to a real drive ``f(t)``:
    ``varphi_alpha(t) = v - f(t)`` (so ``v = varphi_alpha(0) + f(0)`` stays
    constant), ``varphi_beta = -varphi_alpha``, and the frequency is slaved
    to the state,

    ``omega(t) = -df/dt / 2 + 2 |beta| Phi cos(varphi - varphi_alpha)``.

    Along the resulting flow ``Phi cos(varsigma - v)`` with
    ``varsigma = varphi + f`` is a constant of motion ``C``, i.e. the orbit
    stays on the curve ``Phi = C / cos(varsigma - v)``.

    Args:
        f: real drive (its derivative is used analytically).
        phi_alpha0: initial alpha phase (float, or a constant FunctionSpec).
        phi_cap0, varphi0, z_abs: initial metric state (``|z|`` fixed here:
            this family lives on the two-dimensional fixed-``|z|`` flow).
        alpha_abs, beta_abs: constant coefficient moduli.
        grid: ``(t0, t1, npoints)`` or array of output times.

    Returns:
        AnalyticPhiResult with the integrated orbit, the predicted curve,
        and their maximum pointwise deviation.

    Raises:
        SingularFlowError: if ``cos(varsigma0 - v)`` vanishes (the curve is
            degenerate at the initial point).
    """
    if isinstance(phi_alpha0, FunctionSpec):
        if phi_alpha0.kind != "constant" or phi_alpha0.value.imag != 0.0:
            raise ValueError("phi_alpha0 must be a real constant")
        phi_alpha0 = phi_alpha0.value.real
    phi_alpha0 = float(phi_alpha0)

    f0 = f(0.0)
    if abs(complex(f0).imag) > 1e-14 or abs(complex(f.derivative(0.0)).imag) > 1e-14:
        raise ValueError("the drive f must be real")
    v_const = phi_alpha0 + complex(f0).real

    varsigma0 = varphi0 + complex(f0).real
    if abs(math.cos(varsigma0 - v_const)) < 1e-12:
        raise SingularFlowError(
            "cos(varsigma0 - v) = 0: the invariant curve is degenerate here"
        )
    c_motion = phi_cap0 * math.cos(varsigma0 - v_const)

    from .metric_flow import metric_rhs
    from .model import PolarCoefficients

    def rhs(t, y):
        p, varphi = y
        f_t = complex(f(t)).real
        df_t = complex(f.derivative(t)).real
        pa = v_const - f_t
        state = metric_state(z_abs, p, varphi)
        omega = -0.5 * df_t + 2.0 * beta_abs * p * math.cos(varphi - pa)
        polar = PolarCoefficients(
            omega_abs=abs(omega),
            varphi_omega=0.0 if omega >= 0.0 else math.pi,
            alpha_abs=alpha_abs, varphi_alpha=pa,
            beta_abs=beta_abs, varphi_beta=-pa,
        )
        return metric_rhs(state, polar)

    from .metric_flow import _grid_array
    times = _grid_array(grid)
    sol = solve_ivp(rhs, (times[0], times[-1]), [phi_cap0, varphi0],
                    method="RK45", t_eval=times, rtol=rtol, atol=atol,
                    dense_output=False)
    if not sol.success:
        raise IntegrationError(f"analytic-family stepper failed: {sol.message}",
                               t_last=float(sol.t[-1]) if sol.t.size else times[0])
    f_vals = np.array([complex(f(t)).real for t in times])
    varsigma = sol.y[1] + f_vals
    curve_vals = c_motion / np.cos(varsigma - v_const)
    deviation = float(np.max(np.abs(sol.y[0] - curve_vals)))
    return AnalyticPhiResult(
        v_const=v_const,
        motion_constant=c_motion,
        times=times,
        varsigma=varsigma,
        phi_cap=sol.y[0],
        varphi=sol.y[1],
        curve_values=curve_vals,
        max_deviation=deviation,
    )
