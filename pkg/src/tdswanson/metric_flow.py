"""Metric-parameter flow that keeps the transformed Hamiltonian Hermitian.

Demanding that the Dyson-transformed Hamiltonian

``h = W (N + 1/2) + V a^2 + T a^dag^2``

be Hermitian (``W`` real, ``T = conj(V)``) turns the metric parameters into
dynamical variables.  This module provides:

* :func:`raw_hVT` - the transformed coefficients ``(W, V, T)`` for arbitrary
  state derivatives, before any Hermiticity demand;
* :func:`metric_rhs` / :func:`metric_rhs_real` - the flow equations for
  ``(Phi, varphi)`` that enforce Hermiticity;
* :func:`hermitized_W_V` - the on-shell coefficients (real ``W``,
  ``T = conj(V)``) given the flow holds;
* :func:`epsilon_from_phi` - inversion of the state back to the scalar
  strength, in two algebraically equivalent forms;
* :func:`reality_residual` - how far a candidate state is from satisfying
  the auxiliary reality constraint at fixed ``|z|``;
* :func:`integrate_metric` - trajectory integration with singularity guards.

The integrated system is three-dimensional, ``y = (Phi, varphi,
lambda_zero)``: the reality constraint fixes ``lambda_zero``'s evolution,
and with it the effective ``|z|(t) = 2 Phi / (chi + 1)`` acquires a small
drift rather than staying pinned at its initial value.  ``reality_residual``
measures exactly the tension between that drift and a fixed-``|z|`` reading
of the constraint, and the trajectory flags grid points where it exceeds
1e-6 (``constraint_tension``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .exceptions import (
    DegenerateStateError,
    InfeasibleMapError,
    IntegrationError,
    SingularFlowError,
)
from .fock_su11 import MetricState, metric_state, metric_state_from_lambda, _epsilon_forms
from .model import CoefficientScenario, PolarCoefficients, eval_coefficients

__all__ = [
    "HermitizedCoefficients",
    "MetricTrajectory",
    "HaltInfo",
    "raw_hVT",
    "metric_rhs",
    "metric_rhs_real",
    "hermitized_W_V",
    "epsilon_from_phi",
    "epsilon_from_phi_forms",
    "reality_residual",
    "integrate_metric",
]

_SING_TOL = 1e-12          # |chi - 1| or |Phi| below this is singular
_TENSION_THRESHOLD = 1e-6  # constraint-tension flag level


@dataclass(frozen=True)
class HermitizedCoefficients:
    """On-shell transformed coefficients: real ``W`` and ``V = kappa e^{i zeta}``."""

    W: float
    V: complex
    T: complex
    kappa: float
    zeta: float


@dataclass(frozen=True)
class HaltInfo:
    """Why and where an integration stopped early."""

    reason: str
    t_halt: float


def raw_hVT(state: MetricState, coeffs: Tuple[complex, complex, complex],
            derivs: Tuple[float, float, float]):
    """Transformed coefficients ``(W, V, T)`` for arbitrary state derivatives.

    Args:
        state: metric state at time t.
        coeffs: complex ``(omega, alpha, beta)`` at t.
        derivs: ``(dPhi/dt, dvarphi/dt, dlambda_zero/dt)``.

    Returns:
        ``(W, V, T)`` complex.  No Hermiticity is assumed: plug in flow
        derivatives and ``W`` comes out real with ``T = conj(V)`` up to
        integration error; plug in anything else and it will not.
    """
    om, al, be = coeffs
    d_phi, d_varphi, d_l0 = derivs
    lp = state.lambda_plus
    lm = state.lambda_minus
    l0 = state.lambda_zero
    chi = state.chi
    if l0 == 0.0:
        raise InfeasibleMapError("raw_hVT undefined at lambda_zero = 0")
    phase = np.exp(1j * state.varphi)
    d_lm = -(d_phi + 1j * state.phi_cap * d_varphi) * phase
    d_lp = -(d_phi - 1j * state.phi_cap * d_varphi) * np.conj(phase)
    w = -(om * (chi + lp * lm) + 2.0 * (al * lp + be * chi * lm)
          - 0.5j * (d_l0 - 2.0 * lp * d_lm)) / l0
    v = (al + om * lm + be * lm * lm + 0.5j * d_lm) / l0
    t = (om * chi * lp + al * lp * lp + be * chi * chi
         + 0.5j * (l0 * d_lp + lp * lp * d_lm - lp * d_l0)) / l0
    return complex(w), complex(v), complex(t)


def _polar_trig(state: MetricState, polar: PolarCoefficients):
    """Common trigonometric combinations entering the flow equations."""
    phase = np.exp(1j * state.varphi)
    # alpha enters through (varphi - varphi_alpha), beta through (varphi + varphi_beta)
    za = phase * (polar.alpha_abs * np.exp(-1j * polar.varphi_alpha))
    zb = phase * (polar.beta_abs * np.exp(1j * polar.varphi_beta))
    sin_a, cos_a = za.imag, za.real
    sin_b, cos_b = zb.imag, zb.real
    om_re = polar.omega_abs * math.cos(polar.varphi_omega)
    om_im = polar.omega_abs * math.sin(polar.varphi_omega)
    return om_re, om_im, sin_a, cos_a, sin_b, cos_b


def _metric_rhs_full(state: MetricState, polar: PolarCoefficients):
    """Flow derivatives ``(dPhi, dvarphi, dlambda_zero)`` at one state."""
    p = state.phi_cap
    chi = state.chi
    if abs(chi - 1.0) < _SING_TOL:
        raise SingularFlowError(f"chi = {chi:.6g} at the flow singularity chi = 1")
    if abs(p) < _SING_TOL:
        raise SingularFlowError("Phi = 0: the phase equation is singular")
    om_re, om_im, sin_a, cos_a, sin_b, cos_b = _polar_trig(state, polar)
    p2 = p * p
    d_phi = (2.0 / (chi - 1.0)) * ((om_im * p + sin_a) * (1.0 - p2)
                                   + sin_b * ((2.0 * chi - 1.0) * p2 - chi * chi))
    d_varphi = (2.0 / ((chi - 1.0) * p)) * (cos_a * (1.0 - p2)
                                            + cos_b * (p2 - chi * chi)) + 2.0 * om_re
    d_l0 = 2.0 * om_im * (chi + p2) + 2.0 * p * (d_phi + 2.0 * sin_a - 2.0 * chi * sin_b)
    return d_phi, d_varphi, d_l0


def metric_rhs(state: MetricState, polar: PolarCoefficients) -> Tuple[float, float]:
    """Hermiticity-enforcing flow ``(dPhi/dt, dvarphi/dt)`` for complex coefficients.

    Raises:
        SingularFlowError: at ``chi = 1`` or ``Phi = 0``.
    """
    d_phi, d_varphi, _ = _metric_rhs_full(state, polar)
    return d_phi, d_varphi


def metric_rhs_real(state: MetricState,
                    coeffs: Tuple[float, float, float]) -> Tuple[float, float]:
    """Flow equations specialized to real ``(omega, alpha, beta)``.

    Algebraically the complex flow with all coefficient phases zero; kept as
    a separate entry point because the real-coefficient system is used on its
    own and is cheap to evaluate.
    """
    om, al, be = (float(c) for c in coeffs)
    p = state.phi_cap
    chi = state.chi
    if abs(chi - 1.0) < _SING_TOL:
        raise SingularFlowError(f"chi = {chi:.6g} at the flow singularity chi = 1")
    if abs(p) < _SING_TOL:
        raise SingularFlowError("Phi = 0: the phase equation is singular")
    sin_v, cos_v = math.sin(state.varphi), math.cos(state.varphi)
    p2 = p * p
    d_phi = (2.0 / (chi - 1.0)) * sin_v * (al * (1.0 - p2)
                                           + be * ((2.0 * chi - 1.0) * p2 - chi * chi))
    d_varphi = 2.0 * om - (2.0 / ((1.0 - chi) * p)) * cos_v * (al * (1.0 - p2)
                                                               + be * (p2 - chi * chi))
    return d_phi, d_varphi


def hermitized_W_V(state: MetricState, polar: PolarCoefficients,
                   mode: str = "complex") -> HermitizedCoefficients:
    """On-shell transformed coefficients assuming the flow constraint holds.

    In ``complex`` mode ``W`` and ``V`` are evaluated from the closed
    expressions that the flow makes exact; ``T = conj(V)`` by construction
    and ``(kappa, zeta)`` are the polar pieces of ``V``.  In ``real`` mode
    the simpler real-coefficient forms are used (coefficient phases must
    vanish up to sign).
    """
    p = state.phi_cap
    chi = state.chi
    if abs(chi - 1.0) < _SING_TOL:
        raise SingularFlowError("hermitized coefficients undefined at chi = 1")
    if mode == "real":
        om = polar.omega_abs * math.cos(polar.varphi_omega)
        al = polar.alpha_abs * math.cos(polar.varphi_alpha)
        be = polar.beta_abs * math.cos(polar.varphi_beta)
        w = om + (2.0 * p * math.cos(state.varphi) / (1.0 - chi)) * (al - be)
        v = (al - be * chi) / (1.0 - chi)
        kappa = abs(v)
        zeta = 0.0 if v >= 0.0 else math.pi
        return HermitizedCoefficients(W=float(w), V=complex(v), T=complex(v),
                                      kappa=float(kappa), zeta=float(zeta))
    om_re, om_im, _, _, _, _ = _polar_trig(state, polar)
    al_abs, pa = polar.alpha_abs, polar.varphi_alpha
    be_abs, pb = polar.beta_abs, polar.varphi_beta
    w = om_re + (2.0 * p / (1.0 - chi)) * (
        al_abs * math.cos(state.varphi - pa) - be_abs * math.cos(state.varphi + pb))
    v_re = (om_im * p * math.sin(state.varphi)
            + al_abs * math.cos(pa) - be_abs * chi * math.cos(pb)) / (1.0 - chi)
    v_im = (om_im * p * math.cos(state.varphi)
            - al_abs * math.sin(pa) - be_abs * chi * math.sin(pb)) / (chi - 1.0)
    v = complex(v_re, v_im)
    return HermitizedCoefficients(W=float(w), V=v, T=np.conj(v),
                                  kappa=abs(v), zeta=math.atan2(v_im, v_re))


def epsilon_from_phi_forms(z_abs: float, phi_cap: float):
    """Both closed inversions ``(eps_arctanh, eps_log)`` or ``(None, reason)``."""
    forms, reason = _epsilon_forms(z_abs, phi_cap)
    if forms is None:
        return None, reason
    return forms, None


def epsilon_from_phi(z_abs: float, phi_cap: float) -> Optional[float]:
    """Real strength parameter reproducing ``(|z|, Phi)``, or None when absent.

    Two algebraically equivalent inversions (an arctanh form and a log form)
    are evaluated and must agree to 1e-12 relative; their common value is
    returned.  The inversion exists exactly when ``|z|(1 + Phi**2) > 2 Phi``
    (boundary excluded); otherwise None is returned and the state is outside
    the strength-parametrizable family.
    """
    forms, _reason = epsilon_from_phi_forms(z_abs, phi_cap)
    if forms is None:
        return None
    eps_at, eps_log = forms
    if abs(eps_at - eps_log) > 1e-12 * max(1.0, abs(eps_at)):
        raise ArithmeticError(
            f"inversion forms disagree: {eps_at!r} vs {eps_log!r}"
        )
    return eps_at


def reality_residual(state: MetricState, polar: PolarCoefficients,
                     phi_cap_dot: float) -> float:
    """Tension between the reality constraint and a fixed-``|z|`` evolution.

    The constraint prescribes ``dlambda_zero/dt``; holding ``|z|`` fixed
    instead forces ``dlambda_zero/dt = (2 Phi - 2/|z|) dPhi/dt`` by the chain
    rule.  The returned value is the absolute mismatch of the two readings
    given the flow value of ``dPhi/dt``.  Zero for scenarios where the
    constraint is compatible with constant ``|z|``; the flow integrator
    reports this as the trajectory's constraint tension.
    """
    a = state.z_abs
    if a == 0.0:
        raise DegenerateStateError("reality residual undefined at z_abs = 0")
    p = state.phi_cap
    om_im = polar.omega_abs * math.sin(polar.varphi_omega)
    sin_a = polar.alpha_abs * math.sin(state.varphi - polar.varphi_alpha)
    sin_b = polar.beta_abs * math.sin(state.varphi + polar.varphi_beta)
    chain = (2.0 * p - 2.0 / a) * phi_cap_dot
    rhs = (2.0 * om_im * (state.chi + p * p)
           + 2.0 * p * (phi_cap_dot + 2.0 * sin_a - 2.0 * state.chi * sin_b))
    return abs(chain - rhs)


# ---------------------------------------------------------------------------
# trajectory integration
# ---------------------------------------------------------------------------

@dataclass
class MetricTrajectory:
    """Sampled metric flow plus everything needed to re-evaluate it densely."""

    times: np.ndarray
    states: List[MetricState]
    hermitized: List[HermitizedCoefficients]
    res_reality: np.ndarray     # fixed-|z| constraint tension per grid point
    res_TVstar: np.ndarray      # |T_raw - conj(V_raw)| per grid point
    res_imW: np.ndarray         # |Im W_raw| per grid point
    tension_flags: np.ndarray   # res_reality > 1e-6
    halted: Optional[HaltInfo]
    mode: str
    scenario: CoefficientScenario
    z_abs0: float
    rtol: float
    atol: float
    method: str
    _dense: Optional[Callable] = None

    def state_at(self, t: float) -> MetricState:
        """Metric state at an arbitrary time inside the integrated span."""
        if self._dense is None:
            raise ValueError("trajectory carries no dense solution")
        p, varphi, l0 = self._dense(t)
        return metric_state_from_lambda(float(p), float(varphi), float(l0))

    def derivatives_at(self, t: float):
        """Flow derivatives ``(dPhi, dvarphi, dlambda_zero)`` at time t."""
        state = self.state_at(t)
        _, _, _, polar = eval_coefficients(self.scenario, t)
        return _metric_rhs_full(state, polar)


def _grid_array(grid) -> np.ndarray:
    if isinstance(grid, tuple) and len(grid) == 3:
        t0, t1, n = grid
        return np.linspace(float(t0), float(t1), int(n))
    arr = np.asarray(grid, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("grid must be (t0, t1, n) or a 1-d array of >= 2 times")
    if np.any(np.diff(arr) <= 0):
        raise ValueError("grid times must be strictly increasing")
    return arr


def integrate_metric(scenario: CoefficientScenario, z_abs: float,
                     phi_cap0: float, varphi0: float, grid,
                     mode: str = "complex", rtol: float = 1e-10,
                     atol: float = 1e-10, method: str = "RK45") -> MetricTrajectory:
    """Integrate the Hermiticity-enforcing flow over a time grid.

    Args:
        scenario: coefficient curves.
        z_abs: initial ``|z|`` fixing ``chi`` and ``lambda_zero`` at t0.
        phi_cap0, varphi0: initial squeeze strength and phase.
        grid: ``(t0, t1, npoints)`` or an increasing array of sample times.
        mode: ``"complex"`` or ``"real"`` (real validates that the
            coefficients have no imaginary parts and uses the reduced
            equations).
        rtol, atol, method: passed to the adaptive stepper (explicit
            Runge-Kutta 4(5) by default).

    Returns:
        MetricTrajectory.  If a singularity guard fired (``chi -> 1``,
        ``Phi -> 0`` or ``lambda_zero -> 0``), the trajectory is truncated at
        the last grid point before the stop and ``halted`` records why.

    Raises:
        InfeasibleMapError: if the initial state is already infeasible.
        IntegrationError: if the stepper fails for non-singular reasons.
    """
    if mode not in ("complex", "real"):
        raise ValueError(f"unknown mode {mode!r}")
    times = _grid_array(grid)
    scenario.check_time(times[0])
    scenario.check_time(times[-1])

    state0 = metric_state(z_abs, phi_cap0, varphi0)
    if not state0.feasible:
        raise InfeasibleMapError(
            f"initial state infeasible: lambda_zero = {state0.lambda_zero:.6g}"
        )

    def rhs(t, y):
        state = metric_state_from_lambda(y[0], y[1], y[2])
        om, al, be, polar = eval_coefficients(scenario, t)
        if mode == "real":
            scale = max(1.0, abs(om), abs(al), abs(be))
            if max(abs(om.imag), abs(al.imag), abs(be.imag)) > 1e-12 * scale:
                raise SingularFlowError(
                    "real mode requires real coefficients; found complex values"
                )
        return _metric_rhs_full(state, polar)

    # Terminal events guarding the flow singularities.  lambda_zero and the
    # chi = 1 surface are tracked with a small offset so the stepper stops
    # on the safe side.
    def ev_lambda(t, y):
        return y[2] - 1e-12

    def ev_phi(t, y):
        return y[0]

    def ev_chi(t, y):
        return (y[0] * y[0] - y[2]) - 1.0

    for ev in (ev_lambda, ev_phi, ev_chi):
        ev.terminal = True

    y0 = [state0.phi_cap, state0.varphi, state0.lambda_zero]
    sol = solve_ivp(rhs, (times[0], times[-1]), y0, method=method,
                    t_eval=times, rtol=rtol, atol=atol, dense_output=True,
                    events=(ev_lambda, ev_phi, ev_chi))
    if sol.status == -1:
        t_last = float(sol.t[-1]) if sol.t.size else float(times[0])
        raise IntegrationError(f"stepper failed: {sol.message}", t_last=t_last)

    halted = None
    kept = sol.t  # grid points actually reached (all of them unless halted)
    if sol.status == 1:
        reasons = ("lambda_zero reached 0", "Phi reached 0", "chi reached 1")
        for which, tev in enumerate(sol.t_events):
            if tev.size:
                halted = HaltInfo(reason=reasons[which], t_halt=float(tev[0]))
                break

    states: List[MetricState] = []
    herm: List[HermitizedCoefficients] = []
    n = kept.size
    res_reality = np.zeros(n)
    res_tv = np.zeros(n)
    res_imw = np.zeros(n)
    for i, t in enumerate(kept):
        p, varphi, l0 = sol.y[0][i], sol.y[1][i], sol.y[2][i]
        state = metric_state_from_lambda(p, varphi, l0)
        om, al, be, polar = eval_coefficients(scenario, t)
        derivs = _metric_rhs_full(state, polar)
        w_raw, v_raw, t_raw = raw_hVT(state, (om, al, be), derivs)
        herm_mode = "real" if mode == "real" else "complex"
        herm.append(hermitized_W_V(state, polar, mode=herm_mode))
        res_tv[i] = abs(t_raw - np.conj(v_raw))
        res_imw[i] = abs(w_raw.imag)
        if state.z_abs > 0.0:
            res_reality[i] = reality_residual(state, polar, derivs[0])
        states.append(state)

    return MetricTrajectory(
        times=kept,
        states=states,
        hermitized=herm,
        res_reality=res_reality,
        res_TVstar=res_tv,
        res_imW=res_imw,
        tension_flags=res_reality > _TENSION_THRESHOLD,
        halted=halted,
        mode=mode,
        scenario=scenario,
        z_abs0=float(z_abs),
        rtol=rtol,
        atol=atol,
        method=method,
        _dense=sol.sol,
    )
