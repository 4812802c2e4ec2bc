"""Time-independent metric solutions and their feasibility structure.

Freezing the metric state turns the flow equations into algebraic
conditions on ``(Phi, varphi)`` at fixed ``|z|``:

* a real cubic in ``Phi`` whose coefficients depend only on ``|z|``
  (:func:`solve_phi_cubic`) — it factors exactly as
  ``a*(Phi - a)*(chi + Phi**2)`` with ``a = |z|``, so besides the spurious
  ``Phi = a`` root (which sits on the ``chi = 1`` flow singularity) the real
  roots satisfy ``chi + Phi**2 = 0`` and hence ``lambda_zero = 2 Phi**2``;
* two angle conditions that over-determine ``varphi`` for generic complex
  coefficient phases (:func:`recover_angles` reports zero, one, or two
  consistent angles, with full diagnostics);
* for real coefficients, a closed strength parameter
  (:func:`epsilon_static_real`) that exists only outside a ``|z|``
  feasibility band (:func:`forbidden_band`);
* a residual quantifying how fast the coefficients would have to conspire
  for a truly time-independent strength to persist under time-dependent
  amplitudes (:func:`constancy_constraint_residual`);
* the transformed coefficients at a frozen metric (:func:`static_hVT`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .exceptions import (
    DegenerateStateError,
    SingularConstraintError,
    UndefinedBandError,
)
from .metric_flow import raw_hVT
from .model import CoefficientScenario, PolarCoefficients, eval_coefficients
from .fock_su11 import metric_state

__all__ = [
    "StaticRootRecord",
    "StaticMetricSolution",
    "AngleDiagnostics",
    "BandResult",
    "solve_phi_cubic",
    "recover_angles",
    "epsilon_static_real",
    "epsilon_static_real_forms",
    "forbidden_band",
    "constancy_constraint_residual",
    "static_hVT",
    "phi_from_epsilon",
    "static_residuals",
]


# ---------------------------------------------------------------------------
# the Phi cubic
# ---------------------------------------------------------------------------

def solve_phi_cubic(z_abs: float) -> List[float]:
    """Real roots of the static-strength cubic at fixed ``|z|``, ascending.

    The cubic is ``a Phi**3 + (2 - a**2) Phi**2 - 3 a Phi + a**2 = 0`` with
    ``a = |z|``.  Each returned root is verified by back-substitution to a
    relative 1e-10.  At ``a = 0`` the cubic degenerates to ``2 Phi**2 = 0``
    and the only root is 0.
    """
    a = float(z_abs)
    if a < 0.0 or a >= 1.0:
        raise DegenerateStateError(f"z_abs must lie in [0, 1); got {a:.6g}")
    if a == 0.0:
        return [0.0]
    coeffs = [a, 2.0 - a * a, -3.0 * a, a * a]
    roots = np.roots(coeffs)
    real_roots = sorted(float(r.real) for r in roots
                        if abs(r.imag) <= 1e-10 * max(1.0, abs(r)))
    scale = max(1.0, *(abs(c) for c in coeffs))
    for r in real_roots:
        residual = abs(((a * r + (2.0 - a * a)) * r - 3.0 * a) * r + a * a)
        if residual > 1e-10 * scale * max(1.0, abs(r)) ** 3:
            raise ArithmeticError(
                f"cubic root {r!r} fails back-substitution: residual {residual:.3g}"
            )
    return real_roots


# ---------------------------------------------------------------------------
# static residual system (used by recover_angles and its tests)
# ---------------------------------------------------------------------------

def static_residuals(phi_cap: float, varphi: float, z_abs: float,
                     polar: PolarCoefficients) -> Tuple[float, float, float]:
    """The three stationarity conditions evaluated at ``(Phi, varphi)``.

    Returns ``(res_imW, res_TV_re, res_TV_im)``:

    * ``res_imW``: imaginary part of the frozen transformed frequency
      (times ``lambda_zero``), which must vanish;
    * ``res_TV_re`` / ``res_TV_im``: real and imaginary obstructions to
      ``T = conj(V)`` at zero state derivatives.
    """
    a = float(z_abs)
    p = float(phi_cap)
    chi = 2.0 * p / a - 1.0 if a > 0.0 else -1.0
    om, pw = polar.omega_abs, polar.varphi_omega
    al, pa = polar.alpha_abs, polar.varphi_alpha
    be, pb = polar.beta_abs, polar.varphi_beta
    v = float(varphi)
    r_imw = (om * (chi + p * p) * math.sin(pw)
             + 2.0 * p * (al * math.sin(v - pa) - be * chi * math.sin(v + pb)))
    r_tv_re = (om * (1.0 - chi) * p * math.cos(pw)
               - al * (1.0 - p * p) * math.cos(v - pa)
               + be * (chi * chi - p * p) * math.cos(v + pb))
    r_tv_im = (om * (1.0 + chi) * p * math.sin(pw)
               + al * (1.0 + p * p) * math.sin(v - pa)
               - be * (chi * chi + p * p) * math.sin(v + pb))
    return r_imw, r_tv_re, r_tv_im


@dataclass
class AngleDiagnostics:
    """Everything :func:`recover_angles` learned while solving for the phase."""

    status: str                       # "ok" | "singular" | "out-of-range"
    rhs_alpha: Optional[float] = None   # target value of sin(varphi - varphi_alpha)
    rhs_beta: Optional[float] = None    # target value of sin(varphi + varphi_beta)
    candidates_alpha: Tuple[float, ...] = ()
    candidates_beta: Tuple[float, ...] = ()
    matched: Tuple[float, ...] = ()     # angle-consistent intersection
    residuals: dict = field(default_factory=dict)  # varphi -> (imW, TV_re, TV_im)


def _wrap(angle: float) -> float:
    return math.atan2(math.sin(angle), math.cos(angle))


def recover_angles(phi_cap: float, z_abs: float, polar: PolarCoefficients,
                   tol_angle: float = 1e-7,
                   tol_res: float = 1e-8) -> Tuple[List[float], AngleDiagnostics]:
    """Phases ``varphi`` consistent with a frozen metric at the given ``Phi``.

    Eliminating one condition pairwise yields two arcsine relations,

    ``sin(varphi - varphi_alpha) = |beta| (chi**2 - Phi**2) S / D``
    ``sin(varphi + varphi_beta)  = |alpha| (1 - Phi**2) S / D``

    with ``S = sin(varphi_alpha + varphi_beta)`` and
    ``D = |omega| (1 - chi) Phi cos(varphi_omega)``.  Each relation gives two
    branch candidates; the returned angles are those candidates on which the
    two sets agree (within ``tol_angle``) *and* all three full residuals stay
    below ``tol_res``.  Generic complex phases admit no solution (the system
    over-determines ``varphi``); zero, one, or two angles can come back.

    Returns:
        ``(angles, diagnostics)``.  ``diagnostics.status`` is ``"singular"``
        when the elimination denominator vanishes (e.g. on the ``chi = 1``
        root) and ``"out-of-range"`` when an arcsine target exceeds 1 in
        magnitude; in both cases ``angles`` is empty and the caller can fall
        back to scanning :func:`static_residuals` directly.
    """
    a = float(z_abs)
    p = float(phi_cap)
    if a <= 0.0:
        raise DegenerateStateError("recover_angles needs z_abs > 0")
    chi = 2.0 * p / a - 1.0
    den = polar.omega_abs * (1.0 - chi) * p * math.cos(polar.varphi_omega)
    if abs(den) < 1e-14:
        return [], AngleDiagnostics(status="singular")
    s_ab = math.sin(polar.varphi_alpha + polar.varphi_beta)
    rhs_a = polar.beta_abs * (chi * chi - p * p) * s_ab / den
    rhs_b = polar.alpha_abs * (1.0 - p * p) * s_ab / den
    diag = AngleDiagnostics(status="ok", rhs_alpha=rhs_a, rhs_beta=rhs_b)
    if abs(rhs_a) > 1.0 or abs(rhs_b) > 1.0:
        diag.status = "out-of-range"
        return [], diag
    asn_a = math.asin(rhs_a)
    asn_b = math.asin(rhs_b)
    cand_a = (_wrap(polar.varphi_alpha + asn_a),
              _wrap(polar.varphi_alpha + math.pi - asn_a))
    cand_b = (_wrap(-polar.varphi_beta + asn_b),
              _wrap(-polar.varphi_beta + math.pi - asn_b))
    diag.candidates_alpha = cand_a
    diag.candidates_beta = cand_b
    matched = []
    for va in cand_a:
        for vb in cand_b:
            if abs(_wrap(va - vb)) <= tol_angle:
                matched.append(_wrap(0.5 * (va + vb)) if abs(va - vb) < math.pi
                               else va)
    # de-duplicate
    unique: List[float] = []
    for v in matched:
        if all(abs(_wrap(v - u)) > tol_angle for u in unique):
            unique.append(v)
    diag.matched = tuple(unique)
    retained = []
    for v in unique:
        res = static_residuals(p, v, a, polar)
        diag.residuals[v] = res
        if max(abs(r) for r in res) <= tol_res:
            retained.append(v)
    return sorted(retained), diag


# ---------------------------------------------------------------------------
# real-coefficient strength and its feasibility band
# ---------------------------------------------------------------------------

def epsilon_static_real_forms(z_abs: float, omega_abs: float, alpha_abs: float,
                              beta_abs: float):
    """Both closed forms of the static strength, or ``(None, reason)``.

    Form 1: ``eps = arctanh((A - B) s / (A + B - a Omega)) / (2 s)``
    Form 2: ``eps = log(N+ / N-) / (4 s)`` with
    ``N+- = A + B - a Omega +- (A - B) s``,

    where ``a = |z|`` and ``s = sqrt(1 - a**2)``.  Absent (None) when the
    denominator vanishes, when the arctanh argument reaches 1 in magnitude,
    or when the log argument is non-positive; all three say the same thing:
    ``a`` lies in the feasibility band.
    """
    a = float(z_abs)
    if a < 0.0 or a >= 1.0:
        raise DegenerateStateError(f"z_abs must lie in [0, 1); got {a:.6g}")
    om, al, be = float(omega_abs), float(alpha_abs), float(beta_abs)
    s = math.sqrt(1.0 - a * a)
    num = (al - be) * s
    den = al + be - a * om
    if den == 0.0:
        return None, "denominator A + B - |z| Omega vanishes"
    if abs(num) >= abs(den):
        return None, "arctanh argument reaches magnitude 1: inside the band"
    # Both factors may be negative together; only their ratio matters and the
    # arctanh guard above already forces it positive.
    ratio = (den + num) / (den - num)
    if ratio <= 0.0:  # pragma: no cover - excluded by the arctanh guard
        return None, "log argument non-positive: inside the band"
    eps_at = math.atanh(num / den) / (2.0 * s)
    eps_log = math.log(ratio) / (4.0 * s)
    return (eps_at, eps_log), None


def epsilon_static_real(z_abs: float, omega_abs: float, alpha_abs: float,
                        beta_abs: float) -> Optional[float]:
    """Static strength for real coefficient amplitudes, or None when absent.

    The two closed forms must agree to a relative 1e-12; their common value
    is returned.
    """
    forms, _reason = epsilon_static_real_forms(z_abs, omega_abs, alpha_abs, beta_abs)
    if forms is None:
        return None
    eps_at, eps_log = forms
    if abs(eps_at - eps_log) > 1e-12 * max(1.0, abs(eps_at)):
        raise ArithmeticError(f"strength forms disagree: {eps_at!r} vs {eps_log!r}")
    return eps_at


@dataclass(frozen=True)
class BandResult:
    """The ``|z|`` interval on which no real static strength exists."""

    z_minus: Optional[float]
    z_plus: Optional[float]
    empty: bool
    advisory: Tuple[str, ...] = ()

    def contains(self, z_abs: float) -> bool:
        if self.empty:
            return False
        return self.z_minus <= z_abs <= self.z_plus


def forbidden_band(omega_abs: float, alpha_abs: float,
                   beta_abs: float) -> BandResult:
    """Endpoints of the ``|z|`` band where the real static strength is absent.

    The band is where ``q(a) = (Omega**2 + (A-B)**2) a**2 - 2 Omega (A+B) a +
    4 A B`` is non-positive, giving

    ``z_-+ = [Omega (A+B) -+ |A-B| sqrt(Omega**2 - 4 A B)] /
    (Omega**2 + (A-B)**2)``.

    Special cases: ``A = B`` collapses the band to the single point
    ``2A/Omega`` for any sign of ``Omega**2 - 4AB`` (the square-root term
    carries the factor ``|A-B| = 0``); ``A != B`` with ``Omega**2 < 4AB``
    makes the band empty.  Endpoints outside ``[0, 1]`` are physically
    unreachable and flagged in ``advisory``.

    Raises:
        UndefinedBandError: if ``Omega**2 + (A-B)**2 = 0`` (the quadratic
            degenerates).
    """
    om, al, be = float(omega_abs), float(alpha_abs), float(beta_abs)
    denom = om * om + (al - be) ** 2
    if denom == 0.0:
        raise UndefinedBandError(
            "Omega**2 + (A-B)**2 = 0: the feasibility quadratic degenerates"
        )
    advisory: List[str] = []
    if al == be:
        if om == 0.0:
            raise UndefinedBandError("A = B with Omega = 0: no finite band point")
        point = 2.0 * al / om
        if point < 0.0 or point > 1.0:
            advisory.append(f"collapsed band point {point:.6g} outside [0, 1]")
        return BandResult(z_minus=point, z_plus=point, empty=False,
                          advisory=tuple(advisory))
    disc = om * om - 4.0 * al * be
    if disc < 0.0:
        return BandResult(z_minus=None, z_plus=None, empty=True)
    root = abs(al - be) * math.sqrt(disc)
    mid = om * (al + be)
    z_minus = (mid - root) / denom
    z_plus = (mid + root) / denom
    for name, val in (("z_minus", z_minus), ("z_plus", z_plus)):
        if val < 0.0 or val > 1.0:
            advisory.append(f"{name} = {val:.6g} outside [0, 1]")
    return BandResult(z_minus=z_minus, z_plus=z_plus, empty=False,
                      advisory=tuple(advisory))


def constancy_constraint_residual(scenario: CoefficientScenario, z_abs: float,
                                  t: float,
                                  reading: str = "modulus-derivative") -> float:
    """How strongly time dependence obstructs a constant static strength.

    A time-independent strength requires the two band factors
    ``N+- (t) = A + B - a Omega +- (A - B) s`` to evolve proportionally; the
    residual is ``|d/dt log N+ - d/dt log N-|``, which vanishes for
    time-independent amplitudes and for amplitudes sharing one common time
    scale, and is positive otherwise.

    Args:
        reading: ``"modulus-derivative"`` differentiates the moduli
            (``d|alpha|/dt``, the default); ``"derivative-modulus"`` uses
            ``|d alpha/dt|`` instead.  The two coincide for non-negative real
            coefficients with fixed sign.

    Raises:
        SingularConstraintError: when a coefficient modulus or a band factor
            vanishes at ``t`` (the logarithmic derivative is undefined).
    """
    if reading not in ("modulus-derivative", "derivative-modulus"):
        raise ValueError(f"unknown reading {reading!r}")
    a = float(z_abs)
    if a < 0.0 or a >= 1.0:
        raise DegenerateStateError(f"z_abs must lie in [0, 1); got {a:.6g}")
    s = math.sqrt(1.0 - a * a)
    om, al, be, _polar = eval_coefficients(scenario, t)
    d_om = scenario.omega.derivative(t)
    d_al = scenario.alpha.derivative(t)
    d_be = scenario.beta.derivative(t)

    def modulus_and_rate(value: complex, deriv: complex, name: str):
        m = abs(value)
        if reading == "derivative-modulus":
            return m, abs(deriv)
        if m == 0.0:
            raise SingularConstraintError(
                f"|{name}| = 0 at t = {t:.6g}: modulus derivative undefined"
            )
        return m, (np.conj(value) * deriv).real / m

    big_o, d_big_o = modulus_and_rate(om, d_om, "omega")
    big_a, d_big_a = modulus_and_rate(al, d_al, "alpha")
    big_b, d_big_b = modulus_and_rate(be, d_be, "beta")
    n_plus = big_a + big_b - a * big_o + (big_a - big_b) * s
    n_minus = big_a + big_b - a * big_o - (big_a - big_b) * s
    if n_plus == 0.0 or n_minus == 0.0:
        raise SingularConstraintError(
            f"band factor vanishes at t = {t:.6g}: logarithmic rate undefined"
        )
    d_plus = d_big_a + d_big_b - a * d_big_o + (d_big_a - d_big_b) * s
    d_minus = d_big_a + d_big_b - a * d_big_o - (d_big_a - d_big_b) * s
    return abs(d_plus / n_plus - d_minus / n_minus)


# ---------------------------------------------------------------------------
# frozen-metric transformed coefficients
# ---------------------------------------------------------------------------

def phi_from_epsilon(z_abs: float, epsilon: float) -> float:
    """Squeeze strength ``Phi`` reached by the strength parameter ``epsilon``.

    Inverse of the flow-state inversion: ``Phi = a / (1 - s coth(eps s))``
    with ``a = |z|``, ``s = sqrt(1 - a**2)`` and the continuous limit
    ``Phi = 0`` at ``eps = 0``.
    """
    a = float(z_abs)
    if a < 0.0 or a >= 1.0:
        raise DegenerateStateError(f"z_abs must lie in [0, 1); got {a:.6g}")
    if epsilon == 0.0 or a == 0.0:
        return 0.0
    s = math.sqrt(1.0 - a * a)
    return a / (1.0 - s / math.tanh(epsilon * s))


def static_hVT(z_abs: float, epsilon: float, coeffs: Tuple[complex, complex, complex],
               varphi: float = 0.0):
    """Transformed coefficients ``(W, V, T)`` for a frozen metric.

    The metric state is reconstructed from ``(|z|, epsilon)`` via
    :func:`phi_from_epsilon` (with the metric phase ``varphi``, zero for the
    real-coefficient case) and the transformed coefficients are evaluated at
    zero state derivatives.  Hermiticity of the result is *not* imposed
    here — it holds exactly when ``(Phi, varphi)`` solve the static system,
    which is what the residual checks quantify.
    """
    p = phi_from_epsilon(z_abs, epsilon)
    state = metric_state(z_abs, p, varphi)
    return raw_hVT(state, coeffs, (0.0, 0.0, 0.0))


# ---------------------------------------------------------------------------
# aggregate solution record (used by the CLI static modes)
# ---------------------------------------------------------------------------

@dataclass
class StaticRootRecord:
    """One cubic root with its recovered angles and diagnostics."""

    phi_cap: float
    lambda_zero: float
    angles: Tuple[float, ...]
    diagnostics: AngleDiagnostics
    epsilon: Optional[float]
    epsilon_reason: Optional[str]


@dataclass
class StaticMetricSolution:
    """All static-metric structure at one ``|z|`` and one coefficient snapshot."""

    z_abs: float
    polar: PolarCoefficients
    roots: List[StaticRootRecord]
    band: Optional[BandResult]
    epsilon_real: Optional[float]
    epsilon_real_reason: Optional[str]


def solve_static(z_abs: float, polar: PolarCoefficients) -> StaticMetricSolution:
    """Assemble the full static solution record at one parameter point."""
    from .fock_su11 import _epsilon_forms  # local import to avoid cycle noise

    records: List[StaticRootRecord] = []
    for root in solve_phi_cubic(z_abs):
        chi = 2.0 * root / z_abs - 1.0 if z_abs > 0.0 else -1.0
        if z_abs > 0.0:
            angles, diag = recover_angles(root, z_abs, polar)
        else:
            angles, diag = [], AngleDiagnostics(status="singular")
        forms, reason = _epsilon_forms(z_abs, root)
        records.append(StaticRootRecord(
            phi_cap=root,
            lambda_zero=root * root - chi,
            angles=tuple(angles),
            diagnostics=diag,
            epsilon=forms[0] if forms is not None else None,
            epsilon_reason=reason,
        ))
    band: Optional[BandResult] = None
    band_reason: Optional[str] = None
    eps_real: Optional[float] = None
    try:
        band = forbidden_band(polar.omega_abs, polar.alpha_abs, polar.beta_abs)
    except UndefinedBandError as exc:
        band_reason = str(exc)
    forms, eps_reason = epsilon_static_real_forms(
        z_abs, polar.omega_abs, polar.alpha_abs, polar.beta_abs)
    if forms is not None:
        eps_real = forms[0]
    if band_reason is not None and eps_reason is None:
        eps_reason = band_reason
    return StaticMetricSolution(
        z_abs=float(z_abs),
        polar=polar,
        roots=records,
        band=band,
        epsilon_real=eps_real,
        epsilon_real_reason=eps_reason,
    )
