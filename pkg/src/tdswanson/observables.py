"""Quadrature operators and quasi-Hermitian observables of the model.

With the quadratures ``x = (a + a^dag)/sqrt(2 w)`` and
``p = i sqrt(w/2) (a^dag - a)`` (``w = |omega|``), the metric operator of a
state ``(|z|, Phi, varphi)`` takes a closed quadratic-form shape:

``rho = base ** ( [(1 - |z| cos varphi) p^2 + (1 + |z| cos varphi) w^2 x^2
                   - |z| w sin varphi {x, p}] / (4 w s) )``

with ``base = ((1+s) Phi - |z|) / ((1-s) Phi - |z|)`` and
``s = sqrt(1 - |z|**2)``.  The quadratic form in the exponent equals
``2 w [(N + 1/2) + (z a^2 + conj(z) a^dag^2)/2]`` exactly, and that banded
shape is what the code constructs: products of truncated ``x`` and ``p``
matrices pick up corner defects at the truncation edge which an ``expm``
would then spread, while the banded form is truncation-exact.

The same quadratic form, unexponentiated, is the unique quadratic observable
that is quasi-Hermitian under the metric (:func:`observable_O`), and
conjugating the quadratures themselves gives the quasi-Hermitian position
and momentum pair (:func:`quasi_XP`), normalized so that the identity-metric
limit returns the bare ``x`` and ``p`` and so that ``[X, P] = i`` within
truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import expm

from .exceptions import DegenerateStateError, InfeasibleMapError
from .fock_su11 import (
    MetricState,
    annihilation_operator,
    dyson_map,
    interior_norm,
)

__all__ = [
    "QuadratureOperators",
    "quadratures",
    "metric_operator_quadrature",
    "observable_O",
    "quasi_XP",
    "quasi_hermiticity_check",
    "rho_metric",
    "static_real_O",
    "static_real_XP",
]


@dataclass(frozen=True)
class QuadratureOperators:
    """Truncated quadratures at one frequency scale.

    ``anticommutator`` is the literal truncated product ``x p + p x``; like
    any product of truncated operators it carries corner defects near the
    edge, which is why the metric/observable builders below use banded
    closed forms instead of these products.
    """

    x: np.ndarray
    p: np.ndarray
    anticommutator: np.ndarray
    omega_scale: float


def quadratures(omega: complex, dim: int) -> QuadratureOperators:
    """Position/momentum pair at the frequency scale ``w = |omega|``."""
    w = abs(omega)
    if w == 0.0:
        raise ValueError("quadratures undefined at omega = 0")
    a = annihilation_operator(dim)
    ad = a.T.copy()
    x = (a + ad) / math.sqrt(2.0 * w)
    p = 1j * math.sqrt(w / 2.0) * (ad - a)
    return QuadratureOperators(x=x, p=p, anticommutator=x @ p + p @ x,
                               omega_scale=w)


def _banded_quadratic(z: complex, dim: int) -> np.ndarray:
    """Banded matrix of ``(N + 1/2) + (z a^2 + conj(z) a^dag^2) / 2`` (exact)."""
    m = np.diag(np.arange(dim) + 0.5).astype(complex)
    n = np.arange(dim - 2)
    off = 0.5 * np.sqrt((n + 1.0) * (n + 2.0))
    m[n, n + 2] = z * off
    m[n + 2, n] = np.conj(z) * off
    return m


def metric_operator_quadrature(state: MetricState, omega: complex,
                               dim: int) -> np.ndarray:
    """Metric operator built from its quadratic-form (quadrature) expression.

    Equivalent route to ``dyson_map(state, dim)**2``: the exponent is the
    banded quadratic form scaled by ``log(base) / s`` (half that factor
    reproduces the map itself, since ``log(base)/(2 s)`` is exactly the
    strength parameter).  The frequency ``omega`` enters the quadrature-form
    reading of the exponent but cancels identically; it is accepted to match
    the quadrature construction and ignored beyond a zero check.

    Raises:
        InfeasibleMapError: if the state has ``lambda_zero <= 0`` (the base
            of the power is then non-positive).
    """
    if abs(omega) == 0.0:
        raise ValueError("metric quadratic form undefined at omega = 0")
    a = state.z_abs
    if a == 0.0:
        if state.phi_cap != 0.0:
            raise DegenerateStateError("z_abs = 0 requires phi_cap = 0")
        return np.eye(dim, dtype=complex)
    if not state.feasible:
        raise InfeasibleMapError(
            f"lambda_zero = {state.lambda_zero:.6g} <= 0: base non-positive"
        )
    s = math.sqrt(1.0 - a * a)
    num = (1.0 + s) * state.phi_cap - a
    den = (1.0 - s) * state.phi_cap - a
    base = num / den
    if base <= 0.0:
        raise InfeasibleMapError(f"quadratic-form base {base:.6g} <= 0")
    z = a * np.exp(1j * state.varphi)
    exponent = (math.log(base) / s) * _banded_quadratic(z, dim)
    return expm(exponent)


def observable_O(state: MetricState, omega: complex, dim: int) -> np.ndarray:
    """The quadratic quasi-Hermitian observable of the metric state.

    ``O = (1 - |z| cos varphi) p^2 + (1 + |z| cos varphi) w^2 x^2
    - |z| w sin varphi {x, p}``, constructed through its banded closed form
    ``2 w [(N + 1/2) + (z a^2 + conj(z) a^dag^2)/2]`` to avoid truncation
    corner defects.
    """
    w = abs(omega)
    if w == 0.0:
        raise ValueError("observable undefined at omega = 0")
    z = state.z_abs * np.exp(1j * state.varphi)
    return 2.0 * w * _banded_quadratic(z, dim)


def quasi_XP(state: MetricState, omega: complex,
             dim: int) -> Tuple[np.ndarray, np.ndarray]:
    """Quasi-Hermitian position and momentum ``(X, P) = eta^{-1} (x, p) eta``.

    Closed first-order combinations of the bare quadratures:

    ``X = [((|z| - Phi) + i |z| Phi sin varphi) x
           - (i/w)(1 - |z| cos varphi) Phi p] / (|z| sqrt(lambda_zero))``
    ``P = [((|z| - Phi) - i |z| Phi sin varphi) p
           + i w (1 + |z| cos varphi) Phi x] / (|z| sqrt(lambda_zero))``

    The overall sign is fixed by the identity-metric limit ``X -> x``,
    ``P -> p`` as ``Phi -> 0``.  Satisfies ``[X, P] = i`` exactly in the
    untruncated algebra.

    Raises:
        DegenerateStateError: at ``|z| = 0`` (use the bare quadratures).
        InfeasibleMapError: if ``lambda_zero <= 0``.
    """
    a = state.z_abs
    if a == 0.0:
        raise DegenerateStateError("quasi_XP needs z_abs > 0; at z_abs = 0 "
                                   "the quadratures are already quasi-Hermitian")
    if not state.feasible:
        raise InfeasibleMapError("quasi_XP requires lambda_zero > 0")
    w = abs(omega)
    if w == 0.0:
        raise ValueError("quasi_XP undefined at omega = 0")
    quad = quadratures(omega, dim)
    p_cap = state.phi_cap
    sin_v = math.sin(state.varphi)
    cos_v = math.cos(state.varphi)
    pref = 1.0 / (a * math.sqrt(state.lambda_zero))
    cx = (a - p_cap) + 1j * a * p_cap * sin_v
    big_x = pref * (cx * quad.x - (1j / w) * (1.0 - a * cos_v) * p_cap * quad.p)
    cp = (a - p_cap) - 1j * a * p_cap * sin_v
    big_p = pref * (cp * quad.p + 1j * w * (1.0 + a * cos_v) * p_cap * quad.x)
    return big_x, big_p


def quasi_hermiticity_check(candidate: np.ndarray, rho: np.ndarray,
                            guard: Optional[int] = None) -> float:
    """Interior residual of the quasi-Hermiticity condition.

    Returns ``||O^dag rho - rho O|| / max(1, ||O^dag rho||, ||rho O||)`` on
    interior blocks.  Zero (to rounding) for genuinely quasi-Hermitian
    candidates; order-one for generic operators.
    """
    left = candidate.conj().T @ rho
    right = rho @ candidate
    num = interior_norm(left - right, guard)
    return num / max(1.0, interior_norm(left, guard), interior_norm(right, guard))


def rho_metric(state: MetricState, dim: int) -> np.ndarray:
    """Metric ``rho = eta^dag eta`` from the product-form map."""
    eta = dyson_map(state, dim)
    return eta.conj().T @ eta


# ---------------------------------------------------------------------------
# static real-coefficient closed forms
# ---------------------------------------------------------------------------

def static_real_O(z_abs: float, omega: complex, dim: int) -> np.ndarray:
    """Static real-coefficient observable ``(1-|z|) p^2 + (1+|z|) w^2 x^2``."""
    w = abs(omega)
    if w == 0.0:
        raise ValueError("observable undefined at omega = 0")
    return 2.0 * w * _banded_quadratic(float(z_abs) + 0j, dim)


def static_real_XP(z_abs: float, epsilon: float, omega: complex,
                   dim: int) -> Tuple[np.ndarray, np.ndarray]:
    """Hyperbolic closed forms of ``(X, P)`` for a static real-coefficient metric.

    ``X = cosh(Xi) x + (i/w) ((1-|z|)/s) sinh(Xi) p``
    ``P = cosh(Xi) p - i w ((1+|z|)/s) sinh(Xi) x``

    with ``Xi = epsilon * s`` (signed) and ``s = sqrt(1 - |z|**2)``.  These
    agree termwise with :func:`quasi_XP` evaluated at the corresponding
    metric state.
    """
    a = float(z_abs)
    if not 0.0 <= a < 1.0:
        raise DegenerateStateError(f"z_abs must lie in [0, 1); got {a:.6g}")
    w = abs(omega)
    if w == 0.0:
        raise ValueError("static_real_XP undefined at omega = 0")
    s = math.sqrt(1.0 - a * a)
    xi = float(epsilon) * s
    quad = quadratures(omega, dim)
    ch, sh = math.cosh(xi), math.sinh(xi)
    big_x = ch * quad.x + (1j / w) * ((1.0 - a) / s) * sh * quad.p
    big_p = ch * quad.p - 1j * w * ((1.0 + a) / s) * sh * quad.x
    return big_x, big_p
