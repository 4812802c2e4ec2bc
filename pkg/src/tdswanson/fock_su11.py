"""Truncated Fock-space operators, SU(1,1) generators, and the Dyson map.

All operators live on the truncated Fock space spanned by the number states
``|0>, ..., |dim-1>``.  Truncation makes some operator identities hold only
away from the high-``n`` edge, so this module also provides the guard-band
helpers used throughout the package: comparisons are made on the interior
block obtained by dropping the last ``ceil(dim/5)`` rows and columns, with a
relative-with-floor normalization ``||A - B|| / max(1, ||A||, ||B||)``.

The central object is the positive-definite map built from a squeezed-vacuum
style parametrization ``(|z|, Phi, varphi)``:

* ``z = |z| e^{i varphi}`` fixes the ratio of the off-diagonal to diagonal
  generator weights,
* ``Phi`` fixes the overall squeezing strength,
* ``chi = 2 Phi / |z| - 1`` and ``lambda_zero = Phi**2 - chi`` are derived,
* ``lambda_plus = -Phi e^{-i varphi}``, ``lambda_minus = -Phi e^{+i varphi}``.

The map factorizes exactly (a normal-ordering / Gauss decomposition of the
SU(1,1) exponential), which is what :func:`dyson_map` implements:

``eta = exp(lambda_plus K+) * lambda_zero**K0 * exp(lambda_minus K-)``

with ``K+ = a^dag a^dag / 2``, ``K- = a a / 2``, ``K0 = (a^dag a + 1/2) / 2``.
Because ``K+`` and ``K-`` are nilpotent on the truncated space the product
form is truncation-exact, unlike a dense ``expm`` of the full generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import expm

from .exceptions import (
    DegenerateStateError,
    InfeasibleDomainError,
    InfeasibleMapError,
)

__all__ = [
    "annihilation_operator",
    "number_operator",
    "su11_generators",
    "guard_band",
    "interior",
    "interior_norm",
    "rel_diff",
    "IwasawaCoefficients",
    "iwasawa_coeffs",
    "MetricState",
    "metric_state",
    "metric_state_from_lambda",
    "dyson_map",
    "dyson_map_exponential",
    "dyson_map_product",
    "bogoliubov_conjugation",
]

# Below this threshold sinh(Xi)/Xi is evaluated by series to avoid 0/0.
_XI_SERIES_THRESHOLD = 1e-6


# ---------------------------------------------------------------------------
# elementary operators and guard-band helpers
# ---------------------------------------------------------------------------

def annihilation_operator(dim: int) -> np.ndarray:
    """Truncated bosonic annihilation operator ``a`` (dim x dim, float)."""
    if dim < 1:
        raise ValueError("dim must be a positive integer")
    return np.diag(np.sqrt(np.arange(1.0, dim)), k=1)


def number_operator(dim: int) -> np.ndarray:
    """Truncated number operator ``a^dag a`` (diagonal)."""
    return np.diag(np.arange(float(dim)))


def su11_generators(dim: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SU(1,1) generators ``(K+, K-, K0)`` on the truncated space.

    ``K+ = a^dag a^dag / 2``, ``K- = a a / 2``, ``K0 = (a^dag a + 1/2) / 2``.
    The commutators ``[K0, K+-] = +-K+-`` and ``[K+, K-] = -2 K0`` hold
    exactly on matrix elements whose row and column indices are below
    ``dim - 2``; the last two rows/columns carry truncation defects.
    """
    a = annihilation_operator(dim)
    k_minus = a @ a / 2.0
    k_plus = k_minus.T.copy()
    k_zero = np.diag(np.arange(dim) / 2.0 + 0.25)
    return k_plus, k_minus, k_zero


def guard_band(dim: int) -> int:
    """Number of high-``n`` rows/columns excluded from interior comparisons."""
    return int(math.ceil(dim / 5.0))


def interior(matrix: np.ndarray, guard: Optional[int] = None) -> np.ndarray:
    """Interior block of an operator (or leading block of a vector)."""
    n = matrix.shape[0]
    g = guard_band(n) if guard is None else int(guard)
    if g < 0 or g >= n:
        raise ValueError("guard must satisfy 0 <= guard < dim")
    keep = n - g
    if matrix.ndim == 1:
        return matrix[:keep]
    return matrix[:keep, :keep]


def interior_norm(matrix: np.ndarray, guard: Optional[int] = None) -> float:
    """Frobenius (vector: Euclidean) norm of the interior block."""
    return float(np.linalg.norm(interior(matrix, guard)))


def rel_diff(a: np.ndarray, b: np.ndarray, guard: Optional[int] = None) -> float:
    """Relative-with-floor interior mismatch ``||A - B|| / max(1, ||A||, ||B||)``."""
    na = interior_norm(a, guard)
    nb = interior_norm(b, guard)
    nd = interior_norm(a - b, guard)
    return nd / max(1.0, na, nb)


# ---------------------------------------------------------------------------
# closed-form Gauss / Iwasawa-style decomposition of the map generator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IwasawaCoefficients:
    """Factorization coefficients of ``exp(eps*(N+1/2) + mu*a^2 + conj(mu)*a^dag^2)``.

    ``xi = sqrt(eps**2 - 4|mu|**2)`` is the hyperbolic rapidity of the
    generator; the exponential factorizes into
    ``exp(lambda_plus K+) * lambda_zero**K0 * exp(lambda_minus K-)``.
    """

    lambda_plus: complex
    lambda_minus: complex
    lambda_zero: float
    xi: float


def _sinhc(x: float) -> float:
    """sinh(x)/x with a series fallback near zero."""
    if abs(x) < _XI_SERIES_THRESHOLD:
        x2 = x * x
        return 1.0 + x2 / 6.0 + x2 * x2 / 120.0
    return math.sinh(x) / x


def iwasawa_coeffs(epsilon: float, mu: complex) -> IwasawaCoefficients:
    """Closed-form factorization coefficients of the exponential map generator.

    Args:
        epsilon: real weight of the diagonal part ``N + 1/2``.
        mu: complex weight of ``a^2`` (its conjugate weights ``a^dag^2``).

    Returns:
        IwasawaCoefficients with
        ``lambda_plus  = 2 conj(mu) sinh(xi)/xi / den``,
        ``lambda_minus = conj(lambda_plus)``,
        ``lambda_zero  = den**(-2)``,
        where ``den = cosh(xi) - epsilon sinh(xi)/xi``.

    Raises:
        InfeasibleDomainError: if ``epsilon**2 < 4|mu|**2`` (the rapidity
            would be imaginary; only the hyperbolic branch is supported) or
            if ``den`` vanishes (the factorization has a pole there).
    """
    disc = float(epsilon) ** 2 - 4.0 * abs(mu) ** 2
    if disc < 0.0:
        raise InfeasibleDomainError(
            f"epsilon**2 - 4|mu|**2 = {disc:.6g} < 0: outside the hyperbolic branch"
        )
    xi = math.sqrt(disc)
    shc = _sinhc(xi)
    den = math.cosh(xi) - epsilon * shc
    if den == 0.0:
        raise InfeasibleDomainError(
            "cosh(xi) - epsilon*sinh(xi)/xi vanishes: factorization pole"
        )
    lam_plus = 2.0 * np.conj(mu) * shc / den
    return IwasawaCoefficients(
        lambda_plus=complex(lam_plus),
        lambda_minus=complex(np.conj(lam_plus)),
        lambda_zero=float(den ** (-2)),
        xi=xi,
    )


# ---------------------------------------------------------------------------
# metric state
# ---------------------------------------------------------------------------

def _epsilon_forms(z_abs: float, phi_cap: float):
    """Both closed inversions of the strength parameter, or a reason string.

    Returns ``((eps_arctanh, eps_log), None)`` when the inversion exists and
    ``(None, reason)`` when it does not.  The two forms are

    ``eps = arctanh(s*Phi / (Phi - |z|)) / s``  and
    ``eps = log(((1+s)*Phi - |z|) / ((1-s)*Phi - |z|)) / (2 s)``

    with ``s = sqrt(1 - |z|**2)``.  Both exist exactly when
    ``|z| * (1 + Phi**2) - 2*Phi > 0`` (equivalently ``lambda_zero > 0``);
    the boundary case counts as absent.
    """
    a = float(z_abs)
    p = float(phi_cap)
    if a == 0.0:
        # Identity-direction state: only Phi = 0 is representable and the
        # strength is zero by convention.
        if p == 0.0:
            return (0.0, 0.0), None
        return None, "z_abs = 0 admits no finite strength for Phi != 0"
    if not (0.0 < a < 1.0):
        return None, f"z_abs = {a:.6g} outside [0, 1)"
    s = math.sqrt(1.0 - a * a)
    margin = a * (1.0 + p * p) - 2.0 * p  # equals z_abs * lambda_zero
    if margin <= 0.0:
        return None, (
            f"|z|*(1+Phi**2) - 2*Phi = {margin:.6g} <= 0: "
            "no real strength reproduces this state"
        )
    if p == 0.0:
        return (0.0, 0.0), None
    arg = s * p / (p - a)
    eps_at = math.atanh(arg) / s
    num = (1.0 + s) * p - a
    den = (1.0 - s) * p - a
    eps_log = math.log(num / den) / (2.0 * s)
    return (eps_at, eps_log), None


@dataclass(frozen=True)
class MetricState:
    """One point of the metric parametrization.

    Primary fields are ``(z_abs, phi_cap, varphi)``; everything else is
    derived at construction time.  ``feasible`` is ``lambda_zero > 0``:
    only then does the state define a positive-definite map.  ``epsilon``
    is the real strength such that ``iwasawa_coeffs(epsilon, mu)`` with
    ``mu = epsilon * z / 2`` reproduces the lambdas; it is ``None`` when no
    such strength exists (``epsilon_reason`` says why).
    """

    z_abs: float
    phi_cap: float
    varphi: float
    chi: float
    lambda_plus: complex
    lambda_minus: complex
    lambda_zero: float
    epsilon: Optional[float]
    epsilon_reason: Optional[str]
    feasible: bool


def _finish_state(z_abs, phi_cap, varphi, chi, lambda_zero) -> MetricState:
    phase = np.exp(1j * varphi)
    lam_minus = -phi_cap * phase
    lam_plus = -phi_cap * np.conj(phase)
    forms, reason = _epsilon_forms(z_abs, phi_cap)
    eps = forms[0] if forms is not None else None
    return MetricState(
        z_abs=float(z_abs),
        phi_cap=float(phi_cap),
        varphi=float(varphi),
        chi=float(chi),
        lambda_plus=complex(lam_plus),
        lambda_minus=complex(lam_minus),
        lambda_zero=float(lambda_zero),
        epsilon=eps,
        epsilon_reason=reason,
        feasible=bool(lambda_zero > 0.0),
    )


def metric_state(z_abs: float, phi_cap: float, varphi: float) -> MetricState:
    """Build a metric state from ``(|z|, Phi, varphi)``.

    Args:
        z_abs: modulus of the squeeze-direction parameter, ``0 <= |z| < 1``.
        phi_cap: squeeze strength ``Phi`` (any real; sign selects the branch).
        varphi: squeeze-direction phase in radians.

    Raises:
        DegenerateStateError: if ``|z|`` is outside ``[0, 1)`` or ``|z| = 0``
            with ``Phi != 0`` (the derived ``chi`` would diverge).
    """
    a = float(z_abs)
    p = float(phi_cap)
    if a < 0.0 or a >= 1.0:
        raise DegenerateStateError(f"z_abs must lie in [0, 1); got {a:.6g}")
    if a == 0.0:
        if p != 0.0:
            raise DegenerateStateError("z_abs = 0 requires phi_cap = 0")
        # Limit convention along Phi = 0: chi -> -1, lambda_zero -> 1, so the
        # state maps to the identity operator.
        return _finish_state(0.0, 0.0, varphi, -1.0, 1.0)
    chi = 2.0 * p / a - 1.0
    lambda_zero = p * p - chi
    return _finish_state(a, p, varphi, chi, lambda_zero)


def metric_state_from_lambda(phi_cap: float, varphi: float,
                             lambda_zero: float) -> MetricState:
    """Build a metric state from the flow variables ``(Phi, varphi, lambda_zero)``.

    The flow integrates ``lambda_zero`` as an independent degree of freedom,
    so here ``chi = Phi**2 - lambda_zero`` is derived and the effective
    ``|z| = 2 Phi / (chi + 1)`` follows from it (it is not constant along a
    generic flow).  States with ``|z|`` outside ``[0, 1)`` are representable
    but carry no strength parameter.
    """
    p = float(phi_cap)
    l0 = float(lambda_zero)
    chi = p * p - l0
    if abs(chi + 1.0) < 1e-300:
        if p != 0.0:
            raise DegenerateStateError(
                "chi = -1 with phi_cap != 0: effective z_abs diverges"
            )
        return _finish_state(0.0, 0.0, varphi, -1.0, 1.0)
    z_abs = 2.0 * p / (chi + 1.0)
    phase = np.exp(1j * varphi)
    forms, reason = (None, f"effective z_abs = {z_abs:.6g} outside [0, 1)")
    if 0.0 <= z_abs < 1.0:
        forms, reason = _epsilon_forms(z_abs, p)
    eps = forms[0] if forms is not None else None
    return MetricState(
        z_abs=float(z_abs),
        phi_cap=p,
        varphi=float(varphi),
        chi=float(chi),
        lambda_plus=complex(-p * np.conj(phase)),
        lambda_minus=complex(-p * phase),
        lambda_zero=l0,
        epsilon=eps,
        epsilon_reason=reason,
        feasible=bool(l0 > 0.0),
    )


# ---------------------------------------------------------------------------
# the map itself
# ---------------------------------------------------------------------------

def _product_map(lambda_plus: complex, lambda_minus: complex,
                 lambda_zero: float, dim: int) -> np.ndarray:
    """``exp(l+ K+) * l0**K0 * exp(l- K-)`` via nilpotent exponentials."""
    if lambda_zero <= 0.0:
        raise InfeasibleMapError(
            f"lambda_zero = {lambda_zero:.6g} <= 0: no positive-definite map"
        )
    k_plus, k_minus, _ = su11_generators(dim)
    # K+ and K- are strictly triangular, so these exponentials terminate.
    left = expm(lambda_plus * k_plus)
    right = expm(lambda_minus * k_minus)
    mid = np.diag(lambda_zero ** (np.arange(dim) / 2.0 + 0.25))
    return left @ mid @ right


def dyson_map(state: MetricState, dim: int) -> np.ndarray:
    """Positive-definite Dyson map of a metric state on the truncated space.

    Uses the truncation-exact product factorization; the result is Hermitian
    positive definite whenever ``state.feasible``.

    Raises:
        InfeasibleMapError: if ``state.lambda_zero <= 0``.
    """
    if not state.feasible:
        raise InfeasibleMapError(
            f"metric state with lambda_zero = {state.lambda_zero:.6g} "
            "does not define a positive map"
        )
    return _product_map(state.lambda_plus, state.lambda_minus,
                        state.lambda_zero, dim)


def dyson_map_exponential(epsilon: float, mu: complex, dim: int) -> np.ndarray:
    """Dense ``expm`` of the generator ``eps*(N+1/2) + mu*a^2 + conj(mu)*a^dag^2``.

    This is the brute-force route; it differs from the product route only by
    truncation edge effects (and by the factorization pole structure), which
    is exactly what the cross-check tests quantify.
    """
    a = annihilation_operator(dim)
    n_half = np.diag(np.arange(dim) + 0.5)
    gen = epsilon * n_half + mu * (a @ a) + np.conj(mu) * (a @ a).conj().T
    return expm(gen)


def dyson_map_product(epsilon: float, mu: complex, dim: int) -> np.ndarray:
    """Product-form map built from the closed-form factorization coefficients."""
    c = iwasawa_coeffs(epsilon, mu)
    return _product_map(c.lambda_plus, c.lambda_minus, c.lambda_zero, dim)


def bogoliubov_conjugation(state: MetricState):
    """2x2 matrix of the ladder-operator conjugation by the Dyson map.

    Returns ``(B, sign)`` where ``B`` acts on the column ``(a, a^dag)``:

    ``eta a eta^-1    = B[0,0] a + B[0,1] a^dag``
    ``eta a^dag eta^-1 = B[1,0] a + B[1,1] a^dag``

    The matrix is ``sign * [[-1, lambda_plus], [-lambda_minus, chi]] /
    sqrt(lambda_zero)`` and the sign (here ``-1``) is fixed by requiring the
    identity state to conjugate trivially.  ``det(B) = +1`` always, since
    ``lambda_plus * lambda_minus - chi = lambda_zero``.
    """
    if not state.feasible:
        raise InfeasibleMapError("conjugation requires lambda_zero > 0")
    sign = -1.0
    root = math.sqrt(state.lambda_zero)
    b = sign * np.array(
        [[-1.0 + 0j, state.lambda_plus],
         [-state.lambda_minus, state.chi + 0j]]
    ) / root
    return b, sign
