"""Time-dependent coefficient scenarios and the non-Hermitian Hamiltonian.

The model Hamiltonian is the quadratic non-Hermitian form

``H(t) = omega(t) (a^dag a + 1/2) + alpha(t) a^2 + beta(t) a^dag^2``

with independent complex coefficients.  ``FunctionSpec`` describes one
coefficient as a constant, polynomial, complex sinusoid, or tabulated curve;
``CoefficientScenario`` bundles the three coefficients with a validity
window.  Scenario objects can be built directly or parsed from JSON (the CLI
does the latter); parse errors cite the offending JSON path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from .exceptions import ConfigError, DomainError
from .fock_su11 import annihilation_operator

__all__ = [
    "FunctionSpec",
    "CoefficientScenario",
    "PolarCoefficients",
    "function_spec_from_json",
    "scenario_from_json",
    "eval_coefficients",
    "hamiltonian_matrix",
    "hermiticity_flags",
]

_KINDS = ("constant", "polynomial", "sinusoid", "tabulated")


@dataclass
class FunctionSpec:
    """One time-dependent coefficient.

    kinds:
        ``constant``    value
        ``polynomial``  sum_k coeffs[k] * t**k
        ``sinusoid``    amplitude * exp(i*(frequency*t + phase)) + offset
        ``tabulated``   interpolation through (times, values) samples;
                        cubic spline by default, piecewise linear on request.
    """

    kind: str
    value: complex = 0j
    coeffs: tuple = ()
    amplitude: complex = 0j
    frequency: float = 0.0
    phase: float = 0.0
    offset: complex = 0j
    times: tuple = ()
    values: tuple = ()
    interpolation: str = "spline"
    _spline: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown FunctionSpec kind {self.kind!r}")
        if self.kind == "tabulated":
            t = np.asarray(self.times, dtype=float)
            v = np.asarray(self.values, dtype=complex)
            if t.size < 2 or t.size != v.size:
                raise ValueError("tabulated spec needs matching times/values, >= 2 samples")
            if np.any(np.diff(t) <= 0):
                raise ValueError("tabulated times must be strictly increasing")
            if self.interpolation not in ("spline", "linear"):
                raise ValueError(f"unknown interpolation {self.interpolation!r}")
            if self.interpolation == "spline" and t.size >= 4:
                self._spline = CubicSpline(t, v)
            # fewer than 4 samples: fall back to linear segments

    # -- evaluation ---------------------------------------------------------

    def __call__(self, t: float) -> complex:
        if self.kind == "constant":
            return complex(self.value)
        if self.kind == "polynomial":
            return complex(np.polynomial.polynomial.polyval(t, np.asarray(self.coeffs, dtype=complex)))
        if self.kind == "sinusoid":
            return complex(self.amplitude * np.exp(1j * (self.frequency * t + self.phase)) + self.offset)
        return self._eval_tabulated(t, 0)

    def derivative(self, t: float) -> complex:
        if self.kind == "constant":
            return 0j
        if self.kind == "polynomial":
            c = np.asarray(self.coeffs, dtype=complex)
            dc = c[1:] * np.arange(1, c.size)
            if dc.size == 0:
                return 0j
            return complex(np.polynomial.polynomial.polyval(t, dc))
        if self.kind == "sinusoid":
            return complex(1j * self.frequency * self.amplitude
                           * np.exp(1j * (self.frequency * t + self.phase)))
        return self._eval_tabulated(t, 1)

    def _eval_tabulated(self, t: float, order: int) -> complex:
        tt = np.asarray(self.times, dtype=float)
        vv = np.asarray(self.values, dtype=complex)
        if t < tt[0] or t > tt[-1]:
            raise DomainError(
                f"t = {t:.6g} outside tabulated window [{tt[0]:.6g}, {tt[-1]:.6g}]"
            )
        if self._spline is not None:
            return complex(self._spline(t, order))
        # piecewise linear
        k = int(np.searchsorted(tt, t, side="right") - 1)
        k = min(max(k, 0), tt.size - 2)
        slope = (vv[k + 1] - vv[k]) / (tt[k + 1] - tt[k])
        if order == 1:
            return complex(slope)
        return complex(vv[k] + slope * (t - tt[k]))

    # -- structure ----------------------------------------------------------

    def parity_even(self) -> Optional[bool]:
        """Structural evenness in t: True/False when decidable, None if unknown."""
        if self.kind == "constant":
            return True
        if self.kind == "polynomial":
            c = np.asarray(self.coeffs, dtype=complex)
            return bool(np.all(c[1::2] == 0))
        if self.kind == "sinusoid":
            # exp(i nu t) is even only in the degenerate nu = 0 case
            return self.frequency == 0.0 or self.amplitude == 0
        return None

    def domain(self) -> Tuple[float, float]:
        if self.kind == "tabulated":
            return float(self.times[0]), float(self.times[-1])
        return (-math.inf, math.inf)

    def scaled(self, factor: float) -> "FunctionSpec":
        """Same shape with all output values multiplied by ``factor``."""
        f = complex(factor)
        if self.kind == "constant":
            return FunctionSpec("constant", value=self.value * f)
        if self.kind == "polynomial":
            return FunctionSpec("polynomial", coeffs=tuple(c * f for c in self.coeffs))
        if self.kind == "sinusoid":
            return FunctionSpec("sinusoid", amplitude=self.amplitude * f,
                                frequency=self.frequency, phase=self.phase,
                                offset=self.offset * f)
        return FunctionSpec("tabulated", times=self.times,
                            values=tuple(v * f for v in self.values),
                            interpolation=self.interpolation)


@dataclass
class CoefficientScenario:
    """Three coefficient curves plus the validity window they share."""

    omega: FunctionSpec
    alpha: FunctionSpec
    beta: FunctionSpec
    t_start: float = -math.inf
    t_stop: float = math.inf

    def __post_init__(self):
        for spec in (self.omega, self.alpha, self.beta):
            lo, hi = spec.domain()
            self.t_start = max(self.t_start, lo)
            self.t_stop = min(self.t_stop, hi)
        if not self.t_start < self.t_stop:
            raise ValueError("scenario has an empty validity window")

    def check_time(self, t: float) -> None:
        slack = 1e-12 * max(1.0, abs(self.t_start), abs(self.t_stop))
        if t < self.t_start - slack or t > self.t_stop + slack:
            raise DomainError(
                f"t = {t:.6g} outside scenario window "
                f"[{self.t_start:.6g}, {self.t_stop:.6g}]"
            )


@dataclass(frozen=True)
class PolarCoefficients:
    """Moduli and phases of the three coefficients at one instant."""

    omega_abs: float
    varphi_omega: float
    alpha_abs: float
    varphi_alpha: float
    beta_abs: float
    varphi_beta: float


# ---------------------------------------------------------------------------
# JSON parsing
# ---------------------------------------------------------------------------

def _as_complex(obj, path: str) -> complex:
    if isinstance(obj, (int, float)):
        return complex(obj)
    if isinstance(obj, (list, tuple)) and len(obj) == 2 and all(
            isinstance(x, (int, float)) for x in obj):
        return complex(obj[0], obj[1])
    raise ConfigError(f"{path}: expected a number or [re, im] pair, got {obj!r}")


def _as_real(obj, path: str) -> float:
    if isinstance(obj, (int, float)):
        return float(obj)
    raise ConfigError(f"{path}: expected a real number, got {obj!r}")


def function_spec_from_json(obj, path: str = "$") -> FunctionSpec:
    """Parse one coefficient spec from a JSON object; errors cite ``path``."""
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object, got {type(obj).__name__}")
    kind = obj.get("kind")
    if kind not in _KINDS:
        raise ConfigError(f"{path}.kind: expected one of {_KINDS}, got {kind!r}")
    try:
        if kind == "constant":
            return FunctionSpec("constant", value=_as_complex(obj.get("value", 0.0), f"{path}.value"))
        if kind == "polynomial":
            coeffs = obj.get("coeffs")
            if not isinstance(coeffs, list) or not coeffs:
                raise ConfigError(f"{path}.coeffs: expected a non-empty list")
            return FunctionSpec("polynomial", coeffs=tuple(
                _as_complex(c, f"{path}.coeffs[{i}]") for i, c in enumerate(coeffs)))
        if kind == "sinusoid":
            return FunctionSpec(
                "sinusoid",
                amplitude=_as_complex(obj.get("amplitude", 0.0), f"{path}.amplitude"),
                frequency=_as_real(obj.get("frequency", 0.0), f"{path}.frequency"),
                phase=_as_real(obj.get("phase", 0.0), f"{path}.phase"),
                offset=_as_complex(obj.get("offset", 0.0), f"{path}.offset"),
            )
        times = obj.get("times")
        values = obj.get("values")
        if not isinstance(times, list) or not isinstance(values, list):
            raise ConfigError(f"{path}: tabulated spec needs 'times' and 'values' lists")
        return FunctionSpec(
            "tabulated",
            times=tuple(_as_real(t, f"{path}.times[{i}]") for i, t in enumerate(times)),
            values=tuple(_as_complex(v, f"{path}.values[{i}]") for i, v in enumerate(values)),
            interpolation=obj.get("interpolation", "spline"),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def scenario_from_json(obj, path: str = "$") -> CoefficientScenario:
    """Parse a scenario ``{"omega": ..., "alpha": ..., "beta": ...}``."""
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object")
    specs = {}
    for name in ("omega", "alpha", "beta"):
        if name not in obj:
            raise ConfigError(f"{path}.{name}: missing coefficient spec")
        specs[name] = function_spec_from_json(obj[name], f"{path}.{name}")
    kwargs = {}
    if "t_start" in obj:
        kwargs["t_start"] = _as_real(obj["t_start"], f"{path}.t_start")
    if "t_stop" in obj:
        kwargs["t_stop"] = _as_real(obj["t_stop"], f"{path}.t_stop")
    try:
        return CoefficientScenario(specs["omega"], specs["alpha"], specs["beta"], **kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def eval_coefficients(scenario: CoefficientScenario, t: float):
    """Coefficients at time t, both Cartesian and polar.

    Returns ``(omega, alpha, beta, polar)`` where the first three are complex
    and ``polar`` is a :class:`PolarCoefficients`.

    Raises:
        DomainError: if ``t`` lies outside the scenario window.
    """
    scenario.check_time(t)
    om = scenario.omega(t)
    al = scenario.alpha(t)
    be = scenario.beta(t)
    polar = PolarCoefficients(
        omega_abs=abs(om), varphi_omega=float(np.angle(om)),
        alpha_abs=abs(al), varphi_alpha=float(np.angle(al)),
        beta_abs=abs(be), varphi_beta=float(np.angle(be)),
    )
    return om, al, be, polar


def hamiltonian_matrix(scenario: CoefficientScenario, t: float, dim: int) -> np.ndarray:
    """Truncated matrix of ``omega (N + 1/2) + alpha a^2 + beta a^dag^2`` at t."""
    om, al, be, _ = eval_coefficients(scenario, t)
    a = annihilation_operator(dim)
    a2 = a @ a  # exact on the truncated space (pure lowering)
    n_half = np.diag(np.arange(dim) + 0.5)
    return om * n_half + al * a2 + be * a2.conj().T


def hermiticity_flags(scenario: CoefficientScenario, t: float):
    """Structural flags at time t.

    Returns ``(is_hermitian, is_pt_candidate)``:

    * ``is_hermitian``: ``omega`` real and ``alpha = conj(beta)`` at ``t``
      (up to a relative tolerance of 1e-12);
    * ``is_pt_candidate``: True when all three coefficient curves are
      structurally even in t, False when at least one is decidably odd or
      mixed, None when a tabulated curve makes parity undecidable.
    """
    om, al, be, _ = eval_coefficients(scenario, t)
    scale = max(1.0, abs(om), abs(al), abs(be))
    is_herm = bool(abs(om.imag) <= 1e-12 * scale
                   and abs(al - np.conj(be)) <= 1e-12 * scale)
    parities = [scenario.omega.parity_even(),
                scenario.alpha.parity_even(),
                scenario.beta.parity_even()]
    if any(p is None for p in parities):
        is_pt: Optional[bool] = None
    else:
        is_pt = all(parities)
    return is_herm, is_pt
