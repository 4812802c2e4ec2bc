"""Numerics for the driven Swanson-type quadratic non-Hermitian oscillator.

The package computes time-dependent Dyson maps and metric operators, the
Hermiticity-enforcing flow of the metric parameters, invariant-based
solutions of the transformed Hermitian model, time-independent metric
special cases, and the quasi-Hermitian observable algebra — all on a
truncated Fock space, cross-checked against direct propagation.
"""

from .exceptions import (
    ConfigError,
    DegenerateStateError,
    DomainError,
    InfeasibleDomainError,
    InfeasibleMapError,
    IntegrationError,
    ModelError,
    SingularConstraintError,
    SingularFlowError,
    SqueezeSingularityError,
    UndefinedBandError,
)
from .fock_su11 import (
    IwasawaCoefficients,
    MetricState,
    annihilation_operator,
    bogoliubov_conjugation,
    dyson_map,
    dyson_map_exponential,
    dyson_map_product,
    guard_band,
    interior,
    interior_norm,
    iwasawa_coeffs,
    metric_state,
    metric_state_from_lambda,
    number_operator,
    rel_diff,
    su11_generators,
)
from .model import (
    CoefficientScenario,
    FunctionSpec,
    PolarCoefficients,
    eval_coefficients,
    function_spec_from_json,
    hamiltonian_matrix,
    hermiticity_flags,
    scenario_from_json,
)
from .metric_flow import (
    HermitizedCoefficients,
    MetricTrajectory,
    epsilon_from_phi,
    epsilon_from_phi_forms,
    hermitized_W_V,
    integrate_metric,
    metric_rhs,
    metric_rhs_real,
    raw_hVT,
    reality_residual,
)
from .static_metric import (
    AngleDiagnostics,
    BandResult,
    StaticMetricSolution,
    StaticRootRecord,
    constancy_constraint_residual,
    epsilon_static_real,
    epsilon_static_real_forms,
    forbidden_band,
    phi_from_epsilon,
    recover_angles,
    solve_phi_cubic,
    solve_static,
    static_hVT,
    static_residuals,
)
from .lr_solver import (
    LRState,
    LRTrajectory,
    analytic_phi_case,
    assemble_U,
    evolution_operator,
    evolve_lr,
    omega_eff,
    psi_solution,
    psi_superposition,
    squeeze_rhs,
)
from .observables import (
    QuadratureOperators,
    metric_operator_quadrature,
    observable_O,
    quadratures,
    quasi_XP,
    quasi_hermiticity_check,
    rho_metric,
    static_real_O,
    static_real_XP,
)
from .oracle import (
    PropagationResult,
    dyson_residual,
    invariant_transfer_check,
    lr_vs_direct,
    propagate_tdse,
    quasi_hermiticity_residual,
    rho_norm_series,
)

__version__ = "1.0.0"
