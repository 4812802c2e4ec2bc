"""Exception types shared across the package.

Everything raised deliberately by this package derives from ``ModelError``,
so callers can catch one base class at API boundaries (the CLI does exactly
that to map failures onto exit codes).
"""


class ModelError(Exception):
    """Base class for all deliberate failures raised by this package."""


class InfeasibleDomainError(ModelError):
    """Parameters left the hyperbolic branch (e.g. ``epsilon**2 < 4|mu|**2``)."""


class DegenerateStateError(ModelError):
    """Metric-state parameters are degenerate (e.g. ``|z| = 0`` with ``Phi != 0``)."""


class InfeasibleMapError(ModelError):
    """A positive-definite metric was requested but ``lambda_zero <= 0``."""


class SingularFlowError(ModelError):
    """The flow equations hit a singular configuration (``chi -> 1`` or ``Phi -> 0``)."""


class SqueezeSingularityError(ModelError):
    """The squeeze amplitude reached zero while still being driven."""


class SingularConstraintError(ModelError):
    """A constraint residual has a vanishing denominator at the requested time."""


class UndefinedBandError(ModelError):
    """The feasibility band is undefined for the supplied amplitudes."""


class DomainError(ModelError):
    """A time outside the scenario's validity window was requested."""


class ConfigError(ModelError):
    """A run configuration could not be parsed; the message cites the JSON path."""


class IntegrationError(ModelError):
    """The ODE stepper failed; carries the last successfully reached time."""

    def __init__(self, message, t_last=None):
        super().__init__(message)
        self.t_last = t_last
