"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A constructor or operation received parameters outside its domain."""


class DegenerateEndpointError(ValueError):
    """The loop anchor point sits at the origin, so no retraction direction exists."""


class EnergyConditionError(ValueError):
    """The energy integral H - V along the loop is not positive; the period
    formula does not apply."""


class MarkerUndefinedError(ValueError):
    """The orbit never enters the marker radius, so t_- and t_+ are undefined."""


class WindowDomainError(ValueError):
    """Requested comparison window exceeds an orbit's centered domain."""


class SweepFailedError(RuntimeError):
    """Fewer than two radii converged; no convergence evidence can be assembled."""
