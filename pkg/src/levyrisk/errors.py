"""Exception types shared across the library."""


class LevyRiskError(Exception):
    """Base class for library errors."""


class DomainError(LevyRiskError, ValueError):
    """An argument lies outside the admissible domain of a Laplace exponent."""


class NoStationaryPointError(LevyRiskError):
    """The stationarity equation has no positive root.

    ``boundary`` records which end of (0, inf) carries the infimum and
    ``limit_value`` the analytic limit of the objective there, when finite.
    """

    def __init__(self, message, boundary, limit_value=None):
        super().__init__(message)
        self.boundary = boundary
        self.limit_value = limit_value


class QuadratureBudgetError(LevyRiskError):
    """Adaptive quadrature exhausted its evaluation budget.

    ``partial`` holds the best estimate accumulated before giving up.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ConfigError(LevyRiskError, ValueError):
    """A portfolio configuration file failed to parse or validate."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
