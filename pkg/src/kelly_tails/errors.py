"""Exception hierarchy. Every anticipated failure carries a stable ``code``
string so callers (and the CLI) can dispatch without parsing messages."""


class KellyTailsError(Exception):
    """Base class for all library errors."""

    code = "ERROR"

    def __init__(self, message=""):
        super().__init__(message or self.code)


class ValidationError(KellyTailsError):
    """Invalid input value or violated type invariant."""

    code = "VALIDATION"


class CalibrationInfeasible(KellyTailsError):
    """Tail too heavy for the observed variance: calibrated sigma^2 <= 0."""

    code = "CALIBRATION_INFEASIBLE"


class DomainViolation(KellyTailsError):
    """Leverage leads to a non-positive wealth factor (ruin) at some outcome."""

    code = "DOMAIN_VIOLATION"


class NoInteriorMaximum(KellyTailsError):
    """Growth is monotone on the feasible set; no interior optimum exists."""

    code = "NO_INTERIOR_MAXIMUM"


class SingularCovariance(KellyTailsError):
    """Covariance factorization failed."""

    code = "SINGULAR_COVARIANCE"


class DegenerateNormalization(KellyTailsError):
    """Kelly fractions sum to ~0; tangency weights are undefined."""

    code = "DEGENERATE_NORMALIZATION"


class InvalidJointModel(KellyTailsError):
    """Joint two-asset construction produced a negative probability."""

    code = "INVALID_JOINT"


class NewtonStall(KellyTailsError):
    """Newton ascent and the bisection fallback both failed to converge."""

    code = "NEWTON_STALL"


class InfeasibleLeverage(KellyTailsError):
    """Requested leverage is outside the model's feasible domain."""

    code = "INFEASIBLE_LEVERAGE"


class SeriesTooShort(KellyTailsError):
    """Return series has fewer observations than estimation requires."""

    code = "SERIES_TOO_SHORT"


class ReturnsParseError(KellyTailsError):
    """A row of the returns file could not be parsed."""

    code = "PARSE_ERROR"

    def __init__(self, line, message=""):
        self.line = line
        super().__init__(message or f"line {line}: unparseable return value")


class EmptyFileError(KellyTailsError):
    """Returns file contains no data rows."""

    code = "EMPTY_FILE"


class EstimationError(KellyTailsError):
    """Estimated parameters do not form a valid model."""

    code = "ESTIMATION"


class ApproximationWarning(UserWarning):
    """Parameters leave the regime where the closed-form approximations hold."""
