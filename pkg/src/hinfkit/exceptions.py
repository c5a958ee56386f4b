"""Exception hierarchy shared by all hinfkit modules."""


class HinfkitError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(HinfkitError, ValueError):
    """Non-finite entries, nonpositive rates, or otherwise unusable data."""


class DimensionError(HinfkitError, ValueError):
    """Matrix or vector shapes are inconsistent with the operation."""


class SingularMatrixError(HinfkitError):
    """A matrix required to be invertible is singular or numerically near-singular.

    Carries ``rcond``, a reciprocal condition estimate, when one is available.
    """

    def __init__(self, message, rcond=None):
        super().__init__(message)
        self.rcond = rcond


class PoleAtEvaluationError(HinfkitError, ZeroDivisionError):
    """A rational function was evaluated at one of its poles."""


class PoleOnAxisError(HinfkitError):
    """The closed loop is singular at an evaluation frequency (gain not stabilizing)."""


class NotRealGainError(HinfkitError):
    """The constructed feedback matrix has a non-negligible imaginary part."""


class HypothesisViolationError(HinfkitError, ValueError):
    """Structural hypotheses of a construction (symmetry, definiteness, rank) fail."""


class StandingAssumptionError(HinfkitError):
    """A plant violates a standing well-posedness assumption on the frequency grid."""


class UnstableSystemError(HinfkitError):
    """An operation that requires a stable system received an unstable one."""


class UnstabilizableError(HinfkitError):
    """No finite feasible attenuation level exists for the synthesis problem."""


class NumericalError(HinfkitError, RuntimeError):
    """An internal numerical procedure failed to converge or bracket."""


class SchemaError(HinfkitError, ValueError):
    """A model document does not match the expected schema.

    ``field`` holds a dotted path to the offending entry.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
