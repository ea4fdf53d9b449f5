"""Exception types raised across the package."""


class ConfigurationError(ValueError):
    """Invalid or inconsistent system/experiment parameters."""


class InternalConsistencyError(RuntimeError):
    """A structural identity that must hold by construction was violated."""


class EstimationError(RuntimeError):
    """Subspace estimation failed, e.g. a rank-deficient shift equation.

    Attributes:
        condition_number: condition number of the offending matrix.
    """

    def __init__(self, message, condition_number=float("nan")):
        super().__init__(message)
        self.condition_number = condition_number


class AngleDomainError(EstimationError):
    """An eigenvalue decoded to a spatial frequency outside the visible region."""


class SingularityError(EstimationError):
    """A least-squares system over path gains is rank deficient.

    Attributes:
        indices: path indices involved in the collision (may be empty).
    """

    def __init__(self, message, indices=(), condition_number=float("nan")):
        super().__init__(message, condition_number)
        self.indices = tuple(indices)


class UndefinedMetricError(ValueError):
    """A metric is undefined for the given input (e.g. zero reference channel)."""
