"""Exception types shared across the package."""


class ActinfError(Exception):
    """Base class for all package-specific errors."""


class ModelFormatError(ActinfError):
    """A model file could not be parsed, or its fields have inconsistent shapes."""


class AllZeroPosteriorError(ActinfError):
    """An observation has probability zero under the predictive prior.

    Raised instead of silently renormalizing a zero vector, which would hide
    model bugs (e.g. an observation the likelihood kernel forbids).
    """


class NonConvergenceError(ActinfError):
    """Fixed-point iteration exhausted its sweep budget above tolerance.

    Carries the last iterate and the final residual so callers can inspect
    or resume.
    """

    def __init__(self, message: str, last_iterate=None, residual: float | None = None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class CombinatorialLimitError(ActinfError):
    """An enumeration would exceed the configured size cap."""


class StepAfterDoneError(ActinfError):
    """step() was called on an environment whose episode already ended."""


class SupportViolationError(ActinfError):
    """KL divergence is undefined: the first argument has mass where the second has none."""
