"""Exception and warning types raised by the solver."""


class AggregationError(Exception):
    """Base class for all solver errors."""


class InvalidAlpha(AggregationError, ValueError):
    pass


class QuadratureFailure(AggregationError):
    pass


class SingularSystem(AggregationError):
    pass


class NegativeDensity(AggregationError, ValueError):
    pass


class NonFinite(AggregationError, FloatingPointError):
    pass


class FitDegenerate(AggregationError):
    pass


class LambdaTooSmall(AggregationError, ValueError):
    pass


class Unbounded(AggregationError):
    """The max-principle bound does not exist for the given diffusion law."""


class ConfigError(AggregationError, ValueError):
    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class IoError(AggregationError, OSError):
    def __init__(self, path, operation, cause=None):
        self.path = str(path)
        self.operation = operation
        msg = f"cannot {operation} {self.path}"
        if cause is not None:
            msg += f": {cause}"
        super().__init__(msg)


class NegativeDensityWarning(UserWarning):
    """Emitted when the density dips below zero and is clamped for the diffusion law."""
