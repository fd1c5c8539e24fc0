"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid or out-of-domain model parameters."""


class OutOfRangeError(ValueError):
    """A query point lies outside the range covered by a simulated path."""


class UnsupportedScenarioError(ValueError):
    """A combination of law, response model and theorem case is not covered."""


class ResourceError(RuntimeError):
    """A simulation would exceed the configured memory budget."""


class NumericalError(RuntimeError):
    """A covariance matrix failed the positive-semidefiniteness check."""
