"""Exception types shared across the package."""


class CarnotError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(CarnotError, ValueError):
    """An argument violates a documented precondition."""


class NotHTypeError(CarnotError, ValueError):
    """The supplied J matrices do not satisfy the H-type identity."""


class SingularPointError(CarnotError, ValueError):
    """A singular quantity was requested at the group origin."""


class OutOfRangeError(CarnotError, ValueError):
    """A parameter lies outside the range where the quantity is defined."""


class DegenerateTestFunctionError(CarnotError, ValueError):
    """A Rayleigh quotient was requested for an (almost) vanishing field."""


class ResolutionError(CarnotError, RuntimeError):
    """A quadrature request cannot be resolved at the configured mesh."""


class EvaluationError(CarnotError, RuntimeError):
    """An integrand produced a non-finite value."""
