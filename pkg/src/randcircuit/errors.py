"""Exception types shared across the package."""


class RandCircuitError(Exception):
    """Base class for all package errors."""


class CapacityError(RandCircuitError):
    """Requested size exceeds a dense-simulation capacity guard."""


class ValidationError(RandCircuitError, ValueError):
    """An input violates a numerical contract (unitarity, trace, ...)."""


class ModeError(RandCircuitError, ValueError):
    """Operation is not available in the current simulation mode."""


class NumericalError(RandCircuitError, ArithmeticError):
    """A numerical routine failed or produced an out-of-tolerance result."""


class ParseError(RandCircuitError, ValueError):
    """A serialized document could not be parsed."""


class UnsupportedVersionError(ParseError):
    """A serialized document carries a version tag this build cannot read."""
