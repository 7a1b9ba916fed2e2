"""Exception hierarchy.

``NumericalError`` subclasses signal that a computation could not be
carried out reliably (CLI exit code 3); ``InputError`` subclasses signal
malformed input (exit code 2).  Negative mathematical outcomes such as
"no center" are separate so callers can treat them as results.
"""


class CtpError(Exception):
    """Base class for all package errors."""


class InputError(CtpError, ValueError):
    pass


class NumericalError(CtpError, ArithmeticError):
    pass


class NonConvergence(NumericalError):
    pass


class DegreeOverflow(InputError):
    pass


class ZeroMap(InputError):
    pass


class PathTooCloseToCriticalValue(NumericalError):
    pass


class StepUnderflow(NumericalError):
    pass


class LiftCollision(NumericalError):
    pass


class AmbiguousMatching(NumericalError):
    pass


class RoutingFailure(NumericalError):
    pass


class PartitionInconsistent(NumericalError):
    pass


class OrderBound(NumericalError):
    pass


class NotBelyiPolynomial(InputError):
    pass


class DisconnectedPreimage(NumericalError):
    pass


class ChaseStalled(NumericalError):
    pass


class NoCenter(CtpError):
    """No vertex satisfies the marked-center conditions (a legitimate outcome)."""


class MarkedPointOnPoleOfAmbiguity(NumericalError):
    pass


class UnsupportedConfiguration(CtpError):
    pass


class GenericFiberUnavailable(NumericalError):
    pass


class DegenerateQuadruple(InputError):
    pass


class BranchResolutionFailure(NumericalError):
    pass


class SchemaError(InputError):
    """Document failed validation; ``path`` locates the offending value."""

    def __init__(self, message: str, path: str | None = None):
        super().__init__(message)
        self.path = path
