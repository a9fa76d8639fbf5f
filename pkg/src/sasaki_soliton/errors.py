"""Exception hierarchy shared by every layer of the package."""


class GeometryError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgument(GeometryError, ValueError):
    """Bad argument: mismatched jet specs, out-of-range index, wrong rank."""


class SingularValueError(GeometryError, ArithmeticError):
    """Division by a jet with zero constant term, singular metric, sqrt of a non-positive value."""


class CapabilityError(GeometryError):
    """The requested derivative order exceeds what the jet machinery supports."""


class DomainError(GeometryError, ValueError):
    """A point lies outside the chart domain or has non-finite coordinates."""


class PreconditionError(GeometryError):
    """A check was requested on a structure that does not meet its hypotheses."""


class TheoremViolation(GeometryError):
    """Neither branch of a proven dichotomy holds within tolerance."""


class NumericError(GeometryError, ArithmeticError):
    """A field produced non-finite components."""
