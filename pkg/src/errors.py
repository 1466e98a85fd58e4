"""
Error types shared by the field, character-sum and Bessel modules.
Each class carries the process exit code the CLI reports for it.
"""


class BesselError(Exception):
    """Base class for all library errors."""

    exit_code = 1


# --- Validation (exit 2) ---

class ValidationError(BesselError, ValueError):
    exit_code = 2


class InvalidPrime(ValidationError):
    pass


class DegreeNotDividing(ValidationError):
    pass


class ZeroArgument(ValidationError):
    pass


class DegreeMismatch(ValidationError):
    pass


class DegenerateLeading(ValidationError):
    pass


class InvalidSupportPoint(ValidationError):
    pass


# --- Resource guards (exit 3) ---

class ResourceError(BesselError):
    exit_code = 3


class CostExceeded(ResourceError):
    pass


class TableCapExceeded(ResourceError):
    pass


class SizeCapExceeded(ResourceError):
    pass


# --- Numerical failures (exit 4) ---

class ToleranceError(BesselError):
    exit_code = 4


class AmbiguousMatch(ToleranceError):
    pass


class DiagonalizationDegenerate(ToleranceError):
    pass


class CheckFailed(ToleranceError):
    pass
