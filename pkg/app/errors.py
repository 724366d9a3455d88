from typing import Optional

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4
EXIT_POSITIVITY = 5


class PerturbationError(Exception):
    """Base class for every failure the library reports to callers."""
    code = "PERTURBATION_ERROR"
    exit_status = EXIT_DATA


# Usage errors

class InvalidParameters(PerturbationError, ValueError):
    code = "INVALID_PARAMETERS"
    exit_status = EXIT_USAGE


class InvalidSpec(PerturbationError, ValueError):
    code = "INVALID_SPEC"
    exit_status = EXIT_USAGE


# Data errors

class DimensionMismatch(PerturbationError, ValueError):
    code = "DIMENSION_MISMATCH"


class ConstantResponse(PerturbationError):
    code = "CONSTANT_RESPONSE"


class InsufficientData(PerturbationError):
    code = "INSUFFICIENT_DATA"


class NoAdequateB(PerturbationError):
    code = "NO_ADEQUATE_B"


class SchemaMismatch(PerturbationError):
    code = "SCHEMA_MISMATCH"


class ParseError(PerturbationError):
    code = "PARSE_ERROR"

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.row = row
        self.column = column


class NonFiniteValue(ParseError):
    code = "NON_FINITE_VALUE"


# Numerical degeneracy

class RankDeficient(PerturbationError):
    code = "RANK_DEFICIENT"
    exit_status = EXIT_NUMERICAL


class DegenerateFit(PerturbationError):
    code = "DEGENERATE_FIT"
    exit_status = EXIT_NUMERICAL


class DegenerateDirection(PerturbationError):
    code = "DEGENERATE_DIRECTION"
    exit_status = EXIT_NUMERICAL


class ZeroDirection(PerturbationError):
    code = "ZERO_DIRECTION"
    exit_status = EXIT_NUMERICAL


class UndefinedScale(PerturbationError):
    code = "UNDEFINED_SCALE"
    exit_status = EXIT_NUMERICAL


class PositivityUnachievable(PerturbationError):
    code = "POSITIVITY_UNACHIEVABLE"
    exit_status = EXIT_POSITIVITY

    def __init__(self, best_min: float, attempts: int):
        super().__init__(
            f"no candidate with min(y+eps) > 0 after {attempts} attempt(s); "
            f"best minimum seen {best_min:.17g}"
        )
        self.best_min = best_min
        self.attempts = attempts
