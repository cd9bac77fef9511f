"""
Exception hierarchy for freysieve

Every error carries the CLI exit code of its family:
  2 invalid input, 3 unresolved, 4 missing external data
"""
from typing import Optional


class FreySieveError(Exception):
    """Base class for all freysieve errors"""
    exit_code = 1

    def __init__(self, message: str, hint: Optional[str] = None):
        super().__init__(message)
        self.hint = hint


# ---------------------------------------------------------------- invalid input

class InvalidInput(FreySieveError):
    exit_code = 2


class NotASolution(InvalidInput):
    pass


class DegenerateRadical(InvalidInput):
    pass


class NonIntegralReduction(InvalidInput):
    pass


class SingularModel(InvalidInput):
    pass


class FieldTooLarge(InvalidInput):
    pass


class UnhandledCase(InvalidInput):
    pass


class HypothesisViolated(InvalidInput):
    pass


class MissingEigenvalue(InvalidInput):
    pass


class InvariantViolation(InvalidInput):
    pass


class SchemaMismatch(InvalidInput):
    pass


class ParseError(InvalidInput):
    """Malformed input file; line and field point at the offending spot"""

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None,
                 hint: Optional[str] = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message, hint)
        self.line = line
        self.field = field


# ------------------------------------------------------------------- unresolved

class Unresolved(FreySieveError):
    exit_code = 3


class FactorizationIncomplete(Unresolved):
    """Carries the primes found so far and the composite cofactor left over"""

    def __init__(self, n: int, partial: dict, cofactor: int):
        super().__init__(
            f"could not fully factor {n}: composite cofactor {cofactor} left",
            hint="raise FREYSIEVE_FACTOR_RHO_STEPS or FREYSIEVE_FACTOR_MAX_BITS",
        )
        self.n = n
        self.partial = dict(partial)
        self.cofactor = cofactor


class ScanExhausted(Unresolved):
    pass


class BoundNotFound(Unresolved):
    pass


# ------------------------------------------------------- missing external data

class MissingExternalData(FreySieveError):
    exit_code = 4


class NetworkUnavailable(MissingExternalData):
    pass


class IncompleteTable(MissingExternalData):
    pass


class MissingTermImplementation(MissingExternalData):
    pass
