"""Exception hierarchy.

``ValidationError`` covers malformed or inconsistent inputs (CLI exit code 1),
``NumericalError`` covers solver failures (CLI exit code 2).
"""


class PolybifError(Exception):
    pass


class ValidationError(PolybifError):
    pass


class NumericalError(PolybifError):
    pass


# polydiag
class BadEntry(ValidationError):
    pass


class RankDeficient(ValidationError):
    pass


class RowConflict(ValidationError):
    pass


class NotEchelon(ValidationError):
    pass


class NotPolydiagonal(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class InconsistentAmbient(ValidationError):
    pass


# network
class NotInvariant(ValidationError):
    pass


class InvalidQuotient(ValidationError):
    """Anti-synchrony subspace combined with non-odd internal dynamics."""


class NotInSubspace(ValidationError):
    pass


class NonFinite(NumericalError):
    pass


# symmetry / bifurcation
class NotClosed(ValidationError):
    pass


class UnknownSubspace(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, path=None, line=None, column=None):
        loc = ""
        if path is not None:
            loc += str(path)
        if line is not None:
            loc += f":{line}"
            if column is not None:
                loc += f":{column}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line
        self.column = column


# continuation
class NoConvergence(NumericalError):
    pass


class SingularJacobian(NumericalError):
    pass


class TangentRankDeficient(NumericalError):
    """Augmented Jacobian has a kernel of dimension >= 2."""


class StartInvalid(NumericalError):
    pass


class EigenFailure(NumericalError):
    pass


class NoSignChange(NumericalError):
    pass


class QueueOverflow(NumericalError):
    pass
