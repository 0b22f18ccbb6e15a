"""Exception types raised by the engine."""


class JacobiError(Exception):
    pass


class NotRepresentable(JacobiError):
    """A result would leave the coefficient ring (e.g. u^(1/2) of a sum)."""


class ParseError(JacobiError, SyntaxError):
    def __init__(self, msg, line=1, column=1, text=None):
        SyntaxError.__init__(self, f"{msg} (line {line}, column {column})")
        self.msg = msg
        self.lineno = line
        self.offset = column
        self.text = text

    def __str__(self):
        return f"{self.msg} (line {self.lineno}, column {self.offset})"


class UnknownVariable(ParseError):
    pass


class SubstitutionError(JacobiError):
    pass


class TruncationOverflow(JacobiError):
    pass


class NotExact(JacobiError):
    pass


class NotClosed(JacobiError):
    pass


class PoleAtOrigin(JacobiError):
    pass


class NotSkewAdjoint(JacobiError):
    pass


class UnsupportedTailShape(JacobiError):
    pass


class SingularJacobian(JacobiError):
    pass


class NonInvertibleRho(JacobiError):
    pass


class NotHydrodynamic(JacobiError):
    pass


class DegenerateMetric(JacobiError):
    pass


class NotConserved(JacobiError):
    pass


class NonConstantCharge(JacobiError):
    pass


class NotSemisimple(JacobiError):
    pass


class MissingCoordinates(JacobiError):
    pass


class NonLocalInput(JacobiError):
    pass


class WDVVViolation(JacobiError):
    pass


class NotQuasiHomogeneous(JacobiError):
    pass


class RecursionNotQuasiLocal(JacobiError):
    pass
