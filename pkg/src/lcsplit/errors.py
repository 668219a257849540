"""Exception types shared across the package."""


class LcsplitError(Exception):
    pass


class UnknownGenerator(LcsplitError):
    pass


class BudgetExceeded(LcsplitError):
    """A rewrite-step or closure-pass budget ran out.  On consistent input
    this never fires; it guards against inconsistent user presentations."""


class InvalidPresentation(LcsplitError):
    pass


class Inconsistent(LcsplitError):
    """An assembled presentation failed its overlap (consistency) check."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = tuple(violations)


class NotNormal(LcsplitError):
    pass


class NotAbelianQuotient(LcsplitError):
    pass


class AmbiguousIsolator(LcsplitError):
    """Raised when a torsion-free radical over a non-nilpotent quotient has
    a generator with no power certificate within the configured bound."""

    def __init__(self, message, uncertified=()):
        super().__init__(message)
        self.uncertified = tuple(uncertified)


class NotAutomorphism(LcsplitError):
    pass


class NotAction(LcsplitError):
    pass


class NotNSeries(LcsplitError):
    pass


class NotPTorsionSeries(LcsplitError):
    pass


class NotFiltered(LcsplitError):
    pass


class PeelFailure(LcsplitError):
    """A residual's lowest homogeneous term failed to expand integrally in
    the Hall basis.  Indicates an implementation bug, not a data condition."""


class DocumentError(LcsplitError):
    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column

    def __str__(self):
        base = super().__str__()
        if self.line is not None:
            return f"line {self.line}, column {self.column}: {base}"
        return base


class ParseError(DocumentError):
    pass


class UnknownName(DocumentError):
    pass


class DuplicateName(DocumentError):
    pass
