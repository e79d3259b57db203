"""Exception hierarchy shared by every stage of the pipeline."""


class FlavornetError(Exception):
    """Base class for all errors raised by flavornet."""


class ParseError(FlavornetError):
    """An input file could not be parsed.

    Parameters
    ----------
    message : str
        Human readable description.
    line : int, optional
        1-based line number of the offending record.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class IntegrityError(FlavornetError):
    """Input data violates a structural invariant (duplicates, overlaps)."""


class DomainError(FlavornetError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class ConstraintError(FlavornetError):
    """Must-link and cannot-link constraints contradict each other."""

    def __init__(self, pair):
        self.pair = tuple(pair)
        super().__init__(
            f"cannot-link pair {self.pair[0]!r}-{self.pair[1]!r} lies inside a must-link group"
        )


class UndefinedScoreError(FlavornetError):
    """No recipe had enough scorable ingredients to compute a metric."""
