"""Exception hierarchy shared by all hyperstat modules."""


class HyperstatError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class DomainError(HyperstatError, ValueError):
    """A point or matrix violates the invariants of its space."""

    exit_code = 3


class PreconditionError(HyperstatError, ValueError):
    """Arguments are well formed but violate an operation's precondition."""

    exit_code = 3


class DegenerateInputError(PreconditionError):
    """Input is degenerate for the requested operation (e.g. duplicate points)."""


class ParseError(HyperstatError, ValueError):
    """Input file could not be parsed."""

    exit_code = 2


class NumericError(HyperstatError, ArithmeticError):
    """A numerical routine failed (non-finite values, failed eigensolve)."""

    exit_code = 4
