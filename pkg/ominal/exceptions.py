# exceptions.py - Error hierarchy
"""
Exceptions raised by the ominal library.

Responsibilities:
- One root class (OminalError) for every library failure
- Distinguish input errors, failed preconditions, budget exhaustion
- Map exceptions to CLI exit codes
"""


class OminalError(Exception):
    """Base class for all library errors."""


class ConfigError(OminalError):
    """Invalid session configuration (unknown mode, non-positive budget)."""


class ModeViolation(OminalError):
    """A term or atom lies outside the active structure mode."""


class UnboundVariable(OminalError):
    """An evaluation point does not bind every free variable."""

    def __init__(self, names):
        self.names = tuple(sorted(names))
        super().__init__(f"unbound variable(s): {', '.join(self.names)}")


class ArityMismatch(OminalError):
    """Object or index arities disagree."""


class SchemaError(OminalError):
    """An input fails a structural schema check."""


class PreconditionError(OminalError):
    """
    A checked precondition of an operation failed.

    Args:
        message: what failed
        witness: optional witnessing data (index tuples, points)
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class CertificationError(OminalError):
    """A constructed object failed its own certification."""


class BudgetExhausted(OminalError):
    """A search budget ran out before the operation could decide."""

    def __init__(self, kind, limit):
        self.kind = kind
        self.limit = limit
        super().__init__(f"budget '{kind}' exhausted (limit {limit})")


class Cancelled(BudgetExhausted):
    """The cooperative cancellation token was set."""

    def __init__(self):
        super().__init__("cancelled", 0)


class ParseError(OminalError):
    """Syntax error in a document, with 1-based position."""

    def __init__(self, message, line=0, column=0):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class ResolutionError(OminalError):
    """Unknown or duplicate identifier in a document."""


# ===================== EXIT CODES =====================

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3


def exit_code_for(exc):
    """
    Exit code for an exception raised while running a command.

    Args:
        exc: the exception

    Returns:
        int: 3 for budget exhaustion, 2 for every other library error
    """
    if isinstance(exc, BudgetExhausted):
        return EXIT_BUDGET
    return EXIT_INPUT
