"""Exception types shared across the package.

Everything raised on purpose derives from KatzError so callers (and the CLI
exit-code mapping) can tell domain failures apart from genuine bugs.
"""
from __future__ import annotations


class KatzError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(KatzError):
    """Malformed input text. Carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class NodeRangeError(KatzError):
    """A node id is negative, too large, or outside the graph's universe."""


class BatchPreconditionError(KatzError):
    """An edge batch violates its preconditions (names the offending arc)."""


class ParameterError(KatzError):
    """A numeric or structural parameter is outside its valid domain."""


class StateError(KatzError):
    """An operation was applied to a state that cannot accept it."""


class ConvergenceError(KatzError):
    """An iteration cap was exhausted before the stopping rule held.

    `partial` carries the last iterate when the method has one to offer,
    `iterations` the number of rounds performed and `gap` the widest
    remaining bound interval (when meaningful).
    """

    def __init__(self, message: str, *, partial=None, iterations: int | None = None,
                 gap: float | None = None):
        super().__init__(message)
        self.partial = partial
        self.iterations = iterations
        self.gap = gap


class MethodNotApplicableError(KatzError):
    """The requested method does not support this input (e.g. asymmetric graph)."""


class NumericError(KatzError):
    """A numeric routine failed (singular system, non-finite values)."""
