"""Exception types shared across the package."""

from __future__ import annotations


class FdConfigError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(FdConfigError):
    """Model text violates the grammar or its static rules."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.message = message
        self.line = line
        self.col = col


class TranslateError(FdConfigError):
    """Model cannot be compiled to a constraint store."""


class EmptyDomainError(FdConfigError):
    """A variable was created with, or restricted to, no values."""


class UnknownVarError(FdConfigError):
    """A constraint or query refers to a variable the solver does not own."""


class DeadMarkError(FdConfigError):
    """reset_to() was given a mark invalidated by an earlier reset."""


class ResourceLimitError(FdConfigError):
    """Search exceeded its node budget."""

    def __init__(self, nodes: int):
        super().__init__(f"search node budget exceeded ({nodes} nodes)")
        self.nodes = nodes


class SearchCancelled(FdConfigError):
    """A cancellation token was set while a search was running."""


class InfeasibleModelError(FdConfigError):
    """The model admits no product at all."""


class UnknownDecisionError(FdConfigError):
    """Retraction of a decision id that is not in the session's list."""


# Machine-readable rejection reasons for session decisions (stable strings:
# they surface verbatim in API error codes).
VARIABLE_PENDING = "variable_pending"
EMPTY_INTERSECTION = "empty_intersection"
UNKNOWN_VARIABLE = "unknown_variable"


class DecisionRejected(FdConfigError):
    """A decision failed its admissibility check and was not posted."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason
        self.detail = detail
