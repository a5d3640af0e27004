"""Exception hierarchy shared by every module.

Each error carries a short machine-readable ``code`` so the CLI can report
failures in JSON mode without string matching.
"""

from __future__ import annotations


class CtxLogicError(Exception):
    code = "error"


class LogicError(CtxLogicError):
    """An operator was used outside the logic selected for the formula."""

    code = "logic_error"


class LogicMismatch(CtxLogicError):
    code = "logic_mismatch"


class NNFError(CtxLogicError):
    """A negation sits where the monotonic grammar forbids it."""

    code = "nnf_error"


class NonMonotonicHole(NNFError):
    code = "non_monotonic_hole"


class UnboundContextVariable(CtxLogicError):
    code = "unbound_context_variable"


class UnboundVariable(CtxLogicError):
    code = "unbound_variable"


class NotBound(CtxLogicError):
    code = "not_bound"


class BlowupLimit(CtxLogicError):
    """A construction exceeded its configured node budget."""

    code = "blowup_limit"

    def __init__(self, message: str, size: int | None = None, limit: int | None = None):
        super().__init__(message)
        self.size = size
        self.limit = limit


class ResourceLimit(CtxLogicError):
    """A decision procedure exceeded its state or conflict budget."""

    code = "resource_limit"


class TimeBudget(ResourceLimit):
    code = "time_budget"


class ModelFormatError(CtxLogicError):
    code = "model_format_error"

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class ExternalToolError(CtxLogicError):
    code = "external_tool_error"

    def __init__(self, message: str, output: str = ""):
        super().__init__(message)
        self.output = output


class ExternalTimeout(ExternalToolError):
    code = "timeout"


class UnsupportedOperator(CtxLogicError):
    code = "unsupported_operator"


class ParseError(CtxLogicError):
    """Malformed concrete syntax; carries the offending span and expected tokens."""

    code = "syntax_error"

    def __init__(self, message: str, span=None, expected: frozenset[str] = frozenset()):
        where = f" at line {span.line}, column {span.column}" if span is not None else ""
        exp = f" (expected {', '.join(sorted(expected))})" if expected else ""
        super().__init__(f"{message}{where}{exp}")
        self.span = span
        self.expected = frozenset(expected)
