from __future__ import annotations

from typing import Optional

from .syntax import Span


class IVLError(Exception):
    """Front-end error carrying an optional source position."""

    kind = "error"

    def __init__(self, message: str, span: Optional[Span] = None):
        self.message = message
        self.span = span
        where = f"{span.line}:{span.column}: " if span else ""
        super().__init__(f"{where}{self.kind}: {message}")


class LexError(IVLError):
    kind = "lexical error"


class ParseError(IVLError):
    kind = "syntax error"


class ResolutionError(IVLError):
    kind = "resolution error"


class TypeCheckError(IVLError):
    kind = "type error"


class SubstitutionError(ValueError):
    pass


class AnalysisError(Exception):
    pass


class SolverError(RuntimeError):
    """The solver could not be run or answered with something unparseable."""
