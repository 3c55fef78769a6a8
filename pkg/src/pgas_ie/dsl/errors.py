from __future__ import annotations


class DslError(Exception):
    """A source-level error carrying a 1-based line/column."""

    kind = "error"

    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.msg = msg
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {self.kind}: {msg}")


class ParseError(DslError):
    kind = "syntax error"


class NameResolutionError(DslError):
    kind = "unknown identifier"


class DslTypeError(DslError):
    kind = "type mismatch"


class DuplicateError(DslError):
    kind = "duplicate declaration"


class ValidationError(DslError):
    kind = "invalid program"
