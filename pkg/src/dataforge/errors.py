"""Error types shared across the toolkit.

ValidationError maps to CLI exit code 1, I/O problems (OSError) to exit
code 2. ParseError carries the offending line number.
"""


class ValidationError(ValueError):
    """Input violates a documented precondition or invariant."""


class ParseError(ValidationError):
    """A text artifact failed to parse.

    Attributes:
        path: file the error occurred in (may be "<stream>").
        line: 1-based line number of the offending line.
    """

    def __init__(self, message: str, path: str = "<stream>", line: int = 0):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line
