"""Exception hierarchy and the diagnostic value used by all validators.

Every error raised by the library is a subclass of :class:`RemisError`, and
each concrete class corresponds to exactly one CLI exit code (see
``cli.EXIT_*``). Validators never raise for content problems; they return
lists of :class:`Diagnostic` so callers can render or aggregate them.
"""

from __future__ import annotations

from dataclasses import dataclass

SEVERITY_ERROR = "error"
SEVERITY_WARNING = "warning"

CATEGORY_SCHEMA = "schema"
CATEGORY_INTEGRITY = "integrity"


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding: the violated rule and the offending subject."""

    severity: str
    category: str
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity} {self.code}: {self.message}"


def error(code: str, message: str, category: str = CATEGORY_SCHEMA) -> Diagnostic:
    return Diagnostic(SEVERITY_ERROR, category, code, message)


def warning(code: str, message: str, category: str = CATEGORY_SCHEMA) -> Diagnostic:
    return Diagnostic(SEVERITY_WARNING, category, code, message)


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.severity == SEVERITY_ERROR for d in diagnostics)


class RemisError(Exception):
    """Base class for all library errors."""


class ValidationError(RemisError):
    """Input content or a schema constraint was violated (CLI exit 1)."""

    def __init__(self, message: str, diagnostics: list[Diagnostic] | None = None) -> None:
        super().__init__(message)
        self.diagnostics: list[Diagnostic] = list(diagnostics or [])


class FormatError(ValidationError):
    """A document could not be parsed; reports line and, when known, column."""

    def __init__(self, message: str, line: int = 0, column: int = 0) -> None:
        if line and column:
            message = f"line {line}, column {column}: {message}"
        elif line:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class ApplyConflictError(ValidationError):
    """A change in a changeset is not applicable to the current model state."""

    def __init__(self, change_id: str, message: str) -> None:
        super().__init__(f"change {change_id}: {message}")
        self.change_id = change_id


class NotFoundError(RemisError):
    """A version, record, change id, or repository does not exist (CLI exit 4)."""


class IntegrityError(RemisError):
    """Repository state on disk is inconsistent or corrupt (CLI exit 3)."""


class LockHeldError(IntegrityError):
    """The repository lock could not be acquired within the timeout."""
