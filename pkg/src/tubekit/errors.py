"""Exception types shared across the package.

Domain validation failures raise ValidationError (CLI exit code 1).
Unreadable or malformed input files raise FormatError (CLI exit code 2),
which carries an optional line number for JSONL diagnostics.
"""
from __future__ import annotations


class ValidationError(ValueError):
    """A value violates a documented domain invariant."""


class NonSmoothError(ValidationError):
    """Gradient requested at a configuration where the loss is not differentiable."""


class FormatError(ValueError):
    """An input file is malformed."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = path if line is None else f"{path}:{line}"
            prefix += ": "
        super().__init__(prefix + message)
