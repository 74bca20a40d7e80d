"""Shared exception type carrying a machine-readable error code."""

from __future__ import annotations


class JitscopeError(Exception):
    """Pipeline failure with a stable code (E_MALFORMED_JSON, E_IO, ...).

    The code is part of the tool's contract: the CLI prints it, the HTTP
    layer maps it to a status, and tests match on it.
    """

    def __init__(self, code: str, message: str, path: str | None = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.path = path

    def __str__(self) -> str:
        base = super().__str__()
        if self.path:
            return f"{self.code} at {self.path}: {base}"
        return f"{self.code}: {base}"
