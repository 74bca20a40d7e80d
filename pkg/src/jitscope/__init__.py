"""Phase-aware inspector for JIT compiler IR traces.

Pipeline: parse a trace document, validate it, resolve phase
assignment from the access log, persist to SQLite, then query
end-of-phase snapshots, per-phase summaries, and phase diffs through
the library, the CLI, or the HTTP API.
"""

from .errors import JitscopeError
from .ingest import ResolvedDataset, assign_phases, parse_document
from .model import (
    UNASSIGNED,
    UNASSIGNED_NAME,
    IRDocument,
    IRNode,
    ValidationIssue,
    validate_document,
)

__version__ = "0.1.0"

__all__ = [
    "IRDocument",
    "IRNode",
    "JitscopeError",
    "ResolvedDataset",
    "UNASSIGNED",
    "UNASSIGNED_NAME",
    "ValidationIssue",
    "assign_phases",
    "parse_document",
    "validate_document",
    "__version__",
]
