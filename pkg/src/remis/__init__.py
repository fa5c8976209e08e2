"""Versioned process models with structured change rationale.

The library stores process models as an append-only chain of snapshots plus
structural changesets, and binds every change to its recorded reasoning:
events trigger issues, alternatives answer them, weighted criteria assess
the alternatives, and resolutions decide them. How much of that structure a
commit must provide is set by the repository's deployment level (0 to 3),
so rationale capture can be introduced incrementally.

Typical entry points: :class:`Repository` for storage and commits,
:func:`diff`/:func:`apply` for pure model comparison, the ``analysis``
module for queries and reports, and the ``remis`` console script for the
whole workflow.
"""

from .analysis import (
    ConflictReport,
    IssueHit,
    RationaleChain,
    ResolutionHit,
    TraceRow,
    conflicts,
    entity_history,
    export_dot,
    open_issues,
    trace_report,
)
from .assessment import ScoredAlternative, rank_alternatives, score_alternative
from .delta import (
    AddEntity,
    AddRel,
    Change,
    ChangeSet,
    DelAttr,
    DelEntity,
    DelRel,
    Granularity,
    SetAttr,
    apply,
    classify_change,
    diff,
    invert,
    make_changeset,
    parse_changeset,
    serialize_changeset,
)
from .errors import (
    ApplyConflictError,
    Diagnostic,
    FormatError,
    IntegrityError,
    LockHeldError,
    NotFoundError,
    RemisError,
    ValidationError,
)
from .model import (
    ProcessEntity,
    ProcessModel,
    Relation,
    load_model,
    parse_model,
    serialize_model,
    validate_model,
)
from .rationale import (
    Alternative,
    Assessment,
    ChangeRequest,
    Criterion,
    Event,
    Issue,
    RationaleLink,
    RecordStore,
    Requirement,
    Resolution,
    required_elements,
    validate_changeset_rationale,
    validate_record,
)
from .repository import Repository

__version__ = "0.1.0"

__all__ = [
    "AddEntity",
    "AddRel",
    "Alternative",
    "ApplyConflictError",
    "Assessment",
    "Change",
    "ChangeRequest",
    "ChangeSet",
    "ConflictReport",
    "Criterion",
    "DelAttr",
    "DelEntity",
    "DelRel",
    "Diagnostic",
    "Event",
    "FormatError",
    "Granularity",
    "IntegrityError",
    "Issue",
    "IssueHit",
    "LockHeldError",
    "NotFoundError",
    "ProcessEntity",
    "ProcessModel",
    "RationaleChain",
    "RationaleLink",
    "RecordStore",
    "Relation",
    "RemisError",
    "Repository",
    "Requirement",
    "Resolution",
    "ResolutionHit",
    "ScoredAlternative",
    "SetAttr",
    "TraceRow",
    "ValidationError",
    "apply",
    "classify_change",
    "conflicts",
    "diff",
    "entity_history",
    "export_dot",
    "invert",
    "load_model",
    "make_changeset",
    "open_issues",
    "parse_changeset",
    "parse_model",
    "rank_alternatives",
    "required_elements",
    "score_alternative",
    "serialize_changeset",
    "serialize_model",
    "trace_report",
    "validate_changeset_rationale",
    "validate_model",
    "validate_record",
]
