"""Rationale records, the append-only journal, and level-dependent schemas.

The record vocabulary: an Event triggers an Issue; Alternatives answer the
issue's question; Assessments judge alternatives, optionally against weighted
Criteria; a Resolution decides the issue and is what changesets link to.
ChangeRequests track proposed work and whether rationale is elicited
synchronously or asynchronously.

Persistence is a journal of `record` blocks and `transition` lines. Records
are immutable once written; every status change is an appended transition,
so replay order defines current state and history is never rewritten.

Deployment levels 0..3 control how much of the vocabulary a changeset link
must provide. The rule sets are cumulative, which makes validation monotone:
a changeset clean at level k is clean at every level below k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from datetime import datetime
from enum import Enum

from .errors import (
    Diagnostic,
    FormatError,
    IntegrityError,
    NotFoundError,
    error,
    warning,
)
from .textio import (
    encode_value,
    decode_value,
    is_token,
    significant_lines,
    split_fields,
)

JOURNAL_HEADER = "remis-rationale 1"

LEVELS = (0, 1, 2, 3)

KIND_EVENT = "event"
KIND_ISSUE = "issue"
KIND_ALTERNATIVE = "alternative"
KIND_CRITERION = "criterion"
KIND_ASSESSMENT = "assessment"
KIND_RESOLUTION = "resolution"
KIND_REQUEST = "request"

ID_PREFIXES = {
    KIND_EVENT: "EV",
    KIND_ISSUE: "IS",
    KIND_ALTERNATIVE: "AL",
    KIND_CRITERION: "CR",
    KIND_ASSESSMENT: "AS",
    KIND_RESOLUTION: "RS",
    KIND_REQUEST: "REQ",
}

EVENT_TYPES = ("internal", "external")
ISSUE_TYPES = ("imprecision", "verbosity", "inaccuracy", "non_compliance", "inconsistency", "other")
ELICITATION_MODES = ("synchronous", "asynchronous")

STATUS_OPEN = "open"
STATUS_CLOSED = "closed"
REQUEST_STATUSES = ("open", "accepted", "rejected", "done")

# priority scale for change requests, 5 = highest
PRIORITY_RANGE = (1, 5)


def check_level(level: int) -> int:
    if level not in LEVELS:
        raise ValueError(f"deployment level must be one of {LEVELS}, got {level!r}")
    return level


class Requirement(str, Enum):
    """How strongly a deployment level asks for one rationale element."""

    REQUIRED = "required"
    OPTIONAL = "optional"
    NOT_COLLECTED = "not-collected"


def required_elements(level: int) -> dict[str, Requirement]:
    """Schema table for one deployment level.

    Keys: justification, issue, resolution, event, alternatives, criteria,
    assessments. Level 0 collects a justification only; level 1 adds
    mandatory issues and resolutions; level 2 adds mandatory triggering
    events with alternatives and bare-verdict assessments optional; level 3
    makes criteria and criterion-based assessments available, still optional.
    """
    check_level(level)
    table = {
        "justification": Requirement.REQUIRED,
        "issue": Requirement.NOT_COLLECTED,
        "resolution": Requirement.NOT_COLLECTED,
        "event": Requirement.NOT_COLLECTED,
        "alternatives": Requirement.NOT_COLLECTED,
        "criteria": Requirement.NOT_COLLECTED,
        "assessments": Requirement.NOT_COLLECTED,
    }
    if level >= 1:
        table["issue"] = Requirement.REQUIRED
        table["resolution"] = Requirement.REQUIRED
    if level >= 2:
        table["event"] = Requirement.REQUIRED
        table["alternatives"] = Requirement.OPTIONAL
        table["assessments"] = Requirement.OPTIONAL
    if level >= 3:
        table["criteria"] = Requirement.OPTIONAL
    return table


def _as_id_tuple(value) -> tuple[str, ...]:
    if isinstance(value, str):
        value = value.split()
    return tuple(value)


@dataclass(frozen=True)
class Event:
    """A trigger of issues: something happened inside or outside the project."""

    id: str
    name: str = ""
    short_description: str = ""
    event_type: str = "internal"
    occurred_at: str = ""


@dataclass(frozen=True)
class Issue:
    """A situation needing resolution, ideally phrased as a question."""

    id: str
    question: str = ""
    triggered_by: str | None = None
    issue_type: str = "other"
    type_label: str = ""
    detailed_discussion: str = ""
    affected_entities: tuple[str, ...] = ()
    status: str = STATUS_OPEN

    def __post_init__(self) -> None:
        object.__setattr__(self, "affected_entities", _as_id_tuple(self.affected_entities))


@dataclass(frozen=True)
class Alternative:
    """One candidate way to resolve an issue."""

    id: str
    issue_id: str
    subject: str = ""
    description: str = ""


@dataclass(frozen=True)
class Criterion:
    """A weighted influencing factor used to assess alternatives."""

    id: str
    name: str = ""
    description: str = ""
    weight: float = 1.0
    gqm_source: str | None = None


@dataclass(frozen=True)
class Assessment:
    """A verdict on an alternative, in [-1, +1], optionally per criterion.

    criterion_id None is the bare level-2 form: a plain positive/negative
    judgement not tied to any criterion.
    """

    id: str
    alternative_id: str
    criterion_id: str | None = None
    verdict: float = 0.0
    note: str = ""


@dataclass(frozen=True)
class Resolution:
    """The decision that enacts changes; the target of rationale links."""

    id: str
    issue_id: str
    chosen_alternative_id: str | None = None
    short_description: str = ""
    long_description: str = ""
    justification: str = ""
    opens_issues: tuple[str, ...] = ()
    status: str = STATUS_OPEN

    def __post_init__(self) -> None:
        object.__setattr__(self, "opens_issues", _as_id_tuple(self.opens_issues))


@dataclass(frozen=True)
class ChangeRequest:
    """A proposed change with priority, scope, and elicitation mode.

    The four mode factors are the free-text notes weighed when choosing
    between synchronous and asynchronous rationale elicitation: relevance of
    the proposal, resources available, infrastructure support, and maturity
    of the affected process part.
    """

    id: str
    description: str = ""
    proposer: str = ""
    priority: int = 3
    scope: tuple[str, ...] = ()
    elicitation_mode: str = "synchronous"
    relevance: str = ""
    resources: str = ""
    infrastructure: str = ""
    maturity: str = ""
    status: str = STATUS_OPEN

    def __post_init__(self) -> None:
        object.__setattr__(self, "scope", _as_id_tuple(self.scope))


RationaleRecord = Event | Issue | Alternative | Criterion | Assessment | Resolution | ChangeRequest

RECORD_KINDS: dict[str, type] = {
    KIND_EVENT: Event,
    KIND_ISSUE: Issue,
    KIND_ALTERNATIVE: Alternative,
    KIND_CRITERION: Criterion,
    KIND_ASSESSMENT: Assessment,
    KIND_RESOLUTION: Resolution,
    KIND_REQUEST: ChangeRequest,
}

_KIND_OF_TYPE = {cls: kind for kind, cls in RECORD_KINDS.items()}

# fields that live in transitions, never in record blocks
_TRANSITION_FIELDS = {"status", "opens_issues"}

_LIST_FIELDS = {"affected_entities", "scope", "opens_issues"}
_FLOAT_FIELDS = {"weight", "verdict"}
_INT_FIELDS = {"priority"}


def kind_of(record: RationaleRecord) -> str:
    return _KIND_OF_TYPE[type(record)]


@dataclass(frozen=True)
class RationaleLink:
    """Binds one changeset change to its rationale.

    Exactly one target form: a resolution id, or (level-0 style) a bare
    justification text.
    """

    change_id: str
    resolution_id: str | None = None
    justification: str | None = None

    def __post_init__(self) -> None:
        if (self.resolution_id is None) == (self.justification is None):
            raise ValueError("rationale link needs exactly one of resolution_id, justification")


@dataclass(frozen=True)
class Transition:
    """One appended status change: `transition <kind> <id> <action> [arg] <ts>`."""

    kind: str
    record_id: str
    action: str
    arg: str | None
    timestamp: str


JournalEntry = RationaleRecord | Transition

# action -> (applicable kinds, takes an argument)
_TRANSITION_ACTIONS = {
    "closed": ((KIND_ISSUE, KIND_RESOLUTION), False),
    "accepted": ((KIND_REQUEST,), False),
    "rejected": ((KIND_REQUEST,), False),
    "done": ((KIND_REQUEST,), False),
    "priority": ((KIND_REQUEST,), True),
    "mode": ((KIND_REQUEST,), True),
    "opens": ((KIND_RESOLUTION,), True),
}


class RecordStore:
    """Replayed journal state: every record by kind, in insertion order.

    Mutating methods exist for replay and for the repository's appends; all
    readers treat the store as a snapshot. Records themselves are immutable,
    so handing out references is safe.
    """

    def __init__(self) -> None:
        self._by_kind: dict[str, dict[str, RationaleRecord]] = {
            kind: {} for kind in RECORD_KINDS
        }

    def add(self, record: RationaleRecord) -> None:
        kind = kind_of(record)
        if record.id in self._by_kind[kind]:
            raise IntegrityError(f"duplicate {kind} id {record.id}")
        self._by_kind[kind][record.id] = record

    def put(self, record: RationaleRecord) -> None:
        self._by_kind[kind_of(record)][record.id] = record

    def get(self, kind: str, record_id: str) -> RationaleRecord | None:
        return self._by_kind[kind].get(record_id)

    def require(self, kind: str, record_id: str) -> RationaleRecord:
        record = self.get(kind, record_id)
        if record is None:
            raise NotFoundError(f"no {kind} {record_id}")
        return record

    def records(self, kind: str) -> tuple[RationaleRecord, ...]:
        return tuple(self._by_kind[kind].values())

    @property
    def events(self) -> tuple[Event, ...]:
        return self.records(KIND_EVENT)

    @property
    def issues(self) -> tuple[Issue, ...]:
        return self.records(KIND_ISSUE)

    @property
    def alternatives(self) -> tuple[Alternative, ...]:
        return self.records(KIND_ALTERNATIVE)

    @property
    def criteria(self) -> tuple[Criterion, ...]:
        return self.records(KIND_CRITERION)

    @property
    def assessments(self) -> tuple[Assessment, ...]:
        return self.records(KIND_ASSESSMENT)

    @property
    def resolutions(self) -> tuple[Resolution, ...]:
        return self.records(KIND_RESOLUTION)

    @property
    def requests(self) -> tuple[ChangeRequest, ...]:
        return self.records(KIND_REQUEST)

    def alternatives_for(self, issue_id: str) -> tuple[Alternative, ...]:
        return tuple(a for a in self.alternatives if a.issue_id == issue_id)

    def assessments_for(self, alternative_id: str) -> tuple[Assessment, ...]:
        return tuple(a for a in self.assessments if a.alternative_id == alternative_id)


def serialize_record(record: RationaleRecord) -> str:
    """One journal block: `record <kind> <id>`, indented fields, `end`.

    Only creation fields appear; status and opens_issues are transition
    state. Fields at their default value are omitted, so blocks are a
    canonical function of content.
    """
    kind = kind_of(record)
    lines = [f"record {kind} {record.id}"]
    for f in fields(record):
        if f.name == "id" or f.name in _TRANSITION_FIELDS:
            continue
        value = getattr(record, f.name)
        if value is None or value == "" or value == ():
            continue
        if f.name in _LIST_FIELDS:
            text = " ".join(value)
        elif f.name in _FLOAT_FIELDS:
            text = format_number(value)
        elif f.name in _INT_FIELDS:
            text = str(value)
        else:
            text = value
        lines.append(f"  {f.name} = {encode_value(text)}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def serialize_transition(t: Transition) -> str:
    parts = ["transition", t.kind, t.record_id, t.action]
    if t.arg is not None:
        parts.append(t.arg)
    parts.append(t.timestamp)
    return " ".join(parts) + "\n"


def format_number(value: float) -> str:
    """Shortest decimal form that round-trips; integers drop the point."""
    if math.isfinite(value) and value == int(value):
        return str(int(value))
    return repr(value)


def _parse_record(kind: str, record_id: str, raw_fields: dict[str, str], line_no: int) -> RationaleRecord:
    cls = RECORD_KINDS[kind]
    known = {f.name for f in fields(cls)} - {"id"} - _TRANSITION_FIELDS
    values: dict[str, object] = {}
    for key, raw in raw_fields.items():
        if key not in known:
            raise FormatError(f"{kind} {record_id}: unknown field {key}", line_no)
        if key in _LIST_FIELDS:
            values[key] = tuple(raw.split())
        elif key in _FLOAT_FIELDS:
            try:
                values[key] = float(raw)
            except ValueError:
                raise FormatError(f"{kind} {record_id}: {key} is not a number: {raw!r}", line_no) from None
        elif key in _INT_FIELDS:
            try:
                values[key] = int(raw)
            except ValueError:
                raise FormatError(f"{kind} {record_id}: {key} is not an integer: {raw!r}", line_no) from None
        else:
            values[key] = raw
    return cls(id=record_id, **values)


def parse_journal(doc: str) -> list[JournalEntry]:
    """Parse a journal document into records and transitions, in file order."""
    lines = significant_lines(doc)
    if not lines:
        raise FormatError(f"missing header line (expected {JOURNAL_HEADER!r})", 1)
    header_no, header = lines[0]
    if header.split() != JOURNAL_HEADER.split():
        raise FormatError(f"missing header line (expected {JOURNAL_HEADER!r})", header_no)

    entries: list[JournalEntry] = []
    i = 1
    while i < len(lines):
        no, line = lines[i]
        if line[0] in " \t":
            raise FormatError("field line outside a record block", no)
        head = split_fields(line, no)
        if head[0] == "record":
            if len(head) != 3:
                raise FormatError("expected 'record <kind> <id>'", no)
            _, kind, record_id = head
            if kind not in RECORD_KINDS:
                raise FormatError(f"unknown record kind {kind!r}", no)
            if not is_token(record_id):
                raise FormatError(f"invalid record id {record_id!r}", no)
            raw_fields: dict[str, str] = {}
            i += 1
            closed = False
            while i < len(lines):
                fno, fline = lines[i]
                if fline == "end":
                    closed = True
                    i += 1
                    break
                if fline[0] not in " \t":
                    break
                stripped = fline.lstrip()
                key, sep, raw = stripped.partition(" = ")
                if not sep or not is_token(key):
                    raise FormatError("malformed field line (expected 'key = value')", fno)
                if key in raw_fields:
                    raise FormatError(f"{kind} {record_id}: duplicate field {key}", fno)
                col = len(fline) - len(stripped) + len(key) + len(sep) + 1
                raw_fields[key] = decode_value(raw, fno, col)
                i += 1
            if not closed:
                raise FormatError(f"record {kind} {record_id} not terminated by 'end'", no)
            entries.append(_parse_record(kind, record_id, raw_fields, no))
        elif head[0] == "transition":
            if len(head) not in (5, 6):
                raise FormatError("expected 'transition <kind> <id> <action> [arg] <timestamp>'", no)
            kind, record_id, action = head[1], head[2], head[3]
            arg = head[4] if len(head) == 6 else None
            timestamp = head[-1]
            if kind not in RECORD_KINDS:
                raise FormatError(f"unknown record kind {kind!r}", no)
            spec = _TRANSITION_ACTIONS.get(action)
            if spec is None:
                raise FormatError(f"unknown transition action {action!r}", no)
            kinds, takes_arg = spec
            if kind not in kinds:
                raise FormatError(f"transition {action} does not apply to {kind}", no)
            if takes_arg != (arg is not None):
                raise FormatError(f"transition {action}: wrong argument count", no)
            entries.append(Transition(kind, record_id, action, arg, timestamp))
            i += 1
        else:
            raise FormatError(f"unexpected line (unknown keyword {head[0]!r})", no)
    return entries


def apply_transition(store: RecordStore, t: Transition) -> None:
    """Apply one transition to the store, enforcing the status machines."""
    record = store.get(t.kind, t.record_id)
    if record is None:
        raise IntegrityError(f"transition references unknown {t.kind} {t.record_id}")
    if t.action == "closed":
        if record.status != STATUS_OPEN:
            raise IntegrityError(f"{t.kind} {t.record_id} already closed")
        store.put(replace(record, status=STATUS_CLOSED))
    elif t.action in ("accepted", "rejected"):
        if record.status != STATUS_OPEN:
            raise IntegrityError(f"request {t.record_id} is {record.status}, cannot be {t.action}")
        store.put(replace(record, status=t.action))
    elif t.action == "done":
        if record.status != "accepted":
            raise IntegrityError(f"request {t.record_id} is {record.status}, cannot be done")
        store.put(replace(record, status="done"))
    elif t.action == "priority":
        if record.status in ("rejected", "done"):
            raise IntegrityError(f"request {t.record_id} is {record.status}, priority is frozen")
        try:
            priority = int(t.arg)
        except ValueError:
            raise IntegrityError(f"request {t.record_id}: bad priority {t.arg!r}") from None
        store.put(replace(record, priority=priority))
    elif t.action == "mode":
        if record.status in ("rejected", "done"):
            raise IntegrityError(f"request {t.record_id} is {record.status}, mode is frozen")
        store.put(replace(record, elicitation_mode=t.arg))
    elif t.action == "opens":
        if store.get(KIND_ISSUE, t.arg) is None:
            raise IntegrityError(f"resolution {t.record_id} opens unknown issue {t.arg}")
        if t.arg in record.opens_issues:
            raise IntegrityError(f"resolution {t.record_id} already opens {t.arg}")
        store.put(replace(record, opens_issues=record.opens_issues + (t.arg,)))
    else:  # unreachable: parse_journal rejects unknown actions
        raise IntegrityError(f"unknown transition action {t.action!r}")


def replay_journal(entries: list[JournalEntry], store: RecordStore | None = None) -> RecordStore:
    """Fold journal entries into a store; raises IntegrityError on misuse."""
    if store is None:
        store = RecordStore()
    for entry in entries:
        if isinstance(entry, Transition):
            apply_transition(store, entry)
        else:
            store.add(entry)
    return store


def _check_timestamp(text: str) -> bool:
    try:
        datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError:
        return False
    return True


def validate_record(record: RationaleRecord, store: RecordStore) -> list[Diagnostic]:
    """Type invariants plus referential constraints against the store.

    The record itself may or may not already be in the store; self-matches
    are skipped by id, so the same function serves pre-insert checks and
    whole-store audits.
    """
    diags: list[Diagnostic] = []
    kind = kind_of(record)
    rid = record.id

    def bad(code: str, message: str) -> None:
        diags.append(error(code, f"{kind} {rid}: {message}"))

    if not is_token(rid):
        bad("bad-token", f"invalid id {rid!r}")
    if isinstance(record, Event):
        if record.event_type not in EVENT_TYPES:
            bad("bad-enum", f"event_type must be one of {', '.join(EVENT_TYPES)}")
        if record.occurred_at and not _check_timestamp(record.occurred_at):
            bad("bad-timestamp", f"occurred_at is not a timestamp: {record.occurred_at!r}")
    elif isinstance(record, Issue):
        if record.issue_type not in ISSUE_TYPES:
            bad("bad-enum", f"issue_type must be one of {', '.join(ISSUE_TYPES)}")
        if record.issue_type == "other" and not record.type_label:
            bad("missing-label", "issue_type other requires a type_label")
        if record.issue_type != "other" and record.type_label:
            bad("stray-label", "type_label is only allowed with issue_type other")
        if record.triggered_by is not None and store.get(KIND_EVENT, record.triggered_by) is None:
            bad("unresolved-reference", f"triggered_by unknown event {record.triggered_by}")
        for eid in record.affected_entities:
            if not is_token(eid):
                bad("bad-token", f"invalid affected entity id {eid!r}")
    elif isinstance(record, Alternative):
        if store.get(KIND_ISSUE, record.issue_id) is None:
            bad("unresolved-reference", f"unknown issue {record.issue_id}")
    elif isinstance(record, Criterion):
        if not (math.isfinite(record.weight) and record.weight > 0):
            bad("out-of-range", f"weight must be > 0, got {format_number(record.weight)}")
    elif isinstance(record, Assessment):
        alt = store.get(KIND_ALTERNATIVE, record.alternative_id)
        if alt is None:
            bad("unresolved-reference", f"unknown alternative {record.alternative_id}")
        if record.criterion_id is not None and store.get(KIND_CRITERION, record.criterion_id) is None:
            bad("unresolved-reference", f"unknown criterion {record.criterion_id}")
        if not (math.isfinite(record.verdict) and -1.0 <= record.verdict <= 1.0):
            bad("out-of-range", "verdict out of [-1,1]")
        for other in store.assessments:
            if (
                other.id != rid
                and other.alternative_id == record.alternative_id
                and other.criterion_id == record.criterion_id
            ):
                pair = record.criterion_id or "bare verdict"
                bad("duplicate-assessment", f"duplicate assessment of {record.alternative_id} ({pair})")
                break
    elif isinstance(record, Resolution):
        issue = store.get(KIND_ISSUE, record.issue_id)
        if issue is None:
            bad("unresolved-reference", f"unknown issue {record.issue_id}")
        if record.chosen_alternative_id is not None:
            alt = store.get(KIND_ALTERNATIVE, record.chosen_alternative_id)
            if alt is None:
                bad("unresolved-reference", f"unknown alternative {record.chosen_alternative_id}")
            elif alt.issue_id != record.issue_id:
                bad(
                    "cross-issue-alternative",
                    f"chosen alternative {alt.id} belongs to {alt.issue_id}, not {record.issue_id}",
                )
        for iid in record.opens_issues:
            if store.get(KIND_ISSUE, iid) is None:
                bad("unresolved-reference", f"opens unknown issue {iid}")
    elif isinstance(record, ChangeRequest):
        lo, hi = PRIORITY_RANGE
        if not lo <= record.priority <= hi:
            bad("out-of-range", f"priority must be in {lo}..{hi}, got {record.priority}")
        if record.elicitation_mode not in ELICITATION_MODES:
            bad("bad-enum", f"elicitation_mode must be one of {', '.join(ELICITATION_MODES)}")
        if record.status not in REQUEST_STATUSES:
            bad("bad-enum", f"status must be one of {', '.join(REQUEST_STATUSES)}")
        for eid in record.scope:
            if not is_token(eid):
                bad("bad-token", f"invalid scope entity id {eid!r}")
    return diags


def validate_store(store: RecordStore) -> list[Diagnostic]:
    """Run validate_record over every record in the store."""
    diags: list[Diagnostic] = []
    for kind in RECORD_KINDS:
        for record in store.records(kind):
            diags.extend(validate_record(record, store))
    return diags


def validate_changeset_rationale(changeset, store: RecordStore, level: int) -> list[Diagnostic]:
    """Check a changeset's rationale links against one level's schema.

    The changeset only needs `.changes` (each with a change_id) and
    `.links`. Requirements accumulate with the level, never replace each
    other, so a clean result at level k implies a clean result at any j < k.
    Warnings (empty affected_entities, issues without alternatives, level 2
    up) never fail validation.
    """
    check_level(level)
    diags: list[Diagnostic] = []
    change_ids = [c.change_id for c in changeset.changes]
    known = set(change_ids)
    linked: dict[str, RationaleLink] = {}
    for link in changeset.links:
        if link.change_id not in known:
            diags.append(error("unknown-change", f"link references unknown change {link.change_id}"))
            continue
        if link.change_id in linked:
            diags.append(error("duplicate-link", f"change {link.change_id} has multiple rationale links"))
            continue
        linked[link.change_id] = link

    for cid in change_ids:
        if cid not in linked:
            diags.append(error("missing-link", f"change {cid} has no rationale link"))

    seen_issue_checks: set[tuple[str, str]] = set()

    def once(code: str, message: str, warn: bool = False) -> None:
        key = (code, message)
        if key in seen_issue_checks:
            return
        seen_issue_checks.add(key)
        diags.append(warning(code, message) if warn else error(code, message))

    for cid in change_ids:
        link = linked.get(cid)
        if link is None:
            continue
        if link.resolution_id is None:
            if level >= 1:
                diags.append(
                    error("bare-justification", f"change {cid}: bare justification not allowed at level {level}")
                )
            elif not link.justification.strip():
                diags.append(error("empty-justification", f"change {cid}: justification is empty"))
            continue

        resolution = store.get(KIND_RESOLUTION, link.resolution_id)
        if resolution is None:
            diags.append(error("unresolved-reference", f"change {cid}: unknown resolution {link.resolution_id}"))
            continue
        if not resolution.justification.strip():
            once("empty-justification", f"resolution {resolution.id} has an empty justification")
        issue = store.get(KIND_ISSUE, resolution.issue_id)
        if issue is None:
            once("unresolved-reference", f"resolution {resolution.id}: unknown issue {resolution.issue_id}")
            continue
        if level >= 1 and not issue.question.strip():
            once("missing-question", f"issue {issue.id} has no question")
        if level >= 2:
            if issue.triggered_by is None or store.get(KIND_EVENT, issue.triggered_by) is None:
                once("missing-event", f"issue {issue.id} lacks event at level {level}")
            if not issue.affected_entities:
                once("no-affected-entities", f"issue {issue.id} has no affected entities", warn=True)
            alternatives = store.alternatives_for(issue.id)
            if not alternatives:
                once("no-alternatives", f"issue {issue.id} has no alternatives", warn=True)
        if level >= 3:
            for alt in store.alternatives_for(issue.id):
                for a in store.assessments_for(alt.id):
                    if a.criterion_id is None:
                        once(
                            "bare-verdict",
                            f"assessment {a.id} on {alt.id}: criterion required at level {level}",
                        )
    return diags
