"""Structural diff and patch between model versions.

Matching is id-based: entities with the same id in both versions are the
same entity, so the diff vocabulary never needs similarity heuristics or
move detection. Six change kinds cover the space; deletions carry the full
removed content, which makes every changeset invertible without consulting
the predecessor snapshot, and attribute edits record the old value so stale
application is detected rather than silently misapplied.

Changesets are canonically ordered (all removals before all additions, each
group sorted bytewise) so diff output applies in one pass and serializes
byte-deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import ClassVar, Union

from .errors import ApplyConflictError, FormatError
from .model import ProcessEntity, ProcessModel, Relation
from .rationale import LEVELS, RationaleLink
from .textio import (
    NONE_FIELD,
    encode_field,
    encode_fields,
    is_token,
    significant_lines,
    split_fields_tagged,
)

CHANGESET_HEADER = "remis-changeset 1"

KIND_ADD_ENTITY = "add-entity"
KIND_DEL_ENTITY = "del-entity"
KIND_SET_ATTR = "set-attr"
KIND_DEL_ATTR = "del-attr"
KIND_ADD_REL = "add-rel"
KIND_DEL_REL = "del-rel"

# canonical group order: removals first so one-pass application never
# trips over an occupied id or a dangling endpoint
KIND_ORDER = (
    KIND_DEL_REL,
    KIND_DEL_ATTR,
    KIND_DEL_ENTITY,
    KIND_ADD_ENTITY,
    KIND_SET_ATTR,
    KIND_ADD_REL,
)


class Granularity(str, Enum):
    EDITORIAL = "editorial"
    STRUCTURAL = "structural"


@dataclass(frozen=True)
class AddEntity:
    kind: ClassVar[str] = KIND_ADD_ENTITY
    entity: ProcessEntity

    @property
    def sort_key(self) -> tuple[str, ...]:
        return (self.entity.id,)


@dataclass(frozen=True)
class DelEntity:
    kind: ClassVar[str] = KIND_DEL_ENTITY
    entity: ProcessEntity

    @property
    def sort_key(self) -> tuple[str, ...]:
        return (self.entity.id,)


@dataclass(frozen=True)
class SetAttr:
    kind: ClassVar[str] = KIND_SET_ATTR
    entity_id: str
    key: str
    old: str | None
    new: str

    @property
    def sort_key(self) -> tuple[str, ...]:
        return (self.entity_id, self.key)


@dataclass(frozen=True)
class DelAttr:
    kind: ClassVar[str] = KIND_DEL_ATTR
    entity_id: str
    key: str
    old: str

    @property
    def sort_key(self) -> tuple[str, ...]:
        return (self.entity_id, self.key)


@dataclass(frozen=True)
class AddRel:
    kind: ClassVar[str] = KIND_ADD_REL
    relation: Relation

    @property
    def sort_key(self) -> tuple[str, ...]:
        return self.relation.triple


@dataclass(frozen=True)
class DelRel:
    kind: ClassVar[str] = KIND_DEL_REL
    relation: Relation

    @property
    def sort_key(self) -> tuple[str, ...]:
        return self.relation.triple


Operation = Union[AddEntity, DelEntity, SetAttr, DelAttr, AddRel, DelRel]


@dataclass(frozen=True)
class Change:
    change_id: str
    op: Operation

    @property
    def kind(self) -> str:
        return self.op.kind


@dataclass(frozen=True)
class ChangeSet:
    """An ordered list of changes taking from_version to to_version.

    Construction preserves the given order; use make_changeset to build one
    in canonical order with sequential ids. request_id records the change
    request a changeset was committed under, when there was one.
    """

    from_version: int
    to_version: int
    changes: tuple[Change, ...] = ()
    links: tuple[RationaleLink, ...] = ()
    level_at_commit: int = 0
    request_id: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "changes", tuple(self.changes))
        object.__setattr__(self, "links", tuple(self.links))

    @property
    def change_ids(self) -> tuple[str, ...]:
        return tuple(c.change_id for c in self.changes)


def canonical_order(ops: list[Operation]) -> list[Operation]:
    rank = {kind: i for i, kind in enumerate(KIND_ORDER)}
    return sorted(ops, key=lambda op: (rank[op.kind], op.sort_key))


def make_changeset(
    from_version: int,
    to_version: int,
    ops: list[Operation],
    links: tuple[RationaleLink, ...] = (),
    level_at_commit: int = 0,
    request_id: str | None = None,
) -> ChangeSet:
    """Canonically order ops and assign change ids C-1..C-n."""
    ordered = canonical_order(ops)
    changes = tuple(Change(f"C-{i}", op) for i, op in enumerate(ordered, start=1))
    return ChangeSet(from_version, to_version, changes, links, level_at_commit, request_id)


def diff(a: ProcessModel, b: ProcessModel, from_version: int = 0, to_version: int = 1) -> ChangeSet:
    """Minimal changeset transforming a into b under id-based matching.

    An entity present in both versions with a different entity_type is
    treated as removed and re-added; there is no retype change kind.
    """
    ops: list[Operation] = []
    a_entities = {e.id: e for e in a.entities}
    b_entities = {e.id: e for e in b.entities}
    replaced: set[str] = set()

    for eid, ent in a_entities.items():
        other = b_entities.get(eid)
        if other is None or other.entity_type != ent.entity_type:
            ops.append(DelEntity(ent))
            if other is not None:
                replaced.add(eid)
    for eid, ent in b_entities.items():
        other = a_entities.get(eid)
        if other is None or other.entity_type != ent.entity_type:
            ops.append(AddEntity(ent))
        else:
            old_attrs = dict(other.attributes)
            new_attrs = dict(ent.attributes)
            for key, old in old_attrs.items():
                if key not in new_attrs:
                    ops.append(DelAttr(eid, key, old))
            for key, new in new_attrs.items():
                old = old_attrs.get(key)
                if old != new:
                    ops.append(SetAttr(eid, key, old, new))

    a_rels = set(r.triple for r in a.relations)
    b_rels = set(r.triple for r in b.relations)
    for triple in a_rels - b_rels:
        ops.append(DelRel(Relation(*triple)))
    for triple in b_rels - a_rels:
        ops.append(AddRel(Relation(*triple)))
    # a relation surviving both versions still blocks deletion of a retyped
    # endpoint, so it must be taken down and put back around the swap
    for triple in a_rels & b_rels:
        if replaced & {triple[1], triple[2]}:
            ops.append(DelRel(Relation(*triple)))
            ops.append(AddRel(Relation(*triple)))

    return make_changeset(from_version, to_version, ops)


def apply(model: ProcessModel, changeset: ChangeSet) -> ProcessModel:
    """Apply every change in order; the input model is never mutated.

    Raises ApplyConflictError naming the first inapplicable change: stale
    old value, missing or mismatched entity, occupied id, dangling
    endpoint, deletion of a still-referenced entity.
    """
    entities: dict[str, ProcessEntity] = {e.id: e for e in model.entities}
    relations: dict[tuple[str, str, str], Relation] = {r.triple: r for r in model.relations}

    def conflict(cid: str, message: str) -> ApplyConflictError:
        return ApplyConflictError(cid, message)

    for change in changeset.changes:
        op = change.op
        cid = change.change_id
        if isinstance(op, DelRel):
            if op.relation.triple not in relations:
                raise conflict(cid, f"relation {op.relation.triple} not present")
            del relations[op.relation.triple]
        elif isinstance(op, DelAttr):
            ent = entities.get(op.entity_id)
            if ent is None:
                raise conflict(cid, f"entity {op.entity_id} not present")
            attrs = dict(ent.attributes)
            if op.key not in attrs:
                raise conflict(cid, f"attribute {op.key} not set on {op.entity_id}")
            if attrs[op.key] != op.old:
                raise conflict(
                    cid,
                    f"attribute {op.key} on {op.entity_id} is {attrs[op.key]!r}, expected {op.old!r}",
                )
            del attrs[op.key]
            entities[op.entity_id] = ProcessEntity(ent.id, ent.entity_type, tuple(attrs.items()))
        elif isinstance(op, DelEntity):
            ent = entities.get(op.entity.id)
            if ent is None:
                raise conflict(cid, f"entity {op.entity.id} not present")
            if ent != op.entity:
                raise conflict(cid, f"entity {op.entity.id} does not match recorded content")
            for triple in relations:
                if op.entity.id in (triple[1], triple[2]):
                    raise conflict(cid, f"entity {op.entity.id} still referenced by relation {triple}")
            del entities[op.entity.id]
        elif isinstance(op, AddEntity):
            if op.entity.id in entities:
                raise conflict(cid, f"entity {op.entity.id} already present")
            entities[op.entity.id] = op.entity
        elif isinstance(op, SetAttr):
            ent = entities.get(op.entity_id)
            if ent is None:
                raise conflict(cid, f"entity {op.entity_id} not present")
            attrs = dict(ent.attributes)
            current = attrs.get(op.key)
            if op.old is None and op.key in attrs:
                raise conflict(cid, f"attribute {op.key} on {op.entity_id} already set")
            if op.old is not None and op.key not in attrs:
                raise conflict(cid, f"attribute {op.key} not set on {op.entity_id}")
            if op.old is not None and current != op.old:
                raise conflict(
                    cid, f"attribute {op.key} on {op.entity_id} is {current!r}, expected {op.old!r}"
                )
            attrs[op.key] = op.new
            entities[op.entity_id] = ProcessEntity(ent.id, ent.entity_type, tuple(attrs.items()))
        elif isinstance(op, AddRel):
            if op.relation.triple in relations:
                raise conflict(cid, f"relation {op.relation.triple} already present")
            for endpoint in (op.relation.source, op.relation.target):
                if endpoint not in entities:
                    raise conflict(cid, f"relation endpoint {endpoint} not present")
            relations[op.relation.triple] = op.relation
        else:  # pragma: no cover - closed union
            raise conflict(cid, f"unknown change kind {op!r}")

    return ProcessModel(tuple(entities.values()), tuple(relations.values()))


def invert_op(op: Operation) -> Operation:
    if isinstance(op, AddEntity):
        return DelEntity(op.entity)
    if isinstance(op, DelEntity):
        return AddEntity(op.entity)
    if isinstance(op, AddRel):
        return DelRel(op.relation)
    if isinstance(op, DelRel):
        return AddRel(op.relation)
    if isinstance(op, DelAttr):
        return SetAttr(op.entity_id, op.key, None, op.old)
    if op.old is None:
        return DelAttr(op.entity_id, op.key, op.new)
    return SetAttr(op.entity_id, op.key, op.new, op.old)


def invert(changeset: ChangeSet) -> ChangeSet:
    """The changeset undoing this one, in canonical order with fresh ids.

    Rationale links are not carried over: they belong to the forward
    change ids.
    """
    ops = [invert_op(c.op) for c in changeset.changes]
    return make_changeset(
        changeset.to_version,
        changeset.from_version,
        ops,
        level_at_commit=changeset.level_at_commit,
        request_id=changeset.request_id,
    )


def classify_change(change: Change) -> Granularity:
    """Attribute edits are editorial; entity and relation edits are structural."""
    if change.kind in (KIND_SET_ATTR, KIND_DEL_ATTR):
        return Granularity.EDITORIAL
    return Granularity.STRUCTURAL


def touched_entities(change: Change) -> frozenset[str]:
    """Every entity id named by the change's payload."""
    op = change.op
    if isinstance(op, (AddEntity, DelEntity)):
        return frozenset((op.entity.id,))
    if isinstance(op, (SetAttr, DelAttr)):
        return frozenset((op.entity_id,))
    return frozenset((op.relation.source, op.relation.target))


def _entity_payload(entity: ProcessEntity) -> list[str]:
    payload = [entity.id, entity.entity_type]
    for key, value in entity.attributes:
        payload.append(key)
        payload.append(value)
    return payload


def serialize_changeset(changeset: ChangeSet) -> str:
    lines = [
        CHANGESET_HEADER,
        f"from {changeset.from_version}",
        f"to {changeset.to_version}",
        f"level {changeset.level_at_commit}",
    ]
    if changeset.request_id is not None:
        lines.append(f"request {changeset.request_id}")
    for change in changeset.changes:
        op = change.op
        if isinstance(op, (AddEntity, DelEntity)):
            payload = _entity_payload(op.entity)
        elif isinstance(op, SetAttr):
            # the absent-old marker must stay bare; encode_field would quote it
            old = NONE_FIELD if op.old is None else encode_field(op.old)
            lines.append(
                f"change {change.change_id} {op.kind} "
                f"{op.entity_id} {op.key} {old} {encode_field(op.new)}"
            )
            continue
        elif isinstance(op, DelAttr):
            payload = [op.entity_id, op.key, op.old]
        else:
            payload = list(op.relation.triple)
        lines.append(f"change {change.change_id} {op.kind} {encode_fields(payload)}")
    for link in changeset.links:
        if link.resolution_id is not None:
            lines.append(f"link {link.change_id} resolution {link.resolution_id}")
        else:
            lines.append(f"link {link.change_id} justification {encode_field(link.justification)}")
    return "\n".join(lines) + "\n"


def serialize_link(link: RationaleLink) -> str:
    if link.resolution_id is not None:
        return f"link {link.change_id} resolution {link.resolution_id}\n"
    return f"link {link.change_id} justification {encode_field(link.justification)}\n"


def _parse_entity_payload(fields: list[str], line_no: int) -> ProcessEntity:
    if len(fields) < 2 or len(fields) % 2 != 0:
        raise FormatError("entity payload needs id, type, and key/value pairs", line_no)
    eid, etype = fields[0], fields[1]
    for tok in (eid, etype):
        if not is_token(tok):
            raise FormatError(f"invalid token {tok!r}", line_no)
    attrs: list[tuple[str, str]] = []
    seen: set[str] = set()
    for i in range(2, len(fields), 2):
        key, value = fields[i], fields[i + 1]
        if not is_token(key):
            raise FormatError(f"invalid attribute key {key!r}", line_no)
        if key in seen:
            raise FormatError(f"entity {eid}: duplicate attribute key {key}", line_no)
        seen.add(key)
        attrs.append((key, value))
    return ProcessEntity(eid, etype, tuple(attrs))


def parse_changeset(doc: str) -> ChangeSet:
    """Parse a changeset document; order of changes and links is preserved."""
    lines = significant_lines(doc)
    if not lines:
        raise FormatError(f"missing header line (expected {CHANGESET_HEADER!r})", 1)
    header_no, header = lines[0]
    if header.split() != CHANGESET_HEADER.split():
        raise FormatError(f"missing header line (expected {CHANGESET_HEADER!r})", header_no)

    def take_int(index: int, keyword: str) -> int:
        if index >= len(lines):
            raise FormatError(f"missing '{keyword} <n>' line", lines[-1][0])
        no, line = lines[index]
        parts = line.split()
        if len(parts) != 2 or parts[0] != keyword:
            raise FormatError(f"expected '{keyword} <n>'", no)
        if not parts[1].isdigit():
            raise FormatError(f"{keyword} is not a natural number: {parts[1]!r}", no)
        return int(parts[1])

    from_version = take_int(1, "from")
    to_version = take_int(2, "to")
    level = take_int(3, "level")
    if level not in LEVELS:
        raise FormatError(f"level must be one of {LEVELS}, got {level}", lines[3][0])

    index = 4
    request_id: str | None = None
    if index < len(lines) and lines[index][1].split()[0] == "request":
        no, line = lines[index]
        parts = line.split()
        if len(parts) != 2 or not is_token(parts[1]):
            raise FormatError("expected 'request <id>'", no)
        request_id = parts[1]
        index += 1

    changes: list[Change] = []
    links: list[RationaleLink] = []
    seen_ids: set[str] = set()
    for no, line in lines[index:]:
        tagged = split_fields_tagged(line, no)
        fields = [value for value, _ in tagged]
        keyword = fields[0]
        if keyword == "change":
            if links:
                raise FormatError("change line after link lines", no)
            if len(fields) < 3:
                raise FormatError("expected 'change <id> <kind> <payload...>'", no)
            cid, kind = fields[1], fields[2]
            if not is_token(cid):
                raise FormatError(f"invalid change id {cid!r}", no)
            if cid in seen_ids:
                raise FormatError(f"duplicate change id {cid}", no)
            seen_ids.add(cid)
            payload = fields[3:]
            op: Operation
            if kind in (KIND_ADD_ENTITY, KIND_DEL_ENTITY):
                entity = _parse_entity_payload(payload, no)
                op = AddEntity(entity) if kind == KIND_ADD_ENTITY else DelEntity(entity)
            elif kind == KIND_SET_ATTR:
                if len(payload) != 4:
                    raise FormatError("expected 'set-attr <id> <key> <old> <new>'", no)
                eid, key, old, new = payload
                # a quoted "!none" is the literal string, only the bare form is the marker
                old_quoted = tagged[5][1]
                old_value = None if (old == NONE_FIELD and not old_quoted) else old
                if not is_token(eid) or not is_token(key):
                    raise FormatError("invalid token in set-attr payload", no)
                if old_value == new:
                    raise FormatError(f"set-attr {eid} {key}: old and new are equal", no)
                op = SetAttr(eid, key, old_value, new)
            elif kind == KIND_DEL_ATTR:
                if len(payload) != 3:
                    raise FormatError("expected 'del-attr <id> <key> <old>'", no)
                eid, key, old = payload
                if not is_token(eid) or not is_token(key):
                    raise FormatError("invalid token in del-attr payload", no)
                op = DelAttr(eid, key, old)
            elif kind in (KIND_ADD_REL, KIND_DEL_REL):
                if len(payload) != 3:
                    raise FormatError(f"expected '{kind} <type> <source> <target>'", no)
                for tok in payload:
                    if not is_token(tok):
                        raise FormatError(f"invalid token {tok!r}", no)
                rel = Relation(*payload)
                op = AddRel(rel) if kind == KIND_ADD_REL else DelRel(rel)
            else:
                raise FormatError(f"unknown change kind {kind!r}", no)
            changes.append(Change(cid, op))
        elif keyword == "link":
            if len(fields) != 4:
                raise FormatError("expected 'link <change-id> resolution|justification <target>'", no)
            _, cid, form, target = fields
            if not is_token(cid):
                raise FormatError(f"invalid change id {cid!r}", no)
            if form == "resolution":
                if not is_token(target):
                    raise FormatError(f"invalid resolution id {target!r}", no)
                links.append(RationaleLink(cid, resolution_id=target))
            elif form == "justification":
                links.append(RationaleLink(cid, justification=target))
            else:
                raise FormatError(f"unknown link form {form!r}", no)
        else:
            raise FormatError(f"unexpected line (unknown keyword {keyword!r})", no)

    return ChangeSet(from_version, to_version, tuple(changes), tuple(links), level, request_id)
