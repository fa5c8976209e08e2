"""Process-model metamodel and its canonical text format.

A process model is a flat collection of typed entities, each carrying an
attribute map, plus typed relations between entities. The vocabulary of
entity and relation types is deliberately open so that models written in
different notations can be represented without adapting the metamodel.

Canonical serialization is byte-deterministic: entities are sorted bytewise
by id, attribute keys bytewise per entity, and relations by their
(type, source, target) triple, so a model's serialized form is a pure
function of its content, independent of construction order. Models are
immutable values; construction normalizes ordering, making structural
equality plain ``==``.
"""

from __future__ import annotations

import re
from collections.abc import Mapping
from dataclasses import dataclass, field

from .errors import Diagnostic, FormatError, error
from .textio import (
    decode_value,
    encode_value,
    is_token,
    read_file,
    significant_lines,
    split_fields,
)

MODEL_HEADER = "remis-model 1"

# display names are ordinary attributes under this key, not a field
NAME_ATTRIBUTE = "name"

_ATTR_LINE_RE = re.compile(r"([A-Za-z0-9_.-]+) = (.*)\Z")


@dataclass(frozen=True)
class ProcessEntity:
    """One typed element of a process model (activity, artifact, role, ...)."""

    id: str
    entity_type: str
    attributes: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        attrs = self.attributes
        if isinstance(attrs, Mapping):
            attrs = tuple(attrs.items())
        object.__setattr__(self, "attributes", tuple(sorted(attrs)))

    def get(self, key: str, default: str | None = None) -> str | None:
        for k, v in self.attributes:
            if k == key:
                return v
        return default

    @property
    def name(self) -> str | None:
        return self.get(NAME_ATTRIBUTE)


@dataclass(frozen=True)
class Relation:
    """A typed, directed link between two entities of the same model."""

    relation_type: str
    source: str
    target: str

    @property
    def triple(self) -> tuple[str, str, str]:
        return (self.relation_type, self.source, self.target)


@dataclass(frozen=True)
class ProcessModel:
    """An immutable version snapshot: entities plus relations.

    Construction accepts entities and relations in any order and normalizes
    them into canonical order. It does not reject invalid content (see
    :func:`validate_model`); the parser and the repository do.
    """

    entities: tuple[ProcessEntity, ...] = field(default=())
    relations: tuple[Relation, ...] = field(default=())

    def __post_init__(self) -> None:
        ents = tuple(sorted(self.entities, key=lambda e: (e.id, e.entity_type, e.attributes)))
        rels = tuple(sorted(self.relations, key=lambda r: r.triple))
        object.__setattr__(self, "entities", ents)
        object.__setattr__(self, "relations", rels)

    def entity(self, entity_id: str) -> ProcessEntity | None:
        for ent in self.entities:
            if ent.id == entity_id:
                return ent
        return None

    @property
    def entity_ids(self) -> frozenset[str]:
        return frozenset(e.id for e in self.entities)


EMPTY_MODEL = ProcessModel()


def validate_model(model: ProcessModel) -> list[Diagnostic]:
    """Check every model invariant; an empty list means the model is valid.

    Reported invariants: token syntax of ids, types, and attribute keys;
    entity-id uniqueness; attribute-key uniqueness per entity; relation
    endpoint resolution; relation-triple uniqueness.
    """
    diags: list[Diagnostic] = []
    seen_ids: set[str] = set()
    for ent in model.entities:
        if not is_token(ent.id):
            diags.append(error("bad-token", f"invalid entity id {ent.id!r}"))
        if not is_token(ent.entity_type):
            diags.append(error("bad-token", f"entity {ent.id}: invalid entity type {ent.entity_type!r}"))
        if ent.id in seen_ids:
            diags.append(error("duplicate-entity-id", f"duplicate entity id {ent.id}"))
        seen_ids.add(ent.id)
        seen_keys: set[str] = set()
        for key, _ in ent.attributes:
            if not is_token(key):
                diags.append(error("bad-token", f"entity {ent.id}: invalid attribute key {key!r}"))
            if key in seen_keys:
                diags.append(error("duplicate-attribute-key", f"entity {ent.id}: duplicate attribute key {key}"))
            seen_keys.add(key)
    seen_triples: set[tuple[str, str, str]] = set()
    for rel in model.relations:
        triple = f"({rel.relation_type}, {rel.source}, {rel.target})"
        if not is_token(rel.relation_type):
            diags.append(error("bad-token", f"relation {triple}: invalid relation type"))
        for endpoint in (rel.source, rel.target):
            if endpoint not in seen_ids:
                diags.append(error("dangling-endpoint", f"relation {triple}: endpoint {endpoint} does not resolve"))
        if rel.triple in seen_triples:
            diags.append(error("duplicate-relation", f"duplicate relation {triple}"))
        seen_triples.add(rel.triple)
    return diags


def serialize_model(model: ProcessModel) -> str:
    """Emit the canonical document for a model satisfying its invariants."""
    lines = [MODEL_HEADER]
    for ent in model.entities:
        lines.append(f"entity {ent.id} {ent.entity_type}")
        for key, value in ent.attributes:
            lines.append(f"  {key} = {encode_value(value)}")
    for rel in model.relations:
        lines.append(f"relation {rel.relation_type} {rel.source} {rel.target}")
    return "\n".join(lines) + "\n"


def parse_model(doc: str) -> ProcessModel:
    """Parse a canonical model document.

    Input is accepted in any record order with comments and blank lines;
    re-serializing the result yields the canonical form (normalization is
    idempotent). Raises :class:`FormatError` with line/column positions on
    syntax problems, duplicate entity ids, duplicate attribute keys,
    duplicate relations, and dangling relation endpoints.
    """
    lines = significant_lines(doc)
    if not lines:
        raise FormatError("missing header line (expected 'remis-model 1')", 1)

    header_no, header = lines[0]
    fields = header.split()
    if not fields or fields[0] != "remis-model":
        raise FormatError("missing header line (expected 'remis-model 1')", header_no)
    if fields[1:] != ["1"]:
        raise FormatError(f"unknown header version {' '.join(fields[1:])!r}", header_no)

    entity_order: list[str] = []
    entity_types: dict[str, str] = {}
    entity_attrs: dict[str, list[tuple[str, str]]] = {}
    relations: list[tuple[int, Relation]] = []
    seen_triples: set[tuple[str, str, str]] = set()
    current: str | None = None

    for no, line in lines[1:]:
        if line[0] in " \t":
            if current is None:
                raise FormatError("attribute line outside an entity block", no)
            stripped = line.lstrip()
            match = _ATTR_LINE_RE.fullmatch(stripped)
            if match is None:
                raise FormatError("malformed attribute line (expected 'key = value')", no)
            key, raw = match.groups()
            col = len(line) - len(stripped) + match.start(2) + 1
            value = decode_value(raw, no, col)
            if any(k == key for k, _ in entity_attrs[current]):
                raise FormatError(f"entity {current}: duplicate attribute key {key}", no)
            entity_attrs[current].append((key, value))
            continue

        fields = split_fields(line, no)
        keyword = fields[0]
        if keyword == "entity":
            if len(fields) != 3:
                raise FormatError("expected 'entity <id> <entity_type>'", no)
            _, ent_id, ent_type = fields
            for tok in (ent_id, ent_type):
                if not is_token(tok):
                    raise FormatError(f"invalid token {tok!r}", no)
            if ent_id in entity_types:
                raise FormatError(f"duplicate entity id {ent_id}", no)
            entity_order.append(ent_id)
            entity_types[ent_id] = ent_type
            entity_attrs[ent_id] = []
            current = ent_id
        elif keyword == "relation":
            if len(fields) != 4:
                raise FormatError("expected 'relation <type> <source> <target>'", no)
            _, rel_type, source, target = fields
            for tok in (rel_type, source, target):
                if not is_token(tok):
                    raise FormatError(f"invalid token {tok!r}", no)
            rel = Relation(rel_type, source, target)
            if rel.triple in seen_triples:
                raise FormatError(f"duplicate relation ({rel_type}, {source}, {target})", no)
            seen_triples.add(rel.triple)
            relations.append((no, rel))
        else:
            raise FormatError(f"unexpected line (unknown keyword {keyword!r})", no)

    for no, rel in relations:
        for endpoint in (rel.source, rel.target):
            if endpoint not in entity_types:
                raise FormatError(
                    f"dangling relation endpoint {endpoint} in "
                    f"({rel.relation_type}, {rel.source}, {rel.target})",
                    no,
                )

    entities = tuple(
        ProcessEntity(eid, entity_types[eid], tuple(entity_attrs[eid])) for eid in entity_order
    )
    return ProcessModel(entities, tuple(rel for _, rel in relations))


def load_model(path) -> ProcessModel:
    """Parse a model document from a file."""
    return parse_model(read_file(path))
