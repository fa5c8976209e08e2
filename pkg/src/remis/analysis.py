"""Read-only queries over a repository: history, conflicts, trace, export.

Every query is a plain scan over the journals and changesets, computed on
demand. Repositories hold process models, not code, so they stay small and
correctness-by-scan beats cache invalidation. All orderings are bytewise on
ids, making each result a pure function of repository content.
"""

from __future__ import annotations

from dataclasses import dataclass

from .assessment import ScoredAlternative, rank_alternatives
from .delta import Change, touched_entities
from .errors import NotFoundError
from .rationale import (
    KIND_EVENT,
    KIND_ISSUE,
    KIND_RESOLUTION,
    STATUS_OPEN,
    Alternative,
    Event,
    Issue,
    RationaleLink,
    RecordStore,
    Resolution,
)
from .repository import Repository


@dataclass(frozen=True)
class RationaleChain:
    """One change expanded to as much rationale as was recorded for it.

    Fields beyond what the commit's level captured stay None; nothing is
    fabricated. alternatives are in rank order, best first.
    """

    change: Change
    version: int
    link: RationaleLink | None
    resolution: Resolution | None = None
    issue: Issue | None = None
    event: Event | None = None
    alternatives: tuple[tuple[Alternative, ScoredAlternative], ...] = ()

    @property
    def justification(self) -> str | None:
        if self.link is None:
            return None
        if self.link.justification is not None:
            return self.link.justification
        return self.resolution.justification if self.resolution is not None else None


@dataclass(frozen=True)
class IssueHit:
    issue_id: str
    overlap: tuple[str, ...]


@dataclass(frozen=True)
class ResolutionHit:
    resolution_id: str
    version: int
    overlap: tuple[str, ...]


@dataclass(frozen=True)
class ConflictReport:
    scope: tuple[str, ...]
    issue_hits: tuple[IssueHit, ...]
    resolution_hits: tuple[ResolutionHit, ...]


@dataclass(frozen=True)
class TraceRow:
    """One requirement-typed entity, its implementers, their latest chains."""

    requirement_id: str
    implementers: tuple[str, ...]
    chains: tuple[tuple[str, RationaleChain | None], ...]

    @property
    def covered(self) -> bool:
        return bool(self.implementers)

    @property
    def latest_resolution_id(self) -> str | None:
        latest: RationaleChain | None = None
        for _, chain in self.chains:
            if chain is None:
                continue
            if latest is None or chain.version > latest.version:
                latest = chain
        if latest is None or latest.resolution is None:
            return None
        return latest.resolution.id


def build_chain(store: RecordStore, change: Change, version: int,
                link: RationaleLink | None) -> RationaleChain:
    """Follow one link as deep as the store has records for it."""
    if link is None or link.resolution_id is None:
        return RationaleChain(change, version, link)
    resolution = store.get(KIND_RESOLUTION, link.resolution_id)
    if resolution is None:
        return RationaleChain(change, version, link)
    issue = store.get(KIND_ISSUE, resolution.issue_id)
    event = None
    alternatives: tuple[tuple[Alternative, ScoredAlternative], ...] = ()
    if issue is not None:
        if issue.triggered_by is not None:
            event = store.get(KIND_EVENT, issue.triggered_by)
        by_id = {a.id: a for a in store.alternatives_for(issue.id)}
        if by_id:
            alternatives = tuple(
                (by_id[s.alternative_id], s) for s in rank_alternatives(issue.id, store)
            )
    return RationaleChain(change, version, link, resolution, issue, event, alternatives)


def open_issues(store: RecordStore) -> list[Issue]:
    """All open issues, sorted bytewise by id."""
    return sorted((i for i in store.issues if i.status == STATUS_OPEN), key=lambda i: i.id)


def conflicts(repo: Repository, scope) -> ConflictReport:
    """What an intended change over these entities would collide with.

    Open issues whose affected entities intersect the scope, and
    resolutions whose linked changes touched a scope entity, with the
    version where that happened.
    """
    scope_set = frozenset(scope)
    store = repo.store

    issue_hits = []
    for issue in open_issues(store):
        overlap = scope_set & set(issue.affected_entities)
        if overlap:
            issue_hits.append(IssueHit(issue.id, tuple(sorted(overlap))))

    hits: dict[tuple[str, int], set[str]] = {}
    for x in range(1, repo.head + 1):
        cs = repo.get_changeset(x)
        by_change = {c.change_id: c for c in cs.changes}
        for link in cs.links:
            if link.resolution_id is None:
                continue
            change = by_change.get(link.change_id)
            if change is None:
                continue
            overlap = scope_set & touched_entities(change)
            if overlap:
                hits.setdefault((link.resolution_id, x), set()).update(overlap)
    resolution_hits = tuple(
        ResolutionHit(rid, x, tuple(sorted(overlap)))
        for (rid, x), overlap in sorted(hits.items())
    )
    return ConflictReport(tuple(sorted(scope_set)), tuple(issue_hits), resolution_hits)


def entity_history(repo: Repository, entity_id: str) -> list[RationaleChain]:
    """Every change that touched the entity, oldest first, with its chain."""
    store = repo.store
    chains = []
    for x in range(1, repo.head + 1):
        cs = repo.get_changeset(x)
        linked = {link.change_id: link for link in cs.links}
        for change in cs.changes:
            if entity_id in touched_entities(change):
                chains.append(build_chain(store, change, x, linked.get(change.change_id)))
    return chains


def trace_report(repo: Repository, requirement_type: str, relation_type: str) -> list[TraceRow]:
    """Coverage of requirement-typed entities via one relation type.

    An entity implements a requirement when a head-version relation of the
    given type points from it to the requirement. Each implementer carries
    the chain of the newest change that touched it; requirements without
    implementers are the uncovered ones.
    """
    head = repo.get_version(repo.head)
    store = repo.store

    history_cache: dict[str, RationaleChain | None] = {}

    def latest_chain(eid: str) -> RationaleChain | None:
        if eid not in history_cache:
            chains = entity_history(repo, eid)
            history_cache[eid] = chains[-1] if chains else None
        return history_cache[eid]

    rows = []
    for entity in head.entities:
        if entity.entity_type != requirement_type:
            continue
        implementers = sorted(
            rel.source
            for rel in head.relations
            if rel.relation_type == relation_type and rel.target == entity.id
        )
        chains = tuple((impl, latest_chain(impl)) for impl in implementers)
        rows.append(TraceRow(entity.id, tuple(implementers), chains))
    return rows


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


_NODE_SHAPES = {
    "event": "diamond",
    "issue": "ellipse",
    "alternative": "note",
    "resolution": "box",
    "change": "hexagon",
    "entity": "folder",
}


def export_dot(repo: Repository, version: int | None = None) -> str:
    """Directed graph of versions 1..version (default head) in dot syntax.

    Nodes: the scope snapshot's entities, every change up to the scope
    version, and all events, issues, alternatives, and resolutions on
    record. Edges: event triggers issue, issue has-alternative, resolution
    resolves issue, change implements resolution, change modifies entity.
    Nodes and edges are emitted in sorted order, so equal repository bytes
    give equal output bytes.
    """
    scope = repo.head if version is None else version
    if not 0 <= scope <= repo.head:
        raise NotFoundError(f"no version {scope}")
    store = repo.store
    snapshot = repo.get_version(scope)

    nodes: dict[str, tuple[str, str]] = {}  # node id -> (shape kind, label)
    edges: set[tuple[str, str, str]] = set()

    for entity in snapshot.entities:
        nodes[f"entity:{entity.id}"] = ("entity", entity.id)
    for event in store.events:
        nodes[f"event:{event.id}"] = ("event", event.id)
    for issue in store.issues:
        nodes[f"issue:{issue.id}"] = ("issue", issue.id)
        if issue.triggered_by is not None and store.get(KIND_EVENT, issue.triggered_by):
            edges.add((f"event:{issue.triggered_by}", f"issue:{issue.id}", "triggers"))
    for alt in store.alternatives:
        nodes[f"alternative:{alt.id}"] = ("alternative", alt.id)
        if store.get(KIND_ISSUE, alt.issue_id):
            edges.add((f"issue:{alt.issue_id}", f"alternative:{alt.id}", "has-alternative"))
    for resolution in store.resolutions:
        nodes[f"resolution:{resolution.id}"] = ("resolution", resolution.id)
        if store.get(KIND_ISSUE, resolution.issue_id):
            edges.add((f"resolution:{resolution.id}", f"issue:{resolution.issue_id}", "resolves"))

    for x in range(1, scope + 1):
        cs = repo.get_changeset(x)
        linked = {link.change_id: link for link in cs.links}
        for change in cs.changes:
            node = f"change:{x}:{change.change_id}"
            nodes[node] = ("change", f"{change.change_id} v{x}")
            link = linked.get(change.change_id)
            if link is not None and link.resolution_id is not None:
                if store.get(KIND_RESOLUTION, link.resolution_id):
                    edges.add((node, f"resolution:{link.resolution_id}", "implements"))
            for eid in sorted(touched_entities(change)):
                if f"entity:{eid}" in nodes:
                    edges.add((node, f"entity:{eid}", "modifies"))

    lines = ["digraph remis {"]
    for node_id in sorted(nodes):
        kind, label = nodes[node_id]
        lines.append(
            f"  {_dot_quote(node_id)} [shape={_NODE_SHAPES[kind]}, label={_dot_quote(label)}];"
        )
    for source, target, label in sorted(edges):
        lines.append(f"  {_dot_quote(source)} -> {_dot_quote(target)} [label={_dot_quote(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
