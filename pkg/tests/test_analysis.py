"""History, conflict, trace, and dot-export queries over a populated repository."""

import pytest

from remis.analysis import (
    ConflictReport,
    IssueHit,
    RationaleChain,
    ResolutionHit,
    build_chain,
    conflicts,
    entity_history,
    export_dot,
    open_issues,
    trace_report,
)
from remis.delta import Change, SetAttr
from remis.errors import NotFoundError
from remis.model import ProcessEntity, ProcessModel, Relation
from remis.rationale import (
    Alternative,
    Assessment,
    Criterion,
    Event,
    Issue,
    RationaleLink,
    RecordStore,
    Resolution,
)
from remis.repository import Repository


def baseline() -> ProcessModel:
    return ProcessModel(
        (
            ProcessEntity("A1", "activity", (("name", "Design"),)),
            ProcessEntity("A2", "activity", (("name", "Coding"),)),
            ProcessEntity("R1", "requirement"),
            ProcessEntity("R2", "requirement"),
            ProcessEntity("R3", "requirement"),
        ),
        (Relation("satisfies", "A1", "R1"),),
    )


def with_attr(model: ProcessModel, eid: str, key: str, value: str) -> ProcessModel:
    entities = []
    for ent in model.entities:
        if ent.id == eid:
            attrs = dict(ent.attributes)
            attrs[key] = value
            ent = ProcessEntity(ent.id, ent.entity_type, tuple(attrs.items()))
        entities.append(ent)
    return ProcessModel(tuple(entities), model.relations)


@pytest.fixture
def repo(tmp_path, fixed_clock) -> Repository:
    repo = Repository.init(tmp_path / "repo", 0, baseline(), clock=fixed_clock)
    repo.put_record(Event("", name="design review", event_type="internal"))
    repo.put_record(Issue(
        "", question="split the design step?", triggered_by="EV-1",
        issue_type="imprecision", affected_entities=("A1",),
    ))
    repo.put_record(Alternative("", issue_id="IS-1", subject="split in two"))
    repo.put_record(Alternative("", issue_id="IS-1", subject="keep as one"))
    repo.put_record(Criterion("", name="review effort", weight=2.0))
    repo.put_record(Assessment("", alternative_id="AL-1", criterion_id="CR-1", verdict=1.0))
    repo.put_record(Assessment("", alternative_id="AL-2", criterion_id="CR-1", verdict=-0.5))
    repo.put_record(Resolution(
        "", issue_id="IS-1", chosen_alternative_id="AL-1",
        justification="finer design step wins",
    ))

    v1 = with_attr(baseline(), "A1", "name", "Detailed Design")
    repo.commit(v1, lambda cs: [
        RationaleLink(cid, resolution_id="RS-1") for cid in cs.change_ids
    ])
    repo.close_record("issue", "IS-1")

    repo.put_record(Issue(
        "", question="does A1 overlap the audit?", issue_type="inconsistency",
        affected_entities=("A1", "X9"),
    ))
    repo.put_record(Issue("", question="too wordy?", issue_type="verbosity"))

    v2 = ProcessModel(
        v1.entities + (ProcessEntity("A3", "activity"),),
        v1.relations + (Relation("satisfies", "A3", "R2"),),
    )
    repo.commit(v2, lambda cs: [
        RationaleLink(cid, justification="traceability housekeeping")
        for cid in cs.change_ids
    ])

    v3 = with_attr(v2, "A2", "name", "Coding and Test")
    repo.commit(v3, lambda cs: [
        RationaleLink(cid, justification="clearer activity name")
        for cid in cs.change_ids
    ])
    return repo


def test_open_issues_skips_closed(repo):
    assert [i.id for i in open_issues(repo.store)] == ["IS-2", "IS-3"]


def test_conflicts_reports_both_hit_kinds(repo):
    report = conflicts(repo, ["A1", "D9"])
    assert report == ConflictReport(
        scope=("A1", "D9"),
        issue_hits=(IssueHit("IS-2", ("A1",)),),
        resolution_hits=(ResolutionHit("RS-1", 1, ("A1",)),),
    )


def test_conflicts_empty_scope_overlap(repo):
    report = conflicts(repo, ["D9"])
    assert report.issue_hits == ()
    assert report.resolution_hits == ()


def test_entity_history_builds_full_chain(repo):
    chains = entity_history(repo, "A1")
    assert len(chains) == 1
    chain = chains[0]
    assert chain.version == 1
    assert chain.change.kind == "set-attr"
    assert chain.resolution.id == "RS-1"
    assert chain.issue.id == "IS-1"
    assert chain.event.id == "EV-1"
    ranked = [(alt.id, scored.score) for alt, scored in chain.alternatives]
    assert ranked == [("AL-1", 2.0), ("AL-2", -1.0)]
    assert chain.justification == "finer design step wins"


def test_entity_history_bare_links(repo):
    chains = entity_history(repo, "A3")
    assert [c.version for c in chains] == [2, 2]
    assert [c.change.kind for c in chains] == ["add-entity", "add-rel"]
    assert chains[-1].resolution is None
    assert chains[-1].justification == "traceability housekeeping"
    assert entity_history(repo, "D9") == []


def test_build_chain_stops_at_missing_records():
    store = RecordStore()
    change = Change("C-1", SetAttr("A1", "name", "a", "b"))
    bare = build_chain(store, change, 3, None)
    assert bare == RationaleChain(change, 3, None)
    assert bare.justification is None
    dangling = build_chain(store, change, 3, RationaleLink("C-1", resolution_id="RS-9"))
    assert dangling.resolution is None
    assert dangling.justification is None


def test_trace_report_rows(repo):
    rows = trace_report(repo, "requirement", "satisfies")
    assert [r.requirement_id for r in rows] == ["R1", "R2", "R3"]

    covered = {r.requirement_id: r.covered for r in rows}
    assert covered == {"R1": True, "R2": True, "R3": False}

    by_id = {r.requirement_id: r for r in rows}
    assert by_id["R1"].implementers == ("A1",)
    assert by_id["R1"].latest_resolution_id == "RS-1"
    assert by_id["R2"].implementers == ("A3",)
    assert by_id["R2"].latest_resolution_id is None
    assert by_id["R3"].implementers == ()
    assert by_id["R3"].chains == ()


def test_trace_report_other_relation_type(repo):
    rows = trace_report(repo, "requirement", "verifies")
    assert all(not row.covered for row in rows)
    assert trace_report(repo, "milestone", "satisfies") == []


def test_export_dot_shape_and_edges(repo):
    dot = export_dot(repo)
    assert dot.startswith("digraph remis {\n")
    assert dot.endswith("}\n")
    assert '  "entity:A1" [shape=folder, label="A1"];' in dot
    assert '  "event:EV-1" [shape=diamond, label="EV-1"];' in dot
    assert '  "issue:IS-1" [shape=ellipse, label="IS-1"];' in dot
    assert '  "alternative:AL-1" [shape=note, label="AL-1"];' in dot
    assert '  "resolution:RS-1" [shape=box, label="RS-1"];' in dot
    assert '  "change:1:C-1" [shape=hexagon, label="C-1 v1"];' in dot
    assert '  "event:EV-1" -> "issue:IS-1" [label="triggers"];' in dot
    assert '  "issue:IS-1" -> "alternative:AL-2" [label="has-alternative"];' in dot
    assert '  "resolution:RS-1" -> "issue:IS-1" [label="resolves"];' in dot
    assert '  "change:1:C-1" -> "resolution:RS-1" [label="implements"];' in dot
    assert '  "change:1:C-1" -> "entity:A1" [label="modifies"];' in dot


def test_export_dot_version_scope(repo):
    at_zero = export_dot(repo, 0)
    assert "change:" not in at_zero
    assert '"entity:A1"' in at_zero
    assert '"issue:IS-1"' in at_zero  # records are not version-scoped

    at_one = export_dot(repo, 1)
    assert '"change:1:C-1"' in at_one
    assert '"change:2:C-1"' not in at_one
    assert '"entity:A3"' not in at_one

    with pytest.raises(NotFoundError, match="no version 7"):
        export_dot(repo, 7)


def test_export_dot_deterministic(repo):
    first = export_dot(repo)
    second = export_dot(Repository(repo.root))
    assert first == second
    lines = first.splitlines()
    assert lines[1:-1] == sorted(lines[1:-1], key=lambda l: " -> " in l)
