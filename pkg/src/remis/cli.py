"""Command-line interface.

Verb grammar follows the git idiom: one verb (sometimes with a subverb) per
invocation, every elicitation field available as a flag, no interactive
prompt required anywhere. Human-readable output goes to stdout and
diagnostics to stderr; --porcelain switches stdout to the line-oriented
machine form documented in the README.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 repository
integrity or lock error, 4 not found.
"""

from __future__ import annotations

import argparse
import os
import sys
from contextlib import redirect_stderr, redirect_stdout
from datetime import datetime, timezone
from typing import IO

from . import analysis, delta
from .assessment import rank_alternatives
from .errors import (
    CATEGORY_INTEGRITY,
    IntegrityError,
    NotFoundError,
    SEVERITY_ERROR,
    ValidationError,
)
from .model import ProcessModel, load_model, serialize_model, validate_model
from .rationale import (
    Alternative,
    Assessment,
    ChangeRequest,
    Criterion,
    Event,
    Issue,
    RationaleLink,
    Resolution,
    format_number,
)
from .repository import DEFAULT_LOCK_TIMEOUT, Repository, system_clock
from .textio import encode_field

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_INTEGRITY = 3
EXIT_NOT_FOUND = 4


def _normalize_now(text: str) -> str:
    try:
        stamp = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError:
        raise ValueError(f"--now is not an ISO-8601 timestamp: {text!r}") from None
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return stamp.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _split_ids(raw: str) -> list[str]:
    return [part for part in (p.strip() for p in raw.split(",")) if part]


def _field(text: str | None) -> str:
    return encode_field(text) if text else "-"


def build_parser() -> argparse.ArgumentParser:
    # the global flags may appear before or after the verb; SUPPRESS keeps a
    # subparser from clobbering a value the main parser already consumed
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--repo", metavar="PATH", default=argparse.SUPPRESS,
                        help="repository root (default: $REMIS_REPO or .)")
    common.add_argument("--porcelain", action="store_true", default=argparse.SUPPRESS,
                        help="line-oriented machine output")
    common.add_argument("--now", metavar="ISO8601", default=argparse.SUPPRESS,
                        help="fixed timestamp for all recorded times")

    parser = argparse.ArgumentParser(prog="remis", parents=[common],
                                     description="versioned process models with change rationale")
    verbs = parser.add_subparsers(dest="verb", required=True, metavar="<verb>")

    def verb(name: str, handler, **kwargs) -> argparse.ArgumentParser:
        p = verbs.add_parser(name, parents=[common], **kwargs)
        if handler is not None:
            p.set_defaults(func=handler)
        return p

    p = verb("init", cmd_init, help="create an empty repository")
    p.add_argument("--level", type=int, default=0, help="deployment level 0..3")
    p.add_argument("--baseline", metavar="FILE", help="model document stored as version 0")

    p = verb("import", cmd_import, help="validate a model document and print its canonical form")
    p.add_argument("file", metavar="FILE")

    p = verb("diff", cmd_diff, help="changeset between two model documents")
    p.add_argument("a", metavar="A.pm")
    p.add_argument("b", metavar="B.pm")

    p = verb("status", cmd_status, help="compare a working model against head")
    p.add_argument("file", metavar="WORK.pm")

    p = verb("request", None, help="manage change requests")
    sub = p.add_subparsers(dest="subverb", required=True, metavar="<subverb>")
    q = sub.add_parser("new", parents=[common])
    q.set_defaults(func=cmd_request_new)
    q.add_argument("--description", required=True)
    q.add_argument("--proposer", default="")
    q.add_argument("--priority", type=int, default=3)
    q.add_argument("--scope", default="", help="comma-separated entity ids")
    q.add_argument("--mode", default="synchronous", choices=("synchronous", "asynchronous"))
    q.add_argument("--relevance", default="")
    q.add_argument("--resources", default="")
    q.add_argument("--infrastructure", default="")
    q.add_argument("--maturity", default="")
    q = sub.add_parser("list", parents=[common])
    q.set_defaults(func=cmd_request_list)
    q = sub.add_parser("set-priority", parents=[common])
    q.set_defaults(func=cmd_request_set_priority)
    q.add_argument("id", metavar="REQ-n")
    q.add_argument("priority", type=int)
    q = sub.add_parser("set-mode", parents=[common])
    q.set_defaults(func=cmd_request_set_mode)
    q.add_argument("id", metavar="REQ-n")
    q.add_argument("mode", choices=("synchronous", "asynchronous"))

    p = verb("event", None, help="record events")
    sub = p.add_subparsers(dest="subverb", required=True, metavar="<subverb>")
    q = sub.add_parser("add", parents=[common])
    q.set_defaults(func=cmd_event_add)
    q.add_argument("--name", required=True)
    q.add_argument("--description", default="")
    q.add_argument("--type", default="internal", choices=("internal", "external"))
    q.add_argument("--occurred-at", default=None, metavar="ISO8601")

    p = verb("issue", None, help="open, close, and list issues")
    sub = p.add_subparsers(dest="subverb", required=True, metavar="<subverb>")
    q = sub.add_parser("open", parents=[common])
    q.set_defaults(func=cmd_issue_open)
    q.add_argument("--question", required=True)
    q.add_argument("--event", default=None, metavar="EV-n")
    q.add_argument("--type", default="other", dest="issue_type")
    q.add_argument("--label", default="", help="classification label for --type other")
    q.add_argument("--entities", default="", help="comma-separated affected entity ids")
    q.add_argument("--discussion", default="")
    q = sub.add_parser("close", parents=[common])
    q.set_defaults(func=cmd_issue_close)
    q.add_argument("id", metavar="IS-n")
    q = sub.add_parser("list", parents=[common])
    q.set_defaults(func=cmd_issue_list)
    q.add_argument("--status", default=None, choices=("open", "closed"))

    p = verb("alt", None, help="propose and assess alternatives")
    sub = p.add_subparsers(dest="subverb", required=True, metavar="<subverb>")
    q = sub.add_parser("add", parents=[common])
    q.set_defaults(func=cmd_alt_add)
    q.add_argument("--issue", required=True, metavar="IS-n")
    q.add_argument("--subject", required=True)
    q.add_argument("--description", default="")
    q = sub.add_parser("assess", parents=[common])
    q.set_defaults(func=cmd_alt_assess)
    q.add_argument("--alt", required=True, metavar="AL-n")
    q.add_argument("--criterion", default=None, metavar="CR-n")
    q.add_argument("--verdict", required=True, type=float)
    q.add_argument("--note", default="")

    p = verb("criterion", None, help="define weighted criteria")
    sub = p.add_subparsers(dest="subverb", required=True, metavar="<subverb>")
    q = sub.add_parser("add", parents=[common])
    q.set_defaults(func=cmd_criterion_add)
    q.add_argument("--name", required=True)
    q.add_argument("--weight", required=True, type=float)
    q.add_argument("--description", default="")
    q.add_argument("--gqm", default=None, help="goal/question reference")

    p = verb("resolve", cmd_resolve, help="record a resolution for an issue")
    p.add_argument("--issue", required=True, metavar="IS-n")
    p.add_argument("--alternative", default=None, metavar="AL-n")
    p.add_argument("--justification", default="")
    p.add_argument("--short", default="", dest="short_description")
    p.add_argument("--long", default="", dest="long_description")
    p.add_argument("--opens", default="", help="comma-separated follow-up issue ids")

    p = verb("rank", cmd_rank, help="rank an issue's alternatives by weighted score")
    p.add_argument("issue", metavar="IS-n")

    p = verb("commit", cmd_commit, help="store the working model as a new version")
    p.add_argument("file", metavar="WORK.pm")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--resolution", default=None, metavar="RS-n")
    group.add_argument("--justification", default=None)
    p.add_argument("--unlinked", action="store_true",
                   help="store without rationale (asynchronous mode)")

    p = verb("link", cmd_link, help="attach rationale to stored changes")
    p.add_argument("version", type=int)
    p.add_argument("--changes", required=True, help="comma-separated change ids")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--resolution", default=None, metavar="RS-n")
    group.add_argument("--justification", default=None)

    p = verb("level", None, help="show or raise the deployment level")
    sub = p.add_subparsers(dest="subverb", required=True, metavar="<subverb>")
    q = sub.add_parser("show", parents=[common])
    q.set_defaults(func=cmd_level_show)
    q = sub.add_parser("set", parents=[common])
    q.set_defaults(func=cmd_level_set)
    q.add_argument("level", type=int)

    verb("validate", cmd_validate, help="audit the whole repository")

    p = verb("query", None, help="rationale queries")
    sub = p.add_subparsers(dest="subverb", required=True, metavar="<subverb>")
    q = sub.add_parser("open-issues", parents=[common])
    q.set_defaults(func=cmd_query_open_issues)
    q = sub.add_parser("conflicts", parents=[common])
    q.set_defaults(func=cmd_query_conflicts)
    q.add_argument("--entities", required=True, help="comma-separated entity ids")
    q = sub.add_parser("history", parents=[common])
    q.set_defaults(func=cmd_query_history)
    q.add_argument("entity", metavar="ENTITY-ID")

    p = verb("report", None, help="traceability reports")
    sub = p.add_subparsers(dest="subverb", required=True, metavar="<subverb>")
    q = sub.add_parser("trace", parents=[common])
    q.set_defaults(func=cmd_report_trace)
    q.add_argument("--requirement-type", required=True, dest="requirement_type")
    q.add_argument("--relation", required=True)

    p = verb("export", None, help="graph export")
    sub = p.add_subparsers(dest="subverb", required=True, metavar="<subverb>")
    q = sub.add_parser("dot", parents=[common])
    q.set_defaults(func=cmd_export_dot)
    q.add_argument("--version", type=int, default=None)

    return parser


# -- helpers ----------------------------------------------------------------


def _repo_path(ns) -> str:
    return ns.repo or os.environ.get("REMIS_REPO") or "."


def _clock(ns):
    if ns.now is None:
        return system_clock
    fixed = _normalize_now(ns.now)
    return lambda: fixed


def _lock_timeout() -> float:
    raw = os.environ.get("REMIS_LOCK_TIMEOUT")
    if raw is None:
        return DEFAULT_LOCK_TIMEOUT
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"REMIS_LOCK_TIMEOUT is not a number: {raw!r}") from None


def _repo(ns) -> Repository:
    return Repository(_repo_path(ns), clock=_clock(ns), lock_timeout=_lock_timeout())


def _created(ns, out: IO[str], kind: str, record_id: str) -> None:
    if ns.porcelain:
        print(record_id, file=out)
    else:
        print(f"created {kind} {record_id}", file=out)


def _table(out: IO[str], rows: list[list[str]]) -> None:
    if not rows:
        return
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    for row in rows:
        cells = [cell.ljust(width) for cell, width in zip(row, widths)]
        print("  ".join(cells).rstrip(), file=out)


# -- handlers ----------------------------------------------------------------


def cmd_init(ns, out, err) -> int:
    baseline = load_model(ns.baseline) if ns.baseline else ProcessModel()
    repo = Repository.init(_repo_path(ns), ns.level, baseline, clock=_clock(ns),
                           lock_timeout=_lock_timeout())
    if ns.porcelain:
        print(f"init {repo.active_level}", file=out)
    else:
        print(f"initialized repository at {repo.root} (level {repo.active_level})", file=out)
    return EXIT_OK


def cmd_import(ns, out, err) -> int:
    model = load_model(ns.file)
    diags = validate_model(model)
    if diags:
        raise ValidationError(f"{ns.file} is invalid", diags)
    out.write(serialize_model(model))
    return EXIT_OK


def cmd_diff(ns, out, err) -> int:
    changeset = delta.diff(load_model(ns.a), load_model(ns.b))
    out.write(delta.serialize_changeset(changeset))
    return EXIT_OK


def cmd_status(ns, out, err) -> int:
    repo = _repo(ns)
    work = load_model(ns.file)
    changeset = delta.diff(repo.get_version(repo.head), work)
    pending = repo.pending_changes()
    if ns.porcelain:
        print(f"head {repo.head}", file=out)
        print(f"level {repo.active_level}", file=out)
        for line in delta.serialize_changeset(changeset).splitlines()[4:]:
            print(line, file=out)
        print(f"pending {len(pending)}", file=out)
        return EXIT_OK
    print(f"head version {repo.head}, level {repo.active_level}", file=out)
    if changeset.changes:
        print(f"{len(changeset.changes)} change(s) against head:", file=out)
        for line in delta.serialize_changeset(changeset).splitlines()[4:]:
            print(f"  {line}", file=out)
    else:
        print("working model matches head", file=out)
    if pending:
        print(f"{len(pending)} stored change(s) still await rationale", file=out)
    return EXIT_OK


def cmd_request_new(ns, out, err) -> int:
    repo = _repo(ns)
    record = ChangeRequest(
        id="",
        description=ns.description,
        proposer=ns.proposer,
        priority=ns.priority,
        scope=tuple(_split_ids(ns.scope)),
        elicitation_mode=ns.mode,
        relevance=ns.relevance,
        resources=ns.resources,
        infrastructure=ns.infrastructure,
        maturity=ns.maturity,
    )
    _created(ns, out, "request", repo.put_record(record))
    return EXIT_OK


def cmd_request_list(ns, out, err) -> int:
    repo = _repo(ns)
    requests = sorted(repo.store.requests, key=lambda r: (-r.priority, r.id))
    if ns.porcelain:
        for r in requests:
            print(
                f"request {r.id} {r.priority} {r.elicitation_mode} {r.status} "
                f"{_field(r.description)}",
                file=out,
            )
        return EXIT_OK
    rows = [[r.id, str(r.priority), r.elicitation_mode, r.status, r.description] for r in requests]
    if rows:
        _table(out, [["ID", "PRI", "MODE", "STATUS", "DESCRIPTION"]] + rows)
    else:
        print("no change requests", file=out)
    return EXIT_OK


def cmd_request_set_priority(ns, out, err) -> int:
    repo = _repo(ns)
    repo.set_request_priority(ns.id, ns.priority)
    if ns.porcelain:
        print(f"request {ns.id} {ns.priority}", file=out)
    else:
        print(f"request {ns.id} priority set to {ns.priority}", file=out)
    return EXIT_OK


def cmd_request_set_mode(ns, out, err) -> int:
    repo = _repo(ns)
    repo.set_request_mode(ns.id, ns.mode)
    if ns.porcelain:
        print(f"request {ns.id} {ns.mode}", file=out)
    else:
        print(f"request {ns.id} mode set to {ns.mode}", file=out)
    return EXIT_OK


def cmd_event_add(ns, out, err) -> int:
    repo = _repo(ns)
    occurred = ns.occurred_at if ns.occurred_at else _clock(ns)()
    record = Event(id="", name=ns.name, short_description=ns.description,
                   event_type=ns.type, occurred_at=occurred)
    _created(ns, out, "event", repo.put_record(record))
    return EXIT_OK


def cmd_issue_open(ns, out, err) -> int:
    repo = _repo(ns)
    record = Issue(
        id="",
        question=ns.question,
        triggered_by=ns.event,
        issue_type=ns.issue_type,
        type_label=ns.label,
        detailed_discussion=ns.discussion,
        affected_entities=tuple(_split_ids(ns.entities)),
    )
    _created(ns, out, "issue", repo.put_record(record))
    return EXIT_OK


def cmd_issue_close(ns, out, err) -> int:
    repo = _repo(ns)
    repo.close_record("issue", ns.id)
    if ns.porcelain:
        print(f"closed {ns.id}", file=out)
    else:
        print(f"closed issue {ns.id}", file=out)
    return EXIT_OK


def cmd_issue_list(ns, out, err) -> int:
    repo = _repo(ns)
    issues = repo.list_records("issue", status=ns.status)
    if ns.porcelain:
        for i in issues:
            print(f"issue {i.id} {i.status} {i.issue_type} {_field(i.question)}", file=out)
        return EXIT_OK
    rows = [[i.id, i.status, i.issue_type, i.question] for i in issues]
    if rows:
        _table(out, [["ID", "STATUS", "TYPE", "QUESTION"]] + rows)
    else:
        print("no issues", file=out)
    return EXIT_OK


def cmd_alt_add(ns, out, err) -> int:
    repo = _repo(ns)
    record = Alternative(id="", issue_id=ns.issue, subject=ns.subject, description=ns.description)
    _created(ns, out, "alternative", repo.put_record(record))
    return EXIT_OK


def cmd_alt_assess(ns, out, err) -> int:
    repo = _repo(ns)
    record = Assessment(id="", alternative_id=ns.alt, criterion_id=ns.criterion,
                        verdict=ns.verdict, note=ns.note)
    _created(ns, out, "assessment", repo.put_record(record))
    return EXIT_OK


def cmd_criterion_add(ns, out, err) -> int:
    repo = _repo(ns)
    record = Criterion(id="", name=ns.name, description=ns.description,
                       weight=ns.weight, gqm_source=ns.gqm)
    _created(ns, out, "criterion", repo.put_record(record))
    return EXIT_OK


def cmd_resolve(ns, out, err) -> int:
    repo = _repo(ns)
    record = Resolution(
        id="",
        issue_id=ns.issue,
        chosen_alternative_id=ns.alternative,
        short_description=ns.short_description,
        long_description=ns.long_description,
        justification=ns.justification,
        opens_issues=tuple(_split_ids(ns.opens)),
    )
    _created(ns, out, "resolution", repo.put_record(record))
    return EXIT_OK


def cmd_rank(ns, out, err) -> int:
    repo = _repo(ns)
    ranking = rank_alternatives(ns.issue, repo.store)
    if ns.porcelain:
        for n, scored in enumerate(ranking, start=1):
            print(f"rank {n} {scored.alternative_id} {format_number(scored.score)}", file=out)
        return EXIT_OK
    rows = [["RANK", "ALTERNATIVE", "SCORE", "COVERED", "MISSING"]]
    for n, scored in enumerate(ranking, start=1):
        rows.append([
            str(n),
            scored.alternative_id,
            format_number(scored.score),
            str(scored.covered_criteria),
            ",".join(scored.missing_criteria) or "-",
        ])
    _table(out, rows)
    return EXIT_OK


def cmd_commit(ns, out, err) -> int:
    if ns.unlinked and (ns.resolution or ns.justification):
        raise ValueError("--unlinked excludes --resolution and --justification")
    repo = _repo(ns)
    work = load_model(ns.file)
    if ns.unlinked:
        version = repo.commit_unlinked(work)
    else:
        def links(changeset):
            if ns.resolution is not None:
                return [RationaleLink(cid, resolution_id=ns.resolution)
                        for cid in changeset.change_ids]
            if ns.justification is not None:
                return [RationaleLink(cid, justification=ns.justification)
                        for cid in changeset.change_ids]
            return []

        version = repo.commit(work, links)
    if ns.porcelain:
        print(f"version {version}", file=out)
    else:
        changes = len(repo.get_changeset(version).changes)
        print(f"committed version {version} ({changes} change(s))", file=out)
    return EXIT_OK


def cmd_link(ns, out, err) -> int:
    repo = _repo(ns)
    change_ids = _split_ids(ns.changes)
    repo.link_rationale(ns.version, change_ids,
                        resolution_id=ns.resolution, justification=ns.justification)
    pending = len(repo.pending_changes())
    if ns.porcelain:
        print(f"linked {ns.version} {len(change_ids)}", file=out)
        print(f"pending {pending}", file=out)
    else:
        print(f"linked {len(change_ids)} change(s) of version {ns.version}", file=out)
        print(f"{pending} change(s) still await rationale", file=out)
    return EXIT_OK


def cmd_level_show(ns, out, err) -> int:
    repo = _repo(ns)
    print(f"level {repo.active_level}", file=out)
    return EXIT_OK


def cmd_level_set(ns, out, err) -> int:
    repo = _repo(ns)
    repo.set_level(ns.level)
    print(f"level {repo.active_level}", file=out)
    return EXIT_OK


def cmd_validate(ns, out, err) -> int:
    repo = _repo(ns)
    diags = repo.validate_repository()
    for d in diags:
        if ns.porcelain:
            print(f"{d.severity} {d.category} {d.code} {_field(d.message)}", file=err)
        else:
            print(str(d), file=err)
    errors = [d for d in diags if d.severity == SEVERITY_ERROR]
    if ns.porcelain:
        print(f"diagnostics {len(diags)}", file=out)
    elif not diags:
        print("repository is valid", file=out)
    else:
        print(f"{len(errors)} error(s), {len(diags) - len(errors)} warning(s)", file=out)
    if any(d.category == CATEGORY_INTEGRITY for d in errors):
        return EXIT_INTEGRITY
    if errors:
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_query_open_issues(ns, out, err) -> int:
    repo = _repo(ns)
    issues = analysis.open_issues(repo.store)
    if ns.porcelain:
        for i in issues:
            print(f"issue {i.id} {i.issue_type} {_field(i.question)}", file=out)
        return EXIT_OK
    if not issues:
        print("no open issues", file=out)
        return EXIT_OK
    rows = [["ID", "TYPE", "QUESTION"]] + [[i.id, i.issue_type, i.question] for i in issues]
    _table(out, rows)
    return EXIT_OK


def cmd_query_conflicts(ns, out, err) -> int:
    repo = _repo(ns)
    report = analysis.conflicts(repo, _split_ids(ns.entities))
    if ns.porcelain:
        for hit in report.issue_hits:
            print(f"issue-hit {hit.issue_id} {','.join(hit.overlap)}", file=out)
        for hit in report.resolution_hits:
            print(f"resolution-hit {hit.resolution_id} {hit.version} {','.join(hit.overlap)}", file=out)
        return EXIT_OK
    if not report.issue_hits and not report.resolution_hits:
        print("no conflicts", file=out)
        return EXIT_OK
    for hit in report.issue_hits:
        print(f"open issue {hit.issue_id} touches {', '.join(hit.overlap)}", file=out)
    for hit in report.resolution_hits:
        print(
            f"resolution {hit.resolution_id} changed {', '.join(hit.overlap)} in version {hit.version}",
            file=out,
        )
    return EXIT_OK


def cmd_query_history(ns, out, err) -> int:
    repo = _repo(ns)
    chains = analysis.entity_history(repo, ns.entity)
    for chain in chains:
        resolution = chain.resolution.id if chain.resolution else "-"
        issue = chain.issue.id if chain.issue else "-"
        event = chain.event.id if chain.event else "-"
        if ns.porcelain:
            print(
                f"change {chain.version} {chain.change.change_id} {chain.change.kind} "
                f"{resolution} {issue} {event} {_field(chain.justification)}",
                file=out,
            )
        else:
            parts = [f"v{chain.version} {chain.change.change_id} {chain.change.kind}"]
            if chain.resolution:
                parts.append(f"resolution {resolution}")
            if chain.issue:
                parts.append(f"issue {issue}")
            if chain.event:
                parts.append(f"event {event}")
            if chain.justification:
                parts.append(f"justification {chain.justification!r}")
            print("; ".join(parts), file=out)
    if not chains and not ns.porcelain:
        print(f"no recorded changes touch {ns.entity}", file=out)
    return EXIT_OK


def cmd_report_trace(ns, out, err) -> int:
    repo = _repo(ns)
    rows = analysis.trace_report(repo, ns.requirement_type, ns.relation)
    if ns.porcelain:
        for row in rows:
            impls = ",".join(row.implementers) or "-"
            if not row.covered:
                status = "UNCOVERED"
            else:
                status = row.latest_resolution_id or "-"
            print(f"row {row.requirement_id} {impls} {status}", file=out)
        return EXIT_OK
    if not rows:
        print("no requirement-typed entities", file=out)
        return EXIT_OK
    table = [["REQUIREMENT", "IMPLEMENTED-BY", "RATIONALE"]]
    for row in rows:
        impls = ", ".join(row.implementers) or "-"
        status = "UNCOVERED" if not row.covered else (row.latest_resolution_id or "-")
        table.append([row.requirement_id, impls, status])
    _table(out, table)
    return EXIT_OK


def cmd_export_dot(ns, out, err) -> int:
    repo = _repo(ns)
    out.write(analysis.export_dot(repo, ns.version))
    return EXIT_OK


# -- dispatch ----------------------------------------------------------------


def run(argv: list[str], stdout: IO[str] | None = None, stderr: IO[str] | None = None) -> int:
    """Parse argv, dispatch, and map every error to its exit code."""
    out = stdout if stdout is not None else sys.stdout
    err = stderr if stderr is not None else sys.stderr
    parser = build_parser()
    try:
        with redirect_stdout(out), redirect_stderr(err):
            ns = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    ns.repo = getattr(ns, "repo", None)
    ns.porcelain = getattr(ns, "porcelain", False)
    ns.now = getattr(ns, "now", None)
    try:
        return ns.func(ns, out, err)
    except IntegrityError as exc:  # includes LockHeldError
        print(f"error: {exc}", file=err)
        return EXIT_INTEGRITY
    except NotFoundError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_NOT_FOUND
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_NOT_FOUND
    except ValidationError as exc:
        print(f"error: {exc}", file=err)
        for d in exc.diagnostics:
            print(str(d), file=err)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
