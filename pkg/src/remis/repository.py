"""The versioned on-disk store binding snapshots, changesets, and rationale.

Layout under the repository root:

    remis.cfg        active level, head version, id counters, checksums
    versions/<x>.pm  canonical snapshot of every version, 0 = baseline
    changesets/<x>.cs  the changes and rationale links taking x-1 to x
    rationale.rt     journal of rationale records and status transitions
    requests.rt      journal of change requests, same syntax
    lock             advisory lock, absent when unlocked

History is append-only: snapshots and changeset lines are never rewritten,
status changes are appended transitions, and the one mutable file is
remis.cfg. A commit validates everything it is about to store before
writing a single byte, so a failed commit leaves the repository
byte-identical to its pre-commit state.

Concurrency is single-writer, multi-reader. Writers take an exclusive lock
file (created with O_EXCL) with a bounded retry and fail with
LockHeldError instead of blocking indefinitely; readers need no lock
because committed files never change.
"""

from __future__ import annotations

import hashlib
import os
import time
from collections.abc import Callable, Iterable, Sequence
from contextlib import contextmanager, suppress
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from . import delta, rationale
from .delta import ChangeSet
from .errors import (
    CATEGORY_INTEGRITY,
    Diagnostic,
    FormatError,
    IntegrityError,
    LockHeldError,
    NotFoundError,
    ValidationError,
    error,
    has_errors,
)
from .model import ProcessModel, parse_model, serialize_model, validate_model
from .rationale import (
    JOURNAL_HEADER,
    KIND_REQUEST,
    KIND_RESOLUTION,
    RationaleLink,
    RationaleRecord,
    RecordStore,
    Transition,
    check_level,
    parse_journal,
    replay_journal,
    serialize_record,
    serialize_transition,
    validate_changeset_rationale,
    validate_record,
    validate_store,
)
from .textio import append_file, read_file, write_file

CONFIG_NAME = "remis.cfg"
LOCK_NAME = "lock"
RATIONALE_NAME = "rationale.rt"
REQUESTS_NAME = "requests.rt"
VERSIONS_DIR = "versions"
CHANGESETS_DIR = "changesets"

DEFAULT_LOCK_TIMEOUT = 5.0
_LOCK_POLL = 0.05

ACTIVE_REQUEST_STATUSES = ("open", "accepted")

Clock = Callable[[], str]


def system_clock() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _version_rel(x: int) -> str:
    return f"{VERSIONS_DIR}/{x}.pm"


def _changeset_rel(x: int) -> str:
    return f"{CHANGESETS_DIR}/{x}.cs"


def _render_config(level: int, head: int, counters: dict[str, int], sums: dict[str, str]) -> str:
    lines = [f"level = {level}", f"head = {head}"]
    for kind in rationale.RECORD_KINDS:
        lines.append(f"next.{kind} = {counters[kind]}")
    for rel in sorted(sums):
        lines.append(f"sha256.{rel} = {sums[rel]}")
    return "\n".join(lines) + "\n"


class Repository:
    """Handle on one repository directory.

    All mutating methods acquire the lock, validate, write, and release;
    readers work on committed files directly. The clock is injectable so
    transition timestamps are deterministic under test.
    """

    def __init__(self, root: Path | str, clock: Clock = system_clock,
                 lock_timeout: float = DEFAULT_LOCK_TIMEOUT) -> None:
        self.root = Path(root)
        self.clock = clock
        self.lock_timeout = lock_timeout
        self._level = 0
        self._head = 0
        self._counters: dict[str, int] = {kind: 1 for kind in rationale.RECORD_KINDS}
        self._sums: dict[str, str] = {}
        self._read_config()

    # -- creation ---------------------------------------------------------

    @classmethod
    def init(cls, root: Path | str, level: int = 0,
             baseline: ProcessModel = ProcessModel(),
             clock: Clock = system_clock,
             lock_timeout: float = DEFAULT_LOCK_TIMEOUT) -> "Repository":
        """Create a repository at root with the baseline stored as version 0."""
        check_level(level)
        root = Path(root)
        if root.exists() and not root.is_dir():
            raise ValidationError(f"path {root} is occupied")
        if root.is_dir() and any(root.iterdir()):
            raise ValidationError(f"path {root} is occupied")
        diags = validate_model(baseline)
        if has_errors(diags):
            raise ValidationError("baseline model is invalid", diags)

        (root / VERSIONS_DIR).mkdir(parents=True)
        (root / CHANGESETS_DIR).mkdir()
        snapshot = serialize_model(baseline)
        write_file(root / _version_rel(0), snapshot)
        write_file(root / RATIONALE_NAME, JOURNAL_HEADER + "\n")
        write_file(root / REQUESTS_NAME, JOURNAL_HEADER + "\n")
        counters = {kind: 1 for kind in rationale.RECORD_KINDS}
        sums = {_version_rel(0): _sha256(snapshot)}
        write_file(root / CONFIG_NAME, _render_config(level, 0, counters, sums))
        return cls(root, clock=clock, lock_timeout=lock_timeout)

    # -- configuration ----------------------------------------------------

    def _write_config(self) -> None:
        write_file(
            self.root / CONFIG_NAME,
            _render_config(self._level, self._head, self._counters, self._sums),
        )

    def _read_config(self) -> None:
        path = self.root / CONFIG_NAME
        if not path.is_file():
            raise NotFoundError(f"no repository at {self.root} (missing {CONFIG_NAME})")
        try:
            text = read_file(path)
        except UnicodeDecodeError as exc:
            raise IntegrityError(f"{CONFIG_NAME} is not UTF-8: {exc}") from None
        values: dict[str, str] = {}
        for raw in text.splitlines():
            if not raw.strip() or raw.lstrip().startswith("#"):
                continue
            key, sep, value = raw.partition(" = ")
            if not sep or not key or " " in key:
                raise IntegrityError(f"{CONFIG_NAME}: malformed line {raw!r}")
            if key in values:
                raise IntegrityError(f"{CONFIG_NAME}: duplicate key {key}")
            values[key] = value

        def take_int(key: str) -> int:
            raw = values.pop(key, None)
            if raw is None or not raw.isdigit():
                raise IntegrityError(f"{CONFIG_NAME}: missing or malformed {key}")
            return int(raw)

        self._level = take_int("level")
        if self._level not in rationale.LEVELS:
            raise IntegrityError(f"{CONFIG_NAME}: level {self._level} out of range")
        self._head = take_int("head")
        self._counters = {kind: take_int(f"next.{kind}") for kind in rationale.RECORD_KINDS}
        self._sums = {}
        for key in list(values):
            if key.startswith("sha256."):
                self._sums[key[len("sha256."):]] = values.pop(key)
        if values:
            stray = ", ".join(sorted(values))
            raise IntegrityError(f"{CONFIG_NAME}: unknown keys {stray}")

    # -- locking ----------------------------------------------------------

    @contextmanager
    def _locked(self):
        lock_path = self.root / LOCK_NAME
        deadline = time.monotonic() + self.lock_timeout
        while True:
            try:
                fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
                break
            except FileExistsError:
                if time.monotonic() >= deadline:
                    raise LockHeldError(f"repository lock held: {lock_path}") from None
                time.sleep(_LOCK_POLL)
        try:
            os.write(fd, f"{os.getpid()}\n".encode("ascii"))
            os.close(fd)
            yield
        finally:
            with suppress(FileNotFoundError):
                os.unlink(lock_path)

    # -- basic views ------------------------------------------------------

    @property
    def active_level(self) -> int:
        return self._level

    @property
    def head(self) -> int:
        return self._head

    def list_versions(self) -> list[int]:
        return list(range(self._head + 1))

    def get_version_text(self, x: int) -> str:
        if not 0 <= x <= self._head:
            raise NotFoundError(f"no version {x}")
        return read_file(self.root / _version_rel(x))

    def get_version(self, x: int) -> ProcessModel:
        return parse_model(self.get_version_text(x))

    def get_changeset_text(self, x: int) -> str:
        if not 1 <= x <= self._head:
            raise NotFoundError(f"no changeset {x}")
        return read_file(self.root / _changeset_rel(x))

    def get_changeset(self, x: int) -> ChangeSet:
        return delta.parse_changeset(self.get_changeset_text(x))

    @property
    def store(self) -> RecordStore:
        """Current record state: both journals replayed, in file order."""
        store = replay_journal(parse_journal(read_file(self.root / RATIONALE_NAME)))
        return replay_journal(parse_journal(read_file(self.root / REQUESTS_NAME)), store)

    def list_records(self, kind: str, status: str | None = None,
                     ids: Iterable[str] | None = None) -> list[RationaleRecord]:
        if kind not in rationale.RECORD_KINDS:
            raise NotFoundError(f"unknown record kind {kind!r}")
        records = self.store.records(kind)
        wanted = set(ids) if ids is not None else None
        out = []
        for record in records:
            if status is not None and getattr(record, "status", None) != status:
                continue
            if wanted is not None and record.id not in wanted:
                continue
            out.append(record)
        return out

    def pending_changes(self) -> list[tuple[int, str]]:
        """(version, change_id) for every stored change without a link."""
        pending = []
        for x in range(1, self._head + 1):
            cs = self.get_changeset(x)
            linked = {l.change_id for l in cs.links}
            for cid in cs.change_ids:
                if cid not in linked:
                    pending.append((x, cid))
        return pending

    # -- journal writes ---------------------------------------------------

    def _journal_path(self, kind: str) -> Path:
        name = REQUESTS_NAME if kind == KIND_REQUEST else RATIONALE_NAME
        return self.root / name

    def put_record(self, record: RationaleRecord) -> str:
        """Assign the next id for the record's kind, validate, and append."""
        kind = rationale.kind_of(record)
        with self._locked():
            number = self._counters[kind]
            record = replace(record, id=f"{rationale.ID_PREFIXES[kind]}-{number}")
            diags = validate_record(record, self.store)
            if has_errors(diags):
                raise ValidationError(f"{kind} record is invalid", diags)
            append_file(self._journal_path(kind), serialize_record(record))
            self._counters[kind] = number + 1
            self._write_config()
        return record.id

    def _append_transition(self, t: Transition) -> None:
        # replay against current state first so bad transitions never land on disk
        store = self.store
        rationale.apply_transition(store, t)
        append_file(self._journal_path(t.kind), serialize_transition(t))

    def close_record(self, kind: str, record_id: str) -> None:
        if kind not in (rationale.KIND_ISSUE, KIND_RESOLUTION):
            raise ValidationError(f"{kind} records have no open/closed status")
        with self._locked():
            record = self.store.require(kind, record_id)
            if record.status != rationale.STATUS_OPEN:
                raise ValidationError(f"{kind} {record_id} already closed")
            self._append_transition(Transition(kind, record_id, "closed", None, self.clock()))

    def set_request_status(self, request_id: str, action: str) -> None:
        if action not in ("accepted", "rejected", "done"):
            raise ValidationError(f"unknown request action {action!r}")
        with self._locked():
            self.store.require(KIND_REQUEST, request_id)
            try:
                self._append_transition(Transition(KIND_REQUEST, request_id, action, None, self.clock()))
            except IntegrityError as exc:
                raise ValidationError(str(exc)) from None

    def set_request_priority(self, request_id: str, priority: int) -> None:
        lo, hi = rationale.PRIORITY_RANGE
        if not lo <= priority <= hi:
            raise ValidationError(f"priority must be in {lo}..{hi}, got {priority}")
        with self._locked():
            self.store.require(KIND_REQUEST, request_id)
            try:
                self._append_transition(
                    Transition(KIND_REQUEST, request_id, "priority", str(priority), self.clock())
                )
            except IntegrityError as exc:
                raise ValidationError(str(exc)) from None

    def set_request_mode(self, request_id: str, mode: str) -> None:
        if mode not in rationale.ELICITATION_MODES:
            raise ValidationError(
                f"elicitation_mode must be one of {', '.join(rationale.ELICITATION_MODES)}"
            )
        with self._locked():
            self.store.require(KIND_REQUEST, request_id)
            try:
                self._append_transition(Transition(KIND_REQUEST, request_id, "mode", mode, self.clock()))
            except IntegrityError as exc:
                raise ValidationError(str(exc)) from None

    def add_opened_issue(self, resolution_id: str, issue_id: str) -> None:
        """Record that a resolution led to opening a follow-up issue."""
        with self._locked():
            self.store.require(KIND_RESOLUTION, resolution_id)
            self.store.require(rationale.KIND_ISSUE, issue_id)
            try:
                self._append_transition(
                    Transition(KIND_RESOLUTION, resolution_id, "opens", issue_id, self.clock())
                )
            except IntegrityError as exc:
                raise ValidationError(str(exc)) from None

    # -- commits ----------------------------------------------------------

    def _close_linked_resolutions(self, links: Sequence[RationaleLink], store: RecordStore) -> None:
        seen: set[str] = set()
        for link in links:
            rid = link.resolution_id
            if rid is None or rid in seen:
                continue
            seen.add(rid)
            resolution = store.get(KIND_RESOLUTION, rid)
            if resolution is not None and resolution.status == rationale.STATUS_OPEN:
                t = Transition(KIND_RESOLUTION, rid, "closed", None, self.clock())
                rationale.apply_transition(store, t)
                append_file(self._journal_path(KIND_RESOLUTION), serialize_transition(t))

    def _store_version(self, new_model: ProcessModel, changeset: ChangeSet) -> None:
        x = changeset.to_version
        snapshot = serialize_model(new_model)
        cs_text = delta.serialize_changeset(changeset)
        write_file(self.root / _version_rel(x), snapshot)
        write_file(self.root / _changeset_rel(x), cs_text)
        self._sums[_version_rel(x)] = _sha256(snapshot)
        self._sums[_changeset_rel(x)] = _sha256(cs_text)
        self._head = x
        self._write_config()

    def commit(
        self,
        new_model: ProcessModel,
        links: Sequence[RationaleLink] | Callable[[ChangeSet], Sequence[RationaleLink]] = (),
        request_id: str | None = None,
    ) -> int:
        """Diff head against new_model, attach links, validate, store.

        links may be a callable receiving the computed changeset, since
        change ids only exist after the diff. Linked resolutions are closed
        as part of the commit. Nothing is written unless validation at the
        active level is clean.
        """
        with self._locked():
            diags = validate_model(new_model)
            if has_errors(diags):
                raise ValidationError("model is invalid", diags)
            old = self.get_version(self._head)
            changeset = delta.diff(old, new_model, self._head, self._head + 1)
            if not changeset.changes:
                raise ValidationError("no changes between head and the new model")
            if callable(links):
                links = links(changeset)
            changeset = replace(
                changeset,
                links=tuple(links),
                level_at_commit=self._level,
                request_id=request_id,
            )
            store = self.store
            if request_id is not None:
                store.require(KIND_REQUEST, request_id)
            diags = validate_changeset_rationale(changeset, store, self._level)
            if has_errors(diags):
                raise ValidationError(f"rationale incomplete for level {self._level}", diags)
            self._close_linked_resolutions(changeset.links, store)
            self._store_version(new_model, changeset)
            return self._head

    def _pick_async_request(self, store: RecordStore, request_id: str | None) -> str:
        if request_id is not None:
            request = store.require(KIND_REQUEST, request_id)
            if request.elicitation_mode != "asynchronous":
                raise ValidationError(f"request {request_id} is not asynchronous")
            if request.status not in ACTIVE_REQUEST_STATUSES:
                raise ValidationError(f"request {request_id} is {request.status}, not active")
            return request_id
        candidates = [
            r for r in store.requests
            if r.elicitation_mode == "asynchronous" and r.status in ACTIVE_REQUEST_STATUSES
        ]
        if not candidates:
            raise ValidationError("unlinked commit requires an active asynchronous change request")
        if len(candidates) > 1:
            ids = ", ".join(r.id for r in candidates)
            raise ValidationError(f"multiple asynchronous change requests active ({ids})")
        return candidates[0].id

    def commit_unlinked(self, new_model: ProcessModel, request_id: str | None = None) -> int:
        """Store a version with no rationale yet (asynchronous mode, step 1).

        Requires an active asynchronous change request, recorded on the
        changeset. The repository stays in a pending state that
        validate_repository reports until every change is linked.
        """
        with self._locked():
            diags = validate_model(new_model)
            if has_errors(diags):
                raise ValidationError("model is invalid", diags)
            store = self.store
            request_id = self._pick_async_request(store, request_id)
            old = self.get_version(self._head)
            changeset = delta.diff(old, new_model, self._head, self._head + 1)
            if not changeset.changes:
                raise ValidationError("no changes between head and the new model")
            changeset = replace(changeset, level_at_commit=self._level, request_id=request_id)
            self._store_version(new_model, changeset)
            return self._head

    def link_rationale(
        self,
        version: int,
        change_ids: Sequence[str],
        resolution_id: str | None = None,
        justification: str | None = None,
    ) -> ChangeSet:
        """Attach rationale to stored changes (asynchronous mode, step 2).

        Every named change must exist in that version's changeset and be
        unlinked. The links must satisfy the active level's schema; on
        success they are appended to the changeset file and linked open
        resolutions are closed.
        """
        if not change_ids:
            raise ValidationError("no change ids given")
        with self._locked():
            if not 1 <= version <= self._head:
                raise NotFoundError(f"no changeset {version}")
            cs_text = self.get_changeset_text(version)
            changeset = delta.parse_changeset(cs_text)
            known = set(changeset.change_ids)
            already = {l.change_id for l in changeset.links}
            links = []
            for cid in dict.fromkeys(change_ids):
                if cid not in known:
                    raise NotFoundError(f"no change {cid} in version {version}")
                if cid in already:
                    raise ValidationError(f"change {cid} of version {version} is already linked")
                links.append(RationaleLink(cid, resolution_id=resolution_id, justification=justification))

            store = self.store
            view = ChangeSet(
                changeset.from_version,
                changeset.to_version,
                tuple(c for c in changeset.changes if c.change_id in set(change_ids)),
                tuple(links),
                self._level,
            )
            diags = validate_changeset_rationale(view, store, self._level)
            if has_errors(diags):
                raise ValidationError(f"rationale incomplete for level {self._level}", diags)

            appended = "".join(delta.serialize_link(link) for link in links)
            append_file(self.root / _changeset_rel(version), appended)
            self._sums[_changeset_rel(version)] = _sha256(cs_text + appended)
            self._close_linked_resolutions(links, store)
            self._write_config()
            return replace(changeset, links=changeset.links + tuple(links))

    # -- level ------------------------------------------------------------

    def set_level(self, level: int) -> int:
        check_level(level)
        with self._locked():
            if level < self._level:
                raise ValidationError("level decrease forbidden")
            self._level = level
            self._write_config()
        return self._level

    # -- whole-repository validation ---------------------------------------

    def validate_repository(self) -> list[Diagnostic]:
        """Audit everything: chain integrity, schemas, journals, pending links.

        Chain integrity means the stored snapshots replay: folding each
        changeset over the previous snapshot must reproduce the next
        snapshot byte-identically, every file must match its recorded
        checksum, and stored documents must be in canonical form.
        Changesets are validated at their recorded level_at_commit, not the
        active level, so raising the level never invalidates history.
        """
        diags: list[Diagnostic] = []

        def integrity(code: str, message: str) -> None:
            diags.append(error(code, message, CATEGORY_INTEGRITY))

        def read_checked(rel: str) -> str | None:
            path = self.root / rel
            if not path.is_file():
                integrity("missing-file", f"{rel} is missing")
                return None
            try:
                text = read_file(path)
            except UnicodeDecodeError:
                integrity("corrupt-file", f"{rel} is not UTF-8")
                return None
            recorded = self._sums.get(rel)
            if recorded is None:
                integrity("missing-checksum", f"no checksum recorded for {rel}")
            elif recorded != _sha256(text):
                integrity("checksum-mismatch", f"checksum mismatch for {rel}")
            return text

        # snapshots: parse, validate, canonical form
        snapshots: dict[int, str] = {}
        for x in range(self._head + 1):
            rel = _version_rel(x)
            text = read_checked(rel)
            if text is None:
                continue
            try:
                model = parse_model(text)
            except FormatError as exc:
                integrity("corrupt-file", f"{rel}: {exc}")
                continue
            if serialize_model(model) != text:
                integrity("non-canonical", f"{rel} is not in canonical form")
                continue
            for d in validate_model(model):
                diags.append(replace(d, message=f"{rel}: {d.message}"))
            snapshots[x] = text

        # stray files beyond the recorded head
        for directory, suffix, known in (
            (VERSIONS_DIR, ".pm", {f"{x}.pm" for x in range(self._head + 1)}),
            (CHANGESETS_DIR, ".cs", {f"{x}.cs" for x in range(1, self._head + 1)}),
        ):
            dir_path = self.root / directory
            if not dir_path.is_dir():
                integrity("missing-file", f"{directory}/ is missing")
                continue
            for entry in sorted(p.name for p in dir_path.iterdir()):
                if entry not in known:
                    integrity("stray-file", f"unexpected file {directory}/{entry}")

        # journals
        store: RecordStore | None = None
        try:
            store = self.store
        except (FormatError, IntegrityError, UnicodeDecodeError, FileNotFoundError) as exc:
            integrity("corrupt-journal", f"journal replay failed: {exc}")
        if store is not None:
            diags.extend(validate_store(store))
            for kind in rationale.RECORD_KINDS:
                for record in store.records(kind):
                    prefix, _, number = record.id.partition("-")
                    if number.isdigit() and int(number) >= self._counters[kind]:
                        integrity(
                            "counter-behind",
                            f"{CONFIG_NAME}: next.{kind} = {self._counters[kind]} "
                            f"but {record.id} exists",
                        )

        # changesets: canonical form, chain consistency, replay, rationale
        previous_level = None
        for x in range(1, self._head + 1):
            rel = _changeset_rel(x)
            text = read_checked(rel)
            if text is None:
                continue
            try:
                changeset = delta.parse_changeset(text)
            except FormatError as exc:
                integrity("corrupt-file", f"{rel}: {exc}")
                continue
            if delta.serialize_changeset(changeset) != text:
                integrity("non-canonical", f"{rel} is not in canonical form")
                continue
            if (changeset.from_version, changeset.to_version) != (x - 1, x):
                integrity(
                    "chain-break",
                    f"{rel}: spans {changeset.from_version}..{changeset.to_version}, expected {x - 1}..{x}",
                )
                continue
            if previous_level is not None and changeset.level_at_commit < previous_level:
                integrity("level-decrease", f"{rel}: level_at_commit decreased")
            previous_level = changeset.level_at_commit

            if x - 1 in snapshots and x in snapshots:
                try:
                    replayed = delta.apply(parse_model(snapshots[x - 1]), changeset)
                except ValidationError as exc:
                    integrity("replay-conflict", f"{rel}: {exc}")
                else:
                    if serialize_model(replayed) != snapshots[x]:
                        integrity(
                            "replay-mismatch",
                            f"replay of version {x} does not match the stored snapshot",
                        )

            if store is not None:
                for d in validate_changeset_rationale(changeset, store, changeset.level_at_commit):
                    diags.append(replace(d, message=f"version {x}: {d.message}"))

        if self._level not in rationale.LEVELS:
            integrity("bad-level", f"active level {self._level} out of range")
        return diags
