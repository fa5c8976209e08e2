"""Shared text-format primitives for the repository file formats.

All files are UTF-8 with LF line endings and are read and written without
newline translation, so quoted values round-trip any Unicode scalar
(including carriage returns) byte-exactly.

Two encoding contexts exist:

* *values* occupy the rest of a ``key = value`` line. They are emitted bare
  when non-empty, free of leading/trailing spaces, and matching
  ``[A-Za-z0-9_. -]+``; otherwise double-quoted with the escapes ``\\\\``,
  ``\\"``, ``\\n``, ``\\t``.
* *fields* are space-separated members of a single line (changeset payloads,
  journal transitions). A field is bare only when it contains no whitespace,
  quotes, backslashes, or control characters; the reserved field ``!none``
  (an absent value) is always emitted bare, and a literal string ``!none``
  is therefore always quoted.
"""

from __future__ import annotations

import re
from pathlib import Path

from .errors import FormatError

TOKEN_RE = re.compile(r"[A-Za-z0-9_.-]+\Z")
_BARE_VALUE_RE = re.compile(r"[A-Za-z0-9_. -]+\Z")
_BARE_FIELD_RE = re.compile(r'[^\x00-\x20"\\\x7f]+\Z')

NONE_FIELD = "!none"

_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}


def is_token(text: str) -> bool:
    """True when ``text`` is a non-empty run of ``[A-Za-z0-9_.-]``."""
    return bool(TOKEN_RE.fullmatch(text))


def quote(value: str) -> str:
    escaped = (
        value.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\t", "\\t")
    )
    return f'"{escaped}"'


def encode_value(value: str) -> str:
    """Encode an attribute value for a ``key = value`` line."""
    if value and _BARE_VALUE_RE.fullmatch(value) and value[0] != " " and value[-1] != " ":
        return value
    return quote(value)


def encode_field(value: str) -> str:
    """Encode one space-separated field of a payload line."""
    if value and value != NONE_FIELD and _BARE_FIELD_RE.fullmatch(value):
        return value
    return quote(value)


def encode_fields(values: list[str]) -> str:
    return " ".join(encode_field(v) for v in values)


def parse_quoted(text: str, start: int, line_no: int, col_base: int = 1) -> tuple[str, int]:
    """Parse a quoted string beginning at ``text[start]`` (a ``\"``).

    Returns the decoded value and the index just past the closing quote.
    ``col_base`` is the 1-based column of ``text[0]`` within its line, used
    for error reporting.
    """
    out: list[str] = []
    i = start + 1
    while i < len(text):
        ch = text[i]
        if ch == '"':
            return "".join(out), i + 1
        if ch == "\\":
            i += 1
            if i >= len(text):
                raise FormatError("unterminated escape", line_no, col_base + i - 1)
            mapped = _ESCAPES.get(text[i])
            if mapped is None:
                raise FormatError(f"invalid escape \\{text[i]}", line_no, col_base + i - 1)
            out.append(mapped)
        else:
            out.append(ch)
        i += 1
    raise FormatError("unterminated quoted value", line_no, col_base + start)


def decode_value(raw: str, line_no: int, col_base: int) -> str:
    """Decode the value portion of a ``key = value`` line."""
    if raw.startswith('"'):
        value, end = parse_quoted(raw, 0, line_no, col_base)
        if end != len(raw):
            raise FormatError("trailing characters after quoted value", line_no, col_base + end)
        return value
    if not raw:
        raise FormatError("empty value (use \"\" for an empty string)", line_no, col_base)
    if not _BARE_VALUE_RE.fullmatch(raw):
        raise FormatError("value must be quoted", line_no, col_base)
    if raw[0] == " " or raw[-1] == " ":
        raise FormatError("bare value has leading or trailing space", line_no, col_base)
    return raw


def split_fields(line: str, line_no: int = 0) -> list[str]:
    """Split a line into decoded fields (see module docstring)."""
    return [value for value, _ in split_fields_tagged(line, line_no)]


def split_fields_tagged(line: str, line_no: int = 0) -> list[tuple[str, bool]]:
    """Like :func:`split_fields` but tags each field as quoted or bare.

    The tag lets callers distinguish the reserved bare field ``!none`` from
    a literal quoted ``"!none"`` value.
    """
    fields: list[tuple[str, bool]] = []
    i, n = 0, len(line)
    while i < n:
        if line[i] == " ":
            i += 1
            continue
        if line[i] == '"':
            value, end = parse_quoted(line, i, line_no)
            if end < n and line[end] != " ":
                raise FormatError("expected space after quoted field", line_no, end + 1)
            fields.append((value, True))
            i = end
        else:
            j = i
            while j < n and line[j] != " ":
                j += 1
            raw = line[i:j]
            if '"' in raw or "\\" in raw:
                raise FormatError("quote or backslash in bare field", line_no, i + 1)
            fields.append((raw, False))
            i = j
    return fields


def significant_lines(doc: str) -> list[tuple[int, str]]:
    """Split a document into (1-based line number, line) pairs, dropping
    blank lines and ``#`` comments. Accepted on input, never emitted."""
    out: list[tuple[int, str]] = []
    for no, line in enumerate(doc.split("\n"), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        out.append((no, line))
    return out


def read_file(path: Path | str) -> str:
    """Read a file byte-exactly (no newline translation)."""
    return Path(path).read_bytes().decode("utf-8")


def write_file(path: Path | str, text: str) -> None:
    Path(path).write_bytes(text.encode("utf-8"))


def append_file(path: Path | str, text: str) -> None:
    with Path(path).open("ab") as fh:
        fh.write(text.encode("utf-8"))
