"""JSON formats for algebras, groups and reports.

Algebra files look like ``{"carrier": 2, "ops": [{"name": "xor", "arity": 2,
"table": [0, 1, 1, 0]}]}``; ops keep their signature order.  Structural
problems are reported with the byte offset of the offending value.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable

from .core import Algebra, Operation
from .errors import CloneforgeError, ParseError
from .zoo import GroupTable

_decoder = json.JSONDecoder()
_WS = " \t\r\n"


class _Located:
    """A decoded JSON value together with the character offsets of its
    children (objects: per key, arrays: per index)."""

    def __init__(self, value, start, children=None):
        self.value = value
        self.start = start
        self.children = children or {}


def _skip(text: str, i: int) -> int:
    while i < len(text) and text[i] in _WS:
        i += 1
    return i


def _walk(text: str, i: int, depth: int) -> tuple[_Located, int]:
    """Decode the value at ``i``; containers are walked ``depth`` levels deep
    so the positions of their members are known."""
    i = _skip(text, i)
    if depth == 0 or i >= len(text) or text[i] not in "{[":
        value, end = _decoder.raw_decode(text, i)
        return _Located(value, i), end
    start = i
    if text[i] == "[":
        items, children = [], {}
        i = _skip(text, i + 1)
        if text[i : i + 1] == "]":
            return _Located(items, start), i + 1
        while True:
            node, i = _walk(text, i, depth - 1)
            children[len(items)] = node
            items.append(node.value)
            i = _skip(text, i)
            if text[i : i + 1] == "]":
                return _Located(items, start, children), i + 1
            if text[i : i + 1] != ",":
                raise json.JSONDecodeError("Expecting ',' delimiter", text, i)
            i += 1
    obj, children = {}, {}
    i = _skip(text, i + 1)
    if text[i : i + 1] == "}":
        return _Located(obj, start), i + 1
    while True:
        i = _skip(text, i)
        if text[i : i + 1] != '"':
            raise json.JSONDecodeError("Expecting property name enclosed in double quotes", text, i)
        key, i = _decoder.raw_decode(text, i)
        i = _skip(text, i)
        if text[i : i + 1] != ":":
            raise json.JSONDecodeError("Expecting ':' delimiter", text, i)
        node, i = _walk(text, i + 1, depth - 1)
        children[key] = node
        obj[key] = node.value
        i = _skip(text, i)
        if text[i : i + 1] == "}":
            return _Located(obj, start, children), i + 1
        if text[i : i + 1] != ",":
            raise json.JSONDecodeError("Expecting ',' delimiter", text, i)
        i += 1


def _load(text: str, depth: int) -> tuple[_Located, callable]:
    def byte_offset(char_index: int) -> int:
        return len(text[:char_index].encode("utf-8"))

    try:
        root, end = _walk(text, 0, depth)
        if _skip(text, end) != len(text):
            raise json.JSONDecodeError("Extra data", text, _skip(text, end))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", byte_offset(exc.pos)) from None
    return root, byte_offset


def _read(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def algebra_from_text(text: str) -> Algebra:
    root, at = _load(text, 4)
    if not isinstance(root.value, dict):
        raise ParseError("algebra file must be a JSON object", at(root.start))
    for key in ("carrier", "ops"):
        if key not in root.value:
            raise ParseError(f"missing field {key!r}", at(root.start))
    carrier = root.value["carrier"]
    if not _is_int(carrier) or carrier < 1:
        raise ParseError("field 'carrier' must be a positive integer", at(root.children["carrier"].start))
    ops_node = root.children["ops"]
    if not isinstance(ops_node.value, list):
        raise ParseError("field 'ops' must be a list", at(ops_node.start))
    ops, seen = [], set()
    for idx, item in enumerate(ops_node.value):
        node = ops_node.children[idx]
        if not isinstance(item, dict):
            raise ParseError(f"ops[{idx}] must be an object", at(node.start))
        for key in ("name", "arity", "table"):
            if key not in item:
                raise ParseError(f"ops[{idx}] is missing field {key!r}", at(node.start))
        name, arity, table = item["name"], item["arity"], item["table"]
        if not isinstance(name, str) or not name:
            raise ParseError(f"ops[{idx}]: field 'name' must be a non-empty string", at(node.children["name"].start))
        if name in seen:
            raise ParseError(f"op {name!r}: duplicate symbol", at(node.children["name"].start))
        seen.add(name)
        if not _is_int(arity) or arity < 0:
            raise ParseError(f"op {name!r}: field 'arity' must be a non-negative integer", at(node.children["arity"].start))
        tnode = node.children["table"]
        if not isinstance(table, list):
            raise ParseError(f"op {name!r}: field 'table' must be a list", at(tnode.start))
        expected = carrier**arity
        if len(table) != expected:
            raise ParseError(
                f"op {name!r}: table has {len(table)} entries, expected {expected}", at(tnode.start)
            )
        for j, entry in enumerate(table):
            if not _is_int(entry) or not 0 <= entry < carrier:
                raise ParseError(
                    f"op {name!r}: table entry {j} = {entry!r} outside the carrier 0..{carrier - 1}",
                    at(tnode.children[j].start),
                )
        ops.append((name, Operation(carrier, arity, table)))
    return Algebra(carrier, ops)


def parse_algebra(path) -> Algebra:
    """Load and validate an algebra file."""
    return algebra_from_text(_read(path))


def algebra_to_dict(algebra: Algebra) -> dict:
    return {
        "carrier": algebra.size,
        "ops": [{"name": name, "arity": op.arity, "table": op.tolist()} for name, op in algebra.items()],
    }


def dumps_algebra(algebra: Algebra) -> str:
    return canonical_json(algebra_to_dict(algebra))


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


def parse_group(path) -> GroupTable:
    """Group file: ``{"table": [[...], ...]}`` holding the Cayley table."""
    root, at = _load(_read(path), 1)
    if not isinstance(root.value, dict) or "table" not in root.value:
        raise ParseError("group file must be an object with a 'table' field", at(root.start))
    table = root.value["table"]
    if not isinstance(table, list) or not all(isinstance(r, list) and all(map(_is_int, r)) for r in table):
        raise ParseError("field 'table' must be a list of integer rows", at(root.children["table"].start))
    try:
        return GroupTable(table)
    except (CloneforgeError, ValueError) as exc:
        raise ParseError(f"invalid group table: {exc}", at(root.children["table"].start)) from None


def dumps_group(group: GroupTable) -> str:
    return canonical_json({"table": group.tolist()})


def load_json(path) -> Any:
    root, _ = _load(_read(path), 0)
    return root.value


def format_homs(value_vectors: Iterable[Iterable[int]]) -> str:
    """One homomorphism per line, values in carrier order."""
    return "".join(" ".join(str(int(v)) for v in vec) + "\n" for vec in value_vectors)


def parse_homs(text: str) -> list[tuple[int, ...]]:
    return [tuple(int(x) for x in line.split()) for line in text.splitlines() if line.strip()]


def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the same directory and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
