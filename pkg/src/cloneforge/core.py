"""Carriers, operation tables and the tuple encoding everything else relies on.

A carrier of size ``k`` is the set ``{0, ..., k-1}``.  An ``n``-ary operation
is stored as a table of length ``k**n``; entry ``encode_tuple(t, k)`` holds
``f(t)``.  The encoding is little-endian: component ``j`` of a tuple is radix
digit ``j``.
"""

from __future__ import annotations

import os
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    ArityError,
    CarrierMismatchError,
    EncodingError,
    ResourceLimitError,
)

DEFAULT_TABLE_LIMIT = 2**24
TABLE_LIMIT_ENV = "CLONEFORGE_TABLE_LIMIT"

# largest radix power that is still safe to hold in an int64 code
_INT64_CODE_BOUND = 2**62


def table_limit() -> int:
    """Current table-size guard; the environment variable overrides the default."""
    raw = os.environ.get(TABLE_LIMIT_ENV)
    if raw is None:
        return DEFAULT_TABLE_LIMIT
    try:
        value = int(raw)
    except ValueError:
        raise ResourceLimitError(f"{TABLE_LIMIT_ENV}={raw!r} is not an integer") from None
    if value < 1:
        raise ResourceLimitError(f"{TABLE_LIMIT_ENV} must be positive, got {value}")
    return value


def check_size(count: int, what: str = "table") -> int:
    limit = table_limit()
    if count > limit:
        raise ResourceLimitError(
            f"{what} of {count} entries exceeds the table limit {limit}"
            f" (set {TABLE_LIMIT_ENV} to raise it)",
            limit=limit,
        )
    return count


def _check_carrier(size: int) -> int:
    if not isinstance(size, (int, np.integer)) or size < 1:
        raise ValueError(f"carrier size must be a positive integer, got {size!r}")
    return int(size)


def encode_tuple(t: Sequence[int], base: int) -> int:
    index = 0
    scale = 1
    for j, component in enumerate(t):
        if not 0 <= component < base:
            raise EncodingError(f"component {j} = {component} outside 0..{base - 1}")
        index += int(component) * scale
        scale *= base
    return index


def decode_tuple(index: int, base: int, n: int) -> tuple[int, ...]:
    if not 0 <= index < base**n:
        raise EncodingError(f"index {index} outside 0..{base**n - 1}")
    out = []
    for _ in range(n):
        index, digit = divmod(index, base)
        out.append(digit)
    return tuple(out)


def radix_powers(base: int, n: int) -> np.ndarray:
    return base ** np.arange(n, dtype=np.int64)


def all_tuples(base: int, n: int) -> np.ndarray:
    """Every ``n``-tuple over ``range(base)`` as rows, in encoding order."""
    check_size(base**n * max(n, 1), "tuple enumeration")
    idx = np.arange(base**n, dtype=np.int64)
    return (idx[:, None] // radix_powers(base, n)[None, :]) % base


def encode_rows(rows: np.ndarray, base: int) -> np.ndarray:
    """Vectorised ``encode_tuple`` over the last axis (int64; caller bounds the size)."""
    rows = np.asarray(rows, dtype=np.int64)
    return rows @ radix_powers(base, rows.shape[-1])


def tuples_touching(n_old: int, n_total: int, m: int, chunk: int = 1 << 18) -> Iterator[np.ndarray]:
    """Yield ``(c, m)`` index arrays covering every m-tuple over ``range(n_total)``
    with at least one component ``>= n_old``.

    Used for semi-naive closure: members below ``n_old`` were already combined
    with each other in an earlier pass.  The tuples are split into disjoint
    blocks by the highest position holding a new index; within a block
    component 0 varies fastest.
    """
    if m == 0:
        if n_old == 0:
            yield np.zeros((1, 0), dtype=np.int64)
        return
    if n_total <= n_old:
        return
    for j in range(m):
        lows = [0] * j + [n_old] + [0] * (m - 1 - j)
        highs = [n_total] * j + [n_total] + [n_old] * (m - 1 - j)
        lens = [h - lo for lo, h in zip(lows, highs)]
        size = 1
        for length in lens:
            size *= length
        if size == 0:
            continue
        lows_arr = np.asarray(lows, dtype=np.int64)
        lens_arr = np.asarray(lens, dtype=np.int64)
        strides = np.cumprod(np.concatenate(([1], lens_arr[:-1])))
        for start in range(0, size, chunk):
            flat = np.arange(start, min(size, start + chunk), dtype=np.int64)
            yield (flat[:, None] // strides[None, :]) % lens_arr[None, :] + lows_arr[None, :]


class Operation:
    """An ``arity``-ary operation on ``{0..carrier_size-1}`` given by its full table.

    Instances are immutable and hashable; ordering is by arity, then by the
    table read lexicographically.
    """

    __slots__ = ("carrier_size", "arity", "_table", "_key")

    def __init__(self, carrier_size: int, arity: int, table, *, validate: bool = True):
        carrier_size = _check_carrier(carrier_size)
        if arity < 0:
            raise ArityError(f"arity must be non-negative, got {arity}")
        arr = np.array(table, dtype=np.int64).reshape(-1)
        if validate:
            expected = carrier_size**arity
            if arr.shape[0] != expected:
                raise ArityError(
                    f"table has {arr.shape[0]} entries, expected {carrier_size}**{arity} = {expected}"
                )
            check_size(expected)
            if arr.size and (arr.min() < 0 or arr.max() >= carrier_size):
                bad = int(np.flatnonzero((arr < 0) | (arr >= carrier_size))[0])
                raise EncodingError(f"table entry {bad} = {arr[bad]} outside 0..{carrier_size - 1}")
        arr.flags.writeable = False
        self.carrier_size = carrier_size
        self.arity = int(arity)
        self._table = arr
        self._key = None

    @property
    def table(self) -> np.ndarray:
        return self._table

    def tolist(self) -> list[int]:
        return self._table.tolist()

    def __call__(self, *args: int) -> int:
        if len(args) != self.arity:
            raise ArityError(f"expected {self.arity} arguments, got {len(args)}")
        return int(self._table[encode_tuple(args, self.carrier_size)])

    def code(self) -> int:
        """Index of this operation as an element of ``A^(A^n)``."""
        return encode_tuple(self._table.tolist(), self.carrier_size)

    @classmethod
    def from_code(cls, carrier_size: int, arity: int, code: int) -> "Operation":
        return cls(carrier_size, arity, decode_tuple(code, carrier_size, carrier_size**arity))

    def _sort_key(self):
        if self._key is None:
            self._key = (self.carrier_size, self.arity, tuple(self._table.tolist()))
        return self._key

    def __eq__(self, other):
        if not isinstance(other, Operation):
            return NotImplemented
        return self._sort_key() == other._sort_key()

    def __lt__(self, other):
        if not isinstance(other, Operation):
            return NotImplemented
        return self._sort_key() < other._sort_key()

    def __hash__(self):
        return hash(self._sort_key())

    def __repr__(self):
        body = self.tolist()
        if len(body) > 16:
            body = f"{body[:16]}..."
        return f"Operation(k={self.carrier_size}, n={self.arity}, {body})"


def projection(carrier_size: int, n: int, j: int) -> Operation:
    if not 0 <= j < n:
        raise ArityError(f"projection index {j} outside 0..{n - 1}")
    check_size(carrier_size**n)
    idx = np.arange(carrier_size**n, dtype=np.int64)
    return Operation(carrier_size, n, (idx // carrier_size**j) % carrier_size, validate=False)


def projections(carrier_size: int, n: int) -> tuple[Operation, ...]:
    return tuple(projection(carrier_size, n, j) for j in range(n))


def constant(carrier_size: int, n: int, value: int) -> Operation:
    return Operation(carrier_size, n, np.full(carrier_size**n, value, dtype=np.int64))


def compose(f: Operation, gs: Sequence[Operation], n: int | None = None) -> Operation:
    """``t -> f(g_0(t), ..., g_{m-1}(t))``.

    ``n`` is only needed when ``gs`` is empty (``f`` nullary).
    """
    if len(gs) != f.arity:
        raise ArityError(f"f has arity {f.arity} but {len(gs)} inner operations were given")
    if gs:
        arities = {g.arity for g in gs}
        if len(arities) != 1:
            raise ArityError(f"inner operations have mixed arities {sorted(arities)}")
        (inner,) = arities
        if n is not None and n != inner:
            raise ArityError(f"requested arity {n} but inner operations have arity {inner}")
        n = inner
    elif n is None:
        raise ArityError("arity must be given when composing a nullary operation")
    k = f.carrier_size
    for g in gs:
        if g.carrier_size != k:
            raise CarrierMismatchError(f"carrier sizes {k} and {g.carrier_size} differ")
    check_size(k**n)
    if not gs:
        return constant(k, n, int(f.table[0]))
    idx = np.zeros(k**n, dtype=np.int64)
    for i, g in enumerate(gs):
        idx += g.table * k**i
    return Operation(k, n, f.table[idx], validate=False)


def pushforward(f: Operation, xi: Sequence[int], target_arity: int) -> Operation:
    """Reindex ``f`` along ``xi: range(f.arity) -> range(target_arity)``:
    the result sends ``a`` to ``f(a o xi)``."""
    if len(xi) != f.arity:
        raise ArityError(f"xi has {len(xi)} entries, f has arity {f.arity}")
    for j, x in enumerate(xi):
        if not 0 <= x < target_arity:
            raise EncodingError(f"xi({j}) = {x} outside 0..{target_arity - 1}")
    k = f.carrier_size
    check_size(k**target_arity)
    a = np.arange(k**target_arity, dtype=np.int64)
    idx = np.zeros_like(a)
    for j, x in enumerate(xi):
        idx += ((a // k**x) % k) * k**j
    return Operation(k, target_arity, f.table[idx], validate=False)


def all_operations(carrier_size: int, n: int) -> np.ndarray:
    """Tables of every ``n``-ary operation, one per row, row index = operation code."""
    width = carrier_size**n
    check_size(carrier_size**width, "operation enumeration")
    check_size(carrier_size**width * width, "operation enumeration")
    return all_tuples(carrier_size, width)


def table_codes(tables: np.ndarray, carrier_size: int) -> np.ndarray:
    """Codes of many tables at once; only valid while ``k**width`` fits in int64."""
    width = tables.shape[-1]
    if carrier_size**width > _INT64_CODE_BOUND:
        raise ResourceLimitError(f"codes of width {width} over base {carrier_size} overflow int64")
    return encode_rows(tables, carrier_size)


class Signature:
    """Ordered operation symbols with their arities."""

    __slots__ = ("symbols",)

    def __init__(self, symbols: Iterable[tuple[str, int]]):
        symbols = tuple((str(name), int(arity)) for name, arity in symbols)
        names = [name for name, _ in symbols]
        if len(set(names)) != len(names):
            dup = next(name for name in names if names.count(name) > 1)
            raise ValueError(f"duplicate operation symbol {dup!r}")
        for name, arity in symbols:
            if arity < 0:
                raise ArityError(f"symbol {name!r} has negative arity {arity}")
        self.symbols = symbols

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.symbols)

    def arity(self, name: str) -> int:
        for sym, arity in self.symbols:
            if sym == name:
                return arity
        raise KeyError(name)

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __eq__(self, other):
        return isinstance(other, Signature) and self.symbols == other.symbols

    def __hash__(self):
        return hash(self.symbols)

    def __repr__(self):
        return f"Signature({list(self.symbols)})"


class Algebra:
    """A carrier together with named basic operations."""

    __slots__ = ("size", "signature", "operations")

    def __init__(self, size: int, ops: Mapping[str, Operation] | Iterable[tuple[str, Operation]]):
        size = _check_carrier(size)
        items = list(ops.items()) if isinstance(ops, Mapping) else list(ops)
        for name, op in items:
            if op.carrier_size != size:
                raise CarrierMismatchError(
                    f"operation {name!r} lives on carrier {op.carrier_size}, algebra has {size}"
                )
        self.size = size
        self.signature = Signature((name, op.arity) for name, op in items)
        self.operations = tuple(op for _, op in items)

    @property
    def names(self) -> tuple[str, ...]:
        return self.signature.names

    def items(self):
        return zip(self.names, self.operations)

    def __getitem__(self, name: str) -> Operation:
        for sym, op in self.items():
            if sym == name:
                return op
        raise KeyError(name)

    def __eq__(self, other):
        return (
            isinstance(other, Algebra)
            and self.size == other.size
            and self.signature == other.signature
            and self.operations == other.operations
        )

    def __hash__(self):
        return hash((self.size, self.signature, self.operations))

    def __repr__(self):
        return f"Algebra(size={self.size}, symbols={list(self.signature.symbols)})"


def power_algebra(algebra: Algebra, exponent: int) -> Algebra:
    """``A^X`` with pointwise operations, ``|X| = exponent``.

    Elements are tuples of length ``exponent`` indexed by ``encode_tuple``.
    """
    k = algebra.size
    size = k**exponent
    elems = all_tuples(k, exponent)
    ops = []
    for name, op in algebra.items():
        m = op.arity
        check_size(size**m, f"power table for {name!r}")
        comps = all_tuples(size, m)
        idx = np.zeros((size**m, exponent), dtype=np.int64)
        for j in range(m):
            idx += elems[comps[:, j]] * k**j
        ops.append((name, Operation(size, m, encode_rows(op.table[idx], k), validate=False)))
    return Algebra(size, ops)


class OpSet:
    """Duplicate-free, canonically ordered operations of one arity on one carrier."""

    __slots__ = ("carrier_size", "arity", "members", "_index")

    def __init__(self, carrier_size: int, arity: int, members: Iterable[Operation] = ()):
        carrier_size = _check_carrier(carrier_size)
        uniq = set()
        for op in members:
            if op.carrier_size != carrier_size:
                raise CarrierMismatchError(f"member on carrier {op.carrier_size}, expected {carrier_size}")
            if op.arity != arity:
                raise ArityError(f"member of arity {op.arity}, expected {arity}")
            uniq.add(op)
        self.carrier_size = carrier_size
        self.arity = arity
        self.members = tuple(sorted(uniq))
        self._index = None

    @classmethod
    def from_tables(cls, carrier_size: int, arity: int, tables: np.ndarray) -> "OpSet":
        tables = np.asarray(tables, dtype=np.int64).reshape(-1, carrier_size**arity)
        return cls(carrier_size, arity, (Operation(carrier_size, arity, row, validate=False) for row in tables))

    def tables(self) -> np.ndarray:
        if not self.members:
            return np.zeros((0, self.carrier_size**self.arity), dtype=np.int64)
        return np.stack([op.table for op in self.members])

    def codes(self) -> list[int]:
        return [op.code() for op in self.members]

    def __contains__(self, op) -> bool:
        if self._index is None:
            self._index = frozenset(self.members)
        return op in self._index

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]

    def issubset(self, other: "OpSet") -> bool:
        return all(op in other for op in self.members)

    def __le__(self, other):
        return self.issubset(other)

    def __eq__(self, other):
        if not isinstance(other, OpSet):
            return NotImplemented
        return (self.carrier_size, self.arity, self.members) == (other.carrier_size, other.arity, other.members)

    def __hash__(self):
        return hash((self.carrier_size, self.arity, self.members))

    def __repr__(self):
        return f"OpSet(k={self.carrier_size}, n={self.arity}, size={len(self.members)})"
