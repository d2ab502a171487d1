"""Kronecker products and commutation of operations.

Matrices ``a in A^(X x Y)`` are stored flat in ``encode_tuple`` order over the
product with the row index varying fastest, i.e. entry ``(x, y)`` sits at
position ``x + X*y``.  With this layout the tables of ``f * g`` and ``f ~* g``
(both of arity ``X*Y``) are directly comparable entry by entry.

    (f * g)(a)  = g(f(column_0), ..., f(column_{Y-1}))
    (f ~* g)(a) = f(g(row_0), ..., g(row_{X-1}))
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import (
    Operation,
    all_tuples,
    check_size,
    decode_tuple,
    encode_tuple,
    projections,
    pushforward,
    radix_powers,
)
from .errors import ArityError, CarrierMismatchError, EncodingError


class Matrix:
    __slots__ = ("carrier_size", "rows", "cols", "entries")

    def __init__(self, carrier_size: int, rows: int, cols: int, entries: Sequence[int]):
        entries = tuple(int(e) for e in entries)
        if len(entries) != rows * cols:
            raise ArityError(f"{rows}x{cols} matrix needs {rows * cols} entries, got {len(entries)}")
        for i, e in enumerate(entries):
            if not 0 <= e < carrier_size:
                raise EncodingError(f"entry {i} = {e} outside 0..{carrier_size - 1}")
        self.carrier_size = carrier_size
        self.rows = rows
        self.cols = cols
        self.entries = entries

    @classmethod
    def from_code(cls, carrier_size, rows, cols, code):
        return cls(carrier_size, rows, cols, decode_tuple(code, carrier_size, rows * cols))

    @classmethod
    def from_rows(cls, carrier_size, rows: Sequence[Sequence[int]]):
        n_rows = len(rows)
        n_cols = len(rows[0]) if rows else 0
        flat = [rows[x][y] for y in range(n_cols) for x in range(n_rows)]
        return cls(carrier_size, n_rows, n_cols, flat)

    def entry(self, x: int, y: int) -> int:
        return self.entries[x + self.rows * y]

    def row(self, x: int) -> tuple[int, ...]:
        return tuple(self.entries[x + self.rows * y] for y in range(self.cols))

    def column(self, y: int) -> tuple[int, ...]:
        return self.entries[self.rows * y : self.rows * (y + 1)]

    def code(self) -> int:
        return encode_tuple(self.entries, self.carrier_size)

    def as_rows(self) -> list[list[int]]:
        return [list(self.row(x)) for x in range(self.rows)]

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (self.carrier_size, self.rows, self.cols, self.entries) == (
            other.carrier_size,
            other.rows,
            other.cols,
            other.entries,
        )

    def __hash__(self):
        return hash((self.carrier_size, self.rows, self.cols, self.entries))

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols}, rows={self.as_rows()})"


def _same_carrier(f: Operation, g: Operation) -> int:
    if f.carrier_size != g.carrier_size:
        raise CarrierMismatchError(f"carrier sizes {f.carrier_size} and {g.carrier_size} differ")
    return f.carrier_size


def _line_codes(k: int, X: int, Y: int) -> tuple[np.ndarray, np.ndarray]:
    """For every matrix in ``A^(X x Y)`` (encoding order): codes of its
    columns, shape ``(M, Y)``, and of its rows, shape ``(M, X)``."""
    check_size(k ** (X * Y), "Kronecker table")
    mats = all_tuples(k, X * Y)
    col_codes = np.zeros((mats.shape[0], Y), dtype=np.int64)
    row_codes = np.zeros((mats.shape[0], X), dtype=np.int64)
    for y in range(Y):
        for x in range(X):
            col_codes[:, y] += mats[:, x + X * y] * k**x
            row_codes[:, x] += mats[:, x + X * y] * k**y
    return col_codes, row_codes


def kron_first(f: Operation, g: Operation) -> Operation:
    """First Kronecker product: apply ``f`` down each column, then ``g`` across."""
    k = _same_carrier(f, g)
    col_codes, _ = _line_codes(k, f.arity, g.arity)
    inner = f.table[col_codes] @ radix_powers(k, g.arity)
    return Operation(k, f.arity * g.arity, g.table[inner], validate=False)


def kron_second(f: Operation, g: Operation) -> Operation:
    """Second Kronecker product: apply ``g`` along each row, then ``f`` down."""
    k = _same_carrier(f, g)
    _, row_codes = _line_codes(k, f.arity, g.arity)
    inner = g.table[row_codes] @ radix_powers(k, f.arity)
    return Operation(k, f.arity * g.arity, f.table[inner], validate=False)


def commutes(f: Operation, g: Operation) -> tuple[bool, Matrix | None]:
    """Whether ``f`` and ``g`` commute; otherwise also the smallest matrix
    (by encoding) on which the two Kronecker products disagree."""
    first = kron_first(f, g).table
    second = kron_second(f, g).table
    diff = np.flatnonzero(first != second)
    if diff.size == 0:
        return True, None
    return False, Matrix.from_code(f.carrier_size, f.arity, g.arity, int(diff[0]))


def commutation_table(
    f_tables: np.ndarray, n: int, g_tables: np.ndarray, m: int, carrier_size: int, block: int = 1 << 22
) -> np.ndarray:
    """Boolean ``(len(f_tables), len(g_tables))`` array: entry ``[i, j]`` says
    whether the ``n``-ary ``f_i`` commutes with the ``m``-ary ``g_j``."""
    k = carrier_size
    F = np.asarray(f_tables, dtype=np.int64).reshape(-1, k**n)
    G = np.asarray(g_tables, dtype=np.int64).reshape(-1, k**m)
    col_codes, row_codes = _line_codes(k, n, m)
    n_mats = col_codes.shape[0]
    out = np.zeros((F.shape[0], G.shape[0]), dtype=bool)
    if F.shape[0] == 0 or G.shape[0] == 0:
        return out
    pow_n = radix_powers(k, n)
    pow_m = radix_powers(k, m)
    step = max(1, block // max(n_mats, 1))
    if F.shape[0] >= G.shape[0]:
        # loop over g, vectorise over blocks of f
        for j in range(G.shape[0]):
            g = G[j]
            row_vals = g[row_codes] @ pow_n
            for lo in range(0, F.shape[0], step):
                Fb = F[lo : lo + step]
                first = g[Fb[:, col_codes] @ pow_m]
                second = Fb[:, row_vals]
                out[lo : lo + step, j] = (first == second).all(axis=1)
    else:
        for i in range(F.shape[0]):
            f = F[i]
            col_vals = f[col_codes] @ pow_m
            for lo in range(0, G.shape[0], step):
                Gb = G[lo : lo + step]
                first = Gb[:, col_vals]
                second = f[Gb[:, row_codes] @ pow_n]
                out[i, lo : lo + step] = (first == second).all(axis=1)
    return out


def evaluation_matrix(carrier_size: int, n: int) -> Matrix:
    """The ``n x k**n`` matrix whose column ``a`` is the tuple ``a`` itself."""
    k = carrier_size
    check_size(k**n * max(n, 1), "evaluation matrix")
    cols = all_tuples(k, n)
    return Matrix(k, n, k**n, cols.reshape(-1).tolist())


def u_map(carrier_size: int, n: int) -> tuple[Operation, ...]:
    return projections(carrier_size, n)


def pushforward_encoding(g: Operation, a: Matrix) -> Operation:
    """Pushforward of ``g`` along the map sending column ``y`` of ``a`` to its
    code in ``A^X``; the result has arity ``|A|**X``."""
    if a.carrier_size != g.carrier_size:
        raise CarrierMismatchError(f"carrier sizes {a.carrier_size} and {g.carrier_size} differ")
    if a.cols != g.arity:
        raise ArityError(f"matrix has {a.cols} columns but g has arity {g.arity}")
    k = g.carrier_size
    xi = [encode_tuple(a.column(y), k) for y in range(a.cols)]
    return pushforward(g, xi, k**a.rows)


def apply_to_point(f: Operation, point: Sequence[int]) -> int:
    """``f`` evaluated at a tuple of carrier elements (helper for ``f(h o u)``)."""
    return int(f.table[encode_tuple(point, f.carrier_size)])
