"""Homomorphisms between finite algebras: checking, backtracking enumeration
with closure propagation, and regularization of homomorphisms out of
``O_A(n) = A^(A^n)``."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .core import Algebra, all_tuples, check_size, encode_rows, power_algebra, tuples_touching
from .errors import PreconditionError, SignatureMismatchError

DEFAULT_HOM_CAP = 2**16


@dataclass(frozen=True)
class Homomorphism:
    source: Algebra = field(repr=False)
    target: Algebra = field(repr=False)
    values: tuple[int, ...]

    def __call__(self, x: int) -> int:
        return self.values[x]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.int64)


@dataclass
class HomEnumeration:
    """Homomorphisms found, in search order; ``truncated`` is set when the cap
    stopped the search early."""

    homs: list[Homomorphism]
    truncated: bool = False

    def __iter__(self) -> Iterator[Homomorphism]:
        return iter(self.homs)

    def __len__(self):
        return len(self.homs)

    def __getitem__(self, i):
        return self.homs[i]


def _check_signatures(source: Algebra, target: Algebra):
    if source.signature != target.signature:
        raise SignatureMismatchError(f"signatures differ: {source.signature} vs {target.signature}")


def is_hom(values: Sequence[int], source: Algebra, target: Algebra) -> tuple[bool, tuple | None]:
    """Exhaustively check that ``values`` preserves every basic operation.

    Returns ``(True, None)`` or ``(False, (symbol, tuple))`` for the first
    violation in signature order, tuples in encoding order.
    """
    _check_signatures(source, target)
    vals = np.asarray(values, dtype=np.int64)
    if vals.shape != (source.size,):
        raise PreconditionError(f"map has {vals.shape[0]} values, source has {source.size} elements")
    if vals.size and (vals.min() < 0 or vals.max() >= target.size):
        raise PreconditionError("map takes values outside the target carrier")
    for (name, src_op), tgt_op in zip(source.items(), target.operations):
        m = src_op.arity
        check_size(source.size**m * max(m, 1), f"homomorphism check for {name!r}")
        tuples = all_tuples(source.size, m)
        lhs = vals[src_op.table]
        rhs = tgt_op.table[encode_rows(vals[tuples], target.size)] if m else tgt_op.table[[0]]
        bad = np.flatnonzero(lhs != rhs)
        if bad.size:
            return False, (name, tuple(int(x) for x in tuples[bad[0]]))
    return True, None


def subuniverse(algebra: Algebra, generators: Sequence[int]) -> list[int]:
    """Elements of the subalgebra generated by ``generators``, in discovery order."""
    order = list(dict.fromkeys(int(g) for g in generators))
    inside = np.zeros(algebra.size, dtype=bool)
    inside[order] = True
    done = [0] * len(algebra.operations)
    nullary_done = [False] * len(algebra.operations)
    changed = True
    while changed:
        changed = False
        for i, op in enumerate(algebra.operations):
            if op.arity == 0:
                if nullary_done[i]:
                    continue
                nullary_done[i] = True
            elif done[i] == len(order):
                continue
            arr = np.asarray(order, dtype=np.int64)
            n_old, n_total = done[i], len(order)
            done[i] = n_total
            for comps in tuples_touching(n_old, n_total, op.arity):
                out = op.table[encode_rows(arr[comps], algebra.size)] if op.arity else op.table[:1]
                fresh = np.unique(out[~inside[out]])
                if fresh.size:
                    inside[fresh] = True
                    order.extend(fresh.tolist())
                    changed = True
    return order


def find_generating_set(algebra: Algebra) -> list[int]:
    """Greedy generating set: keep adding the smallest element not yet generated."""
    gens: list[int] = []
    covered = np.zeros(algebra.size, dtype=bool)
    covered[subuniverse(algebra, [])] = True
    while not covered.all():
        nxt = int(np.flatnonzero(~covered)[0])
        gens.append(nxt)
        covered[subuniverse(algebra, gens)] = True
    return gens


class _PartialMap:
    """Partial assignment closed under the basic operations (semi-naive)."""

    def __init__(self, source: Algebra, target: Algebra):
        self.source = source
        self.target = target
        self.values = np.full(source.size, -1, dtype=np.int64)
        self.order: list[int] = []
        self.done = [0] * len(source.operations)
        self.nullary_done = [False] * len(source.operations)

    def copy(self) -> "_PartialMap":
        other = _PartialMap.__new__(_PartialMap)
        other.source, other.target = self.source, self.target
        other.values = self.values.copy()
        other.order = list(self.order)
        other.done = list(self.done)
        other.nullary_done = list(self.nullary_done)
        return other

    def assign(self, x: int, v: int) -> bool:
        if self.values[x] >= 0:
            return self.values[x] == v
        self.values[x] = v
        self.order.append(x)
        return self.propagate()

    def propagate(self) -> bool:
        src, tgt = self.source, self.target
        progress = True
        while progress:
            progress = False
            for i, (s_op, t_op) in enumerate(zip(src.operations, tgt.operations)):
                m = s_op.arity
                if m == 0:
                    if self.nullary_done[i]:
                        continue
                    self.nullary_done[i] = True
                    n_old, n_total = 0, 0
                else:
                    if self.done[i] == len(self.order):
                        continue
                    n_old, n_total = self.done[i], len(self.order)
                    self.done[i] = n_total
                arr = np.asarray(self.order, dtype=np.int64)
                for comps in tuples_touching(n_old, n_total, m):
                    elems = arr[comps]
                    if m:
                        s = s_op.table[encode_rows(elems, src.size)]
                        t = t_op.table[encode_rows(self.values[elems], tgt.size)]
                    else:
                        s, t = s_op.table[:1], t_op.table[:1]
                    unassigned = self.values[s] < 0
                    if unassigned.any():
                        new_s, first = np.unique(s[unassigned], return_index=True)
                        self.values[new_s] = t[unassigned][first]
                        self.order.extend(new_s.tolist())
                        progress = True
                    if (self.values[s] != t).any():
                        return False
        return True


def enumerate_homs(source: Algebra, target: Algebra, cap: int = DEFAULT_HOM_CAP) -> HomEnumeration:
    """All homomorphisms ``source -> target`` by backtracking over a generating
    set of ``source``, values tried in ascending order."""
    _check_signatures(source, target)
    gens = find_generating_set(source)
    found: list[Homomorphism] = []
    root = _PartialMap(source, target)
    if not root.propagate():
        return HomEnumeration(found)

    def search(state: _PartialMap, i: int) -> bool:
        while i < len(gens) and state.values[gens[i]] >= 0:
            i += 1
        if i == len(gens):
            values = tuple(int(v) for v in state.values)
            ok, _ = is_hom(values, source, target)
            if ok:
                if len(found) >= cap:
                    return False
                found.append(Homomorphism(source, target, values))
            return True
        for v in range(target.size):
            child = state.copy()
            if child.assign(gens[i], v) and not search(child, i + 1):
                return False
        return True

    complete = search(root, 0)
    return HomEnumeration(found, truncated=not complete)


def operation_algebra(algebra: Algebra, n: int) -> Algebra:
    """``O_A(n) = A^(A^n)``: the power whose elements are the ``n``-ary
    operations, each indexed by the code of its table."""
    return power_algebra(algebra, algebra.size**n)


def _check_power(h: Homomorphism, n: int):
    k = h.target.size
    if h.source.size != k ** (k**n) or h.source.signature != h.target.signature:
        raise PreconditionError(f"source is not A^(A^{n}) for the target algebra")
    if h.source != operation_algebra(h.target, n):
        raise PreconditionError(f"source is not A^(A^{n}) with pointwise operations")


def projection_codes(carrier_size: int, n: int) -> list[int]:
    """Codes of ``pi_0..pi_{n-1}`` as elements of ``A^(A^n)``."""
    k = carrier_size
    width = k**n
    return [sum(((a // k**j) % k) * k**a for a in range(width)) for j in range(n)]


def regularization_point(h: Homomorphism, n: int) -> tuple[int, ...]:
    """``h o u``: the point ``(h(pi_0), ..., h(pi_{n-1}))`` of ``A^n``."""
    return tuple(h.values[c] for c in projection_codes(h.target.size, n))


def regularize(h: Homomorphism, n: int, *, check: bool = True) -> Homomorphism:
    """The evaluation map at ``h o u``: ``f -> f(h(pi_0), ..., h(pi_{n-1}))``."""
    if check:
        _check_power(h, n)
    k = h.target.size
    point = regularization_point(h, n)
    pos = sum(a * k**j for j, a in enumerate(point))
    codes = np.arange(h.source.size, dtype=np.int64)
    values = (codes // k**pos) % k
    return Homomorphism(h.source, h.target, tuple(int(v) for v in values))


def is_regular(h: Homomorphism, n: int) -> bool:
    return regularize(h, n).values == h.values


def evaluation_hom(algebra: Algebra, n: int, point: Sequence[int], source: Algebra | None = None) -> Homomorphism:
    """``pi_a : A^(A^n) -> A``, ``f -> f(a)``."""
    k = algebra.size
    source = source if source is not None else operation_algebra(algebra, n)
    pos = sum(int(a) * k**j for j, a in enumerate(point))
    codes = np.arange(source.size, dtype=np.int64)
    return Homomorphism(source, algebra, tuple(int(v) for v in (codes // k**pos) % k))
