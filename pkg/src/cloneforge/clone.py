"""Clone slices as generated subalgebras.

The ``n``-ary part of the clone generated by ``F`` is the smallest subset of
``A^(A^n)`` containing the projections and closed under every generator
applied pointwise.  It is computed by a breadth-first, semi-naive worklist:
each pass only evaluates generator tuples that involve at least one member
found in the previous pass.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import (
    Algebra,
    Operation,
    OpSet,
    all_operations,
    all_tuples,
    check_size,
    encode_rows,
    projections,
    radix_powers,
)
from .errors import CarrierMismatchError, ResourceLimitError

DEFAULT_MEMBER_LIMIT = 2**20

# presence bitmap is used when the whole slice universe has at most this many codes
_BITMAP_LIMIT = 2**26
# the relational upper bound is only computed when the universe is this small
_BOUND_UNIVERSE_LIMIT = 2**20
_BOUND_MEMBERS = 2**12
# tuples evaluated per vectorised box
_BOX_TUPLES = 2**20
# generator lookup tables over packed digit groups stay below this many entries
_LUT_LIMIT = 2**16


@dataclass(frozen=True)
class DerivationCertificate:
    """Term tree witnessing membership in a clone slice.

    Leaves are projections (``projection`` set) or nullary generators;
    internal nodes apply ``generator`` to the children pointwise.
    """

    symbol: str
    children: tuple["DerivationCertificate", ...] = ()
    generator: Operation | None = None
    projection: int | None = None

    def replay(self, carrier_size: int, n: int, _memo: dict | None = None) -> Operation:
        # subterms are shared between branches, so memoise by identity
        memo = {} if _memo is None else _memo
        if id(self) in memo:
            return memo[id(self)]
        if self.projection is not None:
            out = projections(carrier_size, n)[self.projection]
        elif self.generator.arity == 0:
            out = Operation(carrier_size, n, np.full(carrier_size**n, self.generator.table[0]), validate=False)
        else:
            idx = np.zeros(carrier_size**n, dtype=np.int64)
            for j, child in enumerate(self.children):
                idx += child.replay(carrier_size, n, memo).table * carrier_size**j
            out = Operation(carrier_size, n, self.generator.table[idx], validate=False)
        memo[id(self)] = out
        return out

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=0)

    def __str__(self):
        if self.projection is not None:
            return f"p{self.projection}"
        if not self.children:
            return self.symbol
        return f"{self.symbol}({', '.join(str(c) for c in self.children)})"


def _resolve_generators(F, names, carrier_size):
    F = list(F)
    if names is None:
        names = [f"g{i}" for i in range(len(F))]
    names = list(names)
    if len(names) != len(F):
        raise ValueError(f"{len(names)} names for {len(F)} generators")
    sizes = {g.carrier_size for g in F}
    if carrier_size is not None:
        sizes.add(carrier_size)
    if len(sizes) > 1:
        raise CarrierMismatchError(f"generators live on different carriers {sorted(sizes)}")
    if not sizes:
        raise ValueError("carrier_size is required when there are no generators")
    return F, names, sizes.pop()


def _preserves(g: Operation, rel: np.ndarray, k: int) -> bool:
    """Does ``g`` map every family of ``rel``-tuples into ``rel``?"""
    r = rel.shape[1]
    m = g.arity
    if rel.shape[0] ** m > 1 << 20:
        return False  # unknown; dropping the relation only weakens the bound
    member = np.zeros(k**r, dtype=bool)
    member[encode_rows(rel, k)] = True
    choice = all_tuples(rel.shape[0], m)
    # cols[c, i, j]: component i of the j-th chosen relation tuple
    cols = rel[choice].transpose(0, 2, 1)
    out = g.table[encode_rows(cols, k)] if m else np.broadcast_to(g.table[0], (1, r))
    return bool(member[encode_rows(out, k)].all())


def relational_bound(F: Sequence[Operation], n: int, carrier_size: int) -> np.ndarray | None:
    """Mask over all ``n``-ary codes of the operations that preserve every unary
    and binary relation preserved by all of ``F``.

    The generated clone is contained in this set, so a closure that reaches
    its size is already a fixpoint.  Returns None when too large to compute.
    """
    k = carrier_size
    if k > 3 or k ** (k**n) > _BOUND_UNIVERSE_LIMIT:
        return None
    universe = all_operations(k, n)
    mask = np.ones(universe.shape[0], dtype=bool)
    candidates = []
    for size in range(1, k):
        candidates.extend(np.array([[a] for a in sub]) for sub in itertools.combinations(range(k), size))
    pairs = all_tuples(k, 2)
    for bits in range(1, 2 ** (k * k) - 1):
        candidates.append(pairs[[i for i in range(k * k) if bits >> i & 1]])
    for rel in candidates:
        if not all(_preserves(g, rel, k) for g in F):
            continue
        r = rel.shape[1]
        member = np.zeros(k**r, dtype=bool)
        member[encode_rows(rel, k)] = True
        # families of n-tuples whose coordinatewise r-tuples all lie in rel
        choice = all_tuples(rel.shape[0], n)
        fam = rel[choice]  # (c, n, r)
        point_idx = encode_rows(fam.transpose(0, 2, 1), k)  # (c, r)
        alive = np.flatnonzero(mask)
        vals = universe[alive][:, point_idx]  # (alive, c, r)
        ok = member[encode_rows(vals, k)].all(axis=1)
        mask[alive[~ok]] = False
    return mask


class CloneClosure:
    """Result of closing the projections under a generator list at one arity."""

    def __init__(self, carrier_size, arity, generators, names, tables, parents, complete=True):
        self.carrier_size = carrier_size
        self.arity = arity
        self.generators = generators
        self.names = names
        self.tables = tables
        self.parents = parents
        self.complete = complete
        self._lookup = None

    def __len__(self):
        return self.tables.shape[0]

    def opset(self) -> OpSet:
        return OpSet.from_tables(self.carrier_size, self.arity, self.tables)

    def index_of(self, op: Operation) -> int | None:
        if self._lookup is None:
            self._lookup = {row.tobytes(): i for i, row in enumerate(self.tables)}
        return self._lookup.get(np.asarray(op.table, dtype=np.int64).tobytes())

    def certificate(self, op_or_index) -> DerivationCertificate:
        idx = op_or_index if isinstance(op_or_index, (int, np.integer)) else self.index_of(op_or_index)
        if idx is None:
            raise KeyError("operation is not in this clone slice")
        memo: dict[int, DerivationCertificate] = {}

        def build(i):
            if i in memo:
                return memo[i]
            gi, args = self.parents[i]
            if gi < 0:
                cert = DerivationCertificate(f"p{args}", projection=args)
            else:
                cert = DerivationCertificate(
                    self.names[gi], tuple(build(a) for a in args), generator=self.generators[gi]
                )
            memo[i] = cert
            return cert

        return build(int(idx))


class _Packing:
    """Members of ``A^(A^n)`` held as digit groups: ``s`` consecutive table
    positions per group, so one table lookup evaluates a generator on ``s``
    positions at once."""

    def __init__(self, k: int, width: int, max_arity: int):
        # on a two-element carrier a whole table fits one machine word and
        # generators act by bitwise logic on the codes
        self.bitwise = k == 2 and 0 < width <= 62
        s = width if self.bitwise else 1
        while s < width and (k ** (s + 1)) ** max(max_arity, 1) <= _LUT_LIMIT:
            s += 1
        self.k = k
        self.width = width
        self.sizes = [s] * (width // s) + ([width % s] if width % s else [])
        self.starts = np.cumsum([0] + self.sizes[:-1]).tolist()
        self._luts: dict = {}

    def pack(self, tables: np.ndarray) -> np.ndarray:
        cols = [encode_rows(tables[:, a : a + s], self.k) for a, s in zip(self.starts, self.sizes)]
        return np.stack(cols, axis=1) if cols else np.zeros((tables.shape[0], 0), dtype=np.int64)

    def unpack(self, groups: np.ndarray) -> np.ndarray:
        parts = [
            (groups[:, [gi]] // radix_powers(self.k, s)[None, :]) % self.k for gi, s in enumerate(self.sizes)
        ]
        if not parts:
            return np.zeros((groups.shape[0], 0), dtype=np.int64)
        return np.concatenate(parts, axis=1)

    def lut(self, gi: int, g: Operation, s: int) -> np.ndarray:
        key = (gi, s)
        if key not in self._luts:
            base = self.k**s
            m = g.arity
            digits = all_tuples(base, m)  # (base**m, m)
            idx = np.zeros((digits.shape[0], s), dtype=np.int64)
            for j in range(m):
                idx += ((digits[:, [j]] // radix_powers(self.k, s)[None, :]) % self.k) * self.k**j
            self._luts[key] = encode_rows(g.table[idx], self.k)
        return self._luts[key]

    def apply_box(self, gi: int, g: Operation, members: np.ndarray, box) -> tuple[list, tuple]:
        """Evaluate ``g`` on every tuple of the box ``[lo_j, hi_j)``; returns one
        flattened group column per digit group (component 0 varies fastest)."""
        m = g.arity
        shape = tuple(hi - lo for lo, hi in reversed(box))
        if self.bitwise:
            return [self._bitwise(g, members, box, shape).reshape(-1)], shape
        cols = []
        for col, s in enumerate(self.sizes):
            lut = self.lut(gi, g, s)
            if m == 0:
                cols.append(lut[:1].copy())
                continue
            base = self.k**s
            idx = np.zeros(shape, dtype=np.int64)
            for j, (lo, hi) in enumerate(box):
                view = [1] * m
                view[m - 1 - j] = hi - lo
                idx = idx + members[lo:hi, col].reshape(view) * base**j
            cols.append(lut[idx].reshape(-1))
        return cols, shape

    def _bitwise(self, g: Operation, members: np.ndarray, box, shape) -> np.ndarray:
        m = g.arity
        dtype = np.uint16 if self.width <= 16 else np.uint32 if self.width <= 32 else np.uint64
        full = dtype((1 << self.width) - 1)
        if m == 0:
            return np.array([int(full) if g.table[0] else 0], dtype=np.int64)
        plain, flipped = [], []
        for j, (lo, hi) in enumerate(box):
            view = [1] * m
            view[m - 1 - j] = hi - lo
            arg = members[lo:hi, 0].astype(dtype).reshape(view)
            plain.append(arg)
            flipped.append(arg ^ full)
        # sum of minterms over whichever truth value is rarer
        ones = g.table.astype(bool)
        negate = ones.sum() * 2 > ones.size
        terms = np.flatnonzero(~ones if negate else ones).tolist()
        out = np.zeros(shape, dtype=dtype)
        for t in terms:
            term = plain[0] if t & 1 else flipped[0]
            for j in range(1, m):
                term = term & (plain[j] if (t >> j) & 1 else flipped[j])
            out |= term
        if negate:
            out ^= full
        return out

    def keys(self, groups: np.ndarray, as_codes: bool):
        if as_codes:
            weights = np.array([self.k**a for a in self.starts], dtype=np.int64)
            return groups @ weights
        return [row.tobytes() for row in groups]

    def column_keys(self, cols: list, as_codes: bool):
        if self.bitwise:
            return cols[0]
        if as_codes:
            keys = np.zeros_like(cols[0]) if cols else np.zeros(1, dtype=np.int64)
            for a, c in zip(self.starts, cols):
                keys += c * self.k**a
            return keys
        return self.keys(np.stack(cols, axis=1), False)


def _boxes(n_old: int, n_total: int, m: int, budget: int):
    """Boxes of component ranges covering every m-tuple over ``range(n_total)``
    with at least one component ``>= n_old``, each with at most ``budget``
    tuples where possible."""
    if m == 0:
        if n_old == 0:
            yield []
        return
    for j in range(m):
        box = [(0, n_total)] * j + [(n_old, n_total)] + [(0, n_old)] * (m - 1 - j)
        yield from _split_box(box, budget)


def _split_box(box, budget):
    lens = [hi - lo for lo, hi in box]
    size = int(np.prod(lens))
    if size == 0:
        return
    if size <= budget:
        yield box
        return
    top = max(j for j, length in enumerate(lens) if length > 1)
    rest = size // lens[top]
    lo, hi = box[top]
    if rest <= budget:
        step = max(1, budget // rest)
        for a in range(lo, hi, step):
            yield box[:top] + [(a, min(hi, a + step))] + box[top + 1 :]
    else:
        for v in range(lo, hi):
            yield from _split_box(box[:top] + [(v, v + 1)] + box[top + 1 :], budget)


def clone_closure(
    F: Iterable[Operation],
    n: int,
    limit: int = DEFAULT_MEMBER_LIMIT,
    *,
    names: Sequence[str] | None = None,
    carrier_size: int | None = None,
    target: Operation | None = None,
) -> CloneClosure:
    """Close ``{pi_0..pi_{n-1}}`` under the generators, at arity ``n``.

    If ``target`` is given the search stops as soon as it is found (the
    result is then marked incomplete).
    """
    F, names, k = _resolve_generators(F, names, carrier_size)
    width = k**n
    check_size(width)
    universe = k**width if width < 64 else None
    as_codes = universe is not None and universe <= 2**62
    bitmap = np.zeros(universe, dtype=bool) if as_codes and universe <= _BITMAP_LIMIT else None
    seen: set = set()
    pack = _Packing(k, width, max((g.arity for g in F), default=0))

    start = np.stack([p.table for p in projections(k, n)]) if n else np.zeros((0, width), dtype=np.int64)
    blocks = [pack.pack(start)]
    parents: list = [(-1, j) for j in range(n)]
    count = n

    def is_seen(key) -> bool:
        return bool(bitmap[key]) if bitmap is not None else key in seen

    def mark(keys):
        if bitmap is not None:
            bitmap[keys] = True
        else:
            seen.update(keys)

    mark(pack.keys(blocks[0], as_codes) if as_codes else pack.keys(blocks[0], False))
    target_key = None
    if target is not None:
        tk = pack.keys(pack.pack(target.table[None, :]), as_codes)
        target_key = int(tk[0]) if as_codes else tk[0]

    bound = None
    bound_tried = False
    stopped_early = target_key is not None and is_seen(target_key)
    stop = stopped_early or count == universe
    # per-generator watermark: members below it were already combined by that generator
    done = [0] * len(F)
    nullary_done = [False] * len(F)
    while not stop:
        pending = []
        for gi, g in enumerate(F):
            if g.arity == 0:
                pending.append(0 if nullary_done[gi] else 1)
            else:
                pending.append(count**g.arity - done[gi] ** g.arity)
        if not any(pending):
            break
        # cheapest pending generator first, so unary closure keeps up with wider passes
        gi = min((p, i) for i, p in enumerate(pending) if p)[1]
        g = F[gi]
        if not bound_tried and universe is not None and count > _BOUND_MEMBERS:
            bound_tried = True
            mask = relational_bound(F, n, k)
            bound = int(mask.sum()) if mask is not None else None
            if count == bound:
                break
        members = np.concatenate(blocks) if len(blocks) > 1 else blocks[0]
        blocks = [members]
        n_old = done[gi]
        n_total = count
        done[gi] = n_total
        nullary_done[gi] = True
        for box in _boxes(n_old, n_total, g.arity, _BOX_TUPLES):
            cols, shape = pack.apply_box(gi, g, members, box)
            keys = pack.column_keys(cols, as_codes)
            if bitmap is not None:
                fresh = np.flatnonzero(~bitmap[keys])
                if fresh.size == 0:
                    continue
                _, first = np.unique(keys[fresh], return_index=True)
                first = fresh[np.sort(first)]
                new_keys = keys[first]
            else:
                first_pos = {}
                for pos, key in enumerate(keys.tolist() if as_codes else keys):
                    if key not in seen and key not in first_pos:
                        first_pos[key] = pos
                if not first_pos:
                    continue
                first = np.fromiter(first_pos.values(), dtype=np.int64)
                new_keys = list(first_pos)
            axes = np.unravel_index(first, shape) if shape else ()
            comps = np.stack(
                [axes[g.arity - 1 - j] + box[j][0] for j in range(g.arity)], axis=1
            ) if g.arity else np.zeros((len(first), 0), dtype=np.int64)
            out = np.stack([c[first] for c in cols], axis=1)
            mark(new_keys)
            blocks.append(out)
            parents.extend((gi, tuple(row)) for row in comps.tolist())
            count += len(first)
            if count > limit:
                partial = np.concatenate(blocks)[:limit]
                raise ResourceLimitError(
                    f"clone slice at arity {n} exceeds the member limit {limit}",
                    limit=limit,
                    partial=OpSet.from_tables(k, n, pack.unpack(partial)),
                )
            if target_key is not None and is_seen(target_key):
                stopped_early = stop = True
            elif count == universe or (bound is not None and count == bound):
                stop = True
            if stop:
                break
    members = np.concatenate(blocks) if len(blocks) > 1 else blocks[0]
    tables = pack.unpack(members)
    return CloneClosure(k, n, tuple(F), tuple(names), tables, parents, complete=not stopped_early)


def generate_clone_slice(
    F: Iterable[Operation],
    n: int,
    limit: int = DEFAULT_MEMBER_LIMIT,
    *,
    names: Sequence[str] | None = None,
    carrier_size: int | None = None,
) -> OpSet:
    """The ``n``-ary operations of the clone generated by ``F``."""
    return clone_closure(F, n, limit, names=names, carrier_size=carrier_size).opset()


def clone_membership(
    f: Operation,
    F: Iterable[Operation],
    limit: int = DEFAULT_MEMBER_LIMIT,
    *,
    names: Sequence[str] | None = None,
) -> tuple[bool, DerivationCertificate | None]:
    F = list(F)
    closure = clone_closure(F, f.arity, limit, names=names, carrier_size=f.carrier_size, target=f)
    idx = closure.index_of(f)
    if idx is None:
        return False, None
    return True, closure.certificate(idx)


def derived_clone(algebra: Algebra, n: int, limit: int = DEFAULT_MEMBER_LIMIT) -> OpSet:
    """``n``-ary derived operations (term operations) of ``algebra``."""
    return generate_clone_slice(algebra.operations, n, limit, names=algebra.names, carrier_size=algebra.size)


def derived_closure(algebra: Algebra, n: int, limit: int = DEFAULT_MEMBER_LIMIT) -> CloneClosure:
    return clone_closure(algebra.operations, n, limit, names=algebra.names, carrier_size=algebra.size)
