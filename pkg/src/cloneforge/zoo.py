"""Example classes with explicit separating homomorphisms: vector spaces over
prime fields, finite free G-sets, and bounded structure checks for actions of
free monoids on finite sets."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .core import Algebra, Operation, all_tuples, check_size, encode_rows
from .errors import PreconditionError, SignatureMismatchError
from .homsearch import Homomorphism, operation_algebra, projection_codes

# --------------------------------------------------------------------------
# vector spaces over GF(p)


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        p = self.p
        if p < 2 or any(p % q == 0 for q in range(2, int(p**0.5) + 1)):
            raise PreconditionError(f"{p} is not prime")

    def inverse(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(a, -1, self.p)


def make_vector_space(p: int | PrimeField, d: int) -> Algebra:
    """``GF(p)^d`` with ``add``, ``zero``, ``neg`` and one ``scale{c}`` per
    scalar; vectors are encoded base ``p``."""
    field_ = p if isinstance(p, PrimeField) else PrimeField(p)
    p = field_.p
    if d < 0:
        raise PreconditionError("dimension must be non-negative")
    size = check_size(p**d, "vector space")
    digits = all_tuples(p, d)

    def table(rows):
        return encode_rows(rows % p, p) if d else np.zeros(rows.shape[0], dtype=np.int64)

    pairs = all_tuples(size, 2)
    ops = [
        ("add", Operation(size, 2, table(digits[pairs[:, 0]] + digits[pairs[:, 1]]))),
        ("zero", Operation(size, 0, [0])),
        ("neg", Operation(size, 1, table(-digits))),
    ]
    ops += [(f"scale{c}", Operation(size, 1, table(c * digits))) for c in range(p)]
    return Algebra(size, ops)


def _vector_params(V: Algebra) -> tuple[int, int]:
    """Recover ``(p, d)`` from an algebra built by ``make_vector_space``."""
    scalars = [name for name in V.names if name.startswith("scale")]
    p = len(scalars)
    if p < 2 or V.names[:3] != ("add", "zero", "neg"):
        raise PreconditionError("not a vector space built by make_vector_space")
    d, size = 0, 1
    while size < V.size:
        size *= p
        d += 1
    if size != V.size or V != make_vector_space(p, d):
        raise PreconditionError("not a vector space built by make_vector_space")
    return p, d


def _digits(codes: np.ndarray, p: int, length: int) -> np.ndarray:
    return (codes[:, None] // p ** np.arange(length, dtype=np.int64)) % p


def _row_reduce(M: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form mod ``p`` and the pivot columns."""
    M = np.array(M, dtype=np.int64) % p
    pivots = []
    r = 0
    for c in range(M.shape[1]):
        rows = np.flatnonzero(M[r:, c]) + r
        if rows.size == 0:
            continue
        M[[r, rows[0]]] = M[[rows[0], r]]
        M[r] = M[r] * pow(int(M[r, c]), -1, p) % p
        others = np.flatnonzero(M[:, c])
        others = others[others != r]
        M[others] = (M[others] - np.outer(M[others, c], M[r])) % p
        pivots.append(c)
        r += 1
        if r == M.shape[0]:
            break
    return M, pivots


def rank_mod_p(M: np.ndarray, p: int) -> int:
    return len(_row_reduce(M, p)[1]) if np.size(M) else 0


def _solve_mod_p(M: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Solve ``M x = b`` for invertible square ``M``."""
    size = M.shape[0]
    R, pivots = _row_reduce(np.hstack([M, b.reshape(-1, 1)]), p)
    if pivots[:size] != list(range(size)):
        raise PreconditionError("matrix is singular mod p")
    return R[:size, -1]


def vecspace_separating_hom(V: Algebra, n: int, f: Operation, power: Algebra | None = None) -> Homomorphism:
    """A linear map ``h: V^(V^n) -> V`` vanishing on the projections with
    ``h(f) = v1``, where ``v1`` is the smallest vector different from
    ``f(0, ..., 0)``.

    The basis ``{pi_j} + {f}`` is completed by standard basis vectors, lowest
    index first, and ``h`` is the functional dual to ``f`` times ``v1``.
    """
    p, d = _vector_params(V)
    if f.carrier_size != V.size or f.arity != n:
        raise PreconditionError(f"f must be an {n}-ary operation on the carrier of V")
    if V.size < 2:
        raise PreconditionError("the zero space has no separating homomorphisms")
    power = power if power is not None else operation_algebra(V, n)
    dim = d * V.size**n
    check_size(dim * dim, "basis completion")
    known = np.array(projection_codes(V.size, n) + [f.code()], dtype=np.int64)
    rows = _digits(known, p, dim)
    if rank_mod_p(rows, p) < len(known):
        raise PreconditionError("f lies in the span of the projections, i.e. it is a derived operation")
    basis = list(rows)
    for i in range(dim):
        if len(basis) == dim:
            break
        e = np.zeros(dim, dtype=np.int64)
        e[i] = 1
        if rank_mod_p(np.array(basis + [e]), p) > len(basis):
            basis.append(e)
    B = np.array(basis).T  # columns are basis vectors
    target = np.zeros(dim, dtype=np.int64)
    target[n] = 1  # position of f in the basis
    phi = _solve_mod_p(B.T, target, p)
    f0 = int(f.table[0])
    v1 = 0 if f0 != 0 else 1
    v1_digits = np.array([(v1 // p**i) % p for i in range(d)], dtype=np.int64)
    coords = _digits(np.arange(power.size, dtype=np.int64), p, dim)
    scalars = coords @ phi % p
    values = encode_rows(np.outer(scalars, v1_digits) % p, p) if d else np.zeros(power.size, dtype=np.int64)
    return Homomorphism(power, V, tuple(int(v) for v in values))


def vecspace_strategy(V: Algebra):
    """Witness strategy for ``verify_dc`` on a vector space."""

    @lru_cache(maxsize=None)
    def power(n):
        return operation_algebra(V, n)

    def strategy(algebra: Algebra, n: int, f: Operation):
        try:
            return vecspace_separating_hom(algebra, n, f, power(n))
        except PreconditionError:
            return None

    return strategy


# --------------------------------------------------------------------------
# groups and free G-sets


class GroupTable:
    """A finite group given by its Cayley table, validated on construction."""

    def __init__(self, table: Sequence[Sequence[int]]):
        T = np.asarray(table, dtype=np.int64)
        if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] == 0:
            raise PreconditionError("Cayley table must be a non-empty square array")
        m = T.shape[0]
        if T.min() < 0 or T.max() >= m:
            raise PreconditionError("Cayley table entries out of range")
        # associativity: (ab)c == a(bc)
        lhs = T[T[:, :, None], np.arange(m)[None, None, :]]
        rhs = T[np.arange(m)[:, None, None], T[None, :, :]]
        if not (lhs == rhs).all():
            a, b, c = (int(x) for x in np.argwhere(lhs != rhs)[0])
            raise PreconditionError(f"not associative at ({a}, {b}, {c})")
        ids = [e for e in range(m) if (T[e] == np.arange(m)).all() and (T[:, e] == np.arange(m)).all()]
        if not ids:
            raise PreconditionError("no identity element")
        e = ids[0]
        inverse = []
        for a in range(m):
            inv = np.flatnonzero((T[a] == e) & (T[:, a] == e))
            if inv.size == 0:
                raise PreconditionError(f"element {a} has no inverse")
            inverse.append(int(inv[0]))
        self.table = T
        self.table.setflags(write=False)
        self.order = m
        self.identity = e
        self.inverse = tuple(inverse)

    @classmethod
    def from_table(cls, table) -> "GroupTable":
        return cls(table)

    @classmethod
    def cyclic(cls, m: int) -> "GroupTable":
        r = np.arange(m)
        return cls((r[:, None] + r[None, :]) % m)

    @classmethod
    def symmetric(cls, m: int) -> "GroupTable":
        """Permutations of ``range(m)`` in lexicographic order; ``a*b`` is
        ``a`` after ``b``."""
        perms = list(itertools.permutations(range(m)))
        check_size(len(perms) ** 2, "symmetric group table")
        index = {q: i for i, q in enumerate(perms)}
        return cls([[index[tuple(a[b[i]] for i in range(m))] for b in perms] for a in perms])

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def tolist(self) -> list[list[int]]:
        return self.table.tolist()

    def __eq__(self, other):
        return isinstance(other, GroupTable) and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash(self.table.tobytes())


def group_symbols(G: GroupTable) -> list[str]:
    return [f"g{i}" for i in range(G.order)]


def make_free_gset(G: GroupTable, roots: int) -> Algebra:
    """Free G-set on ``roots`` generators: carrier ``G x roots`` with element
    ``(gamma, i)`` at index ``gamma + |G|*i`` and ``gamma . (delta, i) =
    (gamma*delta, i)``."""
    if roots < 1:
        raise PreconditionError("a free G-set needs at least one root")
    m = G.order
    size = check_size(m * roots, "free G-set")
    delta = np.arange(size) % m
    root = np.arange(size) // m
    ops = [(name, Operation(size, 1, G.table[g, delta] + m * root)) for g, name in enumerate(group_symbols(G))]
    return Algebra(size, ops)


def _action_maps(A: Algebra) -> list[np.ndarray]:
    for name, op in A.items():
        if op.arity != 1:
            raise PreconditionError(f"symbol {name!r} is not unary")
    return [op.table for op in A.operations]


def check_free_gset(A: Algebra, G: GroupTable) -> tuple[bool, tuple[int, int] | None]:
    """Check the action laws and freeness.  On failure returns the first
    offending ``(gamma, a)``."""
    if len(A.names) != G.order:
        raise SignatureMismatchError(f"{len(A.names)} symbols for a group of order {G.order}")
    maps = np.stack(_action_maps(A))
    carrier = np.arange(A.size)
    for g in range(G.order):
        for h in range(G.order):
            bad = np.flatnonzero(maps[g][maps[h]] != maps[G.mul(g, h)])
            if bad.size:
                return False, (g, int(bad[0]))
    bad = np.flatnonzero(maps[G.identity] != carrier)
    if bad.size:
        return False, (G.identity, int(bad[0]))
    for g in range(G.order):
        if g == G.identity:
            continue
        fixed = np.flatnonzero(maps[g] == carrier)
        if fixed.size:
            return False, (g, int(fixed[0]))
    return True, None


@dataclass
class OrbitDecomposition:
    reps: list[int]
    orbit: np.ndarray  # element -> index into reps
    via: np.ndarray  # element -> symbol index gamma with gamma . rep = element


def gset_orbit_decomposition(power: Algebra, designated: Sequence[int] = ()) -> OrbitDecomposition:
    """Orbits of a free action; representatives are the designated elements
    where given, otherwise the smallest element of each orbit."""
    maps = _action_maps(power)
    orbit = np.full(power.size, -1, dtype=np.int64)
    via = np.full(power.size, -1, dtype=np.int64)
    reps: list[int] = []
    order = list(dict.fromkeys(int(x) for x in designated)) + list(range(power.size))
    for x in order:
        if orbit[x] >= 0:
            if x in designated and reps[orbit[x]] != x:
                raise PreconditionError(f"designated elements {reps[orbit[x]]} and {x} share an orbit")
            continue
        images = np.array([m[x] for m in maps], dtype=np.int64)
        if np.unique(images).size != images.size or x not in images:
            raise PreconditionError(f"action is not free at element {x}")
        if (orbit[images] >= 0).any():
            raise PreconditionError("action maps do not form a group action")
        orbit[images] = len(reps)
        via[images] = np.arange(len(maps))
        reps.append(x)
    return OrbitDecomposition(reps, orbit, via)


def gset_separating_hom(A: Algebra, n: int, f: Operation, power: Algebra | None = None) -> Homomorphism:
    """Equivariant ``h: A^(A^n) -> A`` sending every representative to 0
    except ``h(f) = a1``, the smallest element different from ``f(0, ..., 0)``."""
    if A.size < 2:
        raise PreconditionError("need a free G-set with at least two elements")
    if f.carrier_size != A.size or f.arity != n:
        raise PreconditionError(f"f must be an {n}-ary operation on the carrier")
    maps = np.stack(_action_maps(A))
    power = power if power is not None else operation_algebra(A, n)
    code = f.code()
    pcodes = projection_codes(A.size, n)
    if code in pcodes:
        raise PreconditionError("f is a projection, hence derived")
    dec = gset_orbit_decomposition(power, pcodes + [code])
    rep_value = np.zeros(len(dec.reps), dtype=np.int64)
    rep_value[dec.orbit[code]] = 0 if f.table[0] != 0 else 1
    values = maps[dec.via, rep_value[dec.orbit]]
    return Homomorphism(power, A, tuple(int(v) for v in values))


def gset_strategy(A: Algebra):
    """Witness strategy for ``verify_dc`` on a free G-set."""

    @lru_cache(maxsize=None)
    def power(n):
        return operation_algebra(A, n)

    def strategy(algebra: Algebra, n: int, f: Operation):
        try:
            return gset_separating_hom(algebra, n, f, power(n))
        except PreconditionError:
            return None

    return strategy


# --------------------------------------------------------------------------
# actions of free monoids (finite, bounded checks only)


@dataclass
class ActionStructure:
    size: int
    maps: dict[str, np.ndarray]
    reach: np.ndarray  # reach[a, b] iff some word w has w.a == b
    classes: list[list[int]]  # mutual-reachability classes; orbits for group actions

    def leq(self, a: int, b: int) -> bool:
        return bool(self.reach[a, b])

    def up(self, a: int) -> list[int]:
        return np.flatnonzero(self.reach[a]).tolist()

    def down(self, a: int) -> list[int]:
        return np.flatnonzero(self.reach[:, a]).tolist()


def action_preorder(A: Algebra) -> ActionStructure:
    """Reachability preorder of a unary action: ``a <= b`` iff ``b`` is
    reachable from ``a``."""
    maps = _action_maps(A)
    k = A.size
    check_size(k * k, "reachability matrix")
    reach = np.eye(k, dtype=bool)
    for m in maps:
        reach[np.arange(k), m] = True
    # transitive closure by repeated squaring
    while True:
        nxt = (reach.astype(np.int64) @ reach.astype(np.int64)) > 0
        if (nxt == reach).all():
            break
        reach = nxt
    mutual = reach & reach.T
    classes, seen = [], np.zeros(k, dtype=bool)
    for a in range(k):
        if not seen[a]:
            cls = np.flatnonzero(mutual[a])
            seen[cls] = True
            classes.append(cls.tolist())
    return ActionStructure(k, dict(zip(A.names, maps)), reach, classes)


def roots_of_action(structure: ActionStructure) -> set[int]:
    """Minimal elements: ``r`` such that ``a <= r`` forces ``a == r``."""
    below = structure.reach.sum(axis=0)
    return {int(r) for r in np.flatnonzero(below == 1)}


def act(A: Algebra, word: Sequence[str], a: int) -> int:
    """Apply a word to ``a``, rightmost letter first."""
    for name in reversed(word):
        a = int(A[name].table[a])
    return a


def unique_transitions_check(A: Algebra, length_bound: int) -> tuple[bool, tuple | None]:
    """Look for words ``w != v`` of length at most ``length_bound`` and a
    point ``a`` with ``w.a == v.a``.  Words are visited in shortlex order and
    the first ``(w, v, a)`` found is returned, ``v`` preceding ``w``."""
    if length_bound < 0:
        raise PreconditionError("length bound must be non-negative")
    maps = _action_maps(A)
    names = A.names
    s = len(names)
    total = sum(s**i for i in range(length_bound + 1))
    check_size(total * max(A.size, 1), "word images")
    words: list[tuple[int, ...]] = [()]
    images = [np.arange(A.size, dtype=np.int64)]
    index = {(): 0}
    for length in range(1, length_bound + 1):
        for w in itertools.product(range(s), repeat=length):
            index[w] = len(words)
            words.append(w)
            images.append(maps[w[0]][images[index[w[1:]]]])
    stacked = np.stack(images) if images else np.zeros((0, A.size), dtype=np.int64)
    for w in range(1, len(words)):
        eq = stacked[:w] == stacked[w]
        hit = np.flatnonzero(eq.any(axis=1))
        if hit.size:
            v = int(hit[0])
            a = int(np.flatnonzero(eq[v])[0])
            return False, (tuple(names[c] for c in words[w]), tuple(names[c] for c in words[v]), a)
    return True, None


def word_str(word: Sequence[str]) -> str:
    return "".join(word) if word else "ε"

