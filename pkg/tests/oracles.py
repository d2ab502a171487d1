"""Slow, direct reimplementations used as test oracles.

Everything here works on plain tuples and follows the definitions literally;
nothing is imported from the package except the value types.
"""

import itertools

from cloneforge.core import Algebra, Operation


def points(k, n):
    """All n-tuples over range(k) in little-endian encoding order."""
    return [tuple(reversed(p)) for p in itertools.product(range(k), repeat=n)]


def index(t, k):
    return sum(x * k**i for i, x in enumerate(t))


def all_tables(k, n):
    return [tuple(reversed(t)) for t in itertools.product(range(k), repeat=k**n)]


def apply(table, k, args):
    return table[index(args, k)]


def naive_commutes(f, g):
    """Check g(f(col_0), ...) == f(g(row_0), ...) for every X x Y matrix."""
    k, X, Y = f.carrier_size, f.arity, g.arity
    ft, gt = tuple(f.tolist()), tuple(g.tolist())
    for flat in itertools.product(range(k), repeat=X * Y):
        entry = lambda x, y: flat[x * Y + y]
        cols = [apply(ft, k, [entry(x, y) for x in range(X)]) for y in range(Y)]
        rows = [apply(gt, k, [entry(x, y) for y in range(Y)]) for x in range(X)]
        if apply(gt, k, cols) != apply(ft, k, rows):
            return False
    return True


def naive_clone(F, n, k):
    """Close the projections under pointwise application until nothing new appears."""
    pts = points(k, n)
    members = {tuple(p[j] for p in pts) for j in range(n)}
    while True:
        new = set(members)
        for g in F:
            gt = tuple(g.tolist())
            for args in itertools.product(sorted(members), repeat=g.arity):
                new.add(tuple(apply(gt, k, [a[i] for a in args]) for i in range(len(pts))))
        if new == members:
            return sorted(members)
        members = new


def naive_centralizer(G, n, k):
    return sorted(t for t in all_tables(k, n) if all(naive_commutes(Operation(k, n, t), g) for g in G))


def preserves(values, source, target):
    for (_, s), t in zip(source.items(), target.operations):
        st, tt = s.tolist(), t.tolist()
        for args in points(source.size, s.arity):
            if values[apply(st, source.size, args)] != apply(tt, target.size, [values[a] for a in args]):
                return False
    return True


def naive_homs(source, target):
    maps = itertools.product(range(target.size), repeat=source.size)
    return [m for m in maps if preserves(m, source, target)]


def naive_power(algebra, exponent):
    """A^exponent with pointwise operations, elements as tuples indexed base |A|."""
    k = algebra.size
    elems = [tuple(reversed(t)) for t in itertools.product(range(k), repeat=exponent)]
    ops = []
    for name, op in algebra.items():
        ot = op.tolist()
        table = []
        for args in points(len(elems), op.arity):
            vecs = [elems[a] for a in args]
            table.append(index([apply(ot, k, [v[i] for v in vecs]) for i in range(exponent)], k))
        ops.append((name, Operation(len(elems), op.arity, table)))
    return Algebra(len(elems), ops)


def linear_tables(p, n):
    """Tables of x -> sum c_j x_j over GF(p), one per coefficient vector."""
    pts = points(p, n)
    return sorted({tuple(sum(c * x for c, x in zip(cs, pt)) % p for pt in pts)
                   for cs in itertools.product(range(p), repeat=n)})


def reachable(maps, a):
    seen, todo = {a}, [a]
    while todo:
        x = todo.pop()
        for m in maps:
            if m[x] not in seen:
                seen.add(m[x])
                todo.append(m[x])
    return seen


def act(maps_by_name, word, a):
    for name in reversed(word):
        a = maps_by_name[name][a]
    return a
