import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cloneforge.clone import (
    clone_closure,
    clone_membership,
    derived_clone,
    generate_clone_slice,
    relational_bound,
)
from cloneforge.core import Algebra, OpSet, Operation, compose, constant, projection, projections
from cloneforge.errors import CarrierMismatchError, ResourceLimitError
from conftest import AND, ID, NOT, OR, XOR, ZERO, operations
from oracles import naive_clone


def tables(opset):
    return sorted(tuple(t) for t in opset.tables().tolist())


def test_xor_unary_slice():
    assert tables(generate_clone_slice([XOR], 1)) == [(0, 0), (0, 1)]


def test_no_generators_gives_projections():
    s = generate_clone_slice([], 2, carrier_size=2)
    assert s == OpSet(2, 2, projections(2, 2))


def test_gf2_binary_slice(gf2):
    assert tables(derived_clone(gf2, 2)) == [(0, 0, 0, 0), (0, 0, 1, 1), (0, 1, 0, 1), (0, 1, 1, 0)]
    assert tables(derived_clone(gf2, 1)) == [(0, 0), (0, 1)]


def test_free_gset_unary_slice(free_z2_one):
    assert tables(derived_clone(free_z2_one, 1)) == [(0, 1), (1, 0)]


def test_nullary_arity():
    assert tables(generate_clone_slice([ZERO], 0)) == [(0,)]
    assert len(generate_clone_slice([XOR], 0)) == 0
    assert tables(generate_clone_slice([XOR, Operation(2, 0, [1])], 0)) == [(0,), (1,)]


def test_membership_certificates():
    ok, cert = clone_membership(constant(2, 1, 0), [XOR], names=["XOR"])
    assert ok and str(cert) == "XOR(p0, p0)"
    assert cert.replay(2, 1) == constant(2, 1, 0)
    assert clone_membership(NOT, [XOR]) == (False, None)
    ok, cert = clone_membership(projection(3, 2, 1), [Operation(3, 1, [1, 2, 0])])
    assert ok and str(cert) == "p1" and cert.depth() == 1


def test_carrier_mismatch():
    with pytest.raises(CarrierMismatchError):
        generate_clone_slice([NOT, Operation(3, 1, [0, 0, 0])], 1)


def test_member_limit_carries_partial():
    with pytest.raises(ResourceLimitError) as exc:
        generate_clone_slice([AND, NOT], 3, limit=50)
    partial = exc.value.partial
    assert isinstance(partial, OpSet) and len(partial) == 50
    assert partial <= generate_clone_slice([AND, NOT], 3)


@settings(max_examples=60, deadline=None)
@given(st.lists(operations(max_arity=2), max_size=3), st.integers(0, 2))
def test_matches_naive_closure_boolean(F, n):
    got = tables(generate_clone_slice(F, n, carrier_size=2))
    assert got == naive_clone(F, n, 2)


@settings(max_examples=40, deadline=None)
@given(st.lists(operations(k=3, max_arity=2), max_size=2), st.integers(0, 1))
def test_matches_naive_closure_three_elements(F, n):
    got = tables(generate_clone_slice(F, n, carrier_size=3))
    assert got == naive_clone(F, n, 3)


def _is_closed(opset, F):
    k, n = opset.carrier_size, opset.arity
    members = list(opset)
    for p in projections(k, n):
        assert p in opset
    for g in F:
        for args in itertools.product(members, repeat=g.arity):
            assert compose(g, list(args), n=n) in opset


def test_slices_are_closed_fixpoints(rng):
    for _ in range(10):
        F = [Operation(3, m, rng.integers(0, 3, 3**m)) for m in rng.integers(1, 3, 2)]
        s = generate_clone_slice(F, 2, carrier_size=3)
        if len(s) <= 40:
            _is_closed(s, F)
        # rerunning the closure with the members added as generators changes nothing
        assert generate_clone_slice(F + list(s)[:5], 2) == s


def test_certificates_replay(rng):
    closure = clone_closure([OR, XOR], 3, names=["OR", "XOR"])
    for idx in rng.choice(len(closure), 100, replace=False):
        cert = closure.certificate(int(idx))
        assert np.array_equal(cert.replay(2, 3).table, closure.tables[idx])
    k3 = clone_closure([Operation(3, 2, rng.integers(0, 3, 9))], 2)
    for idx in rng.choice(len(k3), min(100, len(k3)), replace=False):
        assert np.array_equal(k3.certificate(idx).replay(3, 2).table, k3.tables[idx])


def test_monotone_in_generators(rng):
    for _ in range(20):
        F = [Operation(2, int(m), rng.integers(0, 2, 2**m)) for m in rng.integers(0, 3, 3)]
        for n in (1, 2, 3):
            small = generate_clone_slice(F[:1], n, carrier_size=2)
            big = generate_clone_slice(F, n)
            assert small <= big


def _monotone_idempotent(n):
    """Boolean functions that are monotone and fix 0 and 1, by direct check."""
    out = 0
    pts = list(range(2**n))
    below = [(a, b) for a in pts for b in pts if a != b and a & b == a]
    for code in range(2 ** (2**n)):
        t = [(code >> i) & 1 for i in range(2**n)]
        if t[0] == 0 and t[-1] == 1 and all(t[a] <= t[b] for a, b in below):
            out += 1
    return out


def test_known_boolean_slices():
    # [DERIVED] counts from direct enumeration of the defining properties
    for n in (2, 3, 4):
        assert len(generate_clone_slice([AND, OR], n)) == _monotone_idempotent(n)
    assert len(generate_clone_slice([XOR], 4)) == 16
    assert len(generate_clone_slice([Operation(2, 2, [1, 1, 1, 0])], 4)) == 2**16
    assert len(generate_clone_slice([OR, Operation(2, 2, [1, 0, 0, 1])], 4)) == 2**15


def test_relational_bound_contains_clone(rng):
    for _ in range(10):
        F = [Operation(2, int(m), rng.integers(0, 2, 2**m)) for m in rng.integers(0, 3, 2)]
        mask = relational_bound(F, 2, 2)
        s = generate_clone_slice(F, 2, carrier_size=2)
        assert mask[s.codes()].all()
    assert relational_bound([NOT], 3, 4) is None


def test_derived_clone_empty_signature():
    A = Algebra(3, [])
    assert derived_clone(A, 2) == OpSet(3, 2, projections(3, 2))
    assert derived_clone(Algebra(2, [("id", ID)]), 1) == OpSet(2, 1, [ID])
