import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cloneforge.core import Operation, all_operations, decode_tuple, encode_tuple, projection
from cloneforge.errors import ArityError, CarrierMismatchError
from cloneforge.kronecker import (
    Matrix,
    apply_to_point,
    commutation_table,
    commutes,
    evaluation_matrix,
    kron_first,
    kron_second,
    pushforward_encoding,
    u_map,
)
from conftest import AND, ID, NOT, XOR, operations
from oracles import naive_commutes


def test_matrix_layout():
    a = Matrix.from_rows(2, [[1, 0, 1], [0, 0, 1]])
    assert a.entry(0, 2) == 1 and a.entry(1, 0) == 0
    assert a.column(1) == (0, 0)
    assert a.row(1) == (0, 0, 1)
    assert Matrix.from_code(2, 2, 3, a.code()) == a
    with pytest.raises(ArityError):
        Matrix(2, 2, 2, [0, 1, 0])


def test_kron_examples():
    # NOT * AND: AND(NOT a0, NOT a1) is NOR; NOT ~* AND is NAND
    assert kron_first(NOT, AND).tolist() == [1, 0, 0, 0]
    assert kron_second(NOT, AND).tolist() == [1, 1, 1, 0]
    assert kron_first(ID, XOR) == XOR
    assert kron_second(AND, ID) == AND
    assert kron_first(XOR, XOR) == kron_second(XOR, XOR)


def test_kron_second_with_binary_projection():
    pi0 = projection(2, 2, 0)
    h = kron_second(AND, pi0)
    # f ~* pi0 reads column 0 of a 2x2 matrix: entries at flat positions 0 and 1
    for code in range(16):
        a = decode_tuple(code, 2, 4)
        assert h.table[code] == AND(a[0], a[1])


def test_commutes_examples():
    assert commutes(XOR, XOR) == (True, None)
    ok, w = commutes(NOT, AND)
    assert not ok
    # smallest matrix code where the products differ
    assert w.as_rows() == [[1, 0]] and w.code() == 1
    assert kron_first(NOT, AND).table[w.code()] != kron_second(NOT, AND).table[w.code()]
    for j in range(3):
        assert commutes(Operation(2, 2, [0, 1, 1, 1]), projection(2, 3, j))[0]


def test_carrier_mismatch():
    with pytest.raises(CarrierMismatchError):
        commutes(NOT, Operation(3, 1, [0, 1, 2]))


@settings(max_examples=300, deadline=None)
@given(operations(max_arity=2), operations(max_arity=2))
def test_commutes_matches_definition_and_is_symmetric(f, g):
    ok, w = commutes(f, g)
    assert ok == naive_commutes(f, g)
    assert ok == commutes(g, f)[0]
    assert ok == np.array_equal(kron_first(f, g).table, kron_second(f, g).table)
    if not ok:
        assert kron_first(f, g).table[w.code()] != kron_second(f, g).table[w.code()]
        assert np.array_equal(kron_first(f, g).table[: w.code()], kron_second(f, g).table[: w.code()])


def test_commutes_symmetry_random_pairs(rng):
    for _ in range(1000):
        n, m = rng.integers(0, 3, 2)
        f = Operation(2, n, rng.integers(0, 2, 2**n))
        g = Operation(2, m, rng.integers(0, 2, 2**m))
        assert commutes(f, g)[0] == commutes(g, f)[0]


def test_commutation_table_matches_pairwise():
    k = 3
    F = all_operations(k, 1)
    rng = np.random.default_rng(1)
    G = rng.integers(0, k, (12, k**2))
    table = commutation_table(F, 1, G, 2, k)
    for i, f in enumerate(F):
        for j, g in enumerate(G):
            assert table[i, j] == commutes(Operation(k, 1, f), Operation(k, 2, g))[0]
    # the other loop direction
    assert np.array_equal(commutation_table(G, 2, F, 1, k), table.T)


def test_evaluation_matrix_examples():
    assert evaluation_matrix(2, 1).as_rows() == [[0, 1]]
    e = evaluation_matrix(2, 2)
    assert [e.column(y) for y in range(4)] == [(0, 0), (1, 0), (0, 1), (1, 1)]
    e0 = evaluation_matrix(3, 0)
    assert (e0.rows, e0.cols) == (0, 1)


def test_u_map_examples():
    assert [p.tolist() for p in u_map(2, 1)] == [[0, 1]]
    assert [p.tolist() for p in u_map(2, 2)] == [[0, 1, 0, 1], [0, 0, 1, 1]]
    assert u_map(5, 0) == ()


def test_pushforward_encoding_examples():
    h = pushforward_encoding(NOT, Matrix.from_rows(2, [[0]]))
    # unary F coded as F(0) + 2 F(1); h(F) = NOT(F(0))
    assert h.arity == 2 and h.tolist() == [1, 0, 1, 0]
    a = Matrix.from_rows(2, [[0, 1]])
    h = pushforward_encoding(AND, a)
    for code in range(4):
        F = decode_tuple(code, 2, 2)
        assert h.table[code] == AND(F[0], F[1])
    b = Matrix.from_rows(3, [[2], [1]])
    assert pushforward_encoding(projection(3, 1, 0), b) == projection(3, 9, encode_tuple((2, 1), 3))
    with pytest.raises(ArityError):
        pushforward_encoding(AND, Matrix.from_rows(2, [[0]]))


def _f_of_h_u(f, h):
    k, n = f.carrier_size, f.arity
    point = [h.table[p.code()] for p in u_map(k, n)]
    return apply_to_point(f, point)


def _check_evaluation_identities(f, h):
    e = evaluation_matrix(f.carrier_size, f.arity)
    assert kron_first(f, h).table[e.code()] == h.table[f.code()]
    assert kron_second(f, h).table[e.code()] == _f_of_h_u(f, h)


def test_evaluation_identities_exhaustive_unary():
    for f in all_operations(2, 1):
        for h in all_operations(2, 2):
            _check_evaluation_identities(Operation(2, 1, f), Operation(2, 2, h))


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_evaluation_identities_random(data):
    k = data.draw(st.integers(2, 3))
    n = data.draw(st.integers(0, 2 if k == 2 else 1))
    f = data.draw(operations(k=k, min_arity=n, max_arity=n))
    h = data.draw(operations(k=k, min_arity=k**n, max_arity=k**n))
    _check_evaluation_identities(f, h)


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_pushforward_encoding_identities(data):
    f = data.draw(operations(max_arity=2))
    g = data.draw(operations(max_arity=2))
    X, Y = f.arity, g.arity
    code = data.draw(st.integers(0, 2 ** (X * Y) - 1))
    a = Matrix.from_code(2, X, Y, code)
    h = pushforward_encoding(g, a)
    assert kron_first(f, g).table[code] == h.table[f.code()]
    assert kron_second(f, g).table[code] == _f_of_h_u(f, h)
    e = evaluation_matrix(2, X)
    assert kron_first(f, h).table[e.code()] == h.table[f.code()]
    assert kron_second(f, h).table[e.code()] == _f_of_h_u(f, h)
