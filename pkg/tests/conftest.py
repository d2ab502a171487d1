import numpy as np
import pytest
from hypothesis import strategies as st

from cloneforge.core import Algebra, Operation
from cloneforge.zoo import GroupTable, make_free_gset, make_vector_space

NOT = Operation(2, 1, [1, 0])
ID = Operation(2, 1, [0, 1])
AND = Operation(2, 2, [0, 0, 0, 1])
OR = Operation(2, 2, [0, 1, 1, 1])
XOR = Operation(2, 2, [0, 1, 1, 0])
ZERO = Operation(2, 0, [0])


def operations(k=2, max_arity=2, min_arity=0):
    """Strategy for random operations on a k-element carrier."""
    return st.integers(min_arity, max_arity).flatmap(
        lambda n: st.lists(st.integers(0, k - 1), min_size=k**n, max_size=k**n).map(
            lambda t, n=n: Operation(k, n, t)
        )
    )


def random_op(rng, k, n):
    return Operation(k, n, rng.integers(0, k, k**n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def gf2():
    return make_vector_space(2, 1)


@pytest.fixture(scope="session")
def gf3():
    return make_vector_space(3, 1)


@pytest.fixture(scope="session")
def z2():
    return GroupTable.cyclic(2)


@pytest.fixture(scope="session")
def free_z2_one(z2):
    return make_free_gset(z2, 1)


@pytest.fixture(scope="session")
def free_z2_two(z2):
    return make_free_gset(z2, 2)


@pytest.fixture
def xor_zero():
    return Algebra(2, [("xor", XOR), ("zero", ZERO)])


_acceptance: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.failed:
        _acceptance[name] = "failed"
    elif report.when == "call":
        _acceptance.setdefault(name, "passed")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance):
        terminalreporter.write_line(f"{'PASS' if _acceptance[name] == 'passed' else 'FAIL'}  {name}")
