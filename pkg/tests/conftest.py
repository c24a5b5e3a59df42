import pytest

from regkernel import Alphabet, Dfa


@pytest.fixture
def ab() -> Alphabet:
    return Alphabet(("a", "b"))


@pytest.fixture
def parity(ab) -> Dfa:
    """Accepts exactly the even-length strings: both symbols flip 0 <-> 1."""
    return Dfa(n=2, alphabet=ab, table=((1, 1), (0, 0)), accepting=frozenset({0}))


@pytest.fixture
def accept_all(ab) -> Dfa:
    return Dfa(n=1, alphabet=ab, table=((0, 0),), accepting=frozenset({0}))


@pytest.fixture
def reject_all(ab) -> Dfa:
    return Dfa(n=1, alphabet=ab, table=((0, 0),), accepting=frozenset())
