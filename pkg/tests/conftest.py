import pytest

from psmra.mracode import make_context


@pytest.fixture(scope="session")
def small():
    """The smallest admissible binary parameters (q, nu, n, r) = (2, 5, 2, 4)."""
    return make_context(2, 5, 2, 4)


@pytest.fixture(scope="session")
def mid():
    return make_context(2, 6, 3, 5)


@pytest.fixture(scope="session")
def quad():
    """Smallest parameters over GF(4); too large to enumerate source states."""
    return make_context(4, 5, 2, 4)


@pytest.fixture(scope="session")
def small_report(small):
    """Full audit at (2, 5, 2, 4); shared because it takes about a minute."""
    from psmra.audit import audit

    return audit(small)
