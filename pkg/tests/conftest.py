import pytest

from crlab.gaussian import GaussianRational
from crlab.geometry import EmbeddedManifold
from crlab.jets import CRMap
from crlab.parser import parse_poly as P

HEIS = "-(z2 - conj(z2))/(2*i) + z1*conj(z1)"


def power_source(m: int) -> EmbeddedManifold:
    """{Im z2 = |z1|^(2m)}."""
    return EmbeddedManifold([P(f"-(z2 - conj(z2))/(2*i) + (z1*conj(z1))^{m}")])


def quadric(signs) -> EmbeddedManifold:
    """{Im z_N = sum signs_j |z_j|^2} in C^(len(signs)+1)."""
    N = len(signs) + 1
    text = f"-(z{N} - conj(z{N}))/(2*i)"
    for j, s in enumerate(signs, start=1):
        text += f" {'+' if s > 0 else '-'} z{j}*conj(z{j})"
    return EmbeddedManifold([P(text)])


def cayley_unitary(S):
    """(I - S)(I + S)^-1 for skew-Hermitian rational S: an exact unitary."""
    from crlab.linalg import identity, inverse, matmul
    n = len(S)
    I = identity(n)
    minus = [[I[i][j] - S[i][j] for j in range(n)] for i in range(n)]
    plus = [[I[i][j] + S[i][j] for j in range(n)] for i in range(n)]
    return matmul(minus, inverse(plus))


def q(text) -> GaussianRational:
    return P(text).constant_term()


@pytest.fixture
def heis():
    return EmbeddedManifold([P(HEIS)])


@pytest.fixture
def power_map():
    def build(m):
        src = power_source(m)
        return CRMap(src, quadric([1]), [P(f"z1^{m}"), P("z2")])
    return build


# one line per acceptance criterion, filled in by test_acceptance.py
CRITERIA = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[k])
