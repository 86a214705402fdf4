import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from crlab import GaussianRational, PointAssignment, Poly, parse_poly as P
from crlab.geometry import (
    AbstractCRStructure, EmbeddedManifold, GenericityError, GeometryError, NonCharacteristicError,
    OffManifoldError, VectorField, characteristic_space, conormals, cr_basis, hermitian_inertia,
    involutivity_check, levi_form, signature,
)
from crlab.linalg import conj_transpose, matmul
from crlab.poly import real_var, z, zbar

from conftest import power_source, quadric

HALF_I = GaussianRational(0, Fraction(1, 2))


def origin(M):
    return M.graph_point([0] * M.n, [0] * M.d)


def test_heisenberg_basis(heis):
    (L,) = cr_basis(heis, origin(heis))
    assert L == VectorField({zbar(1): Poly.const(-HALF_I), zbar(2): -Poly.var(z(1))})


def test_power_source_basis():
    M = power_source(2)
    (L,) = cr_basis(M, origin(M))
    assert L == VectorField({zbar(1): Poly.const(-HALF_I), zbar(2): P("-2*z1^2*conj(z1)")})


def test_degenerate_defining_function():
    M = EmbeddedManifold([P("(z2 - conj(z2))^2/4")])
    with pytest.raises(GenericityError):
        cr_basis(M, PointAssignment({z(1): 0, z(2): 0}))


def test_off_manifold(heis):
    with pytest.raises(OffManifoldError):
        cr_basis(heis, PointAssignment({z(1): 1, z(2): 0}))


def test_non_real_defining_function():
    with pytest.raises(GeometryError):
        EmbeddedManifold([P("z1 + i")])


CORPUS = [
    EmbeddedManifold([P("-(z2 - conj(z2))/(2*i) + z1*conj(z1)")]),
    power_source(2), power_source(3),
    quadric([1, 1, -1]),
    EmbeddedManifold([P("-(z3-conj(z3))/(2*i) + z1*conj(z1)"),
                      P("-(z4-conj(z4))/(2*i) + z2*conj(z2) + z1*conj(z1)^2 + conj(z1)*z1^2")]),
]


@pytest.mark.parametrize("M", CORPUS)
def test_basis_annihilates_defining_functions(M):
    rng = random.Random(3)
    zs = [GaussianRational(Fraction(rng.randint(-3, 3), 2), Fraction(rng.randint(-3, 3), 3)) for _ in range(M.n)]
    p = M.graph_point(zs, [Fraction(rng.randint(-2, 2), 5) for _ in range(M.d)])
    basis = cr_basis(M, p)
    g = M.graph
    for L in basis:
        for rho in M.defining:
            assert g.reduce(L.apply(rho)).is_zero()
    # brackets [L_i, conj L_j] are tangent at p
    for L in basis:
        for K in basis:
            C = L.bracket(K.conj())
            for rho in M.defining:
                assert C.apply(rho).evaluate(p) == 0
    for rho in M.defining:
        assert rho.conj() == rho


def test_involutivity():
    M = power_source(2)
    assert involutivity_check(M)[0]
    assert involutivity_check(cr_basis(M, origin(M)))[0]
    one = AbstractCRStructure(1, 1, b={(1, 1): P("i*z1")})
    assert involutivity_check(one)[0]
    S = AbstractCRStructure(2, 2, fields=[
        VectorField({zbar(1): Poly.one(), real_var("s", 2): P("s1")}),
        VectorField({zbar(2): Poly.one(), real_var("s", 1): P("s2")}),
    ])
    ok, wit = involutivity_check(S)
    assert not ok and wit["pair"] == (1, 2)
    assert wit["commutator"] == VectorField({real_var("s", 1): P("s1"), real_var("s", 2): P("-s2")})


def test_characteristic_heisenberg(heis):
    (s,) = characteristic_space(heis, origin(heis))
    # du: coefficient 1/2 on dz2 (and its conjugate)
    assert s.coefficient(z(2)) == Fraction(1, 2) and s.coefficient(z(1)) == 0
    p = heis.graph_point([GaussianRational(1, 2)], [3])
    (s,) = characteristic_space(heis, p)
    for L in cr_basis(heis, p):
        assert s.pair(L, p) == 0 and s.pair(L.conj(), p) == 0


def test_characteristic_abstract():
    S = AbstractCRStructure(2, 2, a={(1, 2): P("z2*s1")}, b={(1, 1): P("z1"), (2, 2): P("conj(z2)")})
    basis = characteristic_space(S)
    assert len(basis) == 2
    assert {tuple(sorted(c.real)) for c in basis} == {(real_var("s", 1),), (real_var("s", 2),)}
    assert all(not c.hol for c in basis)


def test_levi_models(heis):
    p = origin(heis)
    H = levi_form(heis, p, characteristic_space(heis, p)[0])
    assert H.entries == [[Fraction(1, 4)]] and signature(H) == (1, 0, 0)
    Q = quadric([1, 1, -1])
    p = origin(Q)
    assert signature(levi_form(Q, p, characteristic_space(Q, p)[0])) == (2, 1, 0)
    M = power_source(2)
    p = origin(M)
    H = levi_form(M, p, characteristic_space(M, p)[0])
    assert H.entries == [[0]] and signature(H) == (0, 0, 1)


def test_non_characteristic_covector(heis):
    from crlab.geometry import Covector
    with pytest.raises(NonCharacteristicError):
        levi_form(heis, origin(heis), Covector({z(1): 1}))


def test_levi_conormal_shift_and_scaling(heis):
    p = heis.graph_point([GaussianRational(1, -1)], [2])
    s = characteristic_space(heis, p)[0]
    base = levi_form(heis, p, s).entries
    for c in conormals(heis, p):
        assert levi_form(heis, p, s + c.scale(Fraction(7, 3))).entries == base
    lam = Fraction(5, 2)
    assert levi_form(heis, p, s.scale(lam)).entries == [[x * lam for x in r] for r in base]
    assert signature(levi_form(heis, p, -s)) == (0, 1, 0)


@pytest.mark.parametrize("H,expected", [
    ([[Fraction(1, 4)]], (1, 0, 0)),
    ([[1, 0, 0], [0, 1, 0], [0, 0, -1]], (2, 1, 0)),
    ([[0, 1], [1, 0]], (1, 1, 0)),
    ([[0, 0], [0, 0]], (0, 0, 2)),
    ([[0, GaussianRational(0, 1)], [GaussianRational(0, -1), 0]], (1, 1, 0)),
])
def test_inertia_examples(H, expected):
    assert hermitian_inertia(H) == expected


small = st.fractions(min_value=-4, max_value=4, max_denominator=3)
gauss = st.builds(GaussianRational, small, small)


@st.composite
def hermitian(draw, n=3):
    m = [[None] * n for _ in range(n)]
    for i in range(n):
        m[i][i] = GaussianRational(draw(small))
        for j in range(i + 1, n):
            m[i][j] = draw(gauss)
            m[j][i] = m[i][j].conjugate()
    return m


@settings(max_examples=60, deadline=None)
@given(hermitian(), st.lists(gauss, min_size=9, max_size=9))
def test_inertia_congruence_invariant(H, g):
    from crlab.linalg import det
    G = [g[0:3], g[3:6], g[6:9]]
    if det(G) == 0:
        return
    C = matmul(matmul(conj_transpose(G), H), G)
    assert hermitian_inertia(C) == hermitian_inertia(H)
