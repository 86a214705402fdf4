import random
from fractions import Fraction

import pytest

from crlab import GaussianRational, Poly, parse_poly as P
from crlab.geometry import cr_basis
from crlab.jets import (
    CRMap, HypothesisError, JetEngine, a_vector, apply_L_alpha, check_theorem25_hypotheses,
    degenerate_degree, find_rank_witnesses, generic_rank_l, jet_report, k0_order, mixed_order_diagnostic,
    multiindices, quadric_linear_obstruction, random_source_point, rank_l, reflection_quotients,
    transform_target, verify_map_into_target,
)

from conftest import cayley_unitary, power_source, q, quadric

HALF_I = GaussianRational(0, Fraction(1, 2))


def pt(M, z1, u=0):
    return M.graph_point([q(str(z1))], [u])


def test_multiindex_order():
    assert multiindices(2, 2) == [(2, 0), (1, 1), (0, 2)]
    assert multiindices(3, 1) == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]


def test_verify_map(power_map, heis):
    assert verify_map_into_target(power_map(2))[0]
    assert verify_map_into_target(CRMap(heis, heis, [P("z1"), P("z2")]))[0]
    ok, res = verify_map_into_target(CRMap(power_source(2), heis, [P("z1"), P("z2")]))
    assert not ok and res[0] == P("z1*conj(z1) - (z1*conj(z1))^2")


def test_a_vectors(power_map, heis):
    assert a_vector(power_map(2)) == [[P("conj(z1)^2"), Poly.const(HALF_I)]]
    assert a_vector(CRMap(heis, heis, [P("z1"), P("z2")])) == [[P("conj(z1)"), Poly.const(HALF_I)]]
    F = CRMap(heis, quadric([1, -1]), [P("z1"), P("z1"), P("0")])
    assert a_vector(F) == [[P("conj(z1)"), P("-conj(z1)"), Poly.const(HALF_I)]]


def test_apply_L_alpha():
    M = power_source(2)
    basis = cr_basis(M, pt(M, 0))
    v = [P("conj(z1)^2")]
    assert apply_L_alpha(v, (1,), basis) == [P("-i*conj(z1)")]
    assert apply_L_alpha(v, (2,), basis) == [Poly.const(Fraction(-1, 2))]
    assert apply_L_alpha(v, (0,), basis) == v


def test_ordered_composition_convention():
    # L_n acts first: L^(1,1) f = L_1(L_2 f)
    M = quadric([1, 1])
    L1, L2 = cr_basis(M, M.graph_point([0, 0], [0]))
    f = P("conj(z1)*conj(z2)*z1 + conj(z2)^2*z1")
    assert apply_L_alpha([f], (1, 1), [L1, L2]) == [L1.apply(L2.apply(f))]
    eng = JetEngine([[f]], [L1, L2])
    assert eng.jet((1, 1)) == [[L1.apply(L2.apply(f))]]
    assert eng.jet((2, 1)) == [[L1.apply(L1.apply(L2.apply(f)))]]


def test_power_map_ranks(power_map):
    F = power_map(2)
    M = F.source
    assert jet_report(F, pt(M, 0), 2).ranks == [1, 1, 2]
    assert k0_order(F, pt(M, 0), 3) == 2
    p = pt(M, "1/2", 3)
    assert p[P("z2").variables().pop()].im == Fraction(1, 16)
    assert rank_l(F, p, 1) == 2 and k0_order(F, p, 3) == 1
    assert k0_order(power_map(3), pt(power_source(3), 0), 3) == 3


def test_identity_is_one_nondegenerate(heis):
    F = CRMap(heis, heis, [P("z1"), P("z2")])
    rng = random.Random(5)
    for _ in range(5):
        assert k0_order(F, random_source_point(heis, rng), 3) == 1
    assert generic_rank_l(F, 1) == 2


def test_stand_in_never_full(heis):
    F = CRMap(heis, quadric([1, -1]), [P("z1"), P("z1"), P("0")])
    rep = jet_report(F, pt(heis, "1/3", 2), 6)
    assert rep.ranks == [1] + [2] * 6 and rep.order is None
    assert k0_order(F, pt(heis, "1/3", 2), 6) is None
    assert generic_rank_l(F, 2) == 2


def test_filtration_is_monotone(power_map):
    F = power_map(3)
    rng = random.Random(11)
    for _ in range(5):
        r = jet_report(F, random_source_point(F.source, rng), 4).ranks
        assert all(a <= b for a, b in zip(r, r[1:])) and r[-1] <= F.Nprime


def test_generic_rank_dominates(power_map, heis):
    maps = [power_map(2), power_map(3), CRMap(heis, quadric([1, 1]), [P("3/5*z1"), P("4/5*z1"), P("z2")])]
    rng = random.Random(2024)
    for F in maps:
        for l in (1, 2):
            g = generic_rank_l(F, l)
            hits = 0
            for _ in range(50):
                r = rank_l(F, random_source_point(F.source, rng), l)
                assert g >= r
                hits += g == r
            assert hits >= 45


def test_degenerate_degree(heis, power_map):
    F = CRMap(heis, quadric([1, 1]), [P("3/5*z1"), P("4/5*z1"), P("z2")])
    for z1 in ("0", "1", "2/3+i"):
        d = degenerate_degree(F, pt(heis, z1), 2)
        assert d["degree"] == 2 and d["region"] == "omega2"
    F2 = CRMap(heis, quadric([1, 1]), [P("z1"), P("0"), P("z2")])
    assert degenerate_degree(F2, pt(heis, 1), 2)["degree"] == 2
    ident = CRMap(heis, heis, [P("z1"), P("z2")])
    d = degenerate_degree(ident, pt(heis, 0), 1)
    assert d["degree"] is None and d["region"] == "omega1"
    d = degenerate_degree(power_map(2), pt(power_source(2), 0), 1)
    assert d["region"] == "exceptional" and d["flags"]


def test_rank_witness_search(heis):
    F = CRMap(heis, quadric([1, 1]), [P("3/5*z1"), P("4/5*z1"), P("z2")])
    res = find_rank_witnesses(F, pt(heis, 0), 2, budget=5)
    assert "found" in res


def test_reflection_quotients(heis):
    F = CRMap(heis, quadric([1, 1]), [P("3/5*z1"), P("4/5*z1"), P("z2")])
    R = reflection_quotients(F, pt(heis, 0), 1)
    G = R["G"]
    assert G[(2, 1)].num == G[(2, 1)].den * Fraction(4, 3)
    assert G[(2, 3)].num.is_zero()
    assert R["verification"]["cr_exact"] and R["verification"]["reconstruction_exact"]
    F2 = CRMap(heis, quadric([1, 1]), [P("z1"), P("0"), P("z2")])
    R2 = reflection_quotients(F2, pt(heis, 0), 1)
    assert all(g.num.is_zero() for g in R2["G"].values())


def test_reflection_hypotheses_checked(heis):
    F = CRMap(heis, heis, [P("z1"), P("z2")])
    with pytest.raises(HypothesisError):
        reflection_quotients(F, pt(heis, 0), 2)


def test_hypothesis_reports(heis, power_map):
    (r,) = check_theorem25_hypotheses(CRMap(heis, heis, [P("z1"), P("z2")]), [pt(heis, 0)])
    assert r["source_levi_nonzero_eigenvalue"] and r["target_strongly_pseudoconvex"] and r["dF_injective"]
    assert (r["rank0"], r["rank1"]) == (1, 2)
    (r,) = check_theorem25_hypotheses(power_map(2), [pt(power_source(2), 0)])
    assert not r["source_levi_nonzero_eigenvalue"] and not r["dF_injective"] and r["rank1"] == 1
    (r,) = check_theorem25_hypotheses(CRMap(heis, quadric([1, -1]), [P("z1"), P("z1"), P("0")]), [pt(heis, 0)])
    assert not r["target_strongly_pseudoconvex"] and tuple(r["target_signature"]) == (1, 1, 0)


def test_obstruction_examples():
    assert not quadric_linear_obstruction(3, 2, 1, [[1], [0]])["feasible"]
    assert quadric_linear_obstruction(2, 2, 1, [[1]])["feasible"]
    assert quadric_linear_obstruction(2, 3, "25/9", [["5/3", 0]])["feasible"]
    assert not quadric_linear_obstruction(2, 3, 1, [["5/3", 0]])["feasible"]
    with pytest.raises(ValueError):
        quadric_linear_obstruction(2, 2, -1, [[1]])


def test_mixed_order_diagnostic(heis):
    F = CRMap(heis, quadric([1, 1]), [P("3/5*z1"), P("4/5*z1"), P("z2")])
    d = mixed_order_diagnostic(F, pt(heis, 0), 2)
    assert d["ordered_rank"] <= d["mixed_rank"]


def test_rank_invariant_under_unitary_target_change(heis):
    from crlab.linalg import conj_transpose, identity, matmul
    F = CRMap(heis, quadric([1, 1]), [P("3/5*z1"), P("4/5*z1"), P("z2")])
    S = [[GaussianRational(0, 1), GaussianRational(2, 1), 0],
         [GaussianRational(-2, 1), 0, 0], [0, 0, 0]]
    U = cayley_unitary(S)
    assert matmul(U, conj_transpose(U)) == identity(3)
    G = transform_target(F, U)
    assert verify_map_into_target(G)[0]
    p = pt(heis, "1/2", 1)
    assert jet_report(G, p, 3).ranks == jet_report(F, p, 3).ranks
