import numpy as np
import pytest

from crlab import parse_poly as P
from crlab.jets import CRMap
from crlab.normalization import (
    NormalizationError, Tolerances, normalize_frame, normalize_rows, orthonormal_basis, quadric_signs,
    select_frame, translate_to_origin,
)

from conftest import power_source, q, quadric


def pt(M, z1, u=0):
    return M.graph_point([q(str(z1))], [u])


def within_tolerances(R, tol=Tolerances()):
    r = R.residuals
    return (r["unitarity"] <= tol.unitarity and r["zero_block"] <= tol.zero_block
            and r["sigma_min_B"] >= tol.invertibility and r["transformation_law"] <= tol.transformation_law)


def test_identity_gives_phase_matrix(heis):
    R = normalize_frame(CRMap(heis, heis, [P("z1"), P("z2")]), pt(heis, 0), 1)
    assert R.passed
    assert np.allclose(np.abs(R.A), np.eye(2), atol=1e-12)


def test_rotation_example(heis):
    F = CRMap(heis, quadric([1, 1]), [P("4/5*z1"), P("3/5*z1"), P("z2")])
    R = normalize_frame(F, pt(heis, 0), 1)
    assert R.passed and within_tolerances(R) and R.N0 == 2 and R.extension == []
    # (4/5, 3/5) is rotated onto the first axis
    row = R.transformed[1, :2]
    assert abs(abs(row[0]) - np.linalg.norm(R.rows[1, :2])) < 1e-12
    assert abs(row[1]) <= 1e-10
    assert np.allclose(R.transformed, R.rows @ R.A, atol=1e-14)


def test_frame_selection(power_map):
    F = power_map(2)
    sel = select_frame(F, pt(F.source, "1/2"), 1)
    assert sel["precondition_ok"] and sel["extension"] == [] and sel["N0"] == 2
    F3 = power_map(3)
    sel = select_frame(F3, pt(F3.source, 0), 3)
    assert not sel["precondition_ok"] and "n+1" in sel["message"]
    assert sel["extension"] == [(3,)] and sel["rank"] == 2


def test_precondition_failure_raises(power_map):
    F = power_map(3)
    with pytest.raises(NormalizationError):
        normalize_frame(F, pt(F.source, 0), 3)


def test_requires_translation(heis):
    F = CRMap(heis, quadric([1, 1]), [P("z1"), P("0"), P("z2")])
    with pytest.raises(NormalizationError):
        normalize_frame(F, pt(heis, "1/2", 1), 1)
    R = normalize_frame(F, pt(heis, "1/2", 1), 1, translate=True)
    assert R.passed and R.notes


def test_translation_keeps_map_on_target(heis):
    from crlab.jets import verify_map_into_target
    F = CRMap(heis, quadric([1, 1]), [P("4/5*z1"), P("3/5*z1"), P("z2")])
    G = translate_to_origin(F, pt(heis, "1/3+i", 2))
    assert verify_map_into_target(G)[0]
    assert all(h.evaluate(pt(heis, "1/3+i", 2)) == 0 for h in G.components)
    assert quadric_signs(quadric([1, -1])) == [1, -1]
    assert quadric_signs(power_source(2)) is None


@pytest.mark.parametrize("z1,u", [("1/2", 0), ("-1+i/3", 2), ("2", "1/7")])
def test_power_maps_after_translation(power_map, z1, u):
    for m in (1, 2, 3):
        F = power_map(m)
        R = normalize_frame(F, F.source.graph_point([q(z1)], [q(str(u))]), 1, translate=True)
        assert R.passed, R.residuals


def test_renormalization_is_block_diagonal(heis):
    F = CRMap(heis, quadric([1, 1, 1]), [P("1/2*z1"), P("1/2*z1"), P("(1/2+i/2)*z1"), P("z2")])
    R = normalize_frame(F, pt(heis, 0), 1)
    assert R.passed
    A2 = normalize_rows(R.transformed)
    k = R.N0 - 1
    assert np.max(np.abs(A2[:k, k:])) <= 1e-10 and np.max(np.abs(A2[k:, :k])) <= 1e-10
    assert np.allclose(A2[k:, k:], np.eye(A2.shape[0] - k), atol=1e-10)


def test_orthonormal_basis_drops_dependent_rows():
    rows = np.array([[1, 1j, 0], [2, 2j, 0], [0, 0, 1]], dtype=complex)
    Q = orthonormal_basis(rows)
    assert Q.shape == (2, 3)
    assert np.allclose(Q @ Q.conj().T, np.eye(2), atol=1e-14)
