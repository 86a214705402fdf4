import json
import math

import numpy as np
import pytest

from crlab.fbi import (
    RAPID, SLOW, Cutoff, FBIError, SampledFunction, classify, cone_report, decay_profile, fbi_transform,
    load_samples, sample_generator, unit_directions,
)

BOX2 = [(-1.5, 1.5, 301)] * 2
ETA = Cutoff(1.0)


def test_zero_function():
    u = sample_generator("zero", BOX2)
    assert fbi_transform(u, ETA, (0, 0), (3.0, -2.0)) == 0


def test_gaussian_mass_against_refined_grid():
    u = sample_generator("gaussian", [(-1.5, 1.5, 61)] * 2, width=0.3)
    fine = sample_generator("gaussian", [(-1.5, 1.5, 121)] * 2, width=0.3)
    val = fbi_transform(u, ETA, (0, 0), (0, 0))
    ref = fbi_transform(fine, ETA, (0, 0), (0, 0))
    assert abs(val.imag) < 1e-14 and val.real > 0
    assert abs(val - ref) / abs(ref) <= 1e-3
    assert abs(ref - 2 * math.pi * 0.09) / ref.real < 1e-3


def test_plane_wave_peak():
    omega = np.array([12.0, 5.0])
    u = sample_generator("plane_wave", BOX2, omega=omega.tolist())
    d = omega / np.linalg.norm(omega)
    lams = np.linspace(4, 24, 81)
    # undo the (pi/lambda)^(D/2) Gaussian mass so the envelope peaks at |omega|
    mags = [abs(fbi_transform(u, ETA, (0, 0), lam * d)) * lam / math.pi for lam in lams]
    assert abs(lams[int(np.argmax(mags))] - 13.0) <= 0.5
    # Gaussian envelope exp(-|omega - xi|^2 / (4 K |xi|)) for an orthogonal xi of the same length
    other = abs(fbi_transform(u, ETA, (0, 0), 13.0 * np.array([d[1], -d[0]]))) * 13.0 / math.pi
    assert abs(other / max(mags) - math.exp(-338 / 52)) < 0.05 * math.exp(-338 / 52)


def test_linearity():
    a = sample_generator("bump", BOX2, radius=0.7)
    b = sample_generator("heaviside", BOX2)
    alpha, beta = 2 - 1j, 0.5 + 3j
    lin = a.scale(alpha) + b.scale(beta)
    freq = (7.0, -3.0)
    lhs = fbi_transform(lin, ETA, (0.05, 0), freq)
    rhs = alpha * fbi_transform(a, ETA, (0.05, 0), freq) + beta * fbi_transform(b, ETA, (0.05, 0), freq)
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1e-300)


def test_translation_covariance():
    u = sample_generator("heisenberg_sqrt", [(-1, 1, 81), (-1, 1, 81), (-1, 1, 161)])
    eta = Cutoff(0.6)
    shift = (0.25, -0.5, 0.125)
    v = u.shifted(shift)
    for freq in [(0, 0, 20.0), (3.0, -1.0, 8.0)]:
        f0 = fbi_transform(u, eta, (0, 0, 0), freq)
        f1 = fbi_transform(v, eta, shift, freq)
        assert abs(abs(f1) - abs(f0)) <= 1e-10 * abs(f0)


def test_input_errors():
    u = sample_generator("bump", BOX2)
    with pytest.raises(FBIError):
        fbi_transform(u, ETA, (5, 0), (1, 0))
    with pytest.raises(FBIError):
        fbi_transform(u, ETA, (0, 0), (1, 0), K=0)
    with pytest.raises(FBIError):
        fbi_transform(u, Cutoff(1.2), (0, 0), (1, 0))
    with pytest.raises(FBIError):
        fbi_transform(u, Cutoff(0.5, center=(0.0, 0.0)), (0.6, 0), (1, 0))
    with pytest.raises(FBIError):
        decay_profile(u, ETA, (0, 0), (1, 0), scales=[1, 2, 3])


def test_cutoff_profile():
    u = sample_generator("zero", BOX2)
    eta = ETA.values(u, (0, 0))
    x = u.grid(0)
    assert np.all((eta >= 0) & (eta <= 1))
    r = np.hypot(*np.meshgrid(x, x, indexing="ij"))
    assert np.all(eta[r <= 1.0] == 1.0) and np.all(eta[r >= math.sqrt(2)] == 0.0)


def test_classification_rules():
    scales = [4, 8, 16, 32, 64, 128, 256]
    slow = [1 / s for s in scales]
    assert classify(scales, slow, [0] * 7)["classification"] == SLOW
    fast = [math.exp(-s / 4) for s in scales]
    assert classify(scales, fast, [0] * 7)["classification"] == RAPID
    tiny = [1e-301] * 7
    res = classify(scales, tiny, [0] * 7)
    assert res["classification"] == RAPID and res["floor_flag"]


def test_bump_rapid_everywhere_and_heaviside_slow():
    bump = sample_generator("bump", BOX2, radius=0.6)
    rep = cone_report(bump, ETA, (0, 0), unit_directions(2, 16))
    assert set(rep.classifications) == {RAPID} and rep.is_empty()
    h = sample_generator("heaviside", BOX2)
    for d in [(0, 1), (0, -1)]:
        p = decay_profile(h, ETA, (0, 0), d)
        assert p.classification == SLOW and abs(p.poly_order - 1) < 0.2


def test_increasing_K_keeps_bump_rapid():
    bump = sample_generator("bump", BOX2, radius=0.6)
    for K in (1.0, 2.0, 4.0):
        assert decay_profile(bump, ETA, (0, 0), (0.6, 0.8), K=K).classification == RAPID


def test_heisenberg_half_line_and_levi_check(heis):
    r = 0.5
    R = math.sqrt(2) * r
    u = sample_generator("heisenberg_sqrt", [(-R, R, 51), (-R, R, 51), (-R, R, 201)])
    rep = cone_report(u, Cutoff(r), (0, 0, 0), [(0, 0, 1), (0, 0, -1)], manifold=heis)
    assert rep.classifications == [SLOW, RAPID]
    assert rep.contains((0, 0, 1)) and not rep.contains((0, 0, -1))
    assert rep.levi_check["consistent"]
    preds = rep.levi_check["predictions"]
    assert not preds[0]["excluded"] and preds[1]["excluded"]


def test_heaviside_cone_without_manifold():
    h = sample_generator("heaviside", BOX2)
    rep = cone_report(h, ETA, (0, 0), [(0, 1), (0, -1)])
    assert rep.contains((0, 1)) and rep.contains((0, -1))
    assert rep.levi_check == {"applicable": False, "reason": "no manifold supplied"}


def test_load_samples_roundtrip(tmp_path):
    u = sample_generator("gaussian", [(-1, 1, 5), (-1, 1, 7)])
    path = tmp_path / "s.json"
    path.write_text(json.dumps(u.to_json()))
    v = load_samples(str(path))
    assert v.axes == u.axes and np.array_equal(v.values, u.values)
    g = load_samples({"generator": "bump", "axes": [[-1, 1, 5]], "params": {"radius": 0.5}})
    assert g.values.shape == (5,)
    with pytest.raises(FBIError):
        SampledFunction([(-1, 1, 3)], np.zeros(4))
