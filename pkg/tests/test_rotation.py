import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectral_billiards.billiard import state_from_incidence
from spectral_billiards.errors import InaccessibleLayer, OutOfRange
from spectral_billiards.geometry import CircularAnnulus, Disk, Polygon, RadialLayers
from spectral_billiards.rotation import (
    Cylinder,
    FlatDisk,
    SphericalCut,
    F_multi_annulus,
    constant_profile,
    dF_multi_annulus,
    diophantine_check,
    f_closed,
    f_numeric,
    model_from_dict,
    near_periodic_phase_measure,
    periodic_levels,
    periodic_measure_1d,
    periodic_measure_bound,
    rotation_empirical,
    rotation_profile,
    simulate_branching,
)


def test_f_closed_examples():
    assert f_closed(FlatDisk(1, 1), 0.0) == pytest.approx(math.pi)
    assert f_closed(FlatDisk(1, 1), 0.5) == pytest.approx(2 * math.pi / 3)
    assert f_closed(Cylinder(1, 1), 1 / math.sqrt(2)) == pytest.approx(2.0)
    with pytest.raises(OutOfRange):
        f_closed(FlatDisk(1, 1), 1.5)


def test_flat_disk_limit_at_threshold():
    m = FlatDisk(1, 1)
    vals = [f_closed(m, 1 - 10.0**-k) for k in (2, 4, 6, 8)]
    assert vals[-1] < 1e-3 and all(np.diff(vals) < 0)
    assert f_numeric(constant_profile(), 1 - 1e-8) == pytest.approx(f_closed(m, 1 - 1e-8), abs=1e-7)


def test_constant_profile_matches_flat_disk():
    assert f_numeric(constant_profile(1.0, 1.0), 0.5) == pytest.approx(2 * math.pi / 3, abs=1e-9)


@pytest.mark.parametrize(
    "model, profile",
    [
        (FlatDisk(1.3, 0.8), constant_profile(1.3, 0.8)),
        (Cylinder(0.7, 1.2), constant_profile(0.7, 1.2, "cylinder")),
        (SphericalCut(1.0, 1.0), SphericalCut(1.0, 1.0).profile()),
    ],
    ids=["flat", "cylinder", "spherical"],
)
def test_closed_vs_numeric(model, profile):
    for e in np.linspace(0.02, 0.98, 20) * model.eta0:
        assert f_numeric(profile, float(e)) == pytest.approx(f_closed(model, float(e)), abs=1e-8)


def test_negative_eta_symmetry():
    p = constant_profile()
    for e in (0.1, 0.4, 0.8):
        assert f_numeric(p, -e) == pytest.approx(f_closed(FlatDisk(), -e), abs=1e-9)


@given(st.floats(-0.999, 0.998))
@settings(max_examples=100, deadline=None)
def test_flat_disk_strictly_decreasing(e):
    m = FlatDisk(1, 1)
    assert f_closed(m, e + 1e-3) < f_closed(m, e)


def test_model_from_dict():
    assert model_from_dict({"model": "cylinder", "mu": 2, "alpha": 3}) == Cylinder(2.0, 3.0)
    with pytest.raises(ValueError):
        model_from_dict({"model": "torus"})


def test_F_single_layer_is_flat_disk():
    L = RadialLayers((1.0,), (1.0,))
    for e in (0.0, 0.3, 0.7):
        assert F_multi_annulus(L, e, [1]) == pytest.approx(f_closed(FlatDisk(), e), abs=1e-15)


def test_F_at_zero_counts_diameters():
    L = RadialLayers((1.0, 0.6, 0.3), (1.0, 0.7, 1.3))
    # eta = 0: the central disk contributes pi per chord, annuli pi/2 ... crossing terms vanish
    assert F_multi_annulus(L, 0.0, [0, 0, 3]) == pytest.approx(3 * math.pi)


def test_F_two_layer_hand_evaluation():
    L = RadialLayers((1.0, 0.5), (1.0, 2.0))
    e = 0.3
    # outer annulus crossed (|eta| <= c r = 0.5), central disk chord
    hand = (math.asin(0.3 / 0.5) - math.asin(0.3 / 1.0)) + (math.pi - 2 * math.asin(0.3 / (0.5 * 2.0)))
    assert F_multi_annulus(L, e, [1, 1]) == pytest.approx(hand, abs=1e-15)


@given(st.lists(st.integers(0, 9), min_size=3, max_size=3), st.lists(st.integers(0, 9), min_size=3, max_size=3), st.floats(-0.2, 0.2))
@settings(max_examples=100, deadline=None)
def test_F_additive(n, m, e):
    L = RadialLayers((1.0, 0.6, 0.3), (1.0, 0.7, 1.3))
    nm = [a + b for a, b in zip(n, m)]
    assert F_multi_annulus(L, e, nm) == pytest.approx(F_multi_annulus(L, e, n) + F_multi_annulus(L, e, m), abs=1e-12)


def test_F_inaccessible_layer():
    L = RadialLayers((1.0, 0.6, 0.3), (1.0, 0.7, 1.3))
    with pytest.raises(InaccessibleLayer):
        F_multi_annulus(L, 0.5, [1, 1, 1])


def test_dF_matches_finite_difference():
    L = RadialLayers((1.0, 0.6, 0.3), (1.0, 0.7, 1.3))
    n = [2, 3, 1]
    for e in (0.05, 0.15, 0.3):
        h = 1e-6
        fd = (F_multi_annulus(L, e + h, n) - F_multi_annulus(L, e - h, n)) / (2 * h)
        assert dF_multi_annulus(L, e, n) == pytest.approx(fd, rel=1e-6)


def test_dF_blows_up_at_thresholds():
    L = RadialLayers((1.0, 0.6, 0.3), (1.0, 0.7, 1.3))
    for k in range(3):
        n = [0, 0, 0]
        n[k] = 1
        top = L.speeds[k] * L.radii[k]
        a, b = top - 1e-6, top - 1e-6 + 1e-9
        fd = (F_multi_annulus(L, b, n) - F_multi_annulus(L, a, n)) / (b - a)
        assert abs(fd) > 1e3


def test_branching_simulation_matches_F():
    L = RadialLayers((1.0, 0.6, 0.3), (1.0, 0.7, 1.3))
    run = simulate_branching(L, 0.2, 1000)
    assert sum(run.counts) == 1000
    assert run.angle == pytest.approx(F_multi_annulus(L, 0.2, run.counts), abs=1e-9)
    assert run.eta_drift <= 1e-12


def test_rotation_empirical_disk():
    D = Disk(1.0)
    s0 = state_from_incidence(D, 0.2, math.pi / 6)
    assert rotation_empirical(D, s0, 1000) == pytest.approx(2 * math.pi / 3, abs=1e-9)
    s0 = state_from_incidence(D, 0.2, 0.0)
    assert rotation_empirical(D, s0, 10) == pytest.approx(math.pi, abs=1e-12)


def test_rotation_empirical_annulus_missing_chord():
    A = CircularAnnulus(1.0, 0.3)
    s0 = state_from_incidence(A, 0.0, math.asin(0.5))
    assert rotation_empirical(A, s0, 500) == pytest.approx(f_closed(FlatDisk(), 0.5), abs=1e-9)


def _flat_profile(n=20001):
    return rotation_profile(lambda e: f_closed(FlatDisk(), e), -1 + 1e-12, 1 - 1e-12, n)


def test_periodic_measure_n2():
    prof = _flat_profile()
    exact = 2 * math.sin(0.005) + (1 - math.cos(0.005))
    assert periodic_measure_1d(prof, 2, 0.01) == pytest.approx(exact, abs=1e-9)
    # dense-grid oracle
    eta = np.linspace(-1, 1, 4_000_001)
    f = math.pi - 2 * np.arcsin(eta)
    lv = np.array(periodic_levels(2, 0, 2 * math.pi + 0.01))
    near = np.min(np.abs(f[:, None] - lv[None, :]), axis=1) <= 0.01
    assert periodic_measure_1d(prof, 2, 0.01) == pytest.approx(near.mean() * 2, abs=2e-6)


def test_periodic_measure_zero_eps():
    assert periodic_measure_1d(_flat_profile(), 5, 0.0) == 0.0


def test_periodic_measure_monotone():
    prof = _flat_profile(4001)
    by_eps = [periodic_measure_1d(prof, 6, e) for e in (1e-4, 1e-3, 1e-2, 5e-2)]
    assert all(np.diff(by_eps) >= 0)
    by_n = [periodic_measure_1d(prof, n, 1e-3) for n in range(1, 9)]
    assert all(np.diff(by_n) >= -1e-15)


def test_periodic_levels_are_reduced_fractions_in_range():
    lv = periodic_levels(3, 0.0, 2 * math.pi)
    assert lv == pytest.approx(sorted(2 * math.pi * q for q in (1 / 3, 1 / 2, 2 / 3, 1.0)))


def test_periodic_measure_bound():
    prof = rotation_profile(lambda e: f_closed(FlatDisk(), e), -0.9, 0.9, 20001)
    m = periodic_measure_1d(prof, 10, 1e-3)
    assert m <= periodic_measure_bound(prof, 10, 1e-3) * 1.1


def test_phase_measure_large_eps_is_one():
    pm = near_periodic_phase_measure(Disk(1.0), 10.0, 10.0, 50, seed=1)
    assert pm.estimate == 1.0


def test_phase_measure_disk_shrinks():
    vals = [near_periodic_phase_measure(Disk(1.0), 10.0, e, 1500, seed=5).estimate for e in (0.3, 0.03, 0.003)]
    assert vals[0] > vals[1] > vals[2]


def test_phase_measure_square_small_positive():
    pm = near_periodic_phase_measure(Polygon(), 10.0, 1e-3, 4000, seed=2)
    assert 0.0 < pm.estimate < 0.05
    again = near_periodic_phase_measure(Polygon(), 10.0, 1e-3, 4000, seed=2)
    assert again == pm


def test_phase_measure_thread_independent():
    a = near_periodic_phase_measure(Disk(1.0), 10.0, 0.05, 600, seed=9, threads=1, batch=100)
    b = near_periodic_phase_measure(Disk(1.0), 10.0, 0.05, 600, seed=9, threads=3, batch=100)
    assert a == b


def test_diophantine_flat_family_decreasing():
    profs = [rotation_profile(lambda e, mu=mu: f_closed(FlatDisk(mu, 1.0), e), 0.0, 0.5, 501) for mu in (1.0, 1.5)]
    rep = diophantine_check(profs, 2, 2)
    assert rep.shared_sign == "decreasing"


def test_diophantine_cylinder_increasing():
    profs = [rotation_profile(lambda e, mu=mu: f_closed(Cylinder(mu, 1.0), e), 0.0, 0.5, 501) for mu in (1.0, 1.2)]
    assert diophantine_check(profs, 2, 2).shared_sign == "increasing"


def test_diophantine_mixed_falls_back_to_scan():
    a = rotation_profile(lambda e: f_closed(FlatDisk(1.0, 1.0), e), 0.0, 0.5, 501)
    b = rotation_profile(lambda e: f_closed(Cylinder(1.0, 1.0), e), 0.0, 0.5, 501)
    rep = diophantine_check([a, b], 2, 2)
    assert rep.shared_sign is None
    assert math.isfinite(rep.min_proxy) and "scan" in rep.verdict
