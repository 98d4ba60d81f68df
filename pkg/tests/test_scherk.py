import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from minigraph.diskfield import build_grid
from minigraph.scherk import (
    BicentricQuad,
    ExtrapolationError,
    ExtremalReport,
    StepBoundary,
    SweepPoint,
    c0_c1,
    default_grid_for_k,
    default_k_list,
    k_for_steepness,
    steepness,
    dilatation_closed_form,
    dilatation_of,
    harmonic_measure,
    k_sweep_extrapolate,
    match_quadrilateral,
    poisson_step_map,
    richardson,
    step_f0,
    step_f_z0,
    step_laplacian,
    sup_sweep,
)

disk_pts = st.complex_numbers(max_magnitude=0.95, allow_nan=False, allow_infinity=False)


def test_square_constants():
    sq = StepBoundary.square()
    assert step_f_z0(sq) == pytest.approx(2 * math.sqrt(2) / math.pi, rel=1e-14)
    assert abs(step_f0(sq)) < 1e-15
    assert c0_c1(0, 2 * math.sqrt(2) / math.pi)[0] == pytest.approx(math.pi**2 / 2, rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(disk_pts)
def test_square_dilatation_is_minus_z_squared(z):
    assert abs(dilatation_closed_form(StepBoundary.square(), np.array([z]))[0] + z * z) < 1e-10


@pytest.mark.parametrize("z", [0j, 0.3 + 0.4j, -0.7j, 0.55])
@pytest.mark.parametrize("arc", [(0.2, 1.5), (1.0, 4.0)])
def test_harmonic_measure_against_poisson_integral(z, arc):
    r, t = abs(z), np.angle(z)
    kern = lambda s: (1 - r * r) / (1 - 2 * r * math.cos(s - t) + r * r) / (2 * math.pi)  # noqa: E731
    ref = quad(kern, *arc, epsabs=1e-13)[0]
    assert harmonic_measure(z, *arc) == pytest.approx(ref, abs=1e-11)


def test_step_map_boundary_values_and_harmonicity():
    sq = StepBoundary.square()
    for j, a in enumerate(sq.a):
        mid = (j + 0.5) * math.pi / 2
        assert abs(poisson_step_map(sq, [0.99999 * np.exp(1j * mid)])[0] - a) < 1e-4
    probes = 0.6 * np.exp(1j * np.linspace(0, 6, 9))
    # five-point truncation error is O(h^2) with h = 1e-3
    assert step_laplacian(sq, probes) < 1e-4


def test_spectral_dilatation_matches_closed_form():
    grid = build_grid(64, 256)
    sample = dilatation_of(poisson_step_map(StepBoundary.square(), grid))
    inner = grid.radial_nodes <= 0.6
    err = np.abs(sample.values[inner] + grid.z[inner] ** 2)
    assert sample.excluded == 0
    assert err.max() < 1e-4


def test_bicentric_validation():
    with pytest.raises(ValueError):  # a rectangle has no incircle
        BicentricQuad(tuple(np.exp(1j * np.array([0.3, math.pi - 0.3, math.pi + 0.3, -0.3]))))
    with pytest.raises(ValueError):
        BicentricQuad((1, 1j, -1, -0.5j))
    sq = StepBoundary.square().values
    assert sq.contains([0j, 0.5])[0] and not sq.contains([0.9 + 0.9j])[0]


@pytest.mark.parametrize("w,fz0", [(0.0, 2 * math.sqrt(2) / math.pi), (0.3, 0.883391), (0.6, 0.823794)])
def test_match_quadrilateral(w, fz0):
    boundary, rep = match_quadrilateral(w)
    assert rep.f_z0 == pytest.approx(fz0, rel=1e-6)
    assert abs(boundary.values.pitot_defect) < 1e-8
    bound = min(math.pi**2 / 2 * (1 + w * w) ** 2 / (1 - w * w) ** 2, 16 * math.pi**2 / 27 * (1 + w**4) / (1 + w * w) ** 2)
    assert rep.c1 <= bound * (1 + 1e-12)


def test_rotation_by_i_is_symmetry():
    a = match_quadrilateral(0.3)[1].f_z0
    b = match_quadrilateral(0.3j)[1].f_z0
    assert a == pytest.approx(b, rel=1e-8)


def test_report_ratio_identity():
    c0, c1 = c0_c1(0.4, 0.8)
    ExtremalReport(0.4, 0.8, c0, c1, "step_construction", 0.0)
    with pytest.raises(ValueError):
        ExtremalReport(0.4, 0.8, c0 * 1.01, c1, "step_construction", 0.0)
    with pytest.raises(ValueError):
        ExtremalReport(0.4, 0.8, c0, c1, "guess", 0.0)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_richardson_exact_for_quadratics(a, b, c):
    xs = [0.3, 0.2, 0.1, 0.05]
    ys = [a + b * x + c * x * x for x in xs]
    assert richardson(xs, ys, 2) == pytest.approx(a, abs=1e-9)


def test_extrapolation_rejects_non_monotone():
    pts = [SweepPoint(k, 1.0, v, 0.0, 1) for k, v in [(0.5, 1.0), (0.7, 0.9), (0.9, 2.0)]]
    with pytest.raises(ExtrapolationError):
        k_sweep_extrapolate(0, [0.5, 0.7, 0.9], points=pts)


def test_extrapolation_of_synthetic_sweep():
    ks = [0.6, 0.7, 0.8, 0.9]
    pts = [SweepPoint(k, 1.0, 4.0 - (1 - k) ** 2, 0.0, 1) for k in ks]
    rep = k_sweep_extrapolate(0, ks, points=pts)
    assert rep.c0 == pytest.approx(4.0, abs=1e-12)
    assert rep.error_estimate < 1e-12


def test_sup_sweep_collects_reports():
    res = sup_sweep([0.0, 0.3])
    assert res.heinz_estimate == pytest.approx(math.pi**2 / 2, rel=1e-8)
    assert len(res.reports) == 2 and not res.skipped


@given(st.floats(0, 0.9), st.floats(0, 0.96))
def test_steepness_round_trip(w, k):
    kappa = steepness(w, k)
    assert w <= kappa < 1
    assert k_for_steepness(w, kappa) == pytest.approx(k, abs=1e-9)


def test_default_k_list_and_grids():
    assert default_k_list(0) == (0.0, 0.5, 0.7, 0.8, 0.9, 0.95)
    ks = default_k_list(0.6)
    assert ks[0] == 0 and len(ks) == 5 and all(b > a for a, b in zip(ks[:-1], ks[1:]))
    assert steepness(0.6, ks[-1]) == pytest.approx(0.95)
    assert default_grid_for_k(0.5).angular_count == 256
    assert default_grid_for_k(0.5, 0.6).angular_count == 512
    assert default_grid_for_k(0.7, 0.6).angular_count == 1024
    with pytest.raises(ValueError):
        k_for_steepness(0.6, 0.5)


def test_extrapolation_error_includes_grid_part():
    ks = [0.6, 0.7, 0.8, 0.9]
    pts = [SweepPoint(k, 1.0, 4.0 - (1 - k) ** 2, 0.0, 1, 0.01) for k in ks]
    rep = k_sweep_extrapolate(0, ks, points=pts)
    # |Lagrange weights| at x = 0.3, 0.2, 0.1 sum to 1 + 3 + 3 = 7
    assert rep.error_estimate == pytest.approx(0.07, rel=1e-9)
