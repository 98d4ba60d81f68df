import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minigraph.beltrami import BeltramiCoefficient, solve_self_map
from minigraph.weierstrass import (
    CurvaturePoleError,
    FamilyParameter,
    FoldOverError,
    IntegrationInconsistencyError,
    WeierstrassData,
    curvature,
    curvature_at_origin_family,
    curvature_from_values,
    gauss_map_q,
    gauss_map_q_prime,
    graph_curvature,
    graph_normal,
    invert_map,
    mean_curvature_residual,
    mu_bound,
    mu_k,
    observed_order,
    parameterize_surface,
    reconstruct_graph,
    unit_normal,
)

disk_pts = st.complex_numbers(max_magnitude=0.95, allow_nan=False, allow_infinity=False)
w_vals = st.complex_numbers(max_magnitude=0.9, allow_nan=False, allow_infinity=False)


@pytest.fixture(scope="module")
def surface_w0(medium_grid):
    m = solve_self_map(BeltramiCoefficient.family(0, 0.5), medium_grid)
    data = WeierstrassData.from_solved(m)
    return m, data, parameterize_surface(data)


@pytest.mark.parametrize("w,k", [(1.0, 0.5), (0.2, 1.0), (0.2, -0.1)])
def test_family_parameter_validation(w, k):
    with pytest.raises(ValueError):
        FamilyParameter(w, k)


@settings(max_examples=40, deadline=None)
@given(w_vals, st.floats(0, 0.95), disk_pts)
def test_gauss_map_properties(w, k, z):
    p = FamilyParameter(w, k)
    q = gauss_map_q(z, p)
    assert abs(q**2 - mu_k(z, p)) < 1e-14
    assert abs(q) ** 2 <= mu_bound(p) + 1e-12
    h = 1e-6
    fd = (gauss_map_q(z + h, p) - gauss_map_q(z - h, p)) / (2 * h)
    assert abs(fd - gauss_map_q_prime(z, p)) < 1e-6 * (1 + abs(fd))
    assert abs(gauss_map_q(0, p) - p.w) < 1e-15


@settings(max_examples=40, deadline=None)
@given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False))
def test_unit_normal_is_unit(q):
    n = unit_normal(0j, np.array([q]))[0]
    assert np.linalg.norm(n) == pytest.approx(1.0, abs=1e-12)


def test_upward_normal_at_zero_q():
    assert unit_normal(0j, np.array([0j]))[0] == pytest.approx([0, 0, 1])


def test_curvature_pole():
    with pytest.raises(CurvaturePoleError):
        curvature_from_values(np.array([0j]), np.array([0.1]), np.array([1.0]))


@pytest.mark.parametrize("w", [0.0, 0.3, 0.5j])
def test_origin_curvature_formula(w):
    p = FamilyParameter(w, 0.6)
    fz0 = 0.9
    direct = curvature_from_values(np.array([fz0]), gauss_map_q(np.array([0j]), p), gauss_map_q_prime(np.array([0j]), p))
    assert curvature_at_origin_family(p, fz0) == pytest.approx(float(direct[0]), rel=1e-14)


def test_surface_layout(surface_w0, medium_grid):
    m, data, s = surface_w0
    assert len(s) == medium_grid.size + 1
    first = next(iter(s))
    assert first.z == 0 and first.position == (0.0, 0.0, 0.0)
    assert s.positions.shape == medium_grid.shape + (3,)
    assert np.all(s.curvature <= 0)
    assert s.path_defect < 1e-10
    assert s.center_curvature == pytest.approx(curvature_at_origin_family(data.param, m.f_z_at_0), rel=1e-12)


@pytest.mark.parametrize("zp", [0j, 0.3 + 0.2j, -0.4j, -0.5 + 0.1j])
def test_graph_curvature_matches_weierstrass(surface_w0, zp):
    m, data, s = surface_w0
    c = complex(m.f([zp])[0]) if zp != 0 else 0j
    patch = reconstruct_graph(s, (c.real, c.imag), 1e-2, 2)
    K_fd = graph_curvature(patch)
    K_w = float(curvature(np.array([zp]), data)[0]) if zp != 0 else s.center_curvature
    assert K_fd == pytest.approx(K_w, rel=1e-5)
    n_w = unit_normal(np.array([zp]), data)[0]
    assert np.dot(graph_normal(patch), n_w) == pytest.approx(1.0, abs=1e-8)


def test_mean_curvature_second_order(surface_w0):
    _, _, s = surface_w0
    hs = [4e-2, 2e-2, 1e-2]
    errs = [abs(mean_curvature_residual(reconstruct_graph(s, (0.1, -0.05), h, 1))) for h in hs]
    assert observed_order(errs, hs) >= 1.5


def test_inversion_outside_image_folds(surface_w0):
    _, _, s = surface_w0
    with pytest.raises(FoldOverError):
        invert_map(s, [1.5 + 0j])


def test_path_dependence_detected(surface_w0):
    m, data, _ = surface_w0
    bad = WeierstrassData(p=m.f_z, q=lambda z: 0.3 * np.conj(z), source_map=m)
    with pytest.raises(IntegrationInconsistencyError):
        parameterize_surface(bad)


def test_observed_order_of_exact_power():
    assert observed_order([1e-2, 2.5e-3], [1.0, 0.5]) == pytest.approx(2.0)
