import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minigraph.diskfield import build_grid
from minigraph.transforms import (
    BackendMismatchError,
    OperatorBackend,
    P_at_origin,
    cauchy_P,
    get_backend,
    hilbert_H,
    oracle_direct,
)

PTS = np.array([0.3 + 0.2j, -0.5j, 0.7, -0.41 + 0.05j])


def test_constant_density_closed_form(small_grid):
    # for phi = 1: P = conj(z) - z and H = -1, by the mean value property
    phi = small_grid.sample(lambda z: np.ones_like(z))
    assert np.max(np.abs(cauchy_P(phi, PTS) - (np.conj(PTS) - PTS))) < 1e-13
    assert np.max(np.abs(hilbert_H(phi, PTS) + 1)) < 1e-13


@pytest.mark.parametrize("func,expected", [(lambda z: z, -1.0), (lambda z: np.conj(z), 0.0), (lambda z: 1j * z, 0.0)])
def test_P_at_origin_closed_form(small_grid, func, expected):
    assert P_at_origin(small_grid.sample(func)) == pytest.approx(expected, abs=1e-13)


def test_P_at_origin_agrees_with_pointwise(small_grid):
    phi = small_grid.sample(lambda z: z**2 + 0.5 * z - 0.2j * np.conj(z) * z)
    assert P_at_origin(phi) == pytest.approx(cauchy_P(phi, [0j])[0].real, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(
    st.lists(st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False), min_size=6, max_size=6),
    st.floats(0, 2 * np.pi),
)
def test_real_part_vanishes_on_circle(coeffs, t):
    # Re P phi = 0 on |z| = 1, which makes |z exp(P phi)| = 1 there
    grid = build_grid(16, 64)
    monos = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    phi = grid.sample(lambda z: sum(c * z**a * np.conj(z) ** b for c, (a, b) in zip(coeffs, monos)))
    val = cauchy_P(phi, [np.exp(1j * t)])[0]
    assert abs(val.real) < 1e-11 * (1 + sum(abs(c) for c in coeffs))


@pytest.mark.parametrize("kernel", ["P", "H"])
@pytest.mark.parametrize("a,b", [(0, 0), (1, 0), (0, 1), (2, 1), (0, 3)])
def test_spectral_vs_oracle(small_grid, kernel, a, b):
    phi_f = lambda z: z**a * np.conj(z) ** b  # noqa: E731
    phi = small_grid.sample(phi_f)
    backend = get_backend(small_grid)
    spec = (backend.P if kernel == "P" else backend.H)(phi, PTS)
    ref = np.array([oracle_direct(phi_f, kernel, z) for z in PTS])
    assert np.max(np.abs(spec - ref)) < 1e-8


@pytest.mark.parametrize("kernel", ["P", "H"])
def test_point_evaluation_keeps_shape_and_order(small_grid, kernel):
    # grid nodes share radii, so the shared-radius path is exercised too
    phi = small_grid.sample(lambda z: 1 + z * np.conj(z) ** 2)
    op = getattr(get_backend(small_grid), kernel)
    pts = np.concatenate([small_grid.z[2:4, :3].ravel(), PTS[::-1]])
    one_by_one = np.array([op(phi, p)[0] for p in pts])
    np.testing.assert_allclose(op(phi, pts), one_by_one, rtol=1e-12, atol=1e-14)
    block = small_grid.z[2:4, :3]
    assert op(phi, block).shape == block.shape
    np.testing.assert_allclose(op(phi, block).ravel(), one_by_one[:6], rtol=1e-12, atol=1e-14)


def test_oracle_rejects_unknown_kernel():
    with pytest.raises(ValueError):
        oracle_direct(lambda z: z, "nope", 0.1)


def test_points_outside_disk_rejected(small_grid):
    phi = small_grid.sample(lambda z: z)
    with pytest.raises(ValueError):
        cauchy_P(phi, [1.5])


def test_backend_self_check(small_grid):
    assert OperatorBackend(small_grid).verify_against_oracle(3) < 1e-10
    assert issubclass(BackendMismatchError, RuntimeError)


def test_linearity_in_real_scalars(small_grid):
    f = small_grid.sample(lambda z: z * np.conj(z))
    g = small_grid.sample(lambda z: z**2)
    h = f.with_values(2.5 * f.values - 0.75 * g.values)
    lhs = cauchy_P(h, PTS)
    rhs = 2.5 * cauchy_P(f, PTS) - 0.75 * cauchy_P(g, PTS)
    assert np.max(np.abs(lhs - rhs)) < 1e-13
