import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minigraph.diskfield import (
    ComplexField,
    GraphPatch,
    StencilError,
    build_grid,
    finite_difference_hessian,
    integrate,
    interpolate,
    laplacian,
    lp_norm,
    polar_derivatives,
    radial_differentiation_matrix,
)


@pytest.mark.parametrize("nr,na", [(3, 16), (8, 7), (8, 6)])
def test_build_grid_rejects_small_or_odd(nr, na):
    with pytest.raises(ValueError):
        build_grid(nr, na)


def test_grid_shapes(small_grid):
    assert small_grid.shape == (16, 64)
    assert small_grid.z.shape == (16, 64)
    assert small_grid.weights.sum() == pytest.approx(math.pi, rel=1e-14)


@pytest.mark.parametrize(
    "func,exact",
    [
        (lambda z: np.ones_like(z), math.pi),
        (lambda z: np.abs(z) ** 2, math.pi / 2),
        (lambda z: np.abs(z) ** 6, math.pi / 4),
        (lambda z: z**3, 0.0),
        (lambda z: z * np.conj(z) ** 1 * z.real**2, math.pi / 6),
    ],
)
def test_integrate_polynomials(small_grid, func, exact):
    # exact values from integral of r^(2a+1) cos^(2b) over the disk
    assert integrate(small_grid.sample(func)) == pytest.approx(exact, abs=1e-13)


def test_lp_norm_of_constant(small_grid):
    f = small_grid.sample(lambda z: 2 * np.ones_like(z))
    assert lp_norm(f, 4) == pytest.approx(2 * math.pi**0.25, rel=1e-13)


def test_polar_derivatives_of_polynomial(small_grid):
    f = small_grid.sample(lambda z: z**3 + 2 * z * np.conj(z) ** 2)
    fz, fzb = polar_derivatives(f)
    z = small_grid.z
    assert np.max(np.abs(fz - (3 * z**2 + 2 * np.conj(z) ** 2))) < 1e-10
    assert np.max(np.abs(fzb - 4 * z * np.conj(z))) < 1e-10


def test_laplacian_matches_four_fzzbar(small_grid):
    f = small_grid.sample(lambda z: np.abs(z) ** 4)
    # Laplacian of r^4 is 16 r^2
    assert np.max(np.abs(laplacian(f) - 16 * np.abs(small_grid.z) ** 2)) < 1e-8


def test_radial_differentiation_exact_for_low_degree(small_grid):
    r = small_grid.radial_nodes
    d = radial_differentiation_matrix(small_grid)
    assert np.max(np.abs(d @ r**5 - 5 * r**4)) < 1e-10


@settings(max_examples=25, deadline=None)
@given(
    st.complex_numbers(max_magnitude=0.95, allow_nan=False, allow_infinity=False),
    st.integers(min_value=0, max_value=6),
    st.integers(min_value=0, max_value=6),
)
def test_interpolation_reproduces_monomials(pt, a, b):
    grid = build_grid(16, 64)
    f = grid.sample(lambda z: z**a * np.conj(z) ** b)
    got = interpolate(f, [pt])[0]
    assert abs(got - pt**a * np.conj(pt) ** b) < 1e-10


@settings(max_examples=25, deadline=None)
@given(
    st.floats(-2, 2),
    st.floats(-2, 2),
    st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
)
def test_integral_is_linear(a, b, c):
    grid = build_grid(8, 16)
    f = grid.sample(lambda z: z * np.conj(z))
    g = grid.sample(lambda z: np.cos(z.real))
    lhs = integrate(ComplexField(grid, a * f.values + c * b * g.values))
    rhs = a * integrate(f) + c * b * integrate(g)
    assert abs(lhs - rhs) < 1e-12 * (1 + abs(lhs))


@pytest.mark.parametrize("half_width", [1, 2])
def test_fd_hessian_exact_on_quadratic(half_width):
    p = GraphPatch.from_function(lambda u, v: 1 + 2 * u - v + 3 * u * u - u * v + 0.5 * v * v, (0.1, -0.2), 0.05, half_width)
    fu, fv, fuu, fuv, fvv = finite_difference_hessian(p)
    u, v = 0.1, -0.2
    assert fu == pytest.approx(2 + 6 * u - v, abs=1e-9)
    assert fv == pytest.approx(-1 - u + v, abs=1e-9)
    assert (fuu, fuv, fvv) == pytest.approx((6, -1, 1), abs=1e-8)


def test_fd_hessian_stencil_errors():
    p = GraphPatch.from_function(lambda u, v: u * v, (0, 0), 0.1, 1)
    with pytest.raises(StencilError):
        finite_difference_hessian(p, at=(0.1, 0.1))
    with pytest.raises(StencilError):
        finite_difference_hessian(p, at=(0.05, 0.0))


def test_graph_patch_validation():
    with pytest.raises(ValueError):
        GraphPatch((0, 0), 0.1, np.zeros((4, 4)))
    with pytest.raises(ValueError):
        GraphPatch((0, 0), -0.1, np.zeros((3, 3)))
