"""Polar discretization of the unit disk.

The grid is a tensor product of Gauss-Legendre nodes in the radius and a
uniform periodic grid in the angle.  Functions on the disk are stored as
``(n_radial, n_angular)`` arrays; the flattened node order is radial-major.

Besides quadrature this module carries the spectral machinery shared by the
numerical modules: Fourier analysis on rings, polynomial interpolation and
differentiation along rays, and a regular-lattice :class:`GraphPatch` with
central-difference derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "DiskGrid",
    "ComplexField",
    "GraphPatch",
    "StencilError",
    "build_grid",
    "integrate",
    "lp_norm",
    "radial_interpolation_matrix",
    "radial_differentiation_matrix",
    "polar_derivatives",
    "interpolate",
    "laplacian",
    "finite_difference_hessian",
]

MIN_RADIAL = 4
MIN_ANGULAR = 8


class StencilError(ValueError):
    """A finite-difference stencil does not fit inside the sampled patch."""


@dataclass(frozen=True, eq=False)
class DiskGrid:
    """Gauss-Legendre (radius) x trapezoid (angle) grid on the unit disk."""

    radial_nodes: np.ndarray
    radial_weights: np.ndarray
    angular_count: int

    def __post_init__(self):
        for arr in (self.radial_nodes, self.radial_weights):
            arr.setflags(write=False)

    @property
    def n_radial(self) -> int:
        return len(self.radial_nodes)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_radial, self.angular_count)

    @property
    def size(self) -> int:
        return self.n_radial * self.angular_count

    @property
    def boundary_ring_index(self) -> int:
        return self.n_radial - 1

    @property
    def theta(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.angular_count) / self.angular_count

    @property
    def z(self) -> np.ndarray:
        """Complex node positions, shape ``(n_radial, n_angular)``."""
        return self.radial_nodes[:, None] * np.exp(1j * self.theta)[None, :]

    @property
    def nodes(self) -> np.ndarray:
        return self.z.ravel()

    @property
    def area_weights(self) -> np.ndarray:
        """Weights for dA = r dr dtheta, shape ``(n_radial, n_angular)``."""
        w = self.radial_weights * self.radial_nodes * (2.0 * np.pi / self.angular_count)
        return np.repeat(w[:, None], self.angular_count, axis=1)

    @property
    def weights(self) -> np.ndarray:
        return self.area_weights.ravel()

    def sample(self, func) -> "ComplexField":
        """Evaluate a vectorized callable of ``z`` on the nodes."""
        return ComplexField(self, np.asarray(func(self.z), dtype=complex))

    def key(self) -> tuple[int, int]:
        return (self.n_radial, self.angular_count)


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex samples of a function on a :class:`DiskGrid`."""

    grid: DiskGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.size != self.grid.size:
            raise ValueError(
                f"field has {vals.size} values, grid has {self.grid.size} nodes"
            )
        vals = vals.reshape(self.grid.shape)
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains non-finite values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def with_values(self, values) -> "ComplexField":
        return ComplexField(self.grid, values)


@lru_cache(maxsize=16)
def _cached_grid(n_radial: int, n_angular: int) -> DiskGrid:
    x, w = np.polynomial.legendre.leggauss(n_radial)
    return DiskGrid(0.5 * (x + 1.0), 0.5 * w, n_angular)


def build_grid(n_radial: int, n_angular: int) -> DiskGrid:
    """Build the polar tensor grid.

    Radial nodes are Gauss-Legendre points mapped to (0, 1), so radial
    polynomials of degree ``2*n_radial - 1`` (including the ``r`` Jacobian)
    integrate exactly; the angular rule is exact for trigonometric
    polynomials of degree below ``n_angular``.
    """
    if n_radial < MIN_RADIAL:
        raise ValueError(f"n_radial must be >= {MIN_RADIAL}, got {n_radial}")
    if n_angular < MIN_ANGULAR or n_angular % 2:
        raise ValueError(f"n_angular must be even and >= {MIN_ANGULAR}, got {n_angular}")
    return _cached_grid(int(n_radial), int(n_angular))


def integrate(field: ComplexField) -> complex:
    # ravel keeps node-index summation order fixed
    return complex(np.sum(field.values.ravel() * field.grid.weights))


def lp_norm(field: ComplexField, p: float = 4.0) -> float:
    """Discrete L^p norm with the area weights."""
    vals = np.abs(field.values.ravel()) ** p
    return float(np.sum(vals * field.grid.weights) ** (1.0 / p))


# ----------------------------------------------------------------------------
# radial polynomial machinery


@lru_cache(maxsize=16)
def _barycentric_weights(n_radial: int) -> np.ndarray:
    """Barycentric weights of the radial nodes, computed in log form to avoid overflow."""
    x = _cached_grid(n_radial, MIN_ANGULAR).radial_nodes
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    sign = np.prod(np.sign(diff), axis=1)
    logw = -np.sum(np.log(np.abs(diff)), axis=1)
    logw -= logw.max()
    w = sign * np.exp(logw)
    w.setflags(write=False)
    return w


def radial_interpolation_matrix(grid: DiskGrid, r) -> np.ndarray:
    """Matrix mapping nodal values to the radial interpolant evaluated at ``r``."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    x = grid.radial_nodes
    w = _barycentric_weights(grid.n_radial)
    diff = r[:, None] - x[None, :]
    hit = diff == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = w[None, :] / diff
        mat = terms / terms.sum(axis=1, keepdims=True)
    rows = np.any(hit, axis=1)
    if np.any(rows):
        mat[rows] = hit[rows].astype(float)
    return mat


@lru_cache(maxsize=16)
def _diff_matrix(n_radial: int) -> np.ndarray:
    x = _cached_grid(n_radial, MIN_ANGULAR).radial_nodes
    n = len(x)
    w = _barycentric_weights(n_radial)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    d = (w[None, :] / w[:, None]) / diff
    np.fill_diagonal(d, 0.0)
    d[np.arange(n), np.arange(n)] = -d.sum(axis=1)
    d.setflags(write=False)
    return d


def radial_differentiation_matrix(grid: DiskGrid) -> np.ndarray:
    """Spectral d/dr on the radial nodes (exact for degree < n_radial)."""
    return _diff_matrix(grid.n_radial)


def _wavenumbers(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, d=1.0 / n)


def polar_derivatives(field: ComplexField) -> tuple[np.ndarray, np.ndarray]:
    """Spectral Wirtinger derivatives ``(f_z, f_zbar)`` at the nodes.

    Uses f_z = e^{-i t}/2 (f_r - i f_t / r) and f_zbar = e^{i t}/2 (f_r + i f_t / r).
    """
    grid = field.grid
    vals = field.values
    f_r = radial_differentiation_matrix(grid) @ vals
    k = _wavenumbers(grid.angular_count)
    f_t = np.fft.ifft(1j * k[None, :] * np.fft.fft(vals, axis=1), axis=1)
    r = grid.radial_nodes[:, None]
    e = np.exp(1j * grid.theta)[None, :]
    f_z = 0.5 * np.conj(e) * (f_r - 1j * f_t / r)
    f_zbar = 0.5 * e * (f_r + 1j * f_t / r)
    return f_z, f_zbar


def laplacian(field: ComplexField) -> np.ndarray:
    """Spectral polar Laplacian f_rr + f_r / r + f_tt / r^2 at the nodes."""
    grid = field.grid
    d = radial_differentiation_matrix(grid)
    vals = field.values
    f_r = d @ vals
    f_rr = d @ f_r
    k = _wavenumbers(grid.angular_count)
    f_tt = np.fft.ifft(-(k[None, :] ** 2) * np.fft.fft(vals, axis=1), axis=1)
    r = grid.radial_nodes[:, None]
    return f_rr + f_r / r + f_tt / r**2


def interpolate(field: ComplexField, points) -> np.ndarray:
    """Spectral interpolation (Fourier in angle, polynomial in radius)."""
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    grid = field.grid
    n = grid.angular_count
    coef = np.fft.fft(field.values, axis=1) / n
    k = _wavenumbers(n)
    if n % 2 == 0:
        # split the Nyquist mode symmetrically so real data stays real
        nyq = n // 2
        coef = np.concatenate([coef, coef[:, nyq : nyq + 1] * 0.5], axis=1)
        coef[:, nyq] *= 0.5
        k = np.concatenate([k, [n // 2]])
    radial = radial_interpolation_matrix(grid, np.abs(pts)) @ coef
    phase = np.exp(1j * np.outer(np.angle(pts), k))
    return np.sum(radial * phase, axis=1)


# ----------------------------------------------------------------------------
# graph patches


@dataclass(frozen=True, eq=False)
class GraphPatch:
    """Heights of a graph sampled on a regular square lattice.

    ``heights[i, j]`` is the height at ``(u0 + j*h, v0 + i*h)`` shifted so
    that the lattice is centred: ``j, i`` run over ``-m..m``.
    """

    center: tuple[float, float]
    spacing: float
    heights: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.heights, dtype=float)
        if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] % 2 == 0:
            raise ValueError("heights must be a square array with odd side")
        if not np.all(np.isfinite(h)):
            raise ValueError("heights must be finite")
        object.__setattr__(self, "heights", h)
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")

    @property
    def half_width(self) -> int:
        return self.heights.shape[0] // 2

    @property
    def uv_points(self) -> np.ndarray:
        m = self.half_width
        offs = np.arange(-m, m + 1) * self.spacing
        uu, vv = np.meshgrid(self.center[0] + offs, self.center[1] + offs)
        return np.stack([uu.ravel(), vv.ravel()], axis=1)

    @classmethod
    def from_function(cls, func, center, spacing: float, half_width: int = 2) -> "GraphPatch":
        m = int(half_width)
        offs = np.arange(-m, m + 1) * spacing
        uu, vv = np.meshgrid(center[0] + offs, center[1] + offs)
        return cls((float(center[0]), float(center[1])), float(spacing), func(uu, vv))


def finite_difference_hessian(patch: GraphPatch, at=None):
    """Central differences ``(f_u, f_v, f_uu, f_uv, f_vv)`` at a lattice point.

    Fourth-order stencils are used when the patch has half width >= 2,
    second-order ones otherwise.  ``at`` defaults to the patch centre and
    must coincide with a lattice point.
    """
    m = patch.half_width
    h = patch.spacing
    if at is None:
        i0 = j0 = m
    else:
        j0 = m + int(round((at[0] - patch.center[0]) / h))
        i0 = m + int(round((at[1] - patch.center[1]) / h))
        if abs((j0 - m) * h + patch.center[0] - at[0]) > 1e-9 * max(h, 1.0) or abs(
            (i0 - m) * h + patch.center[1] - at[1]
        ) > 1e-9 * max(h, 1.0):
            raise StencilError("evaluation point is not a lattice point")
    F = patch.heights
    order4 = min(i0, j0, 2 * m - i0, 2 * m - j0) >= 2
    if not order4 and min(i0, j0, 2 * m - i0, 2 * m - j0) < 1:
        raise StencilError("stencil leaves the sampled patch")

    def at_(di, dj):
        return F[i0 + di, j0 + dj]

    if order4:
        c1 = {-2: 1 / 12, -1: -2 / 3, 1: 2 / 3, 2: -1 / 12}
        c2 = {-2: -1 / 12, -1: 4 / 3, 0: -5 / 2, 1: 4 / 3, 2: -1 / 12}
    else:
        c1 = {-1: -0.5, 1: 0.5}
        c2 = {-1: 1.0, 0: -2.0, 1: 1.0}
    f_u = sum(c * at_(0, d) for d, c in c1.items()) / h
    f_v = sum(c * at_(d, 0) for d, c in c1.items()) / h
    f_uu = sum(c * at_(0, d) for d, c in c2.items()) / h**2
    f_vv = sum(c * at_(d, 0) for d, c in c2.items()) / h**2
    f_uv = sum(ci * cj * at_(di, dj) for di, ci in c1.items() for dj, cj in c1.items()) / h**2
    return float(f_u), float(f_v), float(f_uu), float(f_uv), float(f_vv)
