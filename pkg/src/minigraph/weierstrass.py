"""Weierstrass data of the minimal graphs generated by solved self-maps.

A harmonic self-map ``f`` with dilatation ``q^2`` gives the conformal minimal
immersion

    X(z) = (Re f, Im f, Im int_0^z 2 p q dzeta),      p = f_z,

whose Gaussian curvature is ``-4 |q'|^2 / (|p|^2 (1 + |q|^2)^4)``.  For the
family used throughout, ``q`` is the Moebius quotient returned by
:func:`gauss_map_q`, so no square root (and no branch cut) is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from scipy.special import roots_legendre

from .diskfield import (
    ComplexField,
    DiskGrid,
    GraphPatch,
    finite_difference_hessian,
    interpolate,
    polar_derivatives,
    radial_interpolation_matrix,
)


class CurvaturePoleError(ValueError):
    """p vanishes, so the surface has a branch point there."""


class IntegrationInconsistencyError(RuntimeError):
    """The height integral depends on the path."""


class FoldOverError(RuntimeError):
    """The planar projection is not injective, so there is no graph."""


# ----------------------------------------------------------------------------
# the dilatation family


@dataclass(frozen=True)
class FamilyParameter:
    w: complex
    k: float

    def __post_init__(self):
        object.__setattr__(self, "w", complex(self.w))
        object.__setattr__(self, "k", float(self.k))
        if not abs(self.w) < 1:
            raise ValueError(f"|w| must be < 1, got {abs(self.w)}")
        if not 0 <= self.k < 1:
            raise ValueError(f"k must lie in [0, 1), got {self.k}")

    @property
    def phase(self) -> complex:
        """i (1 - w^4)/|1 - w^4|, a unit complex number."""
        a = 1 - self.w**4
        return 1j * a / abs(a)


def gauss_map_q(z, param: FamilyParameter):
    """q(z) = (w + k i eta z)/(1 + k i eta conj(w) z) with eta = (1-w^4)/|1-w^4|."""
    z = np.asarray(z, dtype=complex)
    c = param.k * param.phase
    return (param.w + c * z) / (1 + c * np.conj(param.w) * z)


def gauss_map_q_prime(z, param: FamilyParameter):
    z = np.asarray(z, dtype=complex)
    c = param.k * param.phase
    return c * (1 - abs(param.w) ** 2) / (1 + c * np.conj(param.w) * z) ** 2


def mu_k(z, param: FamilyParameter):
    """The dilatation q(z)^2."""
    return gauss_map_q(z, param) ** 2


def mu_bound(param: FamilyParameter) -> float:
    a = abs(param.w)
    return ((a + param.k) / (1 + a * param.k)) ** 2


# ----------------------------------------------------------------------------
# curvature and normals


@dataclass(frozen=True, eq=False)
class WeierstrassData:
    """Callables p = f_z, q and q' plus the map they came from."""

    p: Callable[[np.ndarray], np.ndarray]
    q: Callable[[np.ndarray], np.ndarray]
    q_prime: Callable[[np.ndarray], np.ndarray] | None = None
    source_map: object | None = None
    param: FamilyParameter | None = None

    @classmethod
    def from_solved(cls, m, tol: float = 1e-6) -> "WeierstrassData":
        """Pair a solved map of the family with its Gauss map.

        Checks that q^2 reproduces the map's dilatation at every node.
        """
        tag = m.dilatation.family_tag
        if tag is None:
            raise ValueError("the map's dilatation is not a member of the mu_k family")
        param = FamilyParameter(*tag)
        z = m.grid.z
        gap = float(np.abs(gauss_map_q(z, param) ** 2 - m.dilatation(z)).max())
        if gap > tol:
            raise ValueError(f"q^2 differs from the dilatation by {gap:.3e}")
        return cls(
            p=m.f_z,
            q=lambda zz: gauss_map_q(zz, param),
            q_prime=lambda zz: gauss_map_q_prime(zz, param),
            source_map=m,
            param=param,
        )

    def dq(self, z):
        if self.q_prime is not None:
            return self.q_prime(z)
        # complex-step free central difference along the real axis (q analytic)
        h = 1e-5
        z = np.asarray(z, dtype=complex)
        return (self.q(z + h) - self.q(z - h)) / (2 * h)


def curvature_from_values(p, q, dq):
    p = np.asarray(p, dtype=complex)
    if np.any(np.abs(p) == 0):
        raise CurvaturePoleError("p vanishes: branch point of the surface")
    return -4 * np.abs(dq) ** 2 / (np.abs(p) ** 2 * (1 + np.abs(q) ** 2) ** 4)


def curvature(z, data: WeierstrassData):
    """Gaussian curvature of the surface at parameter ``z``."""
    z = np.asarray(z, dtype=complex)
    out = curvature_from_values(data.p(z), data.q(z), data.dq(z))
    return float(out[0]) if out.shape == (1,) and z.ndim == 0 else out


def curvature_at_origin_family(param: FamilyParameter, f_z0: float) -> float:
    """K(0) = -4 k^2 (1-|w|^2)^2 / (f_z0^2 (1+|w|^2)^4) for the mu_k family."""
    if not f_z0 > 0:
        raise ValueError("f_z0 must be positive")
    a2 = abs(param.w) ** 2
    return -4 * param.k**2 * (1 - a2) ** 2 / (f_z0**2 * (1 + a2) ** 4)


def unit_normal(z, data_or_q) -> np.ndarray:
    """N = -(2 Im q, 2 Re q, |q|^2 - 1)/(1 + |q|^2); trailing axis of length 3."""
    if isinstance(data_or_q, WeierstrassData):
        q = data_or_q.q(np.asarray(z, dtype=complex))
    else:
        q = np.asarray(data_or_q, dtype=complex)
    a = np.abs(q) ** 2
    return -np.stack([2 * q.imag, 2 * q.real, a - 1], axis=-1) / (1 + a)[..., None]


# ----------------------------------------------------------------------------
# the surface


@dataclass(frozen=True)
class SurfaceSample:
    z: complex
    position: tuple[float, float, float]
    normal: tuple[float, float, float]
    gauss_curvature: float


@dataclass(frozen=True, eq=False)
class Surface:
    """Samples of the immersion on a polar grid plus the origin.

    ``positions`` etc. have shape ``grid.shape + (3,)``; ``center_*`` hold
    the point above z = 0.  Iteration yields :class:`SurfaceSample`, centre
    first.
    """

    grid: DiskGrid
    f: ComplexField
    heights: ComplexField
    f_z: np.ndarray
    f_zbar: np.ndarray
    normals: np.ndarray
    curvature: np.ndarray
    center_position: tuple[float, float, float]
    center_normal: tuple[float, float, float]
    center_curvature: float
    path_defect: float

    @property
    def positions(self) -> np.ndarray:
        return np.stack([self.f.values.real, self.f.values.imag, self.heights.values.real], axis=-1)

    def __len__(self) -> int:
        return self.grid.size + 1

    def __iter__(self) -> Iterator[SurfaceSample]:
        yield SurfaceSample(0j, self.center_position, self.center_normal, self.center_curvature)
        pos = self.positions.reshape(-1, 3)
        nrm = self.normals.reshape(-1, 3)
        curv = self.curvature.ravel()
        for i, z in enumerate(self.grid.nodes):
            yield SurfaceSample(complex(z), tuple(pos[i]), tuple(nrm[i]), float(curv[i]))

    def height_at(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return interpolate(self.heights, z).real

    def map_at(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return interpolate(self.f, z)


def _cumulative_radial_matrix(grid: DiskGrid, m: int | None = None) -> np.ndarray:
    """Q[i, j] = int_0^{r_i} l_j(rho) drho for the radial Lagrange basis l_j."""
    n = grid.n_radial
    m = m or (n // 2 + 2)
    x, wts = roots_legendre(m)
    Q = np.empty((n, n))
    for i, r in enumerate(grid.radial_nodes):
        rho = 0.5 * r * (x + 1)
        Q[i] = 0.5 * r * (wts @ radial_interpolation_matrix(grid, rho))
    return Q


def _segment_integral(func, a: complex, b: complex, m: int = 40) -> complex:
    x, wts = roots_legendre(m)
    pts = 0.5 * (a + b) + 0.5 * (b - a) * x
    return complex(0.5 * (b - a) * np.sum(wts * func(pts)))


DEFAULT_TRIANGLE = (0.12 + 0.05j, -0.31 + 0.22j, 0.08 - 0.37j)


def loop_integral(data: WeierstrassData, vertices=DEFAULT_TRIANGLE, m: int = 40) -> complex:
    """Integral of 2 p q around a closed polygon (zero when p q is analytic)."""
    integrand = lambda z: 2 * data.p(z) * data.q(z)  # noqa: E731
    vs = list(vertices) + [vertices[0]]
    return sum(_segment_integral(integrand, a, b, m) for a, b in zip(vs[:-1], vs[1:]))


def parameterize_surface(data: WeierstrassData, grid: DiskGrid | None = None, path_tol: float = 1e-4) -> Surface:
    """Sample X = (Re f, Im f, Im int_0^z 2 p q) on the grid of the source map.

    Heights are integrated along rays from the origin.  The integrand's loop
    integral around a small interior triangle must stay below ``path_tol``.
    """
    m = data.source_map
    if m is None:
        raise ValueError("WeierstrassData needs its source map to sample the surface")
    grid = grid or m.grid
    if grid.key() != m.grid.key():
        raise ValueError("surface grid must match the source map's grid")
    defect = abs(loop_integral(data))
    if defect > path_tol:
        raise IntegrationInconsistencyError(f"loop integral of 2pq is {defect:.3e}")

    z = grid.z
    p = m.f_z_grid()
    q = data.q(z)
    # d/dr along the ray theta: dz = e^{i theta} dr
    integrand = 2 * p * q * np.exp(1j * grid.theta)[None, :]
    F = _cumulative_radial_matrix(grid) @ integrand
    heights = ComplexField(grid, F.imag.astype(complex))

    f_z, f_zbar = polar_derivatives(m.f_values)
    normals = unit_normal(z, q)
    curv = curvature_from_values(p, q, data.dq(z))
    q0 = complex(data.q(np.array([0j]))[0])
    n0 = unit_normal(0j, np.array([q0]))[0]
    k0 = float(curvature_from_values(np.array([m.f_z_at_0]), np.array([q0]), data.dq(np.array([0j])))[0])
    return Surface(
        grid=grid,
        f=m.f_values,
        heights=heights,
        f_z=f_z,
        f_zbar=f_zbar,
        normals=normals,
        curvature=curv,
        center_position=(0.0, 0.0, 0.0),
        center_normal=tuple(float(v) for v in n0),
        center_curvature=k0,
        path_defect=defect,
    )


# ----------------------------------------------------------------------------
# back to a graph over the (u, v) plane


def invert_map(surface: Surface, targets, z0=None, tol: float = 1e-12, max_iter: int = 50) -> np.ndarray:
    """Newton solve f(z) = target for each target, using spectral interpolants."""
    targets = np.atleast_1d(np.asarray(targets, dtype=complex))
    z = targets.copy() if z0 is None else np.broadcast_to(np.asarray(z0, dtype=complex), targets.shape).copy()
    fz_field = surface.f.with_values(surface.f_z)
    fzb_field = surface.f.with_values(surface.f_zbar)
    for _ in range(max_iter):
        delta = targets - interpolate(surface.f, z)
        a = interpolate(fz_field, z)
        b = interpolate(fzb_field, z)
        jac = np.abs(a) ** 2 - np.abs(b) ** 2
        if np.any(jac <= 0):
            raise FoldOverError("Jacobian of the planar projection is not positive")
        dz = (np.conj(a) * delta - b * np.conj(delta)) / jac
        z = z + dz
        if np.any(np.abs(z) >= 1):
            raise FoldOverError("Newton inversion left the disk")
        if np.max(np.abs(dz)) < tol:
            return z
    # stagnation at rounding level still counts as converged
    if np.max(np.abs(targets - interpolate(surface.f, z))) > 1e3 * tol:
        raise FoldOverError("Newton inversion did not converge")
    return z


def reconstruct_graph(surface: Surface, center=(0.0, 0.0), spacing: float = 1e-2, half_width: int = 2) -> GraphPatch:
    """Heights of the surface on a square (u, v) lattice around ``center``.

    Each lattice point is pulled back to the parameter disk by Newton's
    method and the height read off the spectral interpolant.  Two distinct
    lattice points landing on the same parameter flag a fold.
    """
    mw = int(half_width)
    offs = np.arange(-mw, mw + 1) * spacing
    uu, vv = np.meshgrid(center[0] + offs, center[1] + offs)
    targets = (uu + 1j * vv).ravel()
    c = complex(center[0], center[1])
    z_c = invert_map(surface, [c])[0] if c != 0 else 0j
    zs = invert_map(surface, targets, z0=z_c)
    gaps = np.abs(zs[:, None] - zs[None, :]) + np.eye(len(zs))
    if gaps.min() < 1e-3 * spacing:
        raise FoldOverError("two lattice points share a parameter")
    heights = surface.height_at(zs).reshape(uu.shape)
    return GraphPatch((float(center[0]), float(center[1])), float(spacing), heights)


def graph_curvature(patch: GraphPatch) -> float:
    """(f_uu f_vv - f_uv^2)/(1 + f_u^2 + f_v^2)^2 at the patch centre."""
    fu, fv, fuu, fuv, fvv = finite_difference_hessian(patch)
    return (fuu * fvv - fuv**2) / (1 + fu**2 + fv**2) ** 2


def graph_normal(patch: GraphPatch) -> np.ndarray:
    fu, fv, *_ = finite_difference_hessian(patch)
    n = np.array([-fu, -fv, 1.0])
    return n / np.linalg.norm(n)


def mean_curvature_residual(patch: GraphPatch) -> float:
    """(1 + f_v^2) f_uu - 2 f_u f_v f_uv + (1 + f_u^2) f_vv at the patch centre."""
    fu, fv, fuu, fuv, fvv = finite_difference_hessian(patch)
    return (1 + fv**2) * fuu - 2 * fu * fv * fuv + (1 + fu**2) * fvv


def probe_points(n: int, seed: int = 0, r_min: float = 0.1, r_max: float = 0.5) -> np.ndarray:
    """``n`` reproducible parameter points in the annulus r_min <= |z| <= r_max.

    Radii are drawn uniformly in area so probes do not crowd the centre.
    """
    if not 0 <= r_min < r_max < 1:
        raise ValueError("need 0 <= r_min < r_max < 1")
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.uniform(r_min**2, r_max**2, n))
    return r * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, n))


def observed_order(errors, spacings) -> float:
    """Least-squares slope of log(error) against log(spacing)."""
    e = np.log(np.abs(np.asarray(errors, dtype=float)))
    h = np.log(np.asarray(spacings, dtype=float))
    return float(np.polyfit(h, e, 1)[0])


__all__ = [
    "CurvaturePoleError",
    "FamilyParameter",
    "FoldOverError",
    "IntegrationInconsistencyError",
    "Surface",
    "SurfaceSample",
    "WeierstrassData",
    "curvature",
    "curvature_at_origin_family",
    "gauss_map_q",
    "gauss_map_q_prime",
    "graph_curvature",
    "graph_normal",
    "invert_map",
    "loop_integral",
    "mean_curvature_residual",
    "mu_bound",
    "mu_k",
    "observed_order",
    "parameterize_surface",
    "probe_points",
    "reconstruct_graph",
    "unit_normal",
]
