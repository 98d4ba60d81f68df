"""Harmonic self-maps of the disk with a prescribed analytic dilatation.

The map is sought in the form ``f(z) = z exp(P phi(z))``.  Differentiating,

    f_zbar = z e^s phi,        f_z = e^s (1 + z H phi),        s = P phi,

so the second Beltrami equation ``conj(f_zbar) = omega f_z`` becomes the
fixed-point problem

    phi = conj(omega(z))/z * exp(-2i Im s) * (1 + conj(z) conj(H phi)).

Two variants of the operator are carried: ``"conjugated"`` (above) and
``"as_printed"``, which uses ``H phi`` without the conjugate.  The solver
picks whichever yields the smaller Beltrami residual when asked to.

Because ``Re P phi = 0`` on the unit circle, ``|f| = 1`` there and the
fixed point describes a self-map of the disk with ``f(0) = 0``.  When
``omega(0) != 0`` the density carries a ``1/z`` singularity; the spectral
operators accept it (they work with ``r * phi``) so such maps are solved
directly, see :func:`solve_self_map`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Literal

import numpy as np

from .diskfield import (
    ComplexField,
    DiskGrid,
    build_grid,
    laplacian,
    lp_norm,
    polar_derivatives,
    radial_interpolation_matrix,
)
from .transforms import OperatorBackend, P_at_origin, get_backend

Variant = Literal["conjugated", "as_printed"]
VARIANTS: tuple[Variant, ...] = ("conjugated", "as_printed")


class NormalizationRequiredError(ValueError):
    """Raised when an operation needs omega(0) = 0 but got something else."""


class ConvergenceError(RuntimeError):
    """Fixed-point iteration failed; carries the step-norm history."""

    def __init__(self, message: str, history: list[float], last_phi: np.ndarray | None = None):
        super().__init__(message)
        self.history = list(history)
        self.last_phi = last_phi


class InconsistentMapError(RuntimeError):
    """A composed map no longer satisfies the Beltrami equation."""


class NoisyMapError(RuntimeError):
    """Taylor coefficients read off two rings disagree."""


# ----------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for :func:`solve_fixed_point`.

    ``damping=None`` picks 1.0 for ``k <= 0.7`` and 0.5 above.  If the
    iteration blows up the damping is halved, down to ``min_damping``.
    ``interior_radius`` bounds the nodes on which the Beltrami residual is
    measured.  ``accel="anderson"`` mixes the last ``anderson_depth``
    iterates (treating phi as a real vector, since the operator is only
    real-linear); ``"picard"`` is the plain damped iteration.
    """

    tol: float = 1e-11
    max_iter: int = 800
    damping: float | None = None
    min_damping: float = 1.0 / 16
    p: float = 4.0
    k_max: float = 0.97
    residual_tol: float = 1e-3
    interior_radius: float = 0.6
    variant: Literal["conjugated", "as_printed", "auto"] = "conjugated"
    rival_max_iter: int = 200
    accel: Literal["anderson", "picard"] = "anderson"
    anderson_depth: int = 8

    def __post_init__(self):
        for name in ("tol", "residual_tol", "min_damping", "p"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.interior_radius <= 1:
            raise ValueError("interior_radius must lie in (0, 1]")
        if self.variant not in ("conjugated", "as_printed", "auto"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.accel not in ("anderson", "picard"):
            raise ValueError(f"unknown accel {self.accel!r}")
        if self.anderson_depth < 1:
            raise ValueError("anderson_depth must be >= 1")


DEFAULT_CONFIG = SolverConfig()


# ----------------------------------------------------------------------------
# dilatations


@dataclass(frozen=True, eq=False)
class BeltramiCoefficient:
    """An analytic dilatation omega with a known bound ``sup |omega| <= sup_bound``."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    sup_bound: float
    value_at_0: complex
    family_tag: tuple[complex, float] | None = None

    def __post_init__(self):
        if not 0 <= self.sup_bound < 1:
            raise ValueError(f"sup_bound must lie in [0, 1), got {self.sup_bound}")
        if abs(self.value_at_0) > self.sup_bound + 1e-12:
            raise ValueError("|omega(0)| exceeds sup_bound")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.asarray(self.evaluator(z), dtype=complex) * np.ones_like(z)

    @classmethod
    def from_function(cls, func, sup_bound: float | None = None, grid: DiskGrid | None = None):
        """Wrap ``func``; estimate ``sup_bound`` from boundary samples if omitted."""
        if sup_bound is None:
            t = np.linspace(0.0, 2 * np.pi, 2048, endpoint=False)
            ring = np.abs(np.asarray(func(np.exp(1j * t)), dtype=complex))
            sup_bound = float(ring.max())
            if grid is not None:
                sup_bound = max(sup_bound, float(np.abs(func(grid.z)).max()))
        return cls(func, float(sup_bound), complex(func(np.complex128(0.0))))

    @classmethod
    def family(cls, w, k: float):
        """The family mu_k(.; w) with the bound ((|w|+k)/(1+|w|k))^2."""
        from .weierstrass import FamilyParameter, mu_k

        param = FamilyParameter(complex(w), float(k))
        a = abs(param.w)
        bound = ((a + param.k) / (1 + a * param.k)) ** 2
        return cls(lambda z: mu_k(z, param), bound, complex(param.w) ** 2, (param.w, param.k))

    @classmethod
    def zero(cls):
        return cls(lambda z: np.zeros_like(np.asarray(z, dtype=complex)), 0.0, 0j)

    @property
    def k(self) -> float:
        return self.family_tag[1] if self.family_tag else self.sup_bound

    def check(self, grid: DiskGrid, slack: float = 1e-12) -> float:
        """Max of |omega| over the nodes; raises if it breaks the bound."""
        peak = float(np.abs(self(grid.z)).max())
        if peak > self.sup_bound + slack:
            raise ValueError(f"|omega| reaches {peak:.6g} > sup_bound {self.sup_bound:.6g}")
        return peak


def normalize_dilatation(omega: BeltramiCoefficient) -> tuple[BeltramiCoefficient, complex]:
    """Move omega(0) to 0 with the disk automorphism (omega - c)/(1 - conj(c) omega)."""
    c = omega.value_at_0
    if abs(c) >= 1:
        raise ValueError("|omega(0)| must be < 1")
    if c == 0:
        return omega, 0j

    def tilde(z):
        v = omega(z)
        return (v - c) / (1 - np.conj(c) * v)

    # the automorphism maps the disk of radius K onto one of radius (K+|c|)/(1+K|c|)
    K = omega.sup_bound
    bound = min((K + abs(c)) / (1 + K * abs(c)), np.nextafter(1.0, 0.0))
    return BeltramiCoefficient(tilde, float(bound), 0j), c


def _undo_normalization(omega_tilde: BeltramiCoefficient, c: complex) -> BeltramiCoefficient:
    def orig(z):
        v = omega_tilde(z)
        return (v + c) / (1 + np.conj(c) * v)

    K = omega_tilde.sup_bound
    bound = min((K + abs(c)) / (1 + K * abs(c)), np.nextafter(1.0, 0.0))
    return BeltramiCoefficient(orig, float(bound), complex(c))


# ----------------------------------------------------------------------------
# the operator


def _T_values(omega_vals, z, phi: ComplexField, backend: OperatorBackend, variant: Variant):
    s = backend.P_grid(phi)
    H = backend.H_grid(phi)
    Hterm = np.conj(H) if variant == "conjugated" else H
    # exp of a purely imaginary argument: unit modulus by construction
    M = np.exp(-2j * s.imag)
    return np.conj(omega_vals) / z * M * (1 + np.conj(z) * Hterm)


def apply_T(
    omega: BeltramiCoefficient,
    phi: ComplexField,
    variant: Variant = "conjugated",
    backend: OperatorBackend | None = None,
) -> ComplexField:
    """One application of the fixed-point operator on the grid of ``phi``.

    Requires omega(0) = 0, in which case conj(omega(z))/z is bounded by the
    Schwarz lemma.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if abs(omega.value_at_0) > 0:
        raise NormalizationRequiredError("apply_T needs omega(0) = 0; call normalize_dilatation first")
    grid = phi.grid
    backend = backend or get_backend(grid)
    return phi.with_values(_T_values(omega(grid.z), grid.z, phi, backend, variant))


# ----------------------------------------------------------------------------
# solved maps


@dataclass(frozen=True, eq=False)
class SolvedMap:
    phi: ComplexField
    f_values: ComplexField
    f_z_at_0: float
    dilatation: BeltramiCoefficient
    residual_norm: float
    iterations: int
    variant_flag: Variant
    history: tuple[float, ...] = ()
    damping: float = 1.0
    boundary_residual: float = math.nan
    rival_residual: float | None = None
    is_self_map: bool = True
    interior_radius: float = DEFAULT_CONFIG.interior_radius

    @property
    def grid(self) -> DiskGrid:
        return self.f_values.grid

    def _backend(self):
        return get_backend(self.grid)

    def f(self, points) -> np.ndarray:
        """f = z exp(P phi) at arbitrary points of the closed disk."""
        if not self.is_self_map:
            raise NotImplementedError("pointwise evaluation is only available for solved self-maps")
        z = np.atleast_1d(np.asarray(points, dtype=complex))
        return z * np.exp(self._backend().P(self.phi, z))

    def f_z(self, points) -> np.ndarray:
        """f_z = e^s (1 + z H phi); the value at z = 0 is f_z_at_0."""
        if not self.is_self_map:
            raise NotImplementedError("pointwise evaluation is only available for solved self-maps")
        z = np.atleast_1d(np.asarray(points, dtype=complex))
        b = self._backend()
        out = np.exp(b.P(self.phi, z)) * (1 + z * b.H(self.phi, z))
        return np.where(z == 0, self.f_z_at_0, out)

    def f_z_grid(self) -> np.ndarray:
        b = self._backend()
        z = self.grid.z
        return np.exp(b.P_grid(self.phi)) * (1 + z * b.H_grid(self.phi))


@dataclass(frozen=True)
class MapCoefficients:
    a0: complex
    a1: complex
    b1: complex


def beltrami_residual(
    f: ComplexField, omega: BeltramiCoefficient, interior_radius: float = DEFAULT_CONFIG.interior_radius
) -> tuple[float, float]:
    """(interior, all-node) maxima of |conj(f_zbar) - omega f_z| by spectral differentiation."""
    f_z, f_zbar = polar_derivatives(f)
    res = np.abs(np.conj(f_zbar) - omega(f.grid.z) * f_z)
    inside = f.grid.radial_nodes <= interior_radius
    interior = float(res[inside].max()) if np.any(inside) else math.nan
    return interior, float(res.max())


def harmonicity_residual(m: SolvedMap, interior_radius: float | None = None) -> float:
    """Max of the discrete Laplacian of f over the interior nodes (a diagnostic)."""
    rad = m.interior_radius if interior_radius is None else interior_radius
    lap = np.abs(laplacian(m.f_values))
    return float(lap[m.grid.radial_nodes <= rad].max())


def _ring_fourier(f: ComplexField, radius: float) -> tuple[complex, complex, complex, float]:
    """Modes 0, +1, -1 of f on the circle |z| = radius, plus the largest other mode."""
    grid = f.grid
    row = radial_interpolation_matrix(grid, [radius]) @ f.values
    coef = np.fft.fft(row[0]) / grid.angular_count
    tail = np.abs(coef[2:-1])
    return coef[0], coef[1], coef[-1], float(tail.max()) if tail.size else 0.0


def extract_coefficients(m: SolvedMap, rings=(0.2, 0.35), tol: float = 1e-6) -> MapCoefficients:
    """a0 = f(0), a1 = f_z(0), b1 = conj(f)_z(0) from Fourier modes on inner rings.

    On |z| = r a harmonic map has mode +1 equal to a1 r and mode -1 equal to
    conj(b1) r, independently of the higher Taylor terms.  The two rings must
    agree to ``tol`` (relative), otherwise :class:`NoisyMapError` is raised.
    """
    est = []
    for r in rings:
        c0, cp, cm, _ = _ring_fourier(m.f_values, r)
        est.append((c0, cp / r, np.conj(cm) / r))
    (a0, a1, b1), (a0b, a1b, b1b) = est
    scale = max(abs(a1), 1.0)
    spread = max(abs(a1 - a1b), abs(b1 - b1b)) / scale
    if spread > tol:
        raise NoisyMapError(f"ring coefficients disagree by {spread:.3e}")
    # f(0): radial extrapolation of the mean value
    grid = m.grid
    mean = m.f_values.values.mean(axis=1)
    a0 = complex((radial_interpolation_matrix(grid, [0.0]) @ mean)[0])
    return MapCoefficients(a0=a0, a1=complex(a1), b1=complex(b1))


# ----------------------------------------------------------------------------
# solving


def _default_damping(k: float) -> float:
    return 1.0 if k <= 0.7 else 0.5


def _as_real(a: np.ndarray) -> np.ndarray:
    return np.concatenate([a.real.ravel(), a.imag.ravel()])


def _iterate(
    omega_vals,
    grid: DiskGrid,
    backend,
    variant: Variant,
    lam: float,
    tol: float,
    max_iter: int,
    p: float,
    depth: int = 0,
):
    """Fixed-point iteration from phi = 0.  Returns (phi, history, converged, blew_up).

    ``depth = 0`` is damped Picard; ``depth > 0`` is Anderson mixing over
    that many previous steps with mixing parameter ``lam``.
    """
    z = grid.z
    n = grid.size
    phi = np.zeros(grid.shape, dtype=complex)
    history: list[float] = []
    xs: list[np.ndarray] = []
    fs: list[np.ndarray] = []
    for _ in range(max_iter):
        T = _T_values(omega_vals, z, ComplexField(grid, phi), backend, variant)
        resid = T - phi
        if not np.all(np.isfinite(resid)):
            return phi, history, False, True
        step = lp_norm(ComplexField(grid, lam * resid), p)
        history.append(step)
        if step < tol:
            return phi + lam * resid, history, True, False
        if step > 1e3 * max(history[0], 1.0):
            return phi, history, False, True
        if depth == 0:
            phi = phi + lam * resid
            continue
        x, f = _as_real(phi), _as_real(resid)
        xs.append(x)
        fs.append(f)
        if len(xs) > depth + 1:
            xs.pop(0)
            fs.pop(0)
        new = x + lam * f
        if len(xs) > 1:
            dF = np.diff(np.array(fs), axis=0).T
            dX = np.diff(np.array(xs), axis=0).T
            gamma = np.linalg.lstsq(dF, f, rcond=None)[0]
            new = new - (dX + lam * dF) @ gamma
        phi = (new[:n] + 1j * new[n:]).reshape(grid.shape)
    return phi, history, False, False


def _assemble(
    phi_vals,
    omega: BeltramiCoefficient,
    grid: DiskGrid,
    backend,
    variant: Variant,
    history,
    lam: float,
    interior_radius: float,
) -> SolvedMap:
    phi = ComplexField(grid, phi_vals)
    s = backend.P_grid(phi)
    f = ComplexField(grid, grid.z * np.exp(s))
    interior, overall = beltrami_residual(f, omega, interior_radius)
    if omega.value_at_0 == 0:
        fz0 = math.exp(P_at_origin(phi))
    else:
        # s jumps at the origin; read f_z(0) off an inner ring instead
        _, cp, _, _ = _ring_fourier(f, 0.2)
        a1 = cp / 0.2
        if abs(a1.imag) > 1e-6 * abs(a1):
            raise InconsistentMapError(f"f_z(0) = {a1} is not a positive real")
        fz0 = float(a1.real)
    return SolvedMap(
        phi=phi,
        f_values=f,
        f_z_at_0=fz0,
        dilatation=omega,
        residual_norm=interior,
        iterations=len(history),
        variant_flag=variant,
        history=tuple(history),
        damping=lam,
        boundary_residual=overall,
        interior_radius=interior_radius,
    )


def _solve_variant(omega, grid, variant, config: SolverConfig, max_iter: int, strict: bool) -> SolvedMap:
    backend = get_backend(grid)
    omega_vals = omega(grid.z)
    lam = config.damping if config.damping is not None else _default_damping(omega.k)
    tried = []
    while True:
        depth = config.anderson_depth if config.accel == "anderson" else 0
        phi, hist, ok, blew_up = _iterate(omega_vals, grid, backend, variant, lam, config.tol, max_iter, config.p, depth)
        tried.append((lam, len(hist)))
        if ok:
            break
        if blew_up and lam / 2 >= config.min_damping:
            lam /= 2
            continue
        if strict:
            raise ConvergenceError(
                f"{variant} iteration did not converge (damping tried: {tried}, last step "
                f"{hist[-1] if hist else float('nan'):.3e})",
                hist,
                phi,
            )
        if blew_up:
            phi = np.zeros(grid.shape, dtype=complex)  # nothing usable; report the seed
        break
    return _assemble(phi, omega, grid, backend, variant, hist, lam, config.interior_radius)


def _check_omega(omega: BeltramiCoefficient, config: SolverConfig):
    if omega.sup_bound >= 1:
        raise ValueError("sup_bound must be < 1")
    if omega.k > config.k_max:
        raise ValueError(f"k = {omega.k} exceeds the solver limit {config.k_max}; extrapolate instead")


def solve_self_map(
    omega: BeltramiCoefficient,
    grid: DiskGrid | None = None,
    config: SolverConfig = DEFAULT_CONFIG,
) -> SolvedMap:
    """Harmonic self-map with f(0) = 0, f_z(0) > 0 and dilatation omega.

    Works for any omega(0) inside the disk; with ``variant="auto"`` both
    operator variants are run and the one with the smaller residual is kept
    (the other's residual is stored as ``rival_residual``).
    """
    grid = grid or build_grid(64, 256)
    _check_omega(omega, config)
    if config.variant != "auto":
        return _solve_variant(omega, grid, config.variant, config, config.max_iter, strict=True)
    results = {}
    errors = {}
    for v in VARIANTS:
        strict = v == "conjugated"
        budget = config.max_iter if strict else config.rival_max_iter
        try:
            results[v] = _solve_variant(omega, grid, v, config, budget, strict=strict)
        except ConvergenceError as exc:
            errors[v] = exc
    if not results:
        raise errors["conjugated"]
    best = min(results.values(), key=lambda m: m.residual_norm)
    rivals = [m.residual_norm for m in results.values() if m is not best]
    rival = rivals[0] if rivals else math.inf
    return replace(best, rival_residual=rival)


def solve_fixed_point(
    omega: BeltramiCoefficient,
    tol: float = DEFAULT_CONFIG.tol,
    max_iter: int = DEFAULT_CONFIG.max_iter,
    damping: float | None = None,
    grid: DiskGrid | None = None,
    variant: Literal["conjugated", "as_printed", "auto"] = "conjugated",
    config: SolverConfig | None = None,
) -> SolvedMap:
    """Damped Picard iteration for the normalized problem (omega(0) = 0)."""
    if abs(omega.value_at_0) > 0:
        raise NormalizationRequiredError("solve_fixed_point needs omega(0) = 0")
    base = config or DEFAULT_CONFIG
    cfg = replace(base, tol=tol, max_iter=max_iter, damping=damping, variant=variant)
    m = solve_self_map(omega, grid, cfg)
    if m.residual_norm > cfg.residual_tol:
        warnings.warn(f"Beltrami residual {m.residual_norm:.2e} above {cfg.residual_tol:.0e}", RuntimeWarning)
    return m


def denormalize_map(f_tilde: SolvedMap, omega0: complex) -> SolvedMap:
    """Compose a normalized solution with the affine map F -> (F + c conj F)/(1 - |c|^2).

    With c = conj(omega0) the composition has dilatation (w~ + omega0)/(1 +
    conj(omega0) w~), i.e. the original omega.  Its image is an ellipse, not
    the disk, so the result is flagged ``is_self_map=False``.
    """
    omega0 = complex(omega0)
    if omega0 == 0:
        return f_tilde
    if abs(omega0) >= 1:
        raise ValueError("|omega0| must be < 1")
    c = np.conj(omega0)
    scale = 1 - abs(c) ** 2
    F = f_tilde.f_values.values
    f = f_tilde.f_values.with_values((F + c * np.conj(F)) / scale)
    omega = _undo_normalization(f_tilde.dilatation, omega0)
    interior, overall = beltrami_residual(f, omega, f_tilde.interior_radius)
    floor = 1e-10 * max(1.0, float(np.abs(F).max()))
    if interior > 10 * max(f_tilde.residual_norm, floor):
        raise InconsistentMapError(
            f"residual grew from {f_tilde.residual_norm:.2e} to {interior:.2e} after denormalization"
        )
    return replace(
        f_tilde,
        f_values=f,
        f_z_at_0=f_tilde.f_z_at_0 / scale,
        dilatation=omega,
        residual_norm=interior,
        boundary_residual=overall,
        is_self_map=False,
    )


def hall_quantity(coeffs: MapCoefficients, w_modulus: float) -> float:
    """|a1|^2 (1 + |w|^4), the left side of Hall's inequality here."""
    return abs(coeffs.a1) ** 2 * (1 + w_modulus**4)


__all__ = [
    "BeltramiCoefficient",
    "ConvergenceError",
    "InconsistentMapError",
    "MapCoefficients",
    "NoisyMapError",
    "NormalizationRequiredError",
    "SolvedMap",
    "SolverConfig",
    "apply_T",
    "beltrami_residual",
    "denormalize_map",
    "extract_coefficients",
    "harmonicity_residual",
    "hall_quantity",
    "normalize_dilatation",
    "solve_fixed_point",
    "solve_self_map",
]
