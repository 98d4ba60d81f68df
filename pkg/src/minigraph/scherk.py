"""Scherk-type harmonic maps: Poisson extensions of four-step boundary data.

A step map takes the value ``a_j`` on the boundary arc ``(t_j, t_{j+1})``.
Its analytic and co-analytic derivatives have simple poles at the jump
points tau_j = e^{i t_j}:

    h'(z) = 1/(2 pi i) sum_j d_j/(z - tau_j),
    g'(z) = 1/(2 pi i) sum_j conj(d_j)/(z - tau_j),      d_j = a_{j-1} - a_j,

so f_z(0) = (i/2pi) sum_j d_j e^{-i t_j} and the dilatation g'/h' is a
rational function with modulus one on the circle.  Matching that dilatation
to the k -> 1 member of the mu_k family gives the extremal map whose
f_z(0) fixes the constants c0(w) and c1(w).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import least_squares

from .diskfield import ComplexField, DiskGrid, build_grid, polar_derivatives

TWO_PI = 2 * math.pi


class NoMatchError(RuntimeError):
    """The least-squares match did not reach the tolerance."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class ExtrapolationError(RuntimeError):
    """The k-sweep is too noisy or not monotone to extrapolate."""

    def __init__(self, message: str, data=None):
        super().__init__(message)
        self.data = data


# ----------------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class BicentricQuad:
    """Four points on the unit circle, counterclockwise, with an incircle."""

    vertices: tuple[complex, complex, complex, complex]
    circle_tol: float = 1e-12
    pitot_tol: float = 1e-8

    def __post_init__(self):
        v = tuple(complex(a) for a in self.vertices)
        if len(v) != 4:
            raise ValueError("a quadrilateral needs four vertices")
        object.__setattr__(self, "vertices", v)
        arr = np.array(v)
        if np.max(np.abs(np.abs(arr) - 1)) > self.circle_tol:
            raise ValueError("vertices must lie on the unit circle")
        steps = np.mod(np.diff(np.angle(np.concatenate([arr, arr[:1]]))), TWO_PI)
        if not np.isclose(steps.sum(), TWO_PI) or np.any(steps <= 0) or np.any(steps >= math.pi):
            raise ValueError("vertices are not in convex counterclockwise order")
        if abs(self.pitot_defect) > self.pitot_tol:
            raise ValueError(f"Pitot equality fails by {self.pitot_defect:.3e}")

    @property
    def sides(self) -> np.ndarray:
        a = np.array(self.vertices)
        return np.abs(np.roll(a, -1) - a)

    @property
    def pitot_defect(self) -> float:
        s = self.sides
        return float(s[0] + s[2] - s[1] - s[3])

    def contains(self, points, tol: float = 1e-9) -> np.ndarray:
        """Closed convex-hull membership (counterclockwise edge tests)."""
        p = np.asarray(points, dtype=complex)
        a = np.array(self.vertices)
        inside = np.ones(p.shape, dtype=bool)
        for j in range(4):
            e = a[(j + 1) % 4] - a[j]
            cross = (np.conj(e) * (p - a[j])).imag
            inside &= cross >= -tol
        return inside


@dataclass(frozen=True)
class StepBoundary:
    prevertices: tuple[float, float, float, float]
    values: BicentricQuad

    def __post_init__(self):
        t = np.asarray(self.prevertices, dtype=float)
        if t.shape != (4,):
            raise ValueError("need four prevertices")
        if np.any(np.diff(t) <= 0) or t[3] >= t[0] + TWO_PI:
            raise ValueError("prevertices must increase within one period")
        object.__setattr__(self, "prevertices", tuple(float(x) for x in t))

    @property
    def t(self) -> np.ndarray:
        return np.array(self.prevertices)

    @property
    def a(self) -> np.ndarray:
        return np.array(self.values.vertices)

    @property
    def arc_lengths(self) -> np.ndarray:
        t = self.t
        return np.diff(np.concatenate([t, [t[0] + TWO_PI]]))

    @property
    def jumps(self) -> np.ndarray:
        a = self.a
        return np.roll(a, 1) - a

    @classmethod
    def square(cls) -> "StepBoundary":
        """Arcs (j pi/2, (j+1) pi/2) carrying e^{i pi/4} i^j; dilatation -z^2."""
        t = np.arange(4) * math.pi / 2
        a = np.exp(1j * (math.pi / 4 + t))
        return cls(tuple(t), BicentricQuad(tuple(a)))


# ----------------------------------------------------------------------------
# step maps


def harmonic_measure(z, alpha: float, beta: float):
    """Harmonic measure at z of the arc (alpha, beta), alpha < beta."""
    z = np.asarray(z, dtype=complex)
    return (beta - alpha) / TWO_PI + (np.angle(1 - z * np.exp(-1j * beta)) - np.angle(1 - z * np.exp(-1j * alpha))) / math.pi


def _step_values(boundary: StepBoundary, z):
    t = np.concatenate([boundary.t, [boundary.t[0] + TWO_PI]])
    out = np.zeros(np.shape(z), dtype=complex)
    for j, a in enumerate(boundary.a):
        out = out + a * harmonic_measure(z, t[j], t[j + 1])
    return out


def poisson_step_map(boundary: StepBoundary, eval_points):
    """f = sum_j a_j * (harmonic measure of arc j).

    ``eval_points`` may be a :class:`DiskGrid` (returns a ComplexField) or
    an array of points in the open disk (returns an array).
    """
    if isinstance(eval_points, DiskGrid):
        return ComplexField(eval_points, _step_values(boundary, eval_points.z))
    return _step_values(boundary, np.asarray(eval_points, dtype=complex))


def step_derivatives(boundary: StepBoundary, z) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form (h', g') of a step map."""
    z = np.asarray(z, dtype=complex)
    tau = np.exp(1j * boundary.t)
    d = boundary.jumps
    diff = z[..., None] - tau
    hp = np.sum(d / diff, axis=-1) / (2j * math.pi)
    gp = np.sum(np.conj(d) / diff, axis=-1) / (2j * math.pi)
    return hp, gp


def step_f_z0(boundary: StepBoundary) -> complex:
    return complex(1j / TWO_PI * np.sum(boundary.jumps * np.exp(-1j * boundary.t)))


def step_f0(boundary: StepBoundary) -> complex:
    return complex(np.sum(boundary.a * boundary.arc_lengths) / TWO_PI)


def dilatation_closed_form(boundary: StepBoundary, z):
    hp, gp = step_derivatives(boundary, z)
    return gp / hp


@dataclass(frozen=True)
class DilatationSample:
    values: np.ndarray
    valid: np.ndarray
    excluded: int


def dilatation_of(f: ComplexField, min_abs_fz: float = 1e-8) -> DilatationSample:
    """omega = conj(f)_z / f_z by spectral differentiation of the samples.

    Nodes with |f_z| below ``min_abs_fz`` are excluded (``valid`` False) and
    counted in ``excluded``.
    """
    f_z, f_zbar = polar_derivatives(f)
    valid = np.abs(f_z) > min_abs_fz
    with np.errstate(divide="ignore", invalid="ignore"):
        om = np.where(valid, np.conj(f_zbar) / np.where(valid, f_z, 1.0), np.nan)
    return DilatationSample(om, valid, int((~valid).sum()))


def step_laplacian(boundary: StepBoundary, probes, h: float = 1e-3) -> float:
    """Max five-point Laplacian of the closed-form step map over ``probes``."""
    z = np.asarray(probes, dtype=complex)
    f = lambda p: _step_values(boundary, p)  # noqa: E731
    lap = (f(z + h) + f(z - h) + f(z + 1j * h) + f(z - 1j * h) - 4 * f(z)) / h**2
    return float(np.abs(lap).max())


# ----------------------------------------------------------------------------
# extremal constants


def c0_c1(w, f_z0: float) -> tuple[float, float]:
    """c0 = 4 (1-|w|^2)^2/((1+|w|^2)^4 f_z0^2), c1 = 4/((1+|w|^2)^2 f_z0^2)."""
    if not f_z0 > 0:
        raise ValueError("f_z0 must be positive")
    x = abs(complex(w)) ** 2
    c1 = 4 / ((1 + x) ** 2 * f_z0**2)
    c0 = c1 * (1 - x) ** 2 / (1 + x) ** 2
    return c0, c1


@dataclass(frozen=True)
class ExtremalReport:
    w: complex
    f_z0: float
    c0: float
    c1: float
    method: str
    error_estimate: float
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.method not in ("step_construction", "k_extrapolation"):
            raise ValueError(f"unknown method {self.method!r}")
        x = abs(self.w) ** 2
        if self.c1 > 0 and abs(self.c0 - self.c1 * (1 - x) ** 2 / (1 + x) ** 2) > 1e-12 * max(self.c1, 1):
            raise ValueError("c0 and c1 violate the ratio identity")


def _target_mu(w: complex, z):
    """The k = 1 member of the family: ((w + i eta z)/(1 + i eta conj(w) z))^2."""
    a = 1 - w**4
    c = 1j * a / abs(a)
    q = (w + c * z) / (1 + c * np.conj(w) * z)
    return q * q


def collocation_points(radii=(0.3, 0.6), n_angles: int = 32) -> np.ndarray:
    th = TWO_PI * np.arange(n_angles) / n_angles
    return np.concatenate([r * np.exp(1j * th) for r in radii])


def _match_residual(x, w, pts):
    t, s = x[:4], x[4:]
    a = np.exp(1j * s)
    tau = np.exp(1j * t)
    d = np.roll(a, 1) - a
    diff = pts[:, None] - tau
    hp = np.sum(d / diff, axis=-1)
    gp = np.sum(np.conj(d) / diff, axis=-1)
    mis = (gp - _target_mu(w, pts) * hp) / np.abs(hp)
    arcs = np.diff(np.concatenate([t, [t[0] + TWO_PI]]))
    f0 = np.sum(a * arcs) / TWO_PI
    fz0 = 1j / TWO_PI * np.sum(d * np.exp(-1j * t))
    return np.concatenate([mis.real, mis.imag, [f0.real, f0.imag, fz0.imag]])


def _square_params() -> np.ndarray:
    sq = StepBoundary.square()
    return np.concatenate([sq.t, np.angle(sq.a) % TWO_PI])


def match_quadrilateral(
    w,
    tol: float = 1e-8,
    step: float = 0.05,
    radii=(0.3, 0.6),
    n_angles: int = 32,
) -> tuple[StepBoundary, ExtremalReport]:
    """Fit a step map whose dilatation equals the target at collocation rings.

    Unknowns are the four prevertex angles and the four vertex angles;
    residuals are the dilatation mismatch, f(0) and Im f_z(0).  Starting
    from the square at w = 0 the solution is continued along the segment
    [0, w] in steps of at most ``step``.
    """
    w = complex(w)
    if not abs(w) < 1:
        raise ValueError("|w| must be < 1")
    pts = collocation_points(radii, n_angles)
    x = _square_params()
    n_steps = max(1, math.ceil(abs(w) / step))
    sol = None
    for s in np.linspace(0.0, 1.0, n_steps + 1)[1:] if abs(w) > 0 else [0.0]:
        sol = least_squares(_match_residual, x, args=(s * w, pts), xtol=1e-15, ftol=1e-15, gtol=1e-15, method="lm")
        x = sol.x
    resid = float(np.max(np.abs(sol.fun)))
    t = np.asarray(x[:4])
    order = np.argsort(np.mod(t - t[0], TWO_PI))
    t = t[0] + np.mod(t[order] - t[0], TWO_PI)
    a = np.exp(1j * x[4:])[order]
    try:
        boundary = StepBoundary(tuple(t), BicentricQuad(tuple(a)))
    except ValueError as exc:
        raise NoMatchError(f"matched data is not a bicentric step boundary: {exc}", best=x) from exc
    if resid > tol:
        raise NoMatchError(f"dilatation mismatch {resid:.3e} above {tol:.1e}", best=boundary)
    fz0 = step_f_z0(boundary)
    c0, c1 = c0_c1(w, fz0.real)
    report = ExtremalReport(
        w=w,
        f_z0=float(fz0.real),
        c0=c0,
        c1=c1,
        method="step_construction",
        error_estimate=max(resid, 1e-12) * 10 * c1,
        details={
            "mismatch": resid,
            "pitot_defect": boundary.values.pitot_defect,
            "prevertices": [float(v) for v in t],
            "vertex_angles": [float(v) for v in np.angle(a)],
        },
    )
    return boundary, report


# ----------------------------------------------------------------------------
# k -> 1 extrapolation


def richardson(xs: Sequence[float], ys: Sequence[float], order: int = 2) -> float:
    """Value at x = 0 of the polynomial of degree ``order`` through the last order+1 points."""
    xs = np.asarray(xs, dtype=float)[-(order + 1) :]
    ys = np.asarray(ys, dtype=float)[-(order + 1) :]
    if len(xs) < order + 1:
        raise ValueError("not enough points")
    # Lagrange weights at 0
    total = 0.0
    for i in range(len(xs)):
        wgt = 1.0
        for j in range(len(xs)):
            if j != i:
                wgt *= (0 - xs[j]) / (xs[i] - xs[j])
        total += wgt * ys[i]
    return float(total)


@dataclass(frozen=True)
class SweepPoint:
    k: float
    f_z0: float
    abs_K0: float
    residual: float
    iterations: int
    grid_error: float = 0.0


DEFAULT_STEEPNESS = (0.5, 0.7, 0.8, 0.9, 0.95)


def steepness(w, k: float) -> float:
    """max |q| over the closed disk, (|w| + k)/(1 + |w| k).

    This, not k itself, controls how sharply the solution varies near the
    circle, and hence the angular resolution a solve needs.
    """
    a = abs(complex(w))
    return (a + k) / (1 + a * k)


def k_for_steepness(w, kappa: float) -> float:
    """Inverse of :func:`steepness` in k; needs |w| <= kappa < 1."""
    a = abs(complex(w))
    if not a <= kappa < 1:
        raise ValueError(f"steepness {kappa} unreachable for |w| = {a}")
    return (kappa - a) / (1 - a * kappa)


def default_k_list(w, kappas: Sequence[float] = DEFAULT_STEEPNESS) -> tuple[float, ...]:
    """k = 0 followed by the k values reaching the given steepness levels."""
    a = abs(complex(w))
    return (0.0,) + tuple(k_for_steepness(w, c) for c in kappas if c > a)


def default_grid_for_k(k: float, w=0.0) -> DiskGrid:
    """Angular resolution grows with the steepness because the map sharpens near the circle."""
    kappa = steepness(w, k)
    if kappa <= 0.75:
        return build_grid(64, 256)
    if kappa <= 0.85:
        return build_grid(64, 512)
    return build_grid(64, 1024)


def sweep_k(
    w,
    k_list: Sequence[float],
    grid_for_k: Callable[[float], DiskGrid] | None = None,
    config=None,
    refine: bool = True,
) -> list[SweepPoint]:
    """Solve the family along ``k_list`` and record |K_k(0)|.

    With ``refine`` each point is solved again with half the angular
    resolution; the change in |K_k(0)| is kept as ``grid_error``, an upper
    bound for the fine-grid error whenever the angular convergence is at
    least first order.
    """
    from .beltrami import BeltramiCoefficient, SolverConfig, solve_self_map
    from .weierstrass import FamilyParameter, curvature_at_origin_family

    config = config or SolverConfig(tol=1e-10, max_iter=3000)
    grid_for_k = grid_for_k or (lambda k: default_grid_for_k(k, w))

    def solve(k, grid):
        m = solve_self_map(BeltramiCoefficient.family(w, k), grid, config)
        return m, abs(curvature_at_origin_family(FamilyParameter(w, k), m.f_z_at_0))

    out = []
    for k in k_list:
        if k == 0:
            out.append(SweepPoint(0.0, 1.0 if w == 0 else math.nan, 0.0, 0.0, 0))
            continue
        grid = grid_for_k(k)
        m, K0 = solve(k, grid)
        err = 0.0
        if refine:
            _, K_coarse = solve(k, build_grid(grid.n_radial, grid.angular_count // 2))
            err = abs(K0 - K_coarse)
        out.append(SweepPoint(float(k), m.f_z_at_0, K0, m.residual_norm, m.iterations, err))
    return out


def _lagrange_weights_at_zero(xs: np.ndarray) -> np.ndarray:
    w = np.ones(len(xs))
    for i in range(len(xs)):
        for j in range(len(xs)):
            if j != i:
                w[i] *= -xs[j] / (xs[i] - xs[j])
    return w


def k_sweep_extrapolate(
    w,
    k_list: Sequence[float] | None = None,
    grid_for_k: Callable[[float], DiskGrid] | None = None,
    config=None,
    points: Sequence[SweepPoint] | None = None,
) -> ExtremalReport:
    """Extrapolate |K_k(0)| to k = 1.

    The variable is 1 - steepness(w, k), which equals 1 - k at w = 0 and is a
    smooth reparametrization of it otherwise.  A quadratic through the last
    three points gives the value.  The error estimate adds two parts: the
    change against the quadratic through the previous three points, and the
    grid errors of the points pushed through the extrapolation weights.
    ``k_list`` defaults to :func:`default_k_list`.
    """
    w = complex(w)
    ks = [float(k) for k in (k_list if k_list is not None else default_k_list(w))]
    if any(b <= a for a, b in zip(ks[:-1], ks[1:])):
        raise ValueError("k_list must be increasing")
    if ks and (ks[0] < 0 or ks[-1] > 0.97):
        raise ValueError("k values must lie in [0, 0.97]")
    pts = list(points) if points is not None else sweep_k(w, ks, grid_for_k, config)
    data = [(p.k, p.f_z0, p.abs_K0, p.grid_error) for p in pts]
    vals = np.array([p.abs_K0 for p in pts])
    if np.any(np.diff(vals) <= 0):
        raise ExtrapolationError("|K_k(0)| is not strictly increasing along the sweep", data)
    if len(pts) < 3:
        value = float(vals[-1]) if len(vals) else 0.0
        est = math.inf
    else:
        x = 1 - np.array([steepness(w, p.k) for p in pts])
        value = richardson(x, vals, 2)
        prev = richardson(x[:-1], vals[:-1], 2) if len(pts) >= 4 else float(vals[-1])
        grid_part = float(np.abs(_lagrange_weights_at_zero(x[-3:])) @ np.array([p.grid_error for p in pts[-3:]]))
        est = abs(value - prev) + grid_part
    x2 = abs(w) ** 2
    if value > 0:
        c0 = value
        c1 = c0 * (1 + x2) ** 2 / (1 - x2) ** 2
        fz0 = math.sqrt(4 * (1 - x2) ** 2 / ((1 + x2) ** 4 * c0))
    else:
        c0 = c1 = 0.0
        fz0 = 1.0
    return ExtremalReport(
        w=w,
        f_z0=fz0,
        c0=c0,
        c1=c1,
        method="k_extrapolation",
        error_estimate=est,
        details={"sweep": data},
    )


# ----------------------------------------------------------------------------
# sup over w


@dataclass(frozen=True)
class SupSweep:
    heinz_estimate: float
    hopf_estimate: float
    reports: tuple[ExtremalReport, ...]
    skipped: tuple[tuple[complex, str], ...] = ()


def sup_sweep(w_grid: Sequence[complex], method: str = "step_construction") -> SupSweep:
    """Max of c0(w) and c1(w) over ``w_grid``; failing points are skipped and listed."""
    reports, skipped = [], []
    for w in w_grid:
        try:
            if method == "step_construction":
                reports.append(match_quadrilateral(w)[1])
            else:
                reports.append(k_sweep_extrapolate(w))
        except (NoMatchError, ExtrapolationError, RuntimeError) as exc:
            skipped.append((complex(w), str(exc)))
    if not reports:
        return SupSweep(math.nan, math.nan, (), tuple(skipped))
    return SupSweep(
        heinz_estimate=max(r.c0 for r in reports),
        hopf_estimate=max(r.c1 for r in reports),
        reports=tuple(reports),
        skipped=tuple(skipped),
    )


__all__ = [
    "BicentricQuad",
    "DilatationSample",
    "ExtrapolationError",
    "ExtremalReport",
    "NoMatchError",
    "StepBoundary",
    "SupSweep",
    "SweepPoint",
    "c0_c1",
    "collocation_points",
    "default_grid_for_k",
    "default_k_list",
    "k_for_steepness",
    "steepness",
    "dilatation_closed_form",
    "dilatation_of",
    "harmonic_measure",
    "k_sweep_extrapolate",
    "match_quadrilateral",
    "poisson_step_map",
    "richardson",
    "step_derivatives",
    "step_f0",
    "step_f_z0",
    "step_laplacian",
    "sup_sweep",
    "sweep_k",
]
