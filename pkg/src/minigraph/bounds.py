"""Hall's coefficient bound and the two curvature bounds it combines with.

With x = |w|^2 the Hopf-type functional is bounded by

    f1(x) = (pi^2/2) (1+x)^2/(1-x)^2          (from the Heinz bound),
    f2(x) = (16 pi^2/27) (1+x^2)/(1+x)^2      (from Hall's inequality).

f1 increases and f2 decreases, so max_x min(f1, f2) sits at their crossing,
a root of 5x^4 - 172x^3 - 98x^2 - 172x + 5.  The quartic is palindromic and
y = x + 1/x reduces it to 5y^2 - 172y - 108 = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

PI2 = math.pi**2
QUARTIC = (5, -172, -98, -172, 5)


@dataclass(frozen=True)
class ConstantsRegistry:
    heinz_c0: float = PI2 / 2
    hall_bound: float = 16 * PI2 / 27
    nitsche_bound: float = 7.678447
    new_hopf_bound: float = 2 * PI2 * (2 + math.sqrt(31)) / 27
    hall_rhs: float = 27 / (4 * PI2)

    def __post_init__(self):
        if not (self.heinz_c0 < self.new_hopf_bound < self.hall_bound < self.nitsche_bound):
            raise ValueError("registry constants are out of order")

    def as_dict(self) -> dict[str, float]:
        return {
            "heinz_c0": self.heinz_c0,
            "new_hopf_bound": self.new_hopf_bound,
            "hall_bound": self.hall_bound,
            "nitsche_bound": self.nitsche_bound,
            "hall_rhs": self.hall_rhs,
        }


REGISTRY = ConstantsRegistry()


@dataclass(frozen=True)
class BoundCurvePoint:
    x: float
    f1: float
    f2: float

    @property
    def min_val(self) -> float:
        return min(self.f1, self.f2)


def hall_lower_bound_a1(w_modulus: float) -> float:
    """Lower bound for |a1|^2 when a0 = 0 and b1 = w^2 a1."""
    if not 0 <= w_modulus <= 1:
        raise ValueError("w_modulus must lie in [0, 1]")
    return 27 / (4 * PI2 * (1 + w_modulus**4))


def f1(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x >= 1):
        raise ValueError("f1 needs 0 <= x < 1")
    out = PI2 / 2 * (1 + x) ** 2 / (1 - x) ** 2
    return float(out) if out.ndim == 0 else out


def f2(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > 1):
        raise ValueError("f2 needs 0 <= x <= 1")
    out = 16 * PI2 / 27 * (1 + x**2) / (1 + x) ** 2
    return float(out) if out.ndim == 0 else out


def curve_point(x: float) -> BoundCurvePoint:
    return BoundCurvePoint(float(x), f1(x), f2(x))


def combined_pointwise_bound(x):
    """min{f1(x), f2(x)}: the bound on |K| (1+|w|^2)^2/(1-|w|^2)^2 at x = |w|^2."""
    return np.minimum(f1(x), f2(x))


def quartic(x, dps: int = 40):
    """The crossing quartic evaluated in extended precision (mpmath)."""
    with mpmath.workdps(dps):
        return mpmath.polyval([mpmath.mpf(c) for c in QUARTIC], mpmath.mpf(x))


@dataclass(frozen=True)
class Intersection:
    x_star: float
    y_star: float
    y_rejected: float
    x_rejected: complex
    quartic_residual: float
    reduced_residual: float


def intersection_quartic() -> Intersection:
    """Closed-form crossing of f1 and f2 with residual checks.

    y* = (86 + 16 sqrt 31)/5 is the positive root of 5y^2 - 172y - 108; the
    other root is negative, so x + 1/x = y has no real solution for it.
    """
    with mpmath.workdps(50):
        s31 = mpmath.sqrt(31)
        y = (86 + 16 * s31) / 5
        y_other = (86 - 16 * s31) / 5
        x = (y - mpmath.sqrt(y * y - 4)) / 2
        x_other = (y_other - mpmath.sqrt(mpmath.mpc(y_other * y_other - 4))) / 2
        res_q = abs(mpmath.polyval([mpmath.mpf(c) for c in QUARTIC], x))
        res_r = abs(5 * (x**2 + 1 / x**2) - 172 * (x + 1 / x) - 98)
        return Intersection(
            x_star=float(x),
            y_star=float(y),
            y_rejected=float(y_other),
            x_rejected=complex(x_other),
            quartic_residual=float(res_q),
            reduced_residual=float(res_r),
        )


def y_star_exact() -> tuple[Fraction, Fraction]:
    """y* as the pair (p, q) meaning p + q sqrt(31): here 86/5 + (16/5) sqrt 31."""
    # from the quadratic formula for 5y^2 - 172y - 108: (172 + sqrt(172^2 + 4*5*108))/10
    disc = 172**2 + 4 * 5 * 108  # = 31 * 32^2
    root = math.isqrt(disc // 31)
    assert root * root * 31 == disc
    return Fraction(172, 10), Fraction(root, 10)


def closed_form_bound() -> float:
    """2 pi^2 (2 + sqrt 31)/27, checked against (pi^2/2)(y*+2)/(y*-2)."""
    value = 2 * PI2 * (2 + math.sqrt(31)) / 27
    with mpmath.workdps(40):
        y = (86 + 16 * mpmath.sqrt(31)) / 5
        via_y = mpmath.pi**2 / 2 * (y + 2) / (y - 2)
        direct = 2 * mpmath.pi**2 * (2 + mpmath.sqrt(31)) / 27
        if abs(via_y - direct) > mpmath.mpf(10) ** -12:
            raise AssertionError("closed form and y-reduction disagree")
    return value


def dense_max_min(n: int = 200001, x_max: float = 0.999) -> tuple[float, float]:
    """Brute-force (argmax, max) of min(f1, f2) on a grid refined near the crossing."""
    x = np.linspace(0.0, x_max, n)
    vals = combined_pointwise_bound(x)
    i = int(np.argmax(vals))
    lo, hi = x[max(i - 1, 0)], x[min(i + 1, n - 1)]
    fine = np.linspace(lo, hi, n)
    fv = combined_pointwise_bound(fine)
    j = int(np.argmax(fv))
    return float(fine[j]), float(fv[j])


def bisect_crossing(tol: float = 1e-15) -> float:
    """Independent root of f1 - f2 on (0, 1/2) by bisection."""
    a, b = 0.0, 0.5
    g = lambda t: f1(t) - f2(t)  # noqa: E731
    ga = g(a)
    while b - a > tol:
        m = 0.5 * (a + b)
        gm = g(m)
        if (gm < 0) == (ga < 0):
            a, ga = m, gm
        else:
            b = m
    return 0.5 * (a + b)


__all__ = [
    "REGISTRY",
    "BoundCurvePoint",
    "ConstantsRegistry",
    "Intersection",
    "bisect_crossing",
    "closed_form_bound",
    "combined_pointwise_bound",
    "curve_point",
    "dense_max_min",
    "f1",
    "f2",
    "hall_lower_bound_a1",
    "intersection_quartic",
    "quartic",
    "y_star_exact",
]
