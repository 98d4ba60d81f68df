import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from minigraph.bounds import (
    REGISTRY,
    ConstantsRegistry,
    bisect_crossing,
    closed_form_bound,
    combined_pointwise_bound,
    curve_point,
    dense_max_min,
    f1,
    f2,
    hall_lower_bound_a1,
    intersection_quartic,
    quartic,
    y_star_exact,
)

PI2 = math.pi**2


def test_registry_order_and_values():
    d = REGISTRY.as_dict()
    assert d["heinz_c0"] < d["new_hopf_bound"] < d["hall_bound"] < d["nitsche_bound"]
    assert d["new_hopf_bound"] == pytest.approx(5.53265, abs=5e-6)
    with pytest.raises(ValueError):
        ConstantsRegistry(heinz_c0=6.0)


@pytest.mark.parametrize("x", [-0.1, 1.0, 1.5])
def test_f1_domain(x):
    with pytest.raises(ValueError):
        f1(x)


@pytest.mark.parametrize("x", [-0.1, 1.1])
def test_f2_domain(x):
    with pytest.raises(ValueError):
        f2(x)


def test_endpoint_values():
    assert f1(0.0) == pytest.approx(PI2 / 2)
    assert f2(0.0) == pytest.approx(16 * PI2 / 27)
    assert f2(1.0) == pytest.approx(8 * PI2 / 27)
    assert hall_lower_bound_a1(0.0) == pytest.approx(27 / (4 * PI2))


@given(st.floats(0, 0.99), st.floats(0, 0.99))
def test_monotonicity(a, b):
    lo, hi = sorted((a, b))
    assert f1(lo) <= f1(hi) + 1e-12
    assert f2(lo) >= f2(hi) - 1e-12
    assert combined_pointwise_bound(lo) <= closed_form_bound() + 1e-12


def test_curve_point_min():
    p = curve_point(0.5)
    assert p.min_val == min(p.f1, p.f2) == p.f2


def test_intersection_against_independent_routes():
    inter = intersection_quartic()
    # numpy roots, bisection on f1 - f2 and a high-precision root are independent oracles
    real_roots = sorted(r.real for r in np.roots([5, -172, -98, -172, 5]) if abs(r.imag) < 1e-12 and 0 < r.real < 1)
    assert inter.x_star == pytest.approx(real_roots[0], rel=1e-12)
    assert inter.x_star == pytest.approx(bisect_crossing(), abs=1e-14)
    with mpmath.workdps(40):
        root = mpmath.findroot(lambda x: 5 * x**4 - 172 * x**3 - 98 * x**2 - 172 * x + 5, 0.03)
    assert inter.x_star == pytest.approx(float(root), rel=1e-15)
    assert inter.quartic_residual <= 1e-12
    assert abs(float(quartic(inter.x_star))) <= 1e-12
    assert inter.y_rejected < 0 and abs(inter.x_rejected.imag) > 0


def test_y_star_exact_form():
    p, q = y_star_exact()
    assert (p, q) == (Fraction(86, 5), Fraction(16, 5))
    # 5y^2 - 172y - 108 = 0 with y = p + q sqrt31: rational and sqrt31 parts vanish separately
    assert 5 * (p * p + 31 * q * q) - 172 * p - 108 == 0
    assert 10 * p * q - 172 * q == 0


def test_closed_form_vs_dense_grid():
    bound = closed_form_bound()
    x, v = dense_max_min()
    assert abs(v - bound) / bound <= 1e-6
    assert x == pytest.approx(intersection_quartic().x_star, abs=1e-6)
    assert f1(intersection_quartic().x_star) == pytest.approx(bound, rel=1e-12)
