import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conicpinch.divisor import ConicDivisor
from conicpinch.factors import glued_football, rescale, round_sphere
from conicpinch.quadrature import (QuadratureError, QuadratureSpec, gauss_bonnet_check,
                                   integrate_density)
from conicpinch.solver import SolverConfig, solve_constant_curvature


def test_round_sphere_area():
    r = integrate_density(round_sphere(), "area")
    assert r.value == pytest.approx(4 * math.pi, rel=1e-9)


def test_disk_area_closed_form():
    # area of |z| < R on the round sphere is 4 pi R^2 / (1 + R^2)
    R = 0.8
    r = integrate_density(round_sphere(), "area", annulus=(0.0, R))
    assert r.value == pytest.approx(4 * math.pi * R ** 2 / (1 + R ** 2), rel=1e-9)


@pytest.mark.parametrize("alpha,beta", [(-0.2, -0.6), (0.0, -0.5), (-0.45, -0.9), (-0.7, -0.7)])
def test_gauss_bonnet_glued(alpha, beta):
    res = gauss_bonnet_check(glued_football(alpha, beta), rtol=1e-6)
    assert res["pass"]
    assert res["target"] == pytest.approx(2 * math.pi * (2 + alpha + beta))


def test_gauss_bonnet_off_center_cones(solved_three_point):
    res = gauss_bonnet_check(solved_three_point[0], rtol=1e-3)
    assert res["target"] == pytest.approx(2 * math.pi * 1.0)
    assert res["pass"], res


def test_unknown_weight():
    with pytest.raises(QuadratureError):
        integrate_density(round_sphere(), "volume")


def test_shallow_refinement_rejected():
    with pytest.raises(QuadratureError):
        integrate_density(glued_football(-0.7, -0.8), spec=QuadratureSpec(depth=0))


@settings(max_examples=25)
@given(st.floats(0.3, 3.0), st.complex_numbers(max_magnitude=1.0))
def test_mass_invariant_under_moves(lam, k):
    f = rescale(glued_football(-0.3, -0.6), lam, k)
    assert integrate_density(f).value == pytest.approx(2 * math.pi * 1.1, rel=1e-6)
