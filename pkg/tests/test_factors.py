import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conicpinch.factors import (CartesianGridFactor, CurvatureError, FactorError, Sampling,
                                add_constant, football, glued_football, pinching_ratio, rescale,
                                round_sphere)

PTS = np.array([0.3 + 0.1j, 2 + 1j, 0.5j, 5.0, -0.7 - 0.2j])


def test_round_sphere_closed_form():
    f = round_sphere()
    r = np.abs(PTS)
    assert np.allclose(f.u(PTS), np.log(2.0 / (1.0 + r ** 2)), rtol=0, atol=1e-15)
    assert np.allclose(f.curvature(PTS), 1.0, atol=1e-13)


def test_glued_football_piecewise_constant_curvature():
    f = glued_football(-0.2, -0.6)
    K = f.curvature(PTS)
    inner = np.abs(PTS) < 1
    assert np.allclose(K[inner], 1.0, atol=1e-12)
    assert np.allclose(K[~inner], 0.25, atol=1e-12)
    assert f.inner_curvature() == pytest.approx(1.0)
    assert f.outer_curvature() == pytest.approx(0.25)


def test_unnormalized_football_curvature():
    f = football(-0.5, normalized=False)
    assert np.allclose(f.curvature(PTS), 0.25, atol=1e-12)


def test_c11_across_seam():
    f = glued_football(-0.1, -0.7)
    r = np.array([1 - 1e-9, 1 + 1e-9])
    assert abs(np.diff(f.radial_u(r))[0]) < 1e-8
    assert abs(np.diff(f.radial_du(r))[0]) < 1e-7


def test_gradient_matches_finite_difference():
    f = glued_football(-0.3, -0.6)
    z = np.array([0.4 + 0.2j, 1.7 - 0.9j])
    h = 1e-6
    gx = (f.u(z + h) - f.u(z - h)) / (2 * h)
    gy = (f.u(z + 1j * h) - f.u(z - 1j * h)) / (2 * h)
    assert np.allclose(f.grad(z), gx + 1j * gy, atol=1e-7)


def test_total_mass():
    assert glued_football(-0.2, -0.6).total_mass() == pytest.approx(2 * math.pi * 1.2)


def test_pinching_of_glued_football():
    rep = pinching_ratio(glued_football(0.0, -0.5))
    assert rep.rho == pytest.approx(0.25, abs=1e-12)
    assert rep.rho0 == pytest.approx(0.25, abs=1e-15)
    assert rep.classification == "supercritical"


def test_grid_curvature_frozen():
    g = CartesianGridFactor.sample(glued_football(0.0, -0.5), 4.0, 1.0 / 64)
    rep = pinching_ratio(g)
    assert rep.rho == pytest.approx(0.24981924966161087, abs=1e-9)
    assert rep.rho < 0.25


def test_invalid_parameters():
    with pytest.raises(FactorError):
        glued_football(-0.6, -0.2)
    with pytest.raises(FactorError):
        glued_football(0.1, -0.2)
    with pytest.raises(FactorError):
        rescale(round_sphere(), 0.0)


def test_curvature_near_cone_point_refused():
    f = glued_football(-0.3, -0.6)
    with pytest.raises(FactorError):
        f.curvature(np.array([1e-5 + 0j]))


def test_nonpositive_curvature_detected():
    class Flat(type(round_sphere())):
        def laplacian(self, z):
            return np.zeros(np.shape(z))
    with pytest.raises(CurvatureError):
        pinching_ratio(Flat(0.0, 0.0), Sampling(n_r=20, n_theta=8))


@settings(max_examples=100)
@given(st.floats(-0.9, 0.0), st.floats(0.0, 1.0), st.floats(0.2, 5.0),
       st.complex_numbers(max_magnitude=2.0), st.floats(-1.0, 1.0))
def test_scaling_covariance(alpha, frac, lam, k, c):
    beta = -0.95 + frac * (alpha + 0.95)
    f = glued_football(alpha, beta)
    g = add_constant(rescale(f, lam, k), c)
    w = np.array([0.37 + 0.11j, -1.3 + 0.8j, 2.9 - 0.4j])
    z = k + w / lam
    assert np.allclose(g.u(z), f.u(w) + math.log(lam) + c, atol=1e-11)
    keep = ~f.too_close(w)
    assert np.allclose(g.curvature(z[keep], check=False),
                       f.curvature(w[keep], check=False) * math.exp(-2 * c), rtol=1e-9)
