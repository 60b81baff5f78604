import math

import numpy as np
import pytest

from conicpinch.factors import Transformed, glued_football, round_sphere
from conicpinch.levelset import (LevelSetError, RasterSpec, grid_profile, integrated_inequality,
                                 limit_profile, radial_mass, radial_profile, t_grid,
                                 verify_isoperimetric_chain, verify_sandwich)


def test_t_grid_descending():
    t = t_grid(-1.0, 1.0, 0.5)
    assert t.tolist() == [1.0, 0.5, 0.0, -0.5, -1.0]


def test_round_sphere_profile_closed_form():
    # u >= t on |z| <= r with 2/(1+r^2) = e^t; A = 4 pi r^2/(1+r^2) = area
    ts = t_grid(-2.0, 0.5, 0.25)
    p = radial_profile(round_sphere(), ts)
    r2 = np.maximum(2 * np.exp(-ts) - 1, 0)
    assert np.allclose(p.B, math.pi * r2, rtol=1e-10, atol=1e-12)
    assert np.allclose(p.A, 4 * math.pi * r2 / (1 + r2), rtol=1e-10, atol=1e-12)
    assert np.allclose(p.defect, 0.0, atol=1e-9)


def test_radial_mass_limits():
    f = glued_football(-0.3, -0.6)
    assert radial_mass(f, 1.0) == pytest.approx(2 * math.pi * 1.4 / 2)
    assert radial_mass(f, 1e12) == pytest.approx(f.total_mass(), rel=1e-9)


def test_radial_profile_needs_closed_form():
    with pytest.raises(LevelSetError):
        radial_profile(Transformed(glued_football(-0.3, -0.6), 1.0, 0.5), [0.0])


@pytest.mark.parametrize("alpha,beta", [(0.0, -0.5), (-0.3, -0.6), (-0.25, -0.75)])
def test_chain_on_glued_footballs(alpha, beta):
    f = glued_football(alpha, beta)
    p = radial_profile(f, t_grid(math.log(1 + alpha) - 3, math.log(1 + alpha) + 2, 0.02))
    a = f.outer_curvature()
    assert verify_sandwich(p, a, 1.0)["pass"]
    assert verify_isoperimetric_chain(p, alpha)["pass"]
    ii = integrated_inequality(p, a, 1.0, alpha)
    assert ii["pass"]
    assert abs(ii["relative_tightness"]) < 1e-2


def test_sandwich_detects_wrong_bounds():
    f = glued_football(-0.3, -0.6)
    p = radial_profile(f, t_grid(-3, 1, 0.05))
    assert not verify_sandwich(p, 0.5, 1.0)["pass"]


def test_grid_profile_agrees_with_radial():
    f = glued_football(-0.3, -0.6)
    ts = t_grid(-1.2, 1.0, 0.05)
    rp = radial_profile(f, ts)
    g = grid_profile(f, ts, RasterSpec(4.0, 1.0 / 64))
    assert np.max(np.abs(g.A - rp.A)) < 1e-3
    assert np.max(np.abs(g.B - rp.B)) < 5e-4
    assert np.max(np.abs(g.L - rp.L)) < 1e-3
    assert np.all(g.n_components[g.B > 0] == 1)


def test_grid_profile_refuses_boundary_levels():
    with pytest.raises(LevelSetError):
        grid_profile(glued_football(-0.3, -0.6), [-3.0], RasterSpec(2.0, 1.0 / 16))


def test_limit_system_discrepancy_frozen():
    rep = limit_profile(-0.3, -0.6).discrepancy_report()
    assert rep["derived"]["max_error_inner"] < 1e-12
    assert rep["derived"]["max_error_outer"] < 1e-12
    assert rep["variant"]["max_error_outer"] < 1e-12
    # the rho0^2 inner branch differs from the radial oracle
    assert rep["variant"]["max_error_inner"] == pytest.approx(6.548379905789251, rel=1e-9)
    assert rep["ode_max_residual"] < 1e-9


def test_profile_csv_deterministic(tmp_path):
    p = radial_profile(glued_football(-0.3, -0.6), t_grid(-1, 1, 0.1))
    a = p.write_csv(tmp_path / "a.csv")
    b = p.write_csv(tmp_path / "b.csv")
    assert open(a).read() == open(b).read()
