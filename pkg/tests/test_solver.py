import math

import numpy as np
import pytest

from conicpinch.divisor import ConicDivisor
from conicpinch.factors import football, pinching_ratio, round_sphere
from conicpinch.solver import (DiskConfig, SolverConfig, SolverError, disk_closed_form,
                               solve_constant_curvature, solve_dirichlet_disk)


def _node_error(f, g):
    Z = np.exp(f.s_grid[:, None] + 1j * f.theta_grid[None, :])
    return float(np.max(np.abs(f.u(Z) - g.u(Z))))


def test_round_sphere_solve():
    f, rep = solve_constant_curvature(ConicDivisor(()), 1.0, SolverConfig(ds=1 / 32, n_theta=16))
    assert _node_error(f, round_sphere()) < 1e-3
    assert rep.residual_history[-1] <= 1e-8


@pytest.mark.parametrize("beta", [-0.25, -0.5, -0.75])
def test_football_solve_matches_closed_form(beta):
    d = ConicDivisor.from_orders([beta, beta])
    f, rep = solve_constant_curvature(d, (1 + beta) ** 2, SolverConfig(ds=1 / 64, n_theta=16))
    assert _node_error(f, football(beta, normalized=False)) < 5e-3
    assert rep.residual_history[-1] <= 1e-8


def test_subcritical_three_point(solved_three_point):
    f, rep = solved_three_point
    assert rep.residual_history[-1] <= 1e-8
    assert rep.tol_K == pytest.approx(5.462589748750357e-05, rel=1e-3)
    rho = pinching_ratio(f).rho
    assert rho > 1 - 1e-3


def test_supercritical_refused():
    with pytest.raises(SolverError):
        solve_constant_curvature(ConicDivisor.from_orders([-0.8, -0.3, -0.3]))


def test_nonfootball_critical_refused():
    with pytest.raises(SolverError):
        solve_constant_curvature(ConicDivisor.from_orders([-0.4, -0.2, -0.2]))


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(n_theta=15)
    with pytest.raises(ValueError):
        SolverConfig(s_min=1.0, s_max=0.0)


@pytest.mark.parametrize("s", [-0.2, -0.5, -1.0])
def test_dirichlet_constant_matches_closed_form(s):
    sol = solve_dirichlet_disk(1.0, s)
    _, u = disk_closed_form(s)
    assert np.max(np.abs(sol.u - u(sol.r)[:, None])) < 1e-5
    assert sol.origin_value == pytest.approx(float(u(0.0)), abs=1e-5)


def test_dirichlet_level_functionals_closed_form():
    s = -0.5
    sol = solve_dirichlet_disk(1.0, s)
    lam, _ = disk_closed_form(s)
    t = math.log(2 * lam / (1 + lam ** 2 * 0.25))  # level circle r = 1/2
    A, B = sol.level_functionals([t])
    assert B[0] == pytest.approx(math.pi / 4, rel=1e-3)
    r2 = (lam * 0.5) ** 2
    assert A[0] == pytest.approx(4 * math.pi * r2 / (1 + r2), rel=1e-3)


def test_dirichlet_no_solution_reported():
    with pytest.raises(SolverError):
        solve_dirichlet_disk(1.0, 0.2, cfg=DiskConfig(n_r=32, n_theta=16))


def test_disk_closed_form_domain():
    with pytest.raises(ValueError):
        disk_closed_form(0.0)
