import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conicpinch.convergence import (ConvergenceError, component_analysis, defect_integral,
                                    default_t0, lemma_technical_check, normalize,
                                    profile_distance, sequence_rows)
from conicpinch.divisor import ConicDivisor
from conicpinch.factors import ConformalFactor, Transformed, glued_football, rescale
from conicpinch.levelset import (LimitProfile, RasterSpec, grid_profile, radial_profile,
                                 t_grid)
from conicpinch.solver import solve_dirichlet_disk


class TwoSpheres(ConformalFactor):
    """u = ln(phi(z - p) + phi(z + p)) with phi = 2/(1 + |z|^2): two separated peaks."""

    divisor = ConicDivisor(())

    def __init__(self, p=1.5):
        self.p = p

    def _parts(self, z):
        z = np.asarray(z, dtype=complex)
        out = []
        for c in (self.p, -self.p):
            w = z - c
            q = 1 + np.abs(w) ** 2
            out.append((2 / q, -4 * w / q ** 2, (8 * np.abs(w) ** 2 - 8) / q ** 3))
        return out

    def u(self, z):
        (a, _, _), (b, _, _) = self._parts(z)
        return np.log(a + b)

    def grad(self, z):
        (a, ga, _), (b, gb, _) = self._parts(z)
        return (ga + gb) / (a + b)

    def laplacian(self, z):
        (a, ga, la), (b, gb, lb) = self._parts(z)
        S = a + b
        return (la + lb) / S - np.abs(ga + gb) ** 2 / S ** 2


def test_two_peaks_show_positive_defect_and_split_components():
    f = TwoSpheres()
    p = grid_profile(f, t_grid(0.3, 0.7, 0.05), RasterSpec(4.0, 1.0 / 64))
    assert np.all(p.n_components == 2)
    ca = component_analysis(p)
    assert ca.min_ratio == pytest.approx(0.5, abs=1e-3)
    d = defect_integral(p)
    assert d.sampled > 0
    assert np.all(p.defect > 0)


def test_radial_profile_has_no_defect():
    f = glued_football(-0.6, -0.8)
    p = radial_profile(f, t_grid(-2.5, 1.0, 0.02))
    d = defect_integral(p)
    assert abs(d.value) < 1e-9
    assert component_analysis(p).ratio_defect == pytest.approx(0.0, abs=1e-12)
    assert profile_distance(p, LimitProfile(-0.6, -0.8)) < 1e-9


def test_default_t0():
    assert default_t0(-0.6) == pytest.approx(math.log(0.4) + 0.1)


@settings(max_examples=100)
@given(st.floats(0.2, 5.0), st.complex_numbers(max_magnitude=2.0), st.floats(-1.0, 1.0))
def test_normalize_round_trip_analytic(lam, k, c):
    from conicpinch.factors import add_constant
    f = glued_football(-0.6, -0.8)
    g = add_constant(rescale(f, lam, k), c)
    n = normalize(g, -0.6)
    # normalized = rescale(g, n.lam, n.k) reproduces f, so (lam, k) = (1/n.lam, -n.k n.lam)
    assert abs(1.0 / n.lam - lam) <= 1e-6 * lam
    assert abs(-n.k * n.lam - k) <= 1e-6
    assert n.shift == pytest.approx(-c, abs=1e-12)
    assert n.residual_A < 1e-9


def test_normalize_raster_path_converges():
    f = glued_football(-0.6, -0.8)
    lam, k = 0.6, -0.3j
    T = Transformed(f, lam, k)
    errs = []
    for h in (1 / 32, 1 / 64):
        n = normalize(T, -0.6, raster=RasterSpec(8.0, h))
        errs.append(abs(1.0 / n.lam - lam))
        assert abs(-n.k * n.lam - k) < 1e-4
    assert errs[1] < errs[0]
    assert errs[1] < 1e-4


def test_normalize_fails_without_crossing():
    with pytest.raises(ConvergenceError):
        # target 2 pi exceeds the total mass 2 pi (0.6)
        normalize(glued_football(-0.6, -0.8), 0.0)


DIRICHLET_CASES = [
    ("K=1, s=-1/2", 1.0, -0.5, None, None),
    ("K=1, s=-1", 1.0, -1.0, None, None),
    ("K=1, s=-0.05, a=1, b=3/2", 1.0, -0.05, 1.0, 1.5),
    ("centered bump, s=-0.05", lambda z: 1 + 0.2 * np.exp(-4 * np.abs(z) ** 2), -0.05, None, None),
    ("off-center bump, s=-0.1", lambda z: 1 + 0.5 * np.exp(-np.abs(z - 0.3) ** 2 / 0.1), -0.1,
     1.0, 1.5),
]


@pytest.mark.parametrize("name,K,s,a,b", DIRICHLET_CASES, ids=[c[0] for c in DIRICHLET_CASES])
def test_dirichlet_level_bounds(name, K, s, a, b):
    sol = solve_dirichlet_disk(K, s, a, b)
    rep = lemma_technical_check(sol)
    assert rep["A_pass"] and rep["B_pass"], rep
    assert rep["A_margin_min"] >= -1e-3


def test_dirichlet_bounds_reach_second_inequality():
    sol = solve_dirichlet_disk(lambda z: 1 + 0.2 * np.exp(-4 * np.abs(z) ** 2), -0.05)
    rep = lemma_technical_check(sol)
    assert rep["B_levels_checked"] > 0
    assert rep["B_margin_min"] >= -1e-3


def test_sequence_trends(sequence_run):
    tr = sequence_run.trends(1e-3)
    for key in ("defect_integral", "profile_distance", "component_ratio_defect", "spread"):
        assert tr[key]["pass"], (key, tr[key])
    spreads = tr["spread"]["values"]
    assert spreads[-1] < spreads[0]


def test_sequence_rows_shape(sequence_run):
    rows = sequence_rows(sequence_run)
    assert len(rows) == 3
    assert [r[0] for r in rows] == [0.04, 0.02, 0.01]
    assert all(len(r) == 6 for r in rows)
