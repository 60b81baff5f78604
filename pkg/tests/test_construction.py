import math
from dataclasses import replace

import numpy as np
import pytest

from conicpinch.construction import (R1, R2, BandGrid, ConstructionConfig, ConstructionError,
                                     Cutoff, blend, build_cutoff, matching_j, mollifier_constant,
                                     mollifier_kernel, mollify, run_pipeline)
from conicpinch.divisor import ConicDivisor
from conicpinch.factors import ConformalFactor, pinching_ratio
from conicpinch.quadrature import gauss_bonnet_check

C_FROZEN = 10.734779626785295


def test_mollifier_constant_frozen():
    assert mollifier_constant() == pytest.approx(C_FROZEN, rel=1e-12)


@pytest.mark.parametrize("delta", [0.1, 0.05, 0.01])
def test_mollifier_unit_mass(delta):
    phi = mollifier_kernel(delta)
    assert abs(phi.integral() - 1.0) < 1e-8
    assert phi.C > 10
    assert phi.C >= phi.C_min


def test_mollifier_sup_closed_forms():
    phi = mollifier_kernel(0.05)
    assert phi.sup_phi == pytest.approx(C_FROZEN / math.e, rel=1e-12)
    x2 = 1.5  # maximizer of 2 x^3 exp(-x^2)
    assert phi.sup_grad == pytest.approx(C_FROZEN * 2 * x2 ** 1.5 * math.exp(-x2), rel=1e-8)
    assert phi(np.array([0.05 + 0j, 0.06 + 0j])).tolist() == [0.0, 0.0]


def test_cutoff_values_and_bounds():
    chi, b = build_cutoff(1 / 64)
    assert chi(np.array([1.0 + 0j]))[0] == pytest.approx(1.0, abs=1e-15)
    assert chi(np.array([0.5 + 0j, 0.0j, 2.0 + 0j])).tolist() == [0.0, 0.0, 0.0]
    assert chi(np.array([0.7 + 0j]))[0] == pytest.approx((0.7 - 0.640625) / 0.09375, rel=1e-9)
    assert b["sup_grad"] == pytest.approx(1 / 0.09375, rel=1e-9)
    assert b["grad_ok"]
    # the smoothing width that keeps the ramp inside its bands cannot meet the Laplacian target
    assert b["sup_laplacian"] == pytest.approx(574.0431024908459, rel=1e-6)
    assert not b["laplacian_ok"]


def test_cutoff_support():
    chi = Cutoff()
    r = np.linspace(0, 3, 3001)
    v = chi.radial(r)
    assert np.all(v[(r <= R2[0]) | (r >= R2[1])] == 0)
    assert np.allclose(v[(r >= R1[0]) & (r <= R1[1])], 1.0)


def test_matching_j():
    assert [matching_j(d) for d in (0.04, 0.02, 0.01)] == [2, 3, 4]


def test_config_validation():
    d = ConicDivisor.from_orders([-0.8, -0.3, -0.3])
    with pytest.raises(ConstructionError):
        ConstructionConfig(d, delta=0.2)
    with pytest.raises(ConstructionError):
        ConstructionConfig(d, cells_per_delta=4)
    with pytest.raises(ConstructionError):
        ConstructionConfig(ConicDivisor.from_orders([-0.3, -0.3, -0.4]))


class _Affine(ConformalFactor):
    divisor = ConicDivisor(())

    def u(self, z):
        z = np.asarray(z, dtype=complex)
        return 0.3 * z.real - 0.7 * z.imag + 0.2


def test_mollification_reproduces_affine():
    res = mollify(_Affine(), 0.05)
    ok = np.isfinite(res.U1)
    assert ok.sum() > 1000
    assert np.max(np.abs(res.U1[ok] - res.U0[ok])) < 1e-12


@pytest.fixture(scope="module")
def single_point():
    return run_pipeline(ConstructionConfig(ConicDivisor.from_orders([-0.5]), delta=0.04))


def test_single_cone_point_pipeline(single_point):
    cert = single_point.certificate
    assert cert.rho0 == 0.25
    assert cert.rho < 0.25
    assert cert.gap <= 0.05
    assert cert.passed


def test_zero_cutoff_keeps_u0(single_point):
    class Zero(Cutoff):
        def __call__(self, z):
            return np.zeros(np.shape(z))
    r = single_point
    u2 = blend(r.u0.factor, r.u1, Zero())
    Z = r.u1.grid.nodes()
    assert np.array_equal(u2.U2, r.u1.U0)
    z = np.array([0.66 + 0.1j, 1.3j])
    assert np.allclose(u2.u(z), r.u0.factor.u(z), atol=1e-10)


def _regions(res):
    Z = res.u1.grid.nodes()
    r = np.abs(Z)
    return Z, r


def test_blend_regions(sweep_results):
    res = sweep_results[0]
    Z, r = _regions(res)
    u2 = res.u2
    inner1 = (r >= R1[0]) & (r <= R1[1])
    assert np.array_equal(u2.U2[inner1], res.u1.U1[inner1])
    off2 = (r <= R2[0]) | (r >= R2[1])
    assert np.array_equal(u2.U2[off2], res.u1.U0[off2])


def test_mollified_sup_bound(sweep_results):
    for res in sweep_results:
        assert res.certificate.bound_checks["sup_bound_ok"]


def test_seam_correction_defects(sweep_results):
    for res in sweep_results:
        d = res.u0.defect
        assert d.D0 < d.D0_raw and d.D1 < d.D1_raw
        assert max(d.D0, d.D1) <= 1e-6


def test_sweep_frozen_values(sweep_results):
    rhos = [r.certificate.rho for r in sweep_results]
    assert rhos == pytest.approx([0.2066, 0.2316, 0.2409], abs=5e-4)
    gaps = [r.certificate.gap for r in sweep_results]
    assert gaps[0] > gaps[1] > gaps[2] > 0
    for r in sweep_results:
        assert r.certificate.passed
        assert r.certificate.rho0 == pytest.approx(0.25, rel=1e-14)


def test_measured_constants(sweep_results):
    mc = sweep_results[0].certificate.measured_constants
    assert mc["C"] == pytest.approx(C_FROZEN)
    assert mc["m"] == pytest.approx(-0.7027, abs=1e-3)
    assert mc["M1"] == pytest.approx(1.7638, abs=1e-3)
    assert mc["eps_predicted"] > sweep_results[0].certificate.gap


def test_gauss_bonnet_u2(sweep_results):
    gb = gauss_bonnet_check(sweep_results[0].u2, rtol=1e-3)
    assert gb["pass"], gb
    assert gb["target"] == pytest.approx(2 * math.pi * (2 - 1.4))


def test_band_grid_reach():
    g = BandGrid.for_delta(0.02)
    assert g.spacing == pytest.approx(0.0025)
    assert -g.x0 >= 2.0 + 0.02 + 4 * 0.0025 - 1e-12
