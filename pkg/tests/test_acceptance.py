"""Acceptance criteria 1-8, one PASS/FAIL line each at the stated tolerances."""

import math
import time

import numpy as np
import pytest

from conicpinch.construction import sweep
from conicpinch.convergence import lemma_technical_check, normalize
from conicpinch.divisor import ConicDivisor, classify, rho0
from conicpinch.factors import (CartesianGridFactor, add_constant, football, glued_football,
                                pinching_ratio, rescale, round_sphere)
from conicpinch.levelset import (RasterSpec, grid_profile, integrated_inequality,
                                 radial_profile, t_grid, verify_isoperimetric_chain,
                                 verify_sandwich)
from conicpinch.quadrature import gauss_bonnet_check
from conicpinch.solver import (SolverConfig, solve_constant_curvature, solve_dirichlet_disk)


@pytest.fixture
def report(request):
    tr = request.config.pluginmanager.get_plugin("terminalreporter")

    def emit(n, ok, detail):
        line = f"ACCEPTANCE {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        if tr is not None:
            tr.write_line("")
            tr.write_line(line)
        else:
            print(line)
        assert ok, line
    return emit


def test_criterion_1_sharp_constant(report):
    t = time.perf_counter()
    r0 = rho0(ConicDivisor.from_orders([-0.5]))
    rho_a = pinching_ratio(glued_football(0.0, -0.5)).rho
    t_a = time.perf_counter() - t
    t = time.perf_counter()
    g = CartesianGridFactor.sample(glued_football(0.0, -0.5), 4.0, 1.0 / 256)
    rho_g = pinching_ratio(g).rho
    t_g = time.perf_counter() - t
    ok = (r0 == 0.25 and abs(rho_a - 0.25) <= 1e-12 and abs(rho_g - 0.25) <= 1e-3
          and t_a < 1.0 and t_g < 30.0)
    report(1, ok, f"rho0={r0} analytic rho={rho_a!r} ({t_a:.2f}s) "
                  f"grid rho={rho_g:.7f} at h=1/256 ({t_g:.1f}s)")


def test_criterion_2_gauss_bonnet(report, solved_three_point):
    t = time.perf_counter()
    cases = {"round sphere": round_sphere()}
    for b in (-0.25, -0.5, -0.75):
        cases[f"football {b}"] = football(b)
    cases["glued (0,-0.5)"] = glued_football(0.0, -0.5)
    cases["glued (-0.25,-0.75)"] = glued_football(-0.25, -0.75)
    cases["solved {-0.3,-0.3,-0.4}"] = solved_three_point[0]
    errs = {k: gauss_bonnet_check(f, rtol=1e-3)["rel_error"] for k, f in cases.items()}
    dt = time.perf_counter() - t
    worst = max(errs, key=errs.get)
    ok = all(e <= 1e-3 for e in errs.values()) and dt < 120
    report(2, ok, f"{len(errs)} metrics, worst rel. error {errs[worst]:.2e} ({worst}), {dt:.1f}s")


def _chain(p, a, b, alpha):
    s = verify_sandwich(p, a, b)
    c = verify_isoperimetric_chain(p, alpha)
    i = integrated_inequality(p, a, b, alpha)
    return s, c, i


def test_criterion_3_inequality_chain(report, sweep_results):
    details, ok = [], True
    for al, be in ((0.0, -0.5), (-0.3, -0.6), (-0.6, -0.8)):
        f = glued_football(al, be)
        tl = math.log(1 + al)
        p = radial_profile(f, t_grid(tl - 3.0, tl + 2.0, 0.02))
        s, c, i = _chain(p, f.outer_curvature(), f.inner_curvature(), al)
        tight = abs(i["relative_tightness"]) <= 1e-2
        ok &= s["pass"] and c["pass"] and i["pass"] and tight
        details.append(f"glued({al},{be}) tight={i['relative_tightness']:.1e}")
    for res in sweep_results:
        u2 = res.u2
        rep = res.certificate.report
        tl = float(np.mean(u2.u(np.exp(2j * math.pi * np.arange(64) / 64))))
        p = grid_profile(u2, t_grid(tl - 1.0, tl + 1.5, 0.02), RasterSpec(4.0, 1.0 / 64))
        s, c, i = _chain(p, rep.k_min, rep.k_max, res.config.alpha)
        ok &= s["pass"] and c["pass"] and i["pass"]
        details.append(f"u2(delta={res.config.delta}) sandwich={s['pass']} chain={c['pass']} "
                       f"integrated={i['pass']} ({i['euler_ratio']:.4f} >= "
                       f"{i['one_plus_sqrt_ratio']:.4f})")
    report(3, ok, "; ".join(details))


def test_criterion_4_solver_oracle(report):
    t = time.perf_counter()
    d = ConicDivisor.from_orders([-0.5, -0.5])
    f, rep = solve_constant_curvature(d, 0.25, SolverConfig(ds=1.0 / 128, n_theta=16))
    g = football(-0.5, normalized=False)
    Z = np.exp(f.s_grid[:, None] + 1j * f.theta_grid[None, :])
    err = float(np.max(np.abs(f.u(Z) - g.u(Z))))
    res = rep.residual_history[-1]
    dt = time.perf_counter() - t
    ok = err <= 5e-3 and res <= 1e-8 and dt < 300
    report(4, ok, f"sup error {err:.2e} at ds=1/128, residual {res:.2e}, {dt:.1f}s")


def test_criterion_5_construction(report, sweep_results):
    rhos = [r.certificate.rho for r in sweep_results]
    gaps = [r.certificate.gap for r in sweep_results]
    last = sweep_results[-1]
    ok = (last.config.delta == 0.01 and rhos[-1] >= 0.20 and rhos[-1] < 0.25
          and all(g1 > g2 for g1, g2 in zip(gaps, gaps[1:]))
          and last.certificate.rho0 == pytest.approx(0.25))
    report(5, ok, "rho(u2) = " + ", ".join(f"{r:.4f}" for r in rhos)
           + " for delta = 0.04, 0.02, 0.01; gaps " + ", ".join(f"{g:.4f}" for g in gaps))


DIRICHLET_CASES = [
    ("K=1 s=-0.5", 1.0, -0.5, None, None),
    ("K=1 s=-1", 1.0, -1.0, None, None),
    ("K=1 s=-0.05 [1,1.5]", 1.0, -0.05, 1.0, 1.5),
    ("bump0 s=-0.05", lambda z: 1 + 0.2 * np.exp(-4 * np.abs(z) ** 2), -0.05, None, None),
    ("bump0.3 s=-0.1 [1,1.5]", lambda z: 1 + 0.5 * np.exp(-np.abs(z - 0.3) ** 2 / 0.1), -0.1,
     1.0, 1.5),
]


def test_criterion_6_dirichlet_bounds(report):
    t = time.perf_counter()
    parts, ok, nb = [], True, 0
    for name, K, s, a, b in DIRICHLET_CASES:
        rep = lemma_technical_check(solve_dirichlet_disk(K, s, a, b))
        ok &= rep["A_margin_min"] >= -1e-3 and rep["B_pass"]
        nb += rep["B_levels_checked"]
        parts.append(f"{name}: A {rep['A_margin_min']:.1e}"
                     + (f", B {rep['B_margin_min']:.2f}" if rep["B_levels_checked"] else ""))
    dt = time.perf_counter() - t
    ok &= nb > 0 and dt < 300
    report(6, ok, "; ".join(parts) + f"; {nb} B-levels, {dt:.1f}s")


def test_criterion_7_convergence(report, sequence_run):
    tr = sequence_run.trends(1e-3)
    sp = tr["spread"]["values"]
    ok = all(tr[k]["pass"] for k in tr) and sp[-1] < sp[0]
    vals = {k: ", ".join(f"{v:.4g}" for v in tr[k]["values"]) for k in tr}
    report(7, ok, f"defect [{vals['defect_integral']}] distance [{vals['profile_distance']}] "
                  f"component [{vals['component_ratio_defect']}] spread [{vals['spread']}] "
                  "(profile distance is a proxy, not Gromov-Hausdorff)")


def _order(errs):
    return [math.log2(e0 / e1) for e0, e1 in zip(errs, errs[1:])]


def test_criterion_8_invariance(report, solved_three_point):
    rng = np.random.default_rng(20261016)
    fams = {"glued football": (glued_football(-0.3, -0.6), 1e-12),
            "solved 3-point": (solved_three_point[0], 2 * solved_three_point[1].tol_K)}
    worst = {}
    ok = True
    for name, (f, tol) in fams.items():
        base = pinching_ratio(f).rho
        label = classify(f.divisor).label
        w = 0.0
        for _ in range(100):
            lam = float(np.exp(rng.uniform(-1.5, 1.5)))
            k = complex(*rng.uniform(-2, 2, 2))
            g = rescale(f, lam, k)
            w = max(w, abs(pinching_ratio(g).rho - base))
            ok &= classify(g.divisor).label == label
        worst[name] = w
        ok &= w <= tol
    # normalize round trip on the closed-form path
    f = glued_football(-0.6, -0.8)
    rt = 0.0
    for _ in range(100):
        lam = float(np.exp(rng.uniform(-1.5, 1.5)))
        k = complex(*rng.uniform(-2, 2, 2))
        c = float(rng.uniform(-1, 1))
        n = normalize(add_constant(rescale(f, lam, k), c), -0.6)
        rt = max(rt, abs(1 / n.lam - lam) / lam, abs(-n.k * n.lam - k))
    ok &= rt <= 1e-6
    # grid/radial agreement under spacing halving
    g = glued_football(-0.3, -0.6)
    ts = t_grid(-1.2, 1.0, 0.05)
    rp = radial_profile(g, ts)
    errs = {"A": [], "B": [], "L": []}
    for h in (1 / 32, 1 / 64, 1 / 128):
        p = grid_profile(g, ts, RasterSpec(4.0, h))
        for key in errs:
            errs[key].append(float(np.max(np.abs(getattr(p, key) - getattr(rp, key)))))
    orders = {k: _order(v) for k, v in errs.items()}
    ok &= all(o >= 1.0 for v in orders.values() for o in v)
    report(8, ok, "rescale worst |drho|: " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
           + f"; normalize round trip {rt:.1e}; observed orders "
           + ", ".join(f"{k} " + "/".join(f"{o:.2f}" for o in v) for k, v in orders.items()))
