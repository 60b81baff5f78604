"""Command-line entry point.

Every subcommand writes its artifacts plus ``manifest.json`` into ``--out``.
Exit status: 0 success, 1 a check failed beyond its slack, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import io as cio
from .divisor import SUPERCRITICAL, ConicDivisor, DivisorError, classify, rho0

logger = logging.getLogger("conicpinch")

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# config documents


def load_config(path: str) -> dict:
    """Flat parameter document (JSON or TOML); keys are flag names."""
    if not os.path.exists(path):
        raise UsageError(f"config file {path!r} does not exist")
    try:
        if path.endswith(".toml"):
            try:
                import tomllib
            except ModuleNotFoundError:  # Python < 3.11
                import tomli as tomllib
            with open(path, "rb") as fh:
                doc = tomllib.load(fh)
        else:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
    except (ValueError, OSError) as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError(f"config {path!r} must be a table of parameters")
    flat = {}
    for k, v in doc.items():
        if isinstance(v, dict):  # sections are only for grouping
            flat.update(v)
        else:
            flat[k] = v
    return {k.replace("-", "_"): v for k, v in flat.items()}


def _divisor(args) -> ConicDivisor:
    if getattr(args, "divisor_file", None):
        try:
            with open(args.divisor_file, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read divisor file: {exc}") from exc
    elif getattr(args, "divisor", None) is not None:
        text = args.divisor if isinstance(args.divisor, str) else json.dumps(args.divisor)
    else:
        raise UsageError("a divisor is required: pass --divisor '[b1, b2, ...]' or --divisor-file")
    try:
        return ConicDivisor.parse(text)
    except DivisorError as exc:
        raise UsageError(f"malformed divisor: {exc}") from exc


def _floats(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from exc


# ---------------------------------------------------------------------------
# factors from flags


def _factor(args):
    """Glued football from --alpha/--beta, or a grid-factor file from --grid."""
    from .factors import CartesianGridFactor, GluedFootball, LogPolarGridFactor
    if getattr(args, "grid", None):
        try:
            arr, head = cio.read_grid(args.grid)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read grid file {args.grid!r}: {exc}") from exc
        d = ConicDivisor.from_dict(head["divisor"])
        kind = head.get("grid_kind")
        if kind == "logpolar":
            return LogPolarGridFactor(d, arr, head["s0"], head["ds"], head["exclusion"], None,
                                      head.get("theta_offset", 0.0))
        if kind == "cartesian":
            return CartesianGridFactor(d, arr, head["x0"], head["y0"], head["spacing"],
                                       head["exclusion"])
        raise UsageError(f"grid kind {kind!r} is not a complete factor (band grids only cover "
                         "the blending annulus)")
    if args.alpha is None or args.beta is None:
        raise UsageError("pass --alpha and --beta (closed form) or --grid FILE")
    try:
        return GluedFootball(float(args.alpha), float(args.beta), not args.raw)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _seam_level(f) -> float:
    from .factors import GluedFootball
    if isinstance(f, GluedFootball):
        return float(f.radial_u(f.seam_radius))
    return float(np.mean(f.u(np.exp(2j * math.pi * np.arange(64) / 64))))


def _levels(args, center: float):
    """Descending t grid on center + k * step, so the center level is sampled exactly."""
    step = args.t_step
    if step <= 0:
        raise UsageError("--t-step must be positive")
    lo = center - 2.0 if args.t_min is None else args.t_min
    hi = center + 2.0 if args.t_max is None else args.t_max
    if hi <= lo:
        raise UsageError("--t-max must exceed --t-min")
    k_hi = int(math.floor((hi - center) / step + 1e-9))
    k_lo = int(math.ceil((lo - center) / step - 1e-9))
    return center + step * np.arange(k_hi, k_lo - 1, -1)


def _profile(f, args, ts):
    from .factors import GluedFootball
    from .levelset import RasterSpec, grid_profile, radial_profile
    if isinstance(f, GluedFootball) and args.method in ("auto", "radial"):
        return radial_profile(f, ts)
    if args.method == "radial":
        raise UsageError("--method radial needs a closed-form factor")
    return grid_profile(f, ts, RasterSpec(args.half_width, args.spacing))


# ---------------------------------------------------------------------------
# subcommands; each returns (status, outputs, summary dict)


def cmd_classify(args, out):
    d = _divisor(args)
    c = classify(d)
    doc = {"divisor": d.to_dict(), "classification": c.label, "euler": c.euler,
           "threshold": c.threshold, "note": c.note, "alpha": d.alpha, "beta1": d.beta1}
    print(c.label)
    if c.note:
        print(f"note: {c.note}")
    return EXIT_OK, [cio.write_json(os.path.join(out, "classify.json"), doc, "classify")], doc


def cmd_rho0(args, out):
    d = _divisor(args)
    c = classify(d)
    try:
        r = rho0(d)
    except DivisorError as exc:
        raise UsageError(str(exc)) from exc
    doc = {"divisor": d.to_dict(), "rho0": r, "classification": c.label, "alpha": d.alpha,
           "beta1": d.beta1, "note": c.note}
    print(f"rho0 = {r!r}")
    print(f"classification: {c.label}")
    return EXIT_OK, [cio.write_json(os.path.join(out, "rho0.json"), doc, "rho0")], doc


def cmd_football(args, out):
    from .factors import pinching_ratio
    from .plots import profile_svg
    from .quadrature import gauss_bonnet_check
    args.grid = None
    f = _factor(args)
    rep = pinching_ratio(f)
    gb = gauss_bonnet_check(f, rtol=args.gb_rtol)
    doc = {"factor": f.describe(), "inner_curvature": f.inner_curvature(),
           "outer_curvature": f.outer_curvature(), "pinching": rep.to_dict(),
           "seam_level": _seam_level(f), "total_mass": f.total_mass(), "gauss_bonnet": gb}
    outputs = []
    if args.profile:
        ts = _levels(args, _seam_level(f))
        p = _profile(f, args, ts)
        outputs.append(p.write_csv(os.path.join(out, "profile.csv")))
        outputs.append(profile_svg(p, os.path.join(out, "profile.svg"), "glued football"))
        i = int(np.argmin(np.abs(p.t - doc["seam_level"])))
        doc["A_at_seam"] = float(p.A[i])
    outputs.append(cio.write_json(os.path.join(out, "football.json"), doc, "football"))
    print(f"rho = {rep.rho!r}  rho0 = {rep.rho0!r}  Gauss-Bonnet rel. error = {gb['rel_error']:.3e}")
    return (EXIT_OK if gb["pass"] else EXIT_CHECK), outputs, doc


def cmd_curvature(args, out):
    from .factors import CartesianGridFactor, Sampling, pinching_ratio
    from .plots import curvature_rays_svg
    f = _factor(args)
    if args.grid_spacing:
        f = CartesianGridFactor.sample(f, args.grid_half_width, args.grid_spacing)
    rep = pinching_ratio(f, Sampling(exclusion=args.exclusion))
    doc = {"factor": f.describe(), "pinching": rep.to_dict()}
    status = EXIT_OK
    if rep.classification == SUPERCRITICAL and math.isfinite(rep.rho0):
        ok = rep.rho <= rep.rho0 + args.slack
        doc["upper_bound_check"] = {"rho": rep.rho, "rho0": rep.rho0, "slack": args.slack,
                                    "pass": bool(ok)}
        status = EXIT_OK if ok else EXIT_CHECK
    outputs = [cio.write_json(os.path.join(out, "curvature.json"), doc, "curvature"),
               curvature_rays_svg(f, os.path.join(out, "curvature.svg"))]
    print(f"k_min = {rep.k_min!r}  k_max = {rep.k_max!r}  rho = {rep.rho!r}")
    return status, outputs, doc


def cmd_profile(args, out):
    from .plots import profile_svg
    f = _factor(args)
    ts = _levels(args, _seam_level(f))
    p = _profile(f, args, ts)
    doc = {"factor": f.describe(), "method": p.method, "total_mass": p.total_mass,
           "monotone": p.check_monotone(), "meta": p.meta}
    outputs = [p.write_csv(os.path.join(out, "profile.csv")),
               profile_svg(p, os.path.join(out, "profile.svg")),
               cio.write_json(os.path.join(out, "profile.json"), doc, "profile")]
    print(f"{len(ts)} levels, method {p.method}")
    return EXIT_OK, outputs, doc


def cmd_verify(args, out):
    from .factors import pinching_ratio
    from .levelset import integrated_inequality, verify_isoperimetric_chain, verify_sandwich
    from .plots import profile_svg
    from .quadrature import gauss_bonnet_check
    f = _factor(args)
    rep = pinching_ratio(f)
    a, b = rep.k_min, rep.k_max
    d = f.divisor
    ts = _levels(args, _seam_level(f))
    p = _profile(f, args, ts)
    inside = sum(q.beta for q in d.finite_points)
    checks = {"sandwich": verify_sandwich(p, a, b),
              "isoperimetric_chain": verify_isoperimetric_chain(p, inside),
              "integrated": integrated_inequality(p, a, b, d.alpha),
              "gauss_bonnet": gauss_bonnet_check(f, rtol=args.gb_rtol)}
    ok = all(c["pass"] for c in checks.values())
    doc = {"factor": f.describe(), "pinching": rep.to_dict(), "checks": checks, "pass": ok}
    outputs = [p.write_csv(os.path.join(out, "profile.csv")),
               profile_svg(p, os.path.join(out, "profile.svg")),
               cio.write_json(os.path.join(out, "verify.json"), doc, "verify")]
    for k, c in checks.items():
        print(f"{k}: {'pass' if c['pass'] else 'FAIL'}")
    return (EXIT_OK if ok else EXIT_CHECK), outputs, doc


def cmd_solve(args, out):
    from .convergence import lemma_technical_check
    from .solver import DiskConfig, SolverConfig, solve_constant_curvature, solve_dirichlet_disk
    if args.disk:
        if args.s is None:
            raise UsageError("--disk needs the boundary value --s")
        if args.bump:
            amp = float(args.bump)

            def K(z):
                return args.K0 * (1.0 + amp * np.exp(-4.0 * np.abs(z) ** 2))
            a, b = args.K0 * min(1.0, 1.0 + amp), args.K0 * max(1.0, 1.0 + amp)
        else:
            K, a, b = args.K0, args.K0, args.K0
        cfg = DiskConfig(n_r=args.n_r, n_theta=args.n_theta, tol=args.tol)
        sol = solve_dirichlet_disk(K, args.s, a, b, cfg)
        chk = lemma_technical_check(sol, slack=args.slack)
        doc = {"mode": "disk", "s": args.s, "K0": args.K0, "bump": args.bump,
               "report": sol.report.to_dict(), "H": sol.H, "level_bounds": chk}
        grid = cio.write_grid(os.path.join(out, "solution.grid"), sol.u,
                              {"grid_kind": "disk_polar", "n_r": cfg.n_r, "n_theta": cfg.n_theta,
                               "s": args.s})
        outputs = [grid, cio.write_json(os.path.join(out, "solve.json"), doc, "solve")]
        print(f"H = {sol.H!r}  level-set bounds: {'pass' if chk['pass'] else 'FAIL'}")
        return (EXIT_OK if chk["pass"] else EXIT_CHECK), outputs, doc
    d = _divisor(args)
    cfg = SolverConfig(ds=args.ds, n_theta=args.n_theta, s_min=args.s_min, s_max=args.s_max,
                       tol=args.tol)
    f, rep = solve_constant_curvature(d, args.K0, cfg)
    doc = {"mode": "liouville", "divisor": d.to_dict(), "K0": args.K0, "report": rep.to_dict(),
           "factor": f.describe()}
    grid = cio.write_grid(os.path.join(out, "solution.grid"), f.h,
                          {"grid_kind": "logpolar", "divisor": d.to_dict(), "s0": f.s0,
                           "ds": f.ds, "exclusion": f.exclusion,
                           "theta_offset": f.theta_offset})
    res = rep.residual_history[-1] if rep.residual_history else float("nan")
    print(f"iterations = {rep.iterations}  residual = {res:.3e}  curvature spread = {rep.tol_K:.3e}")
    return EXIT_OK, [grid, cio.write_json(os.path.join(out, "solve.json"), doc, "solve")], doc


def _construction_config(args, d, delta):
    from .construction import ConstructionConfig
    from .solver import SolverConfig
    return ConstructionConfig(d, delta, j=args.j, eps_prime=args.eps_prime, n_modes=args.n_modes,
                              seam_correction=not args.no_seam_correction,
                              cells_per_delta=args.cells_per_delta,
                              cutoff_smoothing=args.cutoff_smoothing,
                              solver=SolverConfig(ds=args.ds, n_theta=args.n_theta),
                              eps_target=args.eps_target)


def _band_header(res, name):
    g = res.u1.grid
    return {"grid_kind": "band", "field": name, "x0": g.x0, "y0": g.x0, "spacing": g.spacing,
            "delta": res.config.delta, "divisor": res.u0.factor.divisor.to_dict()}


def cmd_construct(args, out):
    from .construction import R1, R2, ConstructionError, run_pipeline
    from .plots import curvature_rays_svg
    d = _divisor(args)
    try:
        cfg = _construction_config(args, d, args.delta)
    except ConstructionError as exc:
        raise UsageError(str(exc)) from exc
    res = run_pipeline(cfg)
    cert = res.certificate
    outputs = [cio.write_json(os.path.join(out, "certificate.json"), cert.to_dict(), "certificate")]
    for name, arr in (("u0", res.u1.U0), ("u1", res.u1.U1), ("u2", res.u2.U2)):
        outputs.append(cio.write_grid(os.path.join(out, f"{name}.grid"), arr,
                                      _band_header(res, name)))
    outputs.append(curvature_rays_svg(res.u2, os.path.join(out, "curvature.svg"), r_min=0.05,
                                      r_max=3.0, bands=(R2[0], R1[0], R1[1], R2[1]),
                                      title="curvature of u2 along rays"))
    print(f"rho = {cert.rho!r}  rho0 = {cert.rho0!r}  gap = {cert.gap!r}")
    return (EXIT_OK if cert.passed else EXIT_CHECK), outputs, cert.to_dict()


def _pipeline_job(job):
    from .construction import run_pipeline
    cfg, fam = job
    return run_pipeline(cfg, fam)


def _sweep(args, d):
    from .construction import ConstructionError, sweep
    from .solver import continuation_family
    deltas = sorted(_floats(args.deltas), reverse=True)
    if not deltas:
        raise UsageError("--deltas is empty")
    try:
        proto = _construction_config(args, d, deltas[0])
    except ConstructionError as exc:
        raise UsageError(str(exc)) from exc
    if args.jobs <= 1:
        return sweep(d, deltas, proto)
    cfgs = [replace(proto, delta=dl, j=None) for dl in deltas]
    fams = {}
    if d.n >= 3:
        base = [p.beta for p in d.finite_points]
        pos = [p.position for p in d.finite_points]
        alphas = sorted({c.alpha_j for c in cfgs}, reverse=True)
        for a, f, rep in continuation_family(base, alphas, proto.solver, positions=pos):
            fams[round(a, 12)] = (a, f, rep)
    with ProcessPoolExecutor(max_workers=args.jobs) as ex:
        return list(ex.map(_pipeline_job, [(c, fams.get(round(c.alpha_j, 12))) for c in cfgs]))


SWEEP_CSV_HEADER = ["param", "j", "alpha_j", "rho", "rho0", "gap", "D0", "D1", "pass"]


def cmd_sweep(args, out):
    from .plots import series_svg
    d = _divisor(args)
    results = _sweep(args, d)
    rows = []
    for r in results:
        c = r.certificate
        rows.append([r.config.delta, r.config.j_eff, r.config.alpha_j, c.rho, c.rho0, c.gap,
                     c.seam.D0, c.seam.D1, int(c.passed)])
    gaps = [r.certificate.gap for r in results]
    mono = all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))
    ok = mono and all(r.certificate.passed for r in results)
    doc = {"divisor": d.to_dict(), "rows": [dict(zip(SWEEP_CSV_HEADER, row)) for row in rows],
           "gap_monotone": mono, "certificates": [r.certificate.to_dict() for r in results],
           "pass": ok}
    x = [r.config.delta for r in results]
    outputs = [cio.write_csv(os.path.join(out, "sweep.csv"), SWEEP_CSV_HEADER, rows),
               cio.write_json(os.path.join(out, "sweep.json"), doc, "sweep"),
               series_svg(x, {"rho0 - rho": gaps}, os.path.join(out, "sweep.svg"), "delta",
                          "pinching gap along the sweep", logy=True)]
    for row in rows:
        print(f"delta = {row[0]:g}  j = {row[1]}  rho = {row[3]:.6f}  gap = {row[5]:.6f}")
    return (EXIT_OK if ok else EXIT_CHECK), outputs, doc


def cmd_converge(args, out):
    from .convergence import SEQUENCE_CSV_HEADER, SequenceRun, analyze_member, merging_tracker, sequence_rows
    from .levelset import RasterSpec
    from .plots import overlay_svg
    d = _divisor(args)
    results = _sweep(args, d)
    run = SequenceRun(d.alpha, d.beta1)
    raster = RasterSpec(args.half_width, args.spacing)
    for r in results:
        run.members.append(analyze_member(r.u2, d.alpha, d.beta1, r.config.delta, raster=raster,
                                          report=r.certificate.report))
    trends = run.trends(slack=args.slack)
    ok = all(v["pass"] for v in trends.values())
    doc = {"divisor": d.to_dict(), "limit": run.limit.to_dict(), "trends": trends,
           "merging": merging_tracker(run),
           "members": [{"param": m.param, "normalization": m.normalization.to_dict(),
                        "defect_integral": m.defect.to_dict(), "profile_distance": m.distance,
                        "component_min_ratio": m.components.min_ratio, "rho": m.report.rho}
                       for m in run.members],
           "profile_distance_note": "relative sup distance of (A, B); a proxy, not a "
                                    "Gromov-Hausdorff distance",
           "pass": ok}
    outputs = [cio.write_csv(os.path.join(out, "converge.csv"), SEQUENCE_CSV_HEADER,
                             sequence_rows(run)),
               cio.write_json(os.path.join(out, "converge.json"), doc, "converge"),
               overlay_svg([m.profile for m in run.members],
                           [f"delta = {m.param:g}" for m in run.members], run.limit,
                           os.path.join(out, "overlay.svg"))]
    for row in sequence_rows(run):
        print("  ".join(f"{h} = {v:.6g}" for h, v in zip(SEQUENCE_CSV_HEADER, row)))
    return (EXIT_OK if ok else EXIT_CHECK), outputs, doc


COMMANDS = {"classify": cmd_classify, "rho0": cmd_rho0, "football": cmd_football,
            "curvature": cmd_curvature, "profile": cmd_profile, "verify": cmd_verify,
            "solve": cmd_solve, "construct": cmd_construct, "sweep": cmd_sweep,
            "converge": cmd_converge}


# ---------------------------------------------------------------------------
# parser


def _add_divisor(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--divisor", help="inline JSON: list of orders or a divisor document")
    g.add_argument("--divisor-file", help="path to a divisor JSON document")


def _add_factor(p):
    p.add_argument("--alpha", type=float, help="inner order of a glued football")
    p.add_argument("--beta", type=float, help="outer order of a glued football")
    p.add_argument("--raw", action="store_true", help="unnormalized football (no (1+alpha) factor)")
    p.add_argument("--grid", help="grid-factor file written by `solve`")


def _add_levels(p):
    p.add_argument("--t-min", type=float, help="lowest level (default: seam level - 2)")
    p.add_argument("--t-max", type=float, help="highest level (default: seam level + 2)")
    p.add_argument("--t-step", type=float, default=0.02)
    p.add_argument("--method", choices=["auto", "radial", "grid"], default="auto")
    p.add_argument("--half-width", type=float, default=4.0, help="raster half width")
    p.add_argument("--spacing", type=float, default=1.0 / 64, help="raster spacing")


def _add_construction(p):
    _add_divisor(p)
    p.add_argument("--j", type=int, help="continuation index (default: round(log2(0.16/delta)))")
    p.add_argument("--eps-prime", type=float, help="seam-defect target (default delta^3)")
    p.add_argument("--eps-target", type=float, default=0.05, help="allowed gap rho0 - rho")
    p.add_argument("--n-modes", type=int, default=16, help="Fourier modes in the seam correction")
    p.add_argument("--no-seam-correction", action="store_true")
    p.add_argument("--cells-per-delta", type=int, default=8)
    p.add_argument("--cutoff-smoothing", type=float, default=1.0 / 64)
    p.add_argument("--ds", type=float, default=1.0 / 16, help="solver log-radial spacing")
    p.add_argument("--n-theta", type=int, default=128)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conicpinch",
                                     description="Curvature pinching of conic 2-spheres.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output directory (default: runs/COMMAND)")
    common.add_argument("--config", help="JSON or TOML parameter document; flags override it")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = sub.add_parser("classify", parents=[common], help="subcritical / critical / supercritical")
    _add_divisor(p)
    p = sub.add_parser("rho0", parents=[common], help="sharp pinching constant")
    _add_divisor(p)

    p = sub.add_parser("football", parents=[common], help="closed-form glued football")
    _add_factor(p)
    _add_levels(p)
    p.add_argument("--profile", action="store_true", help="also write the level-set profile")
    p.add_argument("--gb-rtol", type=float, default=1e-3)

    p = sub.add_parser("curvature", parents=[common], help="curvature extremes and pinching ratio")
    _add_factor(p)
    p.add_argument("--grid-spacing", type=float, help="evaluate on a sampled Cartesian grid")
    p.add_argument("--grid-half-width", type=float, default=4.0)
    p.add_argument("--exclusion", type=float, default=1e-3)
    p.add_argument("--slack", type=float, default=1e-9)

    p = sub.add_parser("profile", parents=[common], help="level-set functionals A, B, L")
    _add_factor(p)
    _add_levels(p)

    p = sub.add_parser("verify", parents=[common], help="inequality checks on a factor")
    _add_factor(p)
    _add_levels(p)
    p.add_argument("--gb-rtol", type=float, default=1e-3)

    p = sub.add_parser("solve", parents=[common], help="constant-curvature or Dirichlet solve")
    _add_divisor(p)
    p.add_argument("--K0", type=float, default=1.0)
    p.add_argument("--ds", type=float, default=1.0 / 32)
    p.add_argument("--n-theta", type=int, default=128)
    p.add_argument("--s-min", type=float, default=-14.0)
    p.add_argument("--s-max", type=float, default=14.0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--disk", action="store_true", help="Dirichlet problem on the unit disk")
    p.add_argument("--s", type=float, help="boundary value for --disk")
    p.add_argument("--bump", type=float, help="K = K0 (1 + bump e^{-4|z|^2}) for --disk")
    p.add_argument("--n-r", type=int, default=256)
    p.add_argument("--slack", type=float, default=1e-3)

    p = sub.add_parser("construct", parents=[common], help="explicit near-extremal metric")
    _add_construction(p)
    p.add_argument("--delta", type=float, default=0.02)

    p = sub.add_parser("sweep", parents=[common], help="construction over several delta")
    _add_construction(p)
    p.add_argument("--deltas", default="0.04,0.02,0.01")

    p = sub.add_parser("converge", parents=[common], help="sequence diagnostics along a sweep")
    _add_construction(p)
    p.add_argument("--deltas", default="0.04,0.02,0.01")
    p.add_argument("--half-width", type=float, default=4.0)
    p.add_argument("--spacing", type=float, default=1.0 / 64)
    p.add_argument("--slack", type=float, default=1e-3)
    parser.commands = sub.choices
    return parser


def _parse(parser, argv):
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        raise UsageError("a subcommand is required")
    if args.config:
        doc = load_config(args.config)
        sub = parser.commands[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(doc) - known - {"command"})
        if unknown:
            raise UsageError(f"unknown keys in {args.config}: {', '.join(unknown)}")
        sub.set_defaults(**{k: v for k, v in doc.items() if k != "command"})
        args = parser.parse_args(argv)
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    return args


def _resolved(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("verbose",)}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _parse(parser, argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse usage errors
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = args.out or os.path.join("runs", args.command)
    os.makedirs(out, exist_ok=True)
    outputs = []
    try:
        status, outputs, _ = COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = EXIT_USAGE
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        # numerical checks that could not be completed count as failed checks
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        status = EXIT_CHECK
    cio.write_manifest(out, args.command, _resolved(args), outputs, status)
    return status


if __name__ == "__main__":
    sys.exit(main())
