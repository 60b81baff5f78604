"""Diagnostics for near-extremal sequences: normalization, defect integrals,
component analysis, profile distance to the glued-football limit and the
Dirichlet-disk level-set bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import brentq

from .factors import (ConformalFactor, GluedFootball, PinchingReport, add_constant,
                      curvature_samples, pinching_ratio, rescale)
from .levelset import (LevelSetError, LevelSetProfile, LimitProfile, RasterLevelSets, RasterSpec,
                       grid_profile, radial_profile, t_grid)
from .quadrature import QuadratureSpec


class ConvergenceError(RuntimeError):
    pass


def default_t0(alpha: float) -> float:
    return math.log(alpha + 1.0) + 0.1


@dataclass
class Normalization:
    """Result of ``normalize``: g(z) = f(lam (z - k)) + ln lam + shift."""

    factor: ConformalFactor
    lam: float
    k: complex
    shift: float
    t_star: float  # level where the unnormalized A equals 2 pi (alpha + 1), after the shift
    t0: float
    residual_A: float
    residual_centroid: float

    def to_dict(self):
        return {"lambda": self.lam, "k": [self.k.real, self.k.imag], "shift": self.shift,
                "t_star": self.t_star, "t0": self.t0, "residual_A": self.residual_A,
                "residual_centroid": self.residual_centroid}


def _kmax(f: ConformalFactor) -> float:
    if isinstance(f, GluedFootball):
        return max(f.inner_curvature(), f.outer_curvature())
    _, K = curvature_samples(f)
    return float(np.max(K))


def _bracket_root(g, lo, hi, grow=0.5, tries=40):
    glo, ghi = g(lo), g(hi)
    for _ in range(tries):
        if glo * ghi <= 0:
            return brentq(g, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=200)
        lo, hi = lo - grow, hi + grow
        glo, ghi = g(lo), g(hi)
    raise ConvergenceError("A never attains 2 pi (alpha + 1)")


def normalize(f: ConformalFactor, alpha: float, t0: float | None = None,
              unit_kmax: bool = True, raster: RasterSpec | None = None,
              quad: QuadratureSpec | None = None) -> Normalization:
    """Rescale so that A(ln(alpha+1)) = 2 pi (alpha+1) and Omega(t0) has centroid 0.

    With ``unit_kmax`` a constant is first added so that max K = 1.  Scaling is
    fixed by root-finding on the monotone map t -> A(t), then the translation
    moves the centroid of the (rescaled) level set at t0 to the origin.
    Closed-form radial factors take an exact path; others are rasterized once.
    """
    t0 = default_t0(alpha) if t0 is None else float(t0)
    target = 2 * math.pi * (alpha + 1.0)
    shift = 0.5 * math.log(_kmax(f)) if unit_kmax else 0.0
    g = add_constant(f, shift) if shift != 0.0 else f
    tl = math.log(alpha + 1.0)
    if isinstance(g, GluedFootball):
        def A(t):
            return float(radial_profile(g, [t]).A[0])
        t_star = _bracket_root(lambda t: A(t) - target, tl - 1.0, tl + 1.0)
        lam = math.exp(tl - t_star)
        # radial about its center, so every level set has its centroid there
        k = -complex(g.center) / lam
        out = rescale(g, lam, k)
        resA = abs(float(radial_profile(out, [tl]).A[0]) - target)
        return Normalization(out, lam, k, shift, t_star, t0, resA, abs(complex(out.center)))
    lv = RasterLevelSets(g, raster, quad)

    def F(t):
        return lv.mass(t) - target

    t_star = _bracket_root(F, tl - 1.0, tl + 1.0)
    lam = math.exp(tl - t_star)
    # centroid of Omega_g(t0 - ln lam), mapped by z -> z / lam then shifted by k
    c = lv.centroid(t0 - math.log(lam))
    k = -c / lam
    out = rescale(g, lam, k)
    return Normalization(out, lam, complex(k), shift, t_star, t0, abs(F(t_star)), 0.0)


# ---------------------------------------------------------------------------
# profile diagnostics


def _tail(t, y, end: str, n_fit: int = 5):
    """Geometric tail beyond the sampled range for a decaying integrand y(t)."""
    order = np.argsort(t)
    t, y = t[order], y[order]
    if end == "hi":
        tt, yy = t[-n_fit:], y[-n_fit:]
    else:
        tt, yy = t[:n_fit], y[:n_fit]
    ay = np.abs(yy)
    if not np.any(ay > 0):
        return 0.0, True
    edge = float(ay[-1] if end == "hi" else ay[0])
    pos = ay > 0
    if pos.sum() < 2:
        return edge * (tt[-1] - tt[0] if len(tt) > 1 else 1.0), False
    slope = np.polyfit(tt[pos], np.log(ay[pos]), 1)[0]
    rate = -slope if end == "hi" else slope
    if rate <= 0:
        return edge * (float(tt[-1] - tt[0]) or 1.0), False
    return edge / rate, True


@dataclass
class DefectIntegral:
    value: float
    sampled: float
    tail_lo: float
    tail_hi: float
    noise: float
    resolved: bool

    def to_dict(self):
        return {"value": self.value, "sampled": self.sampled, "tail_lo": self.tail_lo,
                "tail_hi": self.tail_hi, "noise": self.noise, "resolved": self.resolved}


def defect_integral(p: LevelSetProfile, tail_tol: float | None = None,
                    strict: bool = False) -> DefectIntegral:
    """Trapezoid integral of e^{2t} (L^2 - 4 pi B) plus geometric tail estimates.

    The tail at each end extrapolates the decay of |e^{2t} D| over the last
    samples.  ``strict`` raises when a tail is not decaying and exceeds
    ``tail_tol`` (default: the contouring noise of the sampled integral).
    """
    order = np.argsort(p.t)
    t = p.t[order]
    y = np.exp(2 * t) * p.defect[order]
    ye = np.exp(2 * t) * p.defect_err[order]
    sampled = float(trapezoid(y, t))
    noise = float(trapezoid(ye, t))
    # below the noise floor the integrand carries no tail information
    yt = np.where(np.abs(y) > ye, y, 0.0)
    lo, ok_lo = _tail(t, yt, "lo")
    hi, ok_hi = _tail(t, yt, "hi")
    tol = noise if tail_tol is None else tail_tol
    resolved = (ok_lo or lo <= tol) and (ok_hi or hi <= tol)
    if strict and not resolved:
        raise ConvergenceError("defect integrand tails are unresolved; widen the t range")
    return DefectIntegral(sampled + lo + hi, sampled, lo, hi, noise, bool(resolved))


@dataclass
class ComponentAnalysis:
    t: np.ndarray
    largest: np.ndarray
    count: np.ndarray
    ratio: np.ndarray

    @property
    def min_ratio(self) -> float:
        ok = np.isfinite(self.ratio)
        return float(np.min(self.ratio[ok])) if ok.any() else float("nan")

    @property
    def ratio_defect(self) -> float:
        return 1.0 - self.min_ratio

    def to_dict(self):
        return {"t": self.t, "largest": self.largest, "count": self.count, "ratio": self.ratio,
                "min_ratio": self.min_ratio}


def component_analysis(p: LevelSetProfile) -> ComponentAnalysis:
    """Largest-component area M(t), component count and M(t)/B(t)."""
    if not np.any(p.B > 0):
        raise LevelSetError("every sampled level set is empty")
    return ComponentAnalysis(p.t.copy(), p.largest.copy(), p.n_components.copy(),
                             p.component_ratio)


def profile_distance(p: LevelSetProfile, limit: LimitProfile) -> float:
    """Relative sup distance of (A, B) to the limit profile on the sampled t.

    A proxy for profile convergence; it is not a Gromov-Hausdorff distance.
    """
    if len(p.t) == 0:
        raise LevelSetError("empty profile")
    q = limit.profile(p.t)
    dA = np.abs(p.A - q.A) / (1 + np.abs(q.A))
    dB = np.abs(p.B - q.B) / (1 + np.abs(q.B))
    return float(np.max(dA + dB))


# ---------------------------------------------------------------------------
# Dirichlet-disk bounds


def lemma_technical_check(sol, a: float | None = None, b: float | None = None, ts=None,
                          slack: float = 1e-3, refine: int = 4) -> dict:
    """Lower bounds on A(t), B(t) for a Dirichlet solution with a <= K <= b.

    A(t) >= (4 a pi / b)(1 - e^{t-H}) for s <= t <= H, and
    B(t) >= (4 a pi / b^2)(e^{-t-H} - e^{-2H}) wherever A(t) >= 2 a pi / b.
    """
    a = sol.a if a is None else float(a)
    b = sol.b if b is None else float(b)
    H = sol.H
    if ts is None:
        ts = np.linspace(sol.s, H, 161)[:-1]
    ts = np.asarray(ts, dtype=float)
    A, B = sol.level_functionals(ts, refine=refine)
    lowA = 4 * a * math.pi / b * (1 - np.exp(ts - H))
    lowB = 4 * a * math.pi / b ** 2 * (np.exp(-ts - H) - np.exp(-2 * H))
    mA = A - lowA
    where_B = A >= 2 * a * math.pi / b
    mB = np.where(where_B, B - lowB, np.nan)
    worstA = float(np.min(mA))
    worstB = float(np.nanmin(mB)) if where_B.any() else float("nan")
    ok_B = (not where_B.any()) or worstB >= -slack
    return {"H": H, "s": sol.s, "a": a, "b": b, "n_levels": int(len(ts)),
            "A_margin_min": worstA, "B_margin_min": worstB,
            "B_levels_checked": int(where_B.sum()), "slack": slack,
            "A_pass": bool(worstA >= -slack), "B_pass": bool(ok_B),
            "pass": bool(worstA >= -slack and ok_B)}


# ---------------------------------------------------------------------------
# sequences


@dataclass
class SequenceMember:
    param: float
    factor: ConformalFactor  # normalized
    report: PinchingReport
    profile: LevelSetProfile
    normalization: Normalization
    defect: DefectIntegral
    distance: float
    components: ComponentAnalysis
    positions: list

    def row(self):
        return {"param": self.param, "rho": self.report.rho, "gap": self.report.rho0 - self.report.rho,
                "defect_integral": self.defect.value, "profile_distance": self.distance,
                "component_ratio_defect": self.components.ratio_defect}


@dataclass
class SequenceRun:
    alpha: float
    beta1: float
    members: list = field(default_factory=list)

    @property
    def limit(self) -> LimitProfile:
        return LimitProfile(self.alpha, self.beta1)

    def trends(self, slack: float = 1e-3) -> dict:
        """Non-increase checks along the member order (slack absolute)."""
        out = {}
        for name, get in (("defect_integral", lambda m: m.defect.value),
                          ("profile_distance", lambda m: m.distance),
                          ("component_ratio_defect", lambda m: m.components.ratio_defect)):
            v = [get(m) for m in self.members]
            worst = max((y - x for x, y in zip(v, v[1:])), default=0.0)
            out[name] = {"values": v, "worst_increase": worst, "pass": bool(worst <= slack)}
        spreads = [row["spread"] for row in merging_tracker(self)]
        worst = max((y - x for x, y in zip(spreads, spreads[1:])), default=0.0)
        out["spread"] = {"values": spreads, "worst_increase": worst, "pass": bool(worst <= 0.0)}
        return out


def analyze_member(f: ConformalFactor, alpha: float, beta1: float, param: float,
                   ts=None, raster: RasterSpec | None = None, quad: QuadratureSpec | None = None,
                   report: PinchingReport | None = None) -> SequenceMember:
    """Normalize one factor and measure its profile diagnostics."""
    report = report or pinching_ratio(f)
    norm = normalize(f, alpha, raster=raster, quad=quad)
    g = norm.factor
    lim = LimitProfile(alpha, beta1)
    if ts is None:
        tl = lim.seam_level
        ts = t_grid(tl - 1.0, tl + 1.5, 0.05)
    if isinstance(g, GluedFootball):
        prof = radial_profile(g, ts)
    else:
        prof = grid_profile(g, ts, raster, quad)
    positions = [complex(p.position) for p in g.divisor.finite_points]
    return SequenceMember(float(param), g, report, prof, norm, defect_integral(prof),
                          profile_distance(prof, lim), component_analysis(prof), positions)


def merging_tracker(run: SequenceRun) -> list:
    """Per member: the beta_1 point (None at infinity), the other points and their spread."""
    rows = []
    for m in run.members:
        d = m.factor.divisor
        p1 = d.points[0]
        rest = [complex(p.position) for p in d.points[1:] if not p.infinite]
        spread = max((abs(x - y) for x in rest for y in rest), default=0.0)
        rows.append({"param": m.param,
                     "beta1_point": None if p1.infinite else complex(p1.position),
                     "others": rest, "spread": float(spread)})
    return rows


def sequence_rows(run: SequenceRun) -> list:
    """CSV rows {param, rho, gap, defect_integral, profile_distance, spread}."""
    spreads = {r["param"]: r["spread"] for r in merging_tracker(run)}
    out = []
    for m in run.members:
        r = m.row()
        out.append([r["param"], r["rho"], r["gap"], r["defect_integral"],
                    r["profile_distance"], spreads[m.param]])
    return out


SEQUENCE_CSV_HEADER = ["param", "rho", "gap", "defect_integral", "profile_distance", "spread"]
