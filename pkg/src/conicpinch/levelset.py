"""Level-set functionals of a conformal factor and the inequalities they obey.

For Omega(t) = {u >= t}: A(t) is the curvature mass of Omega(t), B(t) its area,
L(t) its boundary length and D(t) = L^2 - 4 pi B the isoperimetric defect.
Radial factors use root-finding plus exact antiderivatives; general factors are
contoured on a Cartesian raster with marching squares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.optimize import brentq

from . import kernels
from .factors import ConformalFactor, GluedFootball
from .quadrature import QuadratureResult, QuadratureSpec, integrate_density

CSV_HEADER = ["t", "A", "B", "L", "defect", "n_components", "largest_component_area"]


class LevelSetError(ValueError):
    pass


@dataclass
class LevelSetProfile:
    """Sampled level-set functionals on a descending t grid.

    ``*_err`` arrays are per-sample error bars from the discretization model;
    ``flux`` is the integral of |grad u| over the reconstructed interface.
    """

    t: np.ndarray
    A: np.ndarray
    B: np.ndarray
    L: np.ndarray
    dA: np.ndarray
    dB: np.ndarray
    n_components: np.ndarray
    largest: np.ndarray
    flux: np.ndarray
    A_err: np.ndarray
    B_err: np.ndarray
    L_err: np.ndarray
    dA_err: np.ndarray
    dB_err: np.ndarray
    total_mass: float
    method: str
    meta: dict = field(default_factory=dict)

    @property
    def defect(self) -> np.ndarray:
        return self.L ** 2 - 4 * math.pi * self.B

    @property
    def defect_err(self) -> np.ndarray:
        return 2 * self.L * self.L_err + 4 * math.pi * self.B_err

    @property
    def component_ratio(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.B > 0, self.largest / self.B, np.nan)

    def rows(self):
        d = self.defect
        for i in range(len(self.t)):
            yield [self.t[i], self.A[i], self.B[i], self.L[i], d[i], int(self.n_components[i]),
                   self.largest[i]]

    def write_csv(self, path):
        from .io import write_csv
        return write_csv(path, CSV_HEADER, self.rows())

    def check_monotone(self) -> dict:
        """A and B nonincreasing as t increases, within their error bars."""
        order = np.argsort(self.t)
        out = {}
        for name, x, e in (("A", self.A, self.A_err), ("B", self.B, self.B_err)):
            xs, es = x[order], e[order]
            worst = float(np.max(np.diff(xs) - (es[1:] + es[:-1]))) if len(xs) > 1 else -1.0
            out[name] = {"worst_increase": worst, "pass": bool(worst <= 1e-12)}
        return out

    def to_dict(self):
        return {"method": self.method, "total_mass": self.total_mass, "meta": self.meta,
                "t": self.t, "A": self.A, "B": self.B, "L": self.L, "defect": self.defect,
                "n_components": self.n_components, "largest_component_area": self.largest}


def t_grid(t_min: float, t_max: float, step: float = 0.02) -> np.ndarray:
    """Uniform descending grid from t_max to t_min."""
    n = int(round((t_max - t_min) / step))
    return t_max - step * np.arange(n + 1)


def _centered(t, x, x_err):
    """Centered differences on a uniform grid with a three-point error model."""
    n = len(t)
    d = np.full(n, np.nan)
    e = np.full(n, np.nan)
    if n < 3:
        return d, e
    h = t[2:] - t[:-2]
    d[1:-1] = (x[2:] - x[:-2]) / h
    # truncation ~ |second difference| / step, plus value noise over the stencil
    step = 0.5 * np.abs(h)
    e[1:-1] = np.abs(x[2:] - 2 * x[1:-1] + x[:-2]) / step + (x_err[2:] + x_err[:-2]) / np.abs(h)
    return d, e


# ---------------------------------------------------------------------------
# radial factors


def _branch_mass(X, a):
    """2 pi int_0^X of the branch density in the scaled variable: 2 pi m X^m/(1+X^m)."""
    m = 2.0 + 2.0 * a
    with np.errstate(over="ignore"):
        Xm = np.asarray(X, dtype=float) ** m
    frac = np.where(np.isinf(Xm), 1.0, Xm / (1.0 + np.where(np.isinf(Xm), 0.0, Xm)))
    return 2 * math.pi * m * frac


def radial_mass(f: GluedFootball, r):
    """Exact curvature mass of the disk |z - center| < r for a glued football."""
    X = f.scale * np.asarray(r, dtype=float)
    inner = _branch_mass(np.minimum(X, 1.0), f.alpha)
    outer = _branch_mass(X, f.beta) - _branch_mass(1.0, f.beta)
    return np.where(X <= 1.0, inner, inner + outer)


def _radial_root(f, t, r_lo=1e-150, r_hi=1e150):
    g = lambda lr: float(f.radial_u(math.exp(lr))) - t  # noqa: E731
    lo, hi = math.log(r_lo), math.log(r_hi)
    glo = g(lo)
    if glo < 0:
        return 0.0  # t above the maximum at the center
    if g(hi) > 0:
        raise LevelSetError(f"level t={t} not bracketed in [r_lo, r_hi]")
    return math.exp(brentq(g, lo, hi, xtol=1e-14, maxiter=400))


def radial_profile(f: ConformalFactor, ts, check_samples: int = 2001) -> LevelSetProfile:
    """Exact level-set functionals of a radial glued football (any scale/shift)."""
    if not isinstance(f, GluedFootball):
        raise LevelSetError("radial_profile needs a closed-form radial factor")
    ts = np.asarray(ts, dtype=float)
    rr = np.logspace(-8, 8, check_samples) / f.scale
    uu = f.radial_u(rr)
    if np.any(np.diff(uu) > 1e-14 * (1 + np.abs(uu[1:]))):
        raise LevelSetError("u is not decreasing in r")
    r = np.array([_radial_root(f, t) for t in ts])
    A = radial_mass(f, r)
    B = math.pi * r ** 2
    L = 2 * math.pi * r
    with np.errstate(divide="ignore", invalid="ignore"):
        du = f.radial_du(r)
        dens = f.radial_curvature(r) * np.exp(2 * f.radial_u(r))
        dA = np.where(r > 0, 2 * math.pi * r * dens / du, 0.0)
        dB = np.where(r > 0, 2 * math.pi * r / du, 0.0)
        flux = np.where(r > 0, 2 * math.pi * r * np.abs(du), 0.0)
    z = np.zeros_like(ts)
    eps = 1e-12 * (1.0 + np.abs(A))
    return LevelSetProfile(ts, A, B, L, dA, dB, np.where(r > 0, 1, 0), B.copy(), flux,
                           eps, 1e-12 * (1 + B), 1e-12 * (1 + L), z + 1e-9, z + 1e-9,
                           f.total_mass(), "radial", {"family": f.describe()})


# ---------------------------------------------------------------------------
# rasterized factors


@dataclass(frozen=True)
class RasterSpec:
    half_width: float = 4.0
    spacing: float = 1.0 / 64
    center: complex = 0j

    @property
    def n(self) -> int:
        return int(round(2 * self.half_width / self.spacing)) + 1

    @property
    def extent(self) -> float:
        """Half width actually covered by the nodes."""
        return 0.5 * (self.n - 1) * self.spacing

    def nodes(self):
        off = -self.extent + self.spacing * np.arange(self.n)
        c = complex(self.center)
        return (c.real + off)[None, :] + 1j * (c.imag + off)[:, None]

    def to_dict(self):
        c = complex(self.center)
        return {"half_width": self.half_width, "spacing": self.spacing, "center": [c.real, c.imag]}


def _corner_mass(f, c, hw, n=16, panels=32):
    """Curvature mass of the square [-hw, hw]^2 minus its inscribed disk (about c)."""
    xg, wg = np.polynomial.legendre.leggauss(n)
    edges = np.linspace(-math.pi / 4, 7 * math.pi / 4, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    th = (0.5 * (a + b) + 0.5 * (b - a) * xg).ravel()
    wt = (0.5 * (b - a) * wg).ravel()
    rmax = hw / np.maximum(np.abs(np.cos(th)), np.abs(np.sin(th)))
    r = hw + 0.5 * (rmax - hw)[:, None] * (1 + xg[None, :])
    wr = 0.5 * (rmax - hw)[:, None] * wg[None, :]
    Z = c + r * np.exp(1j * th[:, None])
    vals = np.nan_to_num(f.density(Z))
    return float(np.sum(np.sum(vals * r * wr, axis=1) * wt))


def _singular_mask(f, Z, spacing):
    m = np.zeros(Z.shape, dtype=bool)
    for p in f.singular_positions():
        m |= np.abs(Z - p) < 0.5 * spacing
    return m


class RasterLevelSets:
    """Node values of u and of the curvature density on a raster, with per-level
    cell fractions, masses and centroids.  Shared by profile and normalization code.
    """

    def __init__(self, f: ConformalFactor, raster: RasterSpec | None = None,
                 quad: QuadratureSpec | None = None):
        self.f = f
        self.raster = raster = raster or RasterSpec()
        h = self.h = raster.spacing
        self.Z = Z = raster.nodes()
        with np.errstate(divide="ignore", invalid="ignore"):
            U = np.asarray(f.u(Z), dtype=float)
        sing = _singular_mask(f, Z, h) | ~np.isfinite(U)
        self.U = np.where(sing, 1e6, U)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            rho = np.asarray(f.density(Z), dtype=float)
        rho = np.where(sing | ~np.isfinite(rho), 0.0, rho)
        self.rho_corners = (rho[:-1, :-1], rho[:-1, 1:], rho[1:, 1:], rho[1:, :-1])
        self.U_corners = (self.U[:-1, :-1], self.U[:-1, 1:], self.U[1:, 1:], self.U[1:, :-1])
        self.cell_mass = 0.25 * sum(self.rho_corners) * h * h
        self._refine_seam_cells(sing)
        c = self.center = complex(raster.center)
        hw = raster.extent
        # total minus the smooth exterior: seams stay on panels centered on them
        self.total = integrate_density(f, "curvature", quad)
        outer = integrate_density(f, "curvature", quad, annulus=(hw, math.inf), center=c)
        self.inside = QuadratureResult(self.total.value - outer.value,
                                       self.total.error_estimate + outer.error_estimate,
                                       "curvature", {"total": self.total.value,
                                                     "exterior": outer.value})
        self.raster_mass = self.inside.value + _corner_mass(f, c, hw)
        self._quad = quad
        self.frame_max = float(np.max(np.concatenate(
            [self.U[0], self.U[-1], self.U[:, 0], self.U[:, -1]])))
        self.origin = (c.real - hw, c.imag - hw)

    def _refine_seam_cells(self, sing, m=16):
        """Midpoint rule on m x m subcells for cells crossed by a seam circle,
        where the density jumps and corner averaging is only first order."""
        self._seam_cells = None
        seams = self.f.seams()
        if not seams:
            return
        h = self.h
        Zc = self.Z[:-1, :-1] + 0.5 * h * (1 + 1j)
        near = np.zeros(Zc.shape, dtype=bool)
        for c, r in seams:
            near |= np.abs(np.abs(Zc - c) - r) < h
        near &= ~(sing[:-1, :-1] | sing[:-1, 1:] | sing[1:, 1:] | sing[1:, :-1])
        if not near.any():
            return
        off = (np.arange(m) + 0.5) / m - 0.5
        sub = (off[None, :] + 1j * off[:, None]).ravel() * h
        pts = Zc[near][:, None] + sub[None, :]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            rho = np.nan_to_num(np.asarray(self.f.density(pts), dtype=float))
            Usub = np.asarray(self.f.u(pts), dtype=float)
        self.cell_mass = self.cell_mass.copy()
        self.cell_mass[near] = rho.mean(axis=1) * h * h
        self._seam_cells = (near, rho * (h * h / m ** 2), Usub)

    def check_level(self, t):
        if self.frame_max >= t:
            raise LevelSetError(f"level t={t:.4g} touches the raster boundary; enlarge the raster")

    def cells(self, t):
        return kernels.level_set_cells(self.U, t)

    def mass(self, t, frac=None) -> float:
        """A(t) = raster mass minus the mass of the complement inside the raster."""
        if frac is None:
            frac, _ = self.cells(t)
        # complement mass of cut cells uses the density at corners below t, which
        # keeps the estimate second order even when a density jump follows the level set
        below = [Uc < t for Uc in self.U_corners]
        nb = sum(b_.astype(float) for b_ in below)
        rb = sum(b_ * r_ for b_, r_ in zip(below, self.rho_corners))
        with np.errstate(invalid="ignore", divide="ignore"):
            cut_density = np.where(nb > 0, rb / np.maximum(nb, 1.0), 0.0) * self.h ** 2
        comp = (1.0 - frac) * np.where((frac > 0) & (frac < 1), cut_density, self.cell_mass)
        if self._seam_cells is not None:
            near, w, Usub = self._seam_cells
            comp[near] = np.sum(w * (Usub < t), axis=1)
        return self.raster_mass - float(np.sum(comp))

    def area(self, t, frac=None) -> float:
        if frac is None:
            frac, _ = self.cells(t)
        return float(np.sum(frac)) * self.h ** 2

    def centroid(self, t) -> complex:
        """Area centroid of {u >= t} from cell fractions at cell centers."""
        frac, _ = self.cells(t)
        tot = float(np.sum(frac))
        if tot <= 0:
            raise LevelSetError(f"empty level set at t={t:.4g}")
        Zc = 0.25 * (self.Z[:-1, :-1] + self.Z[:-1, 1:] + self.Z[1:, 1:] + self.Z[1:, :-1])
        return complex(np.sum(frac * Zc) / tot)


def grid_profile(f: ConformalFactor, ts, raster: RasterSpec | None = None,
                 quad: QuadratureSpec | None = None, check_boundary: bool = True,
                 levels: RasterLevelSets | None = None) -> LevelSetProfile:
    """Contour u on a Cartesian raster for every t.

    B sums marching-squares cell fractions, L the interface segment lengths and
    A = (raster mass) - sum over cells of (1 - fraction) x (cell mass), where the
    raster mass comes from singular quadrature so cone cells need no sampling.
    """
    lv = levels or RasterLevelSets(f, raster, quad)
    raster = lv.raster
    ts = np.asarray(ts, dtype=float)
    h = raster.spacing
    U, cell_mass, inside = lv.U, lv.cell_mass, lv.inside
    total = lv.total
    raster_mass = lv.raster_mass
    x0, y0 = lv.origin
    n = len(ts)
    A, B, L, flux = (np.zeros(n) for _ in range(4))
    ncomp, largest = np.zeros(n, dtype=int), np.zeros(n)
    A_err, B_err, L_err = np.zeros(n), np.zeros(n), np.zeros(n)
    structure = ndimage.generate_binary_structure(2, 1)
    for k, t in enumerate(ts):
        if check_boundary:
            lv.check_level(t)
        frac, seg = lv.cells(t)
        B[k] = lv.area(t, frac)
        A[k] = lv.mass(t, frac)
        if len(seg):
            dx = (seg[:, 2] - seg[:, 0]) * h
            dy = (seg[:, 3] - seg[:, 1]) * h
            ln = np.hypot(dx, dy)
            L[k] = float(np.sum(ln))
            mid = (x0 + 0.5 * (seg[:, 0] + seg[:, 2]) * h) + 1j * (y0 + 0.5 * (seg[:, 1] + seg[:, 3]) * h)
            flux[k] = float(np.sum(np.abs(np.nan_to_num(f.grad(mid))) * ln))
        mask = U >= t
        lab, nlab = ndimage.label(mask, structure=structure)
        ncomp[k] = nlab
        if nlab:
            counts = np.bincount(lab.ravel())[1:]
            largest[k] = B[k] * float(counts.max()) / float(counts.sum())
        # discretization model: interface displacement O(h^2 |u''|/|u'|) per unit length
        # is dominated by the O(h) cell-fraction error on coarse rasters
        rho_if = float(np.max(cell_mass[(frac > 0) & (frac < 1)], initial=0.0)) / (h * h)
        B_err[k] = h * h * L[k] / 4 + h ** 2 * math.pi
        L_err[k] = h * h * L[k] + 0.08 * h * math.sqrt(max(ncomp[k], 1))
        A_err[k] = rho_if * B_err[k]
    # the raster-mass quadrature error is one constant offset: it cancels in differences
    dA, dA_err = _centered(ts, A, A_err)
    A_err = A_err + inside.error_estimate
    dB, dB_err = _centered(ts, B, B_err)
    meta = {"raster": raster.to_dict(), "raster_mass": raster_mass,
            "quadrature_error": inside.error_estimate + total.error_estimate}
    return LevelSetProfile(ts, A, B, L, dA, dB, ncomp, largest, flux, A_err, B_err, L_err,
                           dA_err, dB_err, total.value, "grid", meta)


# ---------------------------------------------------------------------------
# inequality checks


def _report(name, margins, slack, excluded, t):
    margins = np.asarray(margins, dtype=float)
    ok = np.isfinite(margins)
    worst = float(np.min(margins[ok] + slack[ok])) if ok.any() else float("nan")
    worst_raw = float(np.min(margins[ok])) if ok.any() else float("nan")
    idx = int(np.argmin(np.where(ok, margins + slack, np.inf))) if ok.any() else -1
    return {"check": name, "worst_margin": worst_raw, "worst_margin_with_slack": worst,
            "worst_t": float(t[idx]) if idx >= 0 else None, "n_checked": int(ok.sum()),
            "excluded_t": [float(x) for x in excluded], "pass": bool(ok.any() and worst >= 0.0)}


def verify_sandwich(p: LevelSetProfile, a: float, b: float, plateau_factor: float = 10.0) -> dict:
    """1/b <= e^{2t} B'/A' <= 1/a at every interior t, up to derivative slack."""
    if not (0 < a <= b):
        raise LevelSetError("need 0 < a <= b")
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.exp(2 * p.t) * p.dB / p.dA
        slack = np.abs(ratio) * (p.dB_err / np.abs(p.dB) + p.dA_err / np.abs(p.dA))
    plateau = ~(np.abs(p.dA) > plateau_factor * np.nan_to_num(p.dA_err, nan=np.inf))
    plateau |= ~np.isfinite(ratio)
    lo = np.where(plateau, np.nan, ratio - 1.0 / b)
    hi = np.where(plateau, np.nan, 1.0 / a - ratio)
    margins = np.fmin(lo, hi)
    rep = _report("sandwich", margins, slack, p.t[plateau & np.isfinite(p.dA)], p.t)
    rep.update({"a": a, "b": b, "ratio": np.where(plateau, np.nan, ratio).tolist(),
                "t": p.t.tolist()})
    return rep


def verify_isoperimetric_chain(p: LevelSetProfile, alpha: float, flux_rtol: float = 2e-2) -> dict:
    """4 pi B <= L^2 <= -B'(A - 2 pi alpha) and A = int |grad u| + 2 pi alpha.

    ``alpha`` is the sum of the cone orders inside Omega(t) (all finite points).
    """
    iso = p.L ** 2 - 4 * math.pi * p.B
    iso_slack = p.defect_err
    with np.errstate(invalid="ignore"):
        hold = -p.dB * (p.A - 2 * math.pi * alpha) - p.L ** 2
        hold_slack = (p.dB_err * np.abs(p.A - 2 * math.pi * alpha) + np.abs(p.dB) * p.A_err
                      + 2 * p.L * p.L_err)
    active = p.L > 0
    iso_rep = _report("isoperimetric", np.where(active, iso, np.nan), iso_slack, [], p.t)
    hold_rep = _report("hoelder", np.where(active, hold, np.nan), hold_slack, [], p.t)
    with np.errstate(invalid="ignore", divide="ignore"):
        resid = p.A - (p.flux + 2 * math.pi * alpha)
        scale = np.maximum(np.abs(p.A), 1.0)
    bnd_slack = flux_rtol * scale + p.A_err
    bnd = np.where(active, bnd_slack - np.abs(resid), np.nan)
    bnd_rep = _report("boundary_identity", bnd, np.zeros_like(bnd), [], p.t)
    bnd_rep["max_abs_residual"] = float(np.nanmax(np.where(active, np.abs(resid), np.nan))) \
        if active.any() else float("nan")
    return {"alpha": alpha, "isoperimetric": iso_rep, "hoelder": hold_rep,
            "boundary_identity": bnd_rep,
            "pass": bool(iso_rep["pass"] and hold_rep["pass"] and bnd_rep["pass"])}


def _G(A, alpha):
    return (1 + alpha) * A - A ** 2 / (4 * math.pi)


def integrated_inequality(p: LevelSetProfile, a: float, b: float, alpha: float,
                          degree: float | None = None) -> dict:
    """Two-branch differential bound on e^{2t}B and its integrated forms.

    With G(A) = (1 + alpha) A - A^2/(4 pi) and T* where A(T*) = 2 pi (1 + alpha):
    for t >= T*, e^{2t} B(t) >= G(A(t))/b; for t <= T*,
    e^{2t} B(t) <= (G(A(t)) - G(A_tot))/a.  Chaining the two at T* gives
    a/b <= ((A_tot - 2 pi (1 + alpha)) / (2 pi (1 + alpha)))^2, i.e.
    (2 + |D|)/(1 + alpha) >= 1 + sqrt(a/b).
    """
    A_star = 2 * math.pi * (1 + alpha)
    if not (np.nanmin(p.A) <= A_star <= np.nanmax(p.A)):
        raise LevelSetError("A(t) never crosses 2 pi (1 + alpha) in the sampled range")
    A_tot = p.total_mass if degree is None else 2 * math.pi * (2 + degree)
    Y = np.exp(2 * p.t) * p.B
    Y_err = np.exp(2 * p.t) * p.B_err
    G = _G(p.A, alpha)
    G_err = np.abs(1 + alpha - p.A / (2 * math.pi)) * p.A_err
    upper = p.A <= A_star  # branch with b (large t)
    m1 = np.where(upper, Y - G / b, np.nan)
    m2 = np.where(~upper, (G - _G(A_tot, alpha)) / a - Y, np.nan)
    slack = Y_err + G_err / a
    r1 = _report("upper_branch", m1, slack, [], p.t)
    r2 = _report("lower_branch", m2, slack, [], p.t)
    # pointwise differential form: d/dt[e^{2t}B] <= (1/c) d/dt G(A)
    dY = np.exp(2 * p.t) * (p.dB + 2 * p.B)
    dY_err = np.exp(2 * p.t) * (p.dB_err + 2 * p.B_err)
    dG = (1 + alpha - p.A / (2 * math.pi)) * p.dA
    dG_err = np.abs(1 + alpha - p.A / (2 * math.pi)) * p.dA_err + np.abs(p.dA) * p.A_err / (2 * math.pi)
    cinv = np.where(upper, 1.0 / b, 1.0 / a)
    m3 = cinv * dG - dY
    r3 = _report("differential", m3, dY_err + cinv * dG_err, [], p.t)
    X = A_tot / A_star
    lhs = X  # (2 + |D|)/(1 + alpha)
    rhs = 1.0 + math.sqrt(a / b)
    bound_ratio = (X - 1.0) ** 2
    return {"alpha": alpha, "a": a, "b": b, "A_total": A_tot,
            "upper_branch": r1, "lower_branch": r2, "differential": r3,
            "euler_ratio": lhs, "one_plus_sqrt_ratio": rhs,
            "relative_tightness": (lhs - rhs) / rhs,
            "implied_max_rho": bound_ratio, "chain_holds": bool(lhs >= rhs * (1 - 1e-9)),
            "pass": bool(r1["pass"] and r2["pass"] and r3["pass"] and lhs >= rhs * (1 - 1e-9))}


# ---------------------------------------------------------------------------
# limit profile


@dataclass(frozen=True)
class LimitProfile:
    """Level-set data of the normalized glued football (alpha, beta1).

    Inner curvature 1 for t >= ln(alpha + 1), rho0 outside.
    """

    alpha: float
    beta1: float

    def __post_init__(self):
        if not (-1.0 < self.beta1 <= self.alpha <= 0.0):
            raise LevelSetError("need -1 < beta1 <= alpha <= 0")

    @property
    def rho0(self) -> float:
        return (1 + self.beta1) ** 2 / (1 + self.alpha) ** 2

    @property
    def seam_level(self) -> float:
        return math.log(1 + self.alpha)

    @property
    def factor(self) -> GluedFootball:
        return GluedFootball(self.alpha, self.beta1, True)

    def profile(self, ts) -> LevelSetProfile:
        return radial_profile(self.factor, ts)

    def A(self, ts):
        return self.profile(np.atleast_1d(ts)).A

    def B(self, ts):
        return self.profile(np.atleast_1d(ts)).B

    def variant_system(self, A, t):
        """e^{2t}B(A) with the inner quadratic term divided by 4 rho0^2 pi (two branches)."""
        r0, al = self.rho0, self.alpha
        A = np.asarray(A, dtype=float)
        inner = -A ** 2 / (4 * r0 ** 2 * math.pi) + (1 + al) / r0 * A
        outer = -A ** 2 / (4 * r0 * math.pi) + (1 + al) / r0 * A - math.pi * (1 + al) ** 2 * (1 / r0 - 1)
        return np.where(np.asarray(t) >= self.seam_level, inner, outer)

    def derived_system(self, A, t):
        """Equality case of the two-branch bound with b = 1, a = rho0."""
        r0, al = self.rho0, self.alpha
        A = np.asarray(A, dtype=float)
        inner = (1 + al) * A - A ** 2 / (4 * math.pi)
        outer = -A ** 2 / (4 * r0 * math.pi) + (1 + al) / r0 * A - math.pi * (1 + al) ** 2 * (1 / r0 - 1)
        return np.where(np.asarray(t) >= self.seam_level, inner, outer)

    def discrepancy_report(self, ts=None) -> dict:
        """Compare the variant and derived e^{2t}B(A) relations with the radial oracle."""
        if ts is None:
            ts = t_grid(self.seam_level - 3.0, self.seam_level + 3.0, 0.05)
        p = self.profile(ts)
        Y = np.exp(2 * p.t) * p.B
        inner = p.t >= self.seam_level
        out = {"alpha": self.alpha, "beta1": self.beta1, "rho0": self.rho0}
        for name, fn in (("variant", self.variant_system), ("derived", self.derived_system)):
            err = np.abs(fn(p.A, p.t) - Y)
            out[name] = {"max_error_inner": float(np.max(err[inner], initial=0.0)),
                         "max_error_outer": float(np.max(err[~inner], initial=0.0))}
        # 4 pi B = -B'(A - 2 pi alpha) on both branches
        with np.errstate(invalid="ignore"):
            ode = 4 * math.pi * p.B + p.dB * (p.A - 2 * math.pi * self.alpha)
        out["ode_max_residual"] = float(np.nanmax(np.abs(ode)))
        out["variant_matches_oracle"] = bool(max(out["variant"].values()) < 1e-8)
        return out

    def to_dict(self):
        return {"alpha": self.alpha, "beta1": self.beta1, "rho0": self.rho0,
                "seam_level": self.seam_level}


def limit_profile(alpha: float, beta1: float) -> LimitProfile:
    return LimitProfile(float(alpha), float(beta1))
