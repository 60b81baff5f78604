"""Explicit near-extremal metrics: glue, mollify across the seam, blend back.

u0 glues an inner constant-curvature factor (|z| < 1) to the unnormalized
football of the smallest order (|z| >= 1).  u1 convolves u0 with the radial
kernel phi_delta on a Cartesian band grid, and u2 = chi u1 + (1 - chi) u0 with a
radial cutoff chi equal to 1 on 3/4 <= |z| <= 5/4 and 0 off 5/8 < |z| < 11/8.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage
from scipy.integrate import quad, trapezoid
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq
from scipy.signal import fftconvolve

from . import kernels
from .divisor import SUPERCRITICAL, ConePoint, ConicDivisor, classify, rho0
from .factors import (ConformalFactor, GluedFootball, LogPolarGridFactor, PinchingReport,
                      _asz)
from .solver import SolverConfig, continuation_family

logger = logging.getLogger(__name__)

R1 = (0.75, 1.25)  # chi = 1
R2 = (0.625, 1.375)  # chi = 0 for |z| < 5/8 or |z| > 11/8
ROUNDOFF_CAP = 1e-6  # node curvature samples noisier than this are dropped


class ConstructionError(RuntimeError):
    pass


def matching_j(delta: float) -> int:
    """Continuation index paired with a mollification radius: j = log2(0.16/delta)."""
    return max(1, int(round(math.log2(0.16 / delta))))


@dataclass(frozen=True)
class ConstructionConfig:
    divisor: ConicDivisor
    delta: float = 0.02
    j: int | None = None  # default matching_j(delta)
    eps_prime: float | None = None  # default delta^3
    alpha_gap: float = 0.1  # alpha_j = alpha + alpha_gap * 2^{-j}
    n_modes: int = 16  # Fourier modes in the seam correction
    seam_correction: bool = True
    cells_per_delta: int = 8
    cutoff_smoothing: float = 1.0 / 64
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(ds=1.0 / 16, n_theta=128))
    eps_target: float = 0.05

    def __post_init__(self):
        if not (0.0 < self.delta < 0.125):
            raise ConstructionError("delta must lie in (0, 1/8)")
        if self.cells_per_delta < 8:
            raise ConstructionError("need at least 8 grid cells across delta")
        if not (0.0 < self.cutoff_smoothing < 1.0 / 32):
            raise ConstructionError("cutoff smoothing must lie in (0, 1/32)")
        d = self.divisor
        if classify(d).label != SUPERCRITICAL:
            raise ConstructionError(f"divisor is {classify(d).label}; the construction needs a "
                                    "supercritical divisor")
        inf = d.infinite_point
        if inf is None or inf.beta != d.beta1:
            raise ConstructionError("the smallest order must sit at infinity")

    @property
    def j_eff(self) -> int:
        return matching_j(self.delta) if self.j is None else int(self.j)

    @property
    def eps_prime_eff(self) -> float:
        return self.delta ** 3 if self.eps_prime is None else float(self.eps_prime)

    @property
    def alpha(self) -> float:
        return self.divisor.alpha

    @property
    def beta1(self) -> float:
        return self.divisor.beta1

    @property
    def alpha_j(self) -> float:
        return self.alpha + self.alpha_gap * 2.0 ** (-self.j_eff)

    def to_dict(self):
        return {"divisor": self.divisor.to_dict(), "delta": self.delta, "j": self.j_eff,
                "alpha_j": self.alpha_j, "eps_prime": self.eps_prime_eff,
                "alpha_gap": self.alpha_gap, "n_modes": self.n_modes,
                "seam_correction": self.seam_correction,
                "cells_per_delta": self.cells_per_delta,
                "cutoff_smoothing": self.cutoff_smoothing,
                "solver": {"ds": self.solver.ds, "n_theta": self.solver.n_theta,
                           "s_min": self.solver.s_min, "s_max": self.solver.s_max,
                           "tol": self.solver.tol},
                "bands": {"R1": list(R1), "R2": list(R2)}, "eps_target": self.eps_target}


@dataclass
class SeamDefect:
    D0: float
    D1: float
    D0_raw: float | None = None
    D1_raw: float | None = None

    def __post_init__(self):
        if self.D0 < 0 or self.D1 < 0:
            raise ValueError("seam defects are nonnegative")

    def to_dict(self):
        return {"D0": self.D0, "D1": self.D1, "D0_raw": self.D0_raw, "D1_raw": self.D1_raw}


# ---------------------------------------------------------------------------
# u0


class SeamCorrected(ConformalFactor):
    """base + eta with eta = sum_k a_k z^k + b_k |z|^2 z^k (real parts), k = 0..N.

    eta is smooth on the plane; it only acts inside the unit disk of a glued factor.
    """

    def __init__(self, base: ConformalFactor, a, b):
        self.base = base
        self.a = np.asarray(a, dtype=complex)
        self.b = np.asarray(b, dtype=complex)
        self.exclusion = base.exclusion

    @property
    def divisor(self):
        return self.base.divisor

    def seams(self):
        return self.base.seams()

    def eta(self, z):
        z = _asz(z)
        r2 = np.abs(z) ** 2
        out = np.zeros(z.shape)
        zk = np.ones(z.shape, dtype=complex)
        for k in range(len(self.a)):
            out += np.real((self.a[k] + self.b[k] * r2) * zk)
            zk = zk * z
        return out

    def eta_grad(self, z):
        z = _asz(z)
        r2 = np.abs(z) ** 2
        g = np.zeros(z.shape, dtype=complex)
        zk1 = np.zeros(z.shape, dtype=complex)  # z^{k-1}
        zk = np.ones(z.shape, dtype=complex)
        for k in range(len(self.a)):
            # f = (a + b |z|^2) z^k, Re f has gradient conj(2 d f/dz) + 2 b-part
            ak, bk = self.a[k], self.b[k]
            dfdz = (ak + bk * r2) * k * zk1 + bk * np.conj(z) * zk
            dfdzb = bk * z * zk
            g += np.conj(dfdz) + dfdzb
            zk1 = zk
            zk = zk * z
        return g

    def eta_laplacian(self, z):
        z = _asz(z)
        out = np.zeros(z.shape)
        zk = np.ones(z.shape, dtype=complex)
        for k in range(len(self.a)):
            out += np.real(4.0 * (k + 1) * self.b[k] * zk)
            zk = zk * z
        return out

    def u(self, z):
        return self.base.u(z) + self.eta(z)

    def grad(self, z):
        return self.base.grad(z) + self.eta_grad(z)

    def laplacian(self, z):
        return self.base.laplacian(z) + self.eta_laplacian(z)

    def curvature(self, z, check: bool = True):
        z = _asz(z)
        kb = self.base.curvature(z, check=check)
        e = self.eta(z)
        return kb * np.exp(-2 * e) - np.exp(-2 * self.u(z)) * self.eta_laplacian(z)


def seam_coefficients(J0, J1, n_modes):
    """Coefficients (a_k, b_k) so that eta = J0 and d eta/dr = J1 on |z| = 1.

    J0, J1 are samples at theta_m = 2 pi m / M.  With eta_k(r) = a_k r^k +
    b_k (r^{k+2} - r^k): eta_k(1) = a_k and eta_k'(1) = k a_k + 2 b_k.
    """
    M = len(J0)
    F0 = np.fft.rfft(J0) / M
    F1 = np.fft.rfft(J1) / M
    n = min(n_modes, len(F0) - 1)
    a = np.zeros(n + 1, dtype=complex)
    b = np.zeros(n + 1, dtype=complex)
    for k in range(n + 1):
        w = 1.0 if k == 0 else 2.0  # real part of c z^k with c = 2 conj(F) reproduces F e^{ik} + c.c.
        A = w * np.conj(F0[k])
        B = w * np.conj(F1[k])
        # eta_k = Re[(alpha + beta r^2) z^k] with alpha = a - b, beta = b
        bk = (B - k * A) / 2.0
        a[k] = A - bk
        b[k] = bk
    return a, b


class GluedFactor(ConformalFactor):
    """inner(z) for |z| < 1, outer(z) for |z| >= 1."""

    def __init__(self, inner: ConformalFactor, outer: GluedFootball, divisor: ConicDivisor):
        self.inner = inner
        self.outer = outer
        self._divisor = divisor
        self.exclusion = inner.exclusion

    @property
    def divisor(self):
        return self._divisor

    def seams(self):
        return [(0j, 1.0)]

    def _split(self, z, fin, fout, dtype=float):
        z = _asz(z)
        inside = np.abs(z) < 1.0
        out = np.empty(z.shape, dtype=dtype)
        if inside.any():
            out[inside] = fin(z[inside])
        if (~inside).any():
            out[~inside] = fout(z[~inside])
        return out

    def u(self, z):
        return self._split(z, self.inner.u, self.outer.u)

    def grad(self, z):
        return self._split(z, self.inner.grad, self.outer.grad, complex)

    def laplacian(self, z):
        return self._split(z, self.inner.laplacian, self.outer.laplacian)

    def curvature(self, z, check: bool = True):
        return self._split(z, lambda w: self.inner.curvature(w, check=check),
                           lambda w: self.outer.curvature(w, check=False))

    def describe(self):
        return {"family": "glued", "divisor": self.divisor.to_dict()}


def normalize_inner(f: LogPolarGridFactor, alpha_limit: float):
    """Scale v -> v(lam z) + ln lam + c so the circle-mean radial derivative at |z| = 1
    is -1 and the circle mean of the value is 0.

    Matching derivatives (not values) is used because the circle-mean value is
    stationary in lam at the matching radius, which makes value matching a
    double root.  Returns (scaled factor, lam, c).
    """
    b_off = sum(p.beta for p in f.off_center_points())
    H = CubicSpline(f.s_grid, f.h.mean(axis=1))
    dH = H.derivative()
    # circle mean of r d/dr v at radius e^s (outside all off-center points) = b_off + mean h_s
    target = -1.0 - b_off
    s = f.s_grid
    r_pts = max([abs(p.position) for p in f.off_center_points()] + [0.0])
    g = dH(s) - target
    ok = s > math.log(max(r_pts, 1e-300)) + 0.5
    idx = np.where(ok[:-1] & (np.sign(g[:-1]) != np.sign(g[1:])))[0]
    if len(idx) == 0:
        raise ConstructionError("no radius where the circle-mean slope equals -1")
    i = idx[0]
    s_star = brentq(lambda x: float(dH(x)) - target, s[i], s[i + 1], xtol=1e-14)
    lam = math.exp(s_star)
    scaled = f.scaled(lam)
    th = 2 * math.pi * (np.arange(512) + 0.5) / 512
    c = -float(np.mean(scaled.u(np.exp(1j * th))))
    return scaled.scaled(1.0, c), lam, c


def _seam_samples(f_in, f_out, m=512):
    th = 2 * math.pi * np.arange(m) / m
    z = np.exp(1j * th)
    J0 = f_out.u(z) - f_in.u(z)
    g_in, g_out = f_in.grad(z), f_out.grad(z)
    J1 = np.real((g_out - g_in) * np.conj(z))  # radial derivative jump
    Dg = np.abs(g_out - g_in)
    return J0, J1, Dg


@dataclass
class U0Result:
    factor: GluedFactor
    defect: SeamDefect
    m: float
    M0: float
    M1: float
    inner_curvature: tuple
    outer_curvature: float
    lam: float = 1.0
    shift: float = 0.0
    solve_report: dict | None = None
    positions: list = field(default_factory=list)
    curvature_bounds: dict = field(default_factory=dict)

    def measured(self):
        return {"m": self.m, "M0": self.M0, "M1": self.M1}


def _u0_constants(u0: GluedFactor, n_r=600, n_t=256):
    th = 2 * math.pi * (np.arange(n_t) + 0.5) / n_t
    r = np.concatenate([np.linspace(0.5, 2.0, n_r), np.geomspace(2.0, 1e4, 200)[1:]])
    r = r[np.abs(r - 1.0) > 1e-9]
    Z = r[:, None] * np.exp(1j * th[None, :])
    U = u0.u(Z)
    G = np.abs(u0.grad(Z))
    near = (r >= 0.5) & (r <= 2.0)
    return float(U[near].min()), float(U.max()), float(G.max())


def build_u0(cfg: ConstructionConfig, family=None) -> U0Result:
    """Approximate factor u0 with its seam defects and constants m, M0, M1.

    ``family`` optionally supplies a precomputed (alpha_j, v_j, report) triple.
    """
    d = cfg.divisor
    b1, al = cfg.beta1, cfg.alpha
    outer = GluedFootball(b1, b1, normalized=False)
    if d.n <= 2:
        inner = GluedFootball(al, b1, normalized=False)
        u0 = GluedFactor(inner, outer, d)
        J0, J1, Dg = _seam_samples(inner, outer)
        defect = SeamDefect(float(np.max(np.abs(J0))), float(np.max(Dg)))
        m, M0, M1 = _u0_constants(u0)
        res = U0Result(u0, defect, m, M0, M1, ((1 + al) ** 2, (1 + al) ** 2), (1 + b1) ** 2)
    else:
        base = [p.beta for p in d.finite_points]
        pos = [p.position for p in d.finite_points]
        if family is None:
            family = continuation_family(base, [cfg.alpha_j], cfg.solver, positions=pos)[-1]
        a_j, v, rep = family
        vn, lam, c = normalize_inner(v, al)
        J0, J1, Dg = _seam_samples(vn, outer)
        raw = (float(np.max(np.abs(J0))), float(np.max(Dg)))
        inner = vn
        if cfg.seam_correction:
            a, b = seam_coefficients(J0, J1, cfg.n_modes)
            inner = SeamCorrected(vn, a, b)
            J0, J1, Dg = _seam_samples(inner, outer)
        defect = SeamDefect(float(np.max(np.abs(J0))), float(np.max(Dg)), raw[0], raw[1])
        target = ConicDivisor(tuple(vn.divisor.finite_points) + (ConePoint(None, b1),))
        u0 = GluedFactor(inner, outer, target)
        m, M0, M1 = _u0_constants(u0)
        Kin = (1 + a_j) ** 2 * math.exp(-2 * c)
        res = U0Result(u0, defect, m, M0, M1, (Kin, Kin), (1 + b1) ** 2, lam, c,
                       rep.to_dict(), [complex(p.position) for p in vn.divisor.finite_points])
        if any(abs(p) >= 0.5 for p in res.positions):
            raise ConstructionError("cone points of the normalized inner factor leave |z| < 1/2; "
                                    "increase j")
    # curvature bounds away from the seam and cone points
    Z, K = _u0_curvature_samples(res)
    lo, hi = (1 + b1) ** 2, (1 + al) ** 2
    res.curvature_bounds = {"k_min": float(K.min()), "k_max": float(K.max()),
                            "lower": lo, "upper": hi,
                            "lower_violation": float(max(0.0, lo - K.min())),
                            "upper_violation": float(max(0.0, K.max() - hi))}
    return res


def _inner_curvature_samples(inner, r_max, exclusion):
    """Curvature on the inner factor's own nodes (log-polar) or a polar sample."""
    base = inner.base if isinstance(inner, SeamCorrected) else inner
    if isinstance(base, LogPolarGridFactor):
        Z, K = base.node_curvature()
        Z, K = Z.ravel(), K.ravel()
        U = base.u(Z)
        # round-off in the 5-point stencil, amplified by e^{-2(u+s)} near a regular origin
        dth = 2 * math.pi / base.h.shape[1]
        noise = (4 * np.finfo(float).eps * np.maximum(np.abs(U), 1.0)
                 * (1 / base.ds ** 2 + 1 / dth ** 2) * np.exp(-2 * U) / np.abs(Z) ** 2)
        keep = (np.abs(Z) < r_max) & np.isfinite(K) & (noise < ROUNDOFF_CAP)
        for p in base.off_center_points():
            keep &= np.abs(Z - p.position) >= exclusion
        Z, K = Z[keep], K[keep]
        if isinstance(inner, SeamCorrected):
            e = inner.eta(Z)
            K = K * np.exp(-2 * e) - np.exp(-2 * inner.u(Z)) * inner.eta_laplacian(Z)
        return Z, K
    r = np.geomspace(1e-3, r_max, 300)
    th = 2 * math.pi * (np.arange(64) + 0.5) / 64
    Z = (r[:, None] * np.exp(1j * th[None, :])).ravel()
    return Z, inner.curvature(Z, check=False)


def _u0_curvature_samples(res: U0Result, exclusion=1e-3):
    Zi, Ki = _inner_curvature_samples(res.factor.inner, 1.0 - 1e-3, exclusion)
    return Zi, np.concatenate([Ki, [res.outer_curvature]])


# ---------------------------------------------------------------------------
# mollifier and cutoff


def _profile(rho):
    rho = np.asarray(rho, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(rho < 1.0, np.exp(-1.0 / np.maximum((rho - 1.0) ** 2, 1e-300)), 0.0)


_C_CACHE = {}


def mollifier_constant() -> float:
    """c = 1 / int_{|w|<1} exp(-1/(|w|-1)^2) dw, independent of delta."""
    if "c" not in _C_CACHE:
        I = quad(lambda r: math.exp(-1.0 / (r - 1.0) ** 2) * r, 0.0, 1.0,
                 epsabs=1e-15, epsrel=1e-13, limit=200)[0]
        _C_CACHE["c"] = 1.0 / (2 * math.pi * I)
    return _C_CACHE["c"]


@dataclass(frozen=True)
class MollifierKernel:
    delta: float
    c: float
    C: float  # exhibited constant for |phi| <= C/delta^2, |grad phi| <= C/delta^3
    C_min: float  # smallest constant satisfying both bounds
    sup_phi: float  # sup |phi| * delta^2
    sup_grad: float  # sup |grad phi| * delta^3

    def __call__(self, z):
        r = np.abs(_asz(z)) / self.delta
        return self.c / self.delta ** 2 * _profile(r)

    def integral(self) -> float:
        d = self.delta
        return 2 * math.pi * quad(lambda r: float(self(r)) * r, 0.0, d, epsabs=1e-15,
                                  epsrel=1e-13, limit=200)[0]

    def to_dict(self):
        return {"delta": self.delta, "c": self.c, "C": self.C, "C_min": self.C_min,
                "sup_phi_delta2": self.sup_phi, "sup_grad_delta3": self.sup_grad}


def mollifier_kernel(delta: float) -> MollifierKernel:
    if delta <= 0:
        raise ConstructionError("delta must be positive")
    c = mollifier_constant()
    rho = np.linspace(0.0, 1.0, 200001)[:-1]
    prof = _profile(rho)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        dprof = np.abs(2.0 / (1.0 - rho) ** 3 * prof)
    sup_phi = c * float(prof.max())
    sup_grad = c * float(np.nanmax(dprof))
    cmin = max(sup_phi, sup_grad)
    # the normalization constant itself satisfies both bounds and exceeds 10
    C = max(c, cmin)
    return MollifierKernel(float(delta), c, C, cmin, sup_phi, sup_grad)


@dataclass(frozen=True)
class Cutoff:
    """Radial chi: mollified piecewise-linear ramps over [5/8, 3/4] and [5/4, 11/8]."""

    w: float = 1.0 / 64
    n_table: int = 4001

    def _tables(self):
        x = np.linspace(-self.w, self.w, self.n_table)
        y = np.clip(x / self.w, -1.0, 1.0)
        with np.errstate(divide="ignore", over="ignore"):
            k = np.where(np.abs(y) < 1, np.exp(-1.0 / np.maximum(1 - y * y, 1e-300)), 0.0)
        k /= trapezoid(k, x)
        K = np.concatenate([[0.0], np.cumsum(0.5 * (k[1:] + k[:-1]) * np.diff(x))])
        K /= K[-1]
        KI = np.concatenate([[0.0], np.cumsum(0.5 * (K[1:] + K[:-1]) * np.diff(x))])
        return x, k, K, KI

    def _ramp(self, r, a, b, order):
        """Derivative ``order`` of (clip((r - a)/(b - a), 0, 1) convolved with the bump)."""
        x, k, K, KI = self._tables()
        w = self.w

        def I(y):  # int_{-inf}^{y} K
            return np.where(y >= w, KI[-1] + (y - w), np.interp(y, x, KI, left=0.0))

        r = np.asarray(r, dtype=float)
        L = b - a
        if order == 0:
            return (I(r - a) - I(r - b)) / L
        if order == 1:
            return (np.interp(r - a, x, K, left=0.0, right=1.0)
                    - np.interp(r - b, x, K, left=0.0, right=1.0)) / L
        return (np.interp(r - a, x, k, left=0.0, right=0.0)
                - np.interp(r - b, x, k, left=0.0, right=0.0)) / L

    def _bands(self):
        w = self.w
        return (R2[0] + w, R1[0] - w), (R1[1] + w, R2[1] - w)

    def radial(self, r, order=0):
        (a1, b1), (a2, b2) = self._bands()
        r = np.asarray(r, dtype=float)
        v = self._ramp(r, a1, b1, order) - self._ramp(r, a2, b2, order)
        # exact plateaus: the smoothed ramps are supported inside the bands
        flat = (r <= R2[0]) | (r >= R2[1]) | ((r >= R1[0]) & (r <= R1[1]))
        plateau = 1.0 if order == 0 else 0.0
        v = np.where(flat, 0.0, v)
        return np.where((r >= R1[0]) & (r <= R1[1]), plateau, v)

    def __call__(self, z):
        return self.radial(np.abs(_asz(z)), 0)

    def grad(self, z):
        z = _asz(z)
        r = np.abs(z)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(r > 0, self.radial(r, 1) * z / np.where(r > 0, r, 1.0), 0.0)

    def laplacian(self, z):
        r = np.abs(_asz(z))
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.radial(r, 2) + np.where(r > 0, self.radial(r, 1) / np.where(r > 0, r, 1.0), 0.0)

    def measured_bounds(self, n=200001) -> dict:
        r = np.linspace(R2[0] - 0.01, R2[1] + 0.01, n)
        g = np.abs(self.radial(r, 1))
        lap = np.abs(self.radial(r, 2) + self.radial(r, 1) / r)
        return {"sup_grad": float(g.max()), "sup_laplacian": float(lap.max()),
                "grad_target": 16.0, "laplacian_target": 256.0,
                "grad_ok": bool(g.max() < 16.0), "laplacian_ok": bool(lap.max() <= 256.0)}


def build_cutoff(w: float = 1.0 / 64) -> tuple:
    """(chi, measured bounds)."""
    chi = Cutoff(w)
    return chi, chi.measured_bounds()


# ---------------------------------------------------------------------------
# band grid, mollification and blending


@dataclass
class BandGrid:
    """Square node grid covering the blending band."""

    x0: float
    spacing: float
    n: int

    @classmethod
    def for_delta(cls, delta, cells_per_delta=8, reach=None):
        h = delta / cells_per_delta
        reach = 2.0 + delta + 4 * h if reach is None else reach
        n = int(math.ceil(2 * reach / h)) + 1
        return cls(-h * (n - 1) / 2, h, n)

    def nodes(self):
        x = self.x0 + self.spacing * np.arange(self.n)
        return x[None, :] + 1j * x[:, None]

    def index(self, z):
        z = _asz(z)
        return (z.imag - self.x0) / self.spacing, (z.real - self.x0) / self.spacing


def _discrete_kernel(phi: MollifierKernel, h):
    m = int(math.ceil(phi.delta / h))
    x = h * np.arange(-m, m + 1)
    Z = x[None, :] + 1j * x[:, None]
    k = phi(Z) * h * h
    s = float(k.sum())
    return k / s, s


@dataclass
class MollifyResult:
    grid: BandGrid
    U0: np.ndarray
    U1: np.ndarray
    kernel_sum: float
    checks: dict


def mollify(u0: ConformalFactor, delta: float, cells_per_delta: int = 8, M1: float | None = None,
            grid: BandGrid | None = None) -> MollifyResult:
    """u1 = phi_delta * u0 on the band grid (FFT convolution).

    u0 is sampled only on 1/2 <= |z|; nodes nearer the origin are never reached by
    the kernel from the band |z| >= 5/8 - delta... and are zero-filled.
    """
    if not (0 < delta < 0.125):
        raise ConstructionError("delta must lie in (0, 1/8)")
    if cells_per_delta < 8:
        raise ConstructionError("grid too coarse: need >= 8 cells across delta")
    grid = grid or BandGrid.for_delta(delta, cells_per_delta)
    phi = mollifier_kernel(delta)
    Z = grid.nodes()
    r = np.abs(Z)
    active = r >= 0.5
    U0 = np.zeros(Z.shape)
    U0[active] = u0.u(Z[active])
    ker, ksum = _discrete_kernel(phi, grid.spacing)
    U1 = fftconvolve(U0, ker, mode="same")
    valid = (r >= 0.5 + delta + grid.spacing) & (r <= 2.0)
    U1 = np.where(valid, U1, np.nan)
    checks = {}
    if M1 is not None:
        away = valid & (np.abs(r - 1.0) > delta) & (r >= 0.625)
        diff = float(np.max(np.abs(U1[away] - U0[away])))
        checks["sup_u1_minus_u0"] = diff
        checks["M1_delta"] = M1 * delta
        checks["sup_bound_ok"] = bool(diff <= M1 * delta)
    return MollifyResult(grid, U0, U1, ksum, checks)


def _grid_field_eval(F, grid: BandGrid, z, order=3):
    i, j = grid.index(z)
    Fz = np.nan_to_num(F, nan=0.0)
    return ndimage.map_coordinates(Fz, np.array([np.ravel(i), np.ravel(j)]), order=order,
                                   mode="nearest").reshape(np.shape(z))


class BlendedFactor(ConformalFactor):
    """u2 = chi u1 + (1 - chi) u0 with u1 known on a band grid.

    Inside the band the node field of u2 and its 5-point Laplacian are the
    reference; off the grid nodes they are interpolated.
    """

    def __init__(self, u0: GluedFactor, mres: MollifyResult, chi: Cutoff):
        self.u0 = u0
        self.grid = mres.grid
        self.chi = chi
        self.exclusion = u0.exclusion
        Z = self.grid.nodes()
        X = chi(Z)
        band = X > 0
        U1 = np.where(band, mres.U1, mres.U0)
        if np.any(band & ~np.isfinite(mres.U1)):
            raise ConstructionError("mollified field does not cover the cutoff band")
        self.U2 = np.where(band, X * U1 + (1 - X) * mres.U0, mres.U0)
        self.band_mask = (np.abs(Z) >= R2[0] - 2 * self.grid.spacing) & \
                         (np.abs(Z) <= R2[1] + 2 * self.grid.spacing)
        self.U1 = U1
        lap = kernels.laplacian5(self.U2, self.grid.spacing)
        self.LAP2 = np.where(self.band_mask, lap, np.nan)
        self._coef = ndimage.spline_filter(self.U2, order=3, mode="nearest")

    @property
    def divisor(self):
        return self.u0.divisor

    def seams(self):
        return []

    def _in_band(self, z):
        r = np.abs(z)
        return (r > R2[0]) & (r < R2[1])

    def u(self, z):
        z = _asz(z)
        out = np.asarray(self.u0.u(z), dtype=float).copy()
        m = self._in_band(z)
        if m.any():
            i, j = self.grid.index(z[m])
            out[m] = ndimage.map_coordinates(self._coef, np.array([i, j]), order=3,
                                             mode="nearest", prefilter=False)
        return out

    def grad(self, z):
        z = _asz(z)
        out = np.asarray(self.u0.grad(z), dtype=complex).copy()
        m = self._in_band(z)
        if m.any():
            e = 0.25 * self.grid.spacing
            zm = z[m]
            gx = (self.u(zm + e) - self.u(zm - e)) / (2 * e)
            gy = (self.u(zm + 1j * e) - self.u(zm - 1j * e)) / (2 * e)
            out[m] = gx + 1j * gy
        return out

    def laplacian(self, z):
        z = _asz(z)
        out = np.asarray(self.u0.laplacian(z), dtype=float).copy()
        m = self._in_band(z)
        if m.any():
            i, j = self.grid.index(z[m])
            L = np.nan_to_num(self.LAP2, nan=0.0)
            out[m] = ndimage.map_coordinates(L, np.array([i, j]), order=1, mode="nearest")
        return out

    def curvature(self, z, check: bool = True):
        z = _asz(z)
        out = np.empty(z.shape)
        m = self._in_band(z)
        if (~m).any():
            out[~m] = self.u0.curvature(z[~m], check=check)
        if m.any():
            out[m] = -np.exp(-2 * self.u(z[m])) * self.laplacian(z[m])
        return out

    def band_curvature(self):
        """Node curvature over the band: -e^{-2 u2} (5-point Laplacian of u2)."""
        Z = self.grid.nodes()
        with np.errstate(invalid="ignore", over="ignore"):
            K = -np.exp(-2 * self.U2) * self.LAP2
        keep = self.band_mask & np.isfinite(K)
        return Z[keep], K[keep]

    def curvature_samples(self, sampling=None):
        """Inner nodes (|z| < 5/8), band nodes, and the constant outer curvature."""
        exclusion = 1e-3 if sampling is None else sampling.exclusion
        Zi, Ki = _inner_curvature_samples(self.u0.inner, R2[0], exclusion)
        Zb, Kb = self.band_curvature()
        r_out = np.array([R2[1] + 0.5 * self.grid.spacing + 1.0])
        Ko = np.atleast_1d(self.u0.outer.curvature(r_out.astype(complex), check=False))
        return (np.concatenate([Zi, Zb, r_out.astype(complex)]),
                np.concatenate([Ki, Kb, Ko]))

    def describe(self):
        return {"family": "blend", "divisor": self.divisor.to_dict(),
                "band_grid": {"x0": self.grid.x0, "spacing": self.grid.spacing, "n": self.grid.n}}


def blend(u0: GluedFactor, mres: MollifyResult, chi: Cutoff) -> BlendedFactor:
    return BlendedFactor(u0, mres, chi)


# ---------------------------------------------------------------------------
# verification


@dataclass
class Certificate:
    rho: float
    rho0: float
    gap: float
    report: PinchingReport
    measured_constants: dict
    bound_checks: dict
    seam: SeamDefect
    config: dict
    regions: dict

    @property
    def passed(self) -> bool:
        return bool(self.bound_checks.get("gap_within_target", False)
                    and self.bound_checks.get("strict_below_rho0", False))

    def to_dict(self):
        return {"rho": self.rho, "rho0": self.rho0, "gap": self.gap,
                "pinching": self.report.to_dict(), "measured_constants": self.measured_constants,
                "bound_checks": self.bound_checks, "seam_defect": self.seam.to_dict(),
                "config": self.config, "regions": self.regions, "pass": self.passed}


def verify(u2: BlendedFactor, u0res: U0Result, cfg: ConstructionConfig, chi_bounds: dict,
           phi: MollifierKernel, mres: MollifyResult) -> Certificate:
    """Pinching of u2 and the bound certificate."""
    from .factors import pinching_ratio
    rep = pinching_ratio(u2)
    al, b1 = cfg.alpha, cfg.beta1
    r0 = rho0(cfg.divisor)
    lo, hi = (1 + b1) ** 2, (1 + al) ** 2
    Zi, Ki = _inner_curvature_samples(u2.u0.inner, R2[0], 1e-3)
    Zb, Kb = u2.band_curvature()
    regions = {"inner": {"k_min": float(Ki.min()), "k_max": float(Ki.max()), "n": int(Ki.size)},
               "band": {"k_min": float(Kb.min()), "k_max": float(Kb.max()), "n": int(Kb.size)},
               "outer": {"k": float(u0res.outer_curvature)}}
    zk = Zb[np.argmax(Kb)]
    regions["band"]["argmax_radius"] = float(abs(zk))
    regions["band"]["argmin_radius"] = float(abs(Zb[np.argmin(Kb)]))
    m, M0, M1 = u0res.m, u0res.M0, u0res.M1
    delta = cfg.delta
    eps_pred = 4 * math.pi * phi.C * math.exp(-2 * m) * delta + hi * (math.exp(4 * M1 * delta) - 1)
    eps_lo = max(0.0, lo - rep.k_min)
    eps_hi = max(0.0, rep.k_max - hi)
    # C' from |Delta(u2 - u0)| on the transition bands
    Z = mres.grid.nodes()
    r = np.abs(Z)
    trans = ((r > R2[0]) & (r < R1[0])) | ((r > R1[1]) & (r < R2[1]))
    lap0 = kernels.laplacian5(mres.U0, mres.grid.spacing)
    d_lap = np.abs(u2.LAP2 - lap0)[trans]
    d_lap = d_lap[np.isfinite(d_lap)]
    sup_dlap = float(d_lap.max()) if d_lap.size else 0.0
    C1 = sup_dlap / eps_pred if eps_pred > 0 else float("nan")
    C2 = max(eps_lo, eps_hi) / eps_pred if eps_pred > 0 else float("nan")
    measured = {"m": m, "M0": M0, "M1": M1, "C": phi.C, "C_min": phi.C_min, "c": phi.c,
                "C_prime": C1, "C_double_prime": C2, "eps_predicted": eps_pred,
                "chi_sup_grad": chi_bounds["sup_grad"], "chi_sup_laplacian": chi_bounds["sup_laplacian"],
                "kernel_discrete_sum": mres.kernel_sum, "sup_laplacian_u2_minus_u0": sup_dlap}
    gap = r0 - rep.rho
    checks = {
        "lower_inflation": eps_lo, "upper_inflation": eps_hi,
        "bounds_within_prediction": bool(max(eps_lo, eps_hi) <= eps_pred),
        "gap_within_target": bool(gap <= cfg.eps_target),
        "strict_below_rho0": bool(rep.rho < r0),
        "seam_defect_ok": bool(max(u0res.defect.D0, u0res.defect.D1) <= cfg.eps_prime_eff),
        "eps_prime": cfg.eps_prime_eff,
        "chi_grad_ok": chi_bounds["grad_ok"], "chi_laplacian_ok": chi_bounds["laplacian_ok"],
        "u0_curvature_bounds": u0res.curvature_bounds,
    }
    checks.update(mres.checks)
    return Certificate(rep.rho, r0, gap, rep, measured, checks, u0res.defect, cfg.to_dict(), regions)


@dataclass
class PipelineResult:
    config: ConstructionConfig
    u0: U0Result
    u1: MollifyResult
    u2: BlendedFactor
    chi: Cutoff
    phi: MollifierKernel
    certificate: Certificate


def run_pipeline(cfg: ConstructionConfig, family=None) -> PipelineResult:
    u0res = build_u0(cfg, family)
    phi = mollifier_kernel(cfg.delta)
    mres = mollify(u0res.factor, cfg.delta, cfg.cells_per_delta, M1=u0res.M1)
    chi, cb = build_cutoff(cfg.cutoff_smoothing)
    u2 = blend(u0res.factor, mres, chi)
    cert = verify(u2, u0res, cfg, cb, phi, mres)
    return PipelineResult(cfg, u0res, mres, u2, chi, phi, cert)


def sweep(divisor: ConicDivisor, deltas=(0.04, 0.02, 0.01), base_cfg: ConstructionConfig | None = None):
    """Run the pipeline for each delta with its matching j; one continuation path serves all."""
    deltas = sorted(deltas, reverse=True)
    proto = base_cfg or ConstructionConfig(divisor, deltas[0])
    cfgs = [replace(proto, divisor=divisor, delta=dl, j=None) for dl in deltas]
    fams = {}
    if divisor.n >= 3:
        base = [p.beta for p in divisor.finite_points]
        pos = [p.position for p in divisor.finite_points]
        alphas = sorted({c.alpha_j for c in cfgs}, reverse=True)
        for a, f, rep in continuation_family(base, alphas, proto.solver, positions=pos):
            fams[round(a, 12)] = (a, f, rep)
    out = []
    for c in cfgs:
        out.append(run_pipeline(c, fams.get(round(c.alpha_j, 12))))
    return out
