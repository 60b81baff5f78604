"""Conformal factors u with g = e^{2u}|dz|^2, their curvature and pinching.

Positions are complex numbers; every evaluation routine is vectorized over
numpy arrays of points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .divisor import ConePoint, ConicDivisor, classify, rho0

DEFAULT_EXCLUSION = 1e-3
DEFAULT_R_OUT = 1e4


class FactorError(ValueError):
    """Bad factor parameters or evaluation outside the admissible region."""


class CurvatureError(FactorError):
    """Nonpositive curvature, outside the hypothesis 0 < a <= K <= b."""


def _asz(z):
    return np.asarray(z, dtype=complex)


def _log_terms(z, points):
    """Sum of beta ln|z - p| and its complex gradient over finite points."""
    val = np.zeros(z.shape)
    grad = np.zeros(z.shape, dtype=complex)
    for p in points:
        w = z - p.position
        a2 = np.abs(w) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            val += 0.5 * p.beta * np.log(a2)
            grad += p.beta * w / a2
    return val, grad


class ConformalFactor:
    """Base class.

    Subclasses provide ``u``, ``grad`` (complex u_x + i u_y) and ``laplacian``;
    ``curvature`` and the sampling helpers are shared.
    """

    divisor: ConicDivisor
    exclusion: float = DEFAULT_EXCLUSION

    # circles (center, radius) across which u is only C^{1,1}
    def seams(self) -> list[tuple[complex, float]]:
        return []

    def u(self, z):
        raise NotImplementedError

    def grad(self, z):
        raise NotImplementedError

    def laplacian(self, z):
        raise NotImplementedError

    def density(self, z):
        """Curvature density K e^{2u} = -Laplacian(u)."""
        return -self.laplacian(z)

    def singular_positions(self) -> np.ndarray:
        return np.array([p.position for p in self.divisor.finite_points], dtype=complex)

    def too_close(self, z, seam_width: float | None = None):
        """Mask of points within the exclusion radius of cone points or seams."""
        z = _asz(z)
        bad = np.zeros(z.shape, dtype=bool)
        for p in self.singular_positions():
            bad |= np.abs(z - p) < self.exclusion
        w = self.exclusion if seam_width is None else seam_width
        for c, r in self.seams():
            bad |= np.abs(np.abs(z - c) - r) < w
        return bad

    def curvature(self, z, check: bool = True):
        z = _asz(z)
        if check and np.any(self.too_close(z)):
            raise FactorError("curvature requested at or too near a cone point or seam")
        return -np.exp(-2.0 * self.u(z)) * self.laplacian(z)

    def radial_exterior(self):
        """(R, callable u(r), callable K(r)) when u is radial about 0 beyond R, else None."""
        return None

    def describe(self) -> dict:
        return {"family": type(self).__name__, "divisor": self.divisor.to_dict()}


def _radial_branch(r, amp, a):
    """ln(2 amp r^a / (1 + r^{2+2a})) with first and second radial derivatives."""
    m = 2.0 + 2.0 * a
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lr = np.log(r)
        l1 = np.logaddexp(0.0, m * lr)  # ln(1 + r^m) without overflow
        # a = 0 is a regular point: keep 0 * ln 0 out of the expressions
        alr = a * lr if a != 0.0 else np.zeros_like(lr)
        g = np.log(2.0 * amp) + alr - l1
        g1 = a / r - m * np.exp(m * lr - l1) / r
        lap = -(m ** 2) * np.exp(((m - 2.0) * lr if a != 0.0 else 0.0) - 2.0 * l1)
        if a == 0.0:
            g1 = np.where(r == 0, 0.0, g1)
    return g, g1, lap


@dataclass(frozen=True)
class GluedFootball(ConformalFactor):
    """Closed-form glued football u_{alpha,beta}, possibly scaled/translated/shifted.

    normalized=True carries the (alpha+1) factor (inner curvature 1); otherwise
    inner/outer curvatures are (alpha+1)^2 and (beta+1)^2.
    u(z) = g(scale * |z - center|) + ln(scale) + shift.
    """

    alpha: float
    beta: float
    normalized: bool = True
    shift: float = 0.0
    scale: float = 1.0
    center: complex = 0j
    exclusion: float = DEFAULT_EXCLUSION

    def __post_init__(self):
        if not (-1.0 < self.beta <= self.alpha <= 0.0):
            raise FactorError(f"need -1 < beta <= alpha <= 0, got alpha={self.alpha}, beta={self.beta}")
        if self.scale <= 0:
            raise FactorError("scale must be positive")

    @property
    def divisor(self) -> ConicDivisor:
        pts = []
        if self.beta < 0:
            pts.append(ConePoint(None, self.beta))
        if self.alpha < 0:
            pts.append(ConePoint(complex(self.center), self.alpha))
        return ConicDivisor(tuple(pts))

    @property
    def amplitude(self) -> float:
        return (self.alpha + 1.0) if self.normalized else 1.0

    @property
    def seam_radius(self) -> float:
        return 1.0 / self.scale

    def seams(self):
        if self.alpha == self.beta:
            return []
        return [(complex(self.center), self.seam_radius)]

    def inner_curvature(self) -> float:
        return (self.alpha + 1.0) ** 2 / self.amplitude ** 2 * math.exp(-2 * self.shift)

    def outer_curvature(self) -> float:
        return (self.beta + 1.0) ** 2 / self.amplitude ** 2 * math.exp(-2 * self.shift)

    # radial pieces in the rescaled variable x = scale * r
    def _parts(self, x):
        gi, g1i, li = _radial_branch(x, self.amplitude, self.alpha)
        go, g1o, lo = _radial_branch(x, self.amplitude, self.beta)
        inner = x < 1.0
        return (np.where(inner, gi, go), np.where(inner, g1i, g1o), np.where(inner, li, lo))

    def radial_u(self, r):
        x = self.scale * np.asarray(r, dtype=float)
        g, _, _ = self._parts(x)
        return g + math.log(self.scale) + self.shift

    def radial_du(self, r):
        x = self.scale * np.asarray(r, dtype=float)
        _, g1, _ = self._parts(x)
        return self.scale * g1

    def radial_curvature(self, r):
        x = np.asarray(self.scale * np.asarray(r, dtype=float))
        return np.where(x < 1.0, self.inner_curvature(), self.outer_curvature())

    def u(self, z):
        return self.radial_u(np.abs(_asz(z) - self.center))

    def grad(self, z):
        w = _asz(z) - self.center
        r = np.abs(w)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.radial_du(r) * w / r

    def laplacian(self, z):
        x = self.scale * np.abs(_asz(z) - self.center)
        _, _, lap = self._parts(x)
        return self.scale ** 2 * lap

    def curvature(self, z, check: bool = True):
        z = _asz(z)
        if check and np.any(self.too_close(z)):
            raise FactorError("curvature requested at or too near a cone point or seam")
        # closed form: exact piecewise constant, evaluated as -e^{-2u} Lap u
        return super().curvature(z, check=False)

    def radial_exterior(self):
        r0 = 1.0 / self.scale if self.alpha != self.beta else 0.0
        if self.center != 0:
            return None
        return (r0, self.radial_u, self.radial_curvature)

    def total_mass(self) -> float:
        """Exact integral of K e^{2u}: 2 pi (2 + alpha + beta)."""
        return 2 * math.pi * (2.0 + self.alpha + self.beta)

    def describe(self):
        return {"family": "glued_football", "params": {
            "alpha": self.alpha, "beta": self.beta, "normalized": self.normalized,
            "shift": self.shift, "scale": self.scale,
            "center": [complex(self.center).real, complex(self.center).imag]},
            "divisor": self.divisor.to_dict()}


def glued_football(alpha: float, beta: float, normalized: bool = True) -> GluedFootball:
    return GluedFootball(float(alpha), float(beta), bool(normalized))


def football(beta: float, normalized: bool = True) -> GluedFootball:
    return GluedFootball(float(beta), float(beta), normalized)


def round_sphere() -> GluedFootball:
    return GluedFootball(0.0, 0.0, True)


@dataclass(frozen=True)
class Transformed(ConformalFactor):
    """u(lambda (z - k)) + ln(lambda) + shift for an arbitrary base factor."""

    base: ConformalFactor
    lam: float = 1.0
    k: complex = 0j
    shift: float = 0.0

    def __post_init__(self):
        if self.lam <= 0:
            raise FactorError("scaling factor must be positive")

    @property
    def exclusion(self):
        return self.base.exclusion / self.lam

    @property
    def divisor(self):
        lam, k = self.lam, self.k
        return self.base.divisor.mapped(lambda p: k + p / lam)

    def _pull(self, z):
        return self.lam * (_asz(z) - self.k)

    def seams(self):
        return [(self.k + c / self.lam, r / self.lam) for c, r in self.base.seams()]

    def u(self, z):
        return self.base.u(self._pull(z)) + math.log(self.lam) + self.shift

    def grad(self, z):
        return self.lam * self.base.grad(self._pull(z))

    def laplacian(self, z):
        return self.lam ** 2 * self.base.laplacian(self._pull(z))

    def curvature(self, z, check: bool = True):
        return self.base.curvature(self._pull(z), check=check) * math.exp(-2 * self.shift)

    def radial_exterior(self):
        ext = self.base.radial_exterior()
        if ext is None or self.k != 0:
            return None
        r0, uf, kf = ext
        lam, sh = self.lam, self.shift
        return (r0 / lam, lambda r: uf(lam * np.asarray(r)) + math.log(lam) + sh,
                lambda r: kf(lam * np.asarray(r)) * math.exp(-2 * sh))

    def describe(self):
        return {"family": "transformed", "lambda": self.lam,
                "k": [complex(self.k).real, complex(self.k).imag], "shift": self.shift,
                "base": self.base.describe()}


def rescale(f: ConformalFactor, lam: float, k: complex = 0j) -> ConformalFactor:
    """Scaling u(lambda z) + ln(lambda) composed with translation by k."""
    if lam <= 0:
        raise FactorError("scaling factor must be positive")
    if isinstance(f, GluedFootball):
        return GluedFootball(f.alpha, f.beta, f.normalized, f.shift, f.scale * lam,
                             complex(k) + f.center / lam, f.exclusion)
    if isinstance(f, Transformed):
        return Transformed(f.base, f.lam * lam, complex(k) + f.k / lam, f.shift)
    if lam == 1.0 and k == 0:
        return f
    return Transformed(f, float(lam), complex(k))


def add_constant(f: ConformalFactor, c: float) -> ConformalFactor:
    """u + c; curvature scales by e^{-2c}."""
    if c == 0:
        return f
    if isinstance(f, GluedFootball):
        return GluedFootball(f.alpha, f.beta, f.normalized, f.shift + c, f.scale, f.center, f.exclusion)
    if isinstance(f, Transformed):
        return Transformed(f.base, f.lam, f.k, f.shift + c)
    return Transformed(f, 1.0, 0j, float(c))


# ---------------------------------------------------------------------------
# grid-sampled regular parts


def _periodic_pad(a, n=3):
    return np.concatenate([a[:, -n:], a, a[:, :n]], axis=1)


@dataclass(frozen=True)
class CartesianGridFactor(ConformalFactor):
    """u = sum beta_i ln|z - z_i| + h with h sampled on a uniform square grid.

    ``h[i, j]`` is the value at x0 + j*spacing, y0 + i*spacing.
    """

    divisor: ConicDivisor
    h: np.ndarray
    x0: float
    y0: float
    spacing: float
    exclusion: float = DEFAULT_EXCLUSION
    seam_list: tuple = ()
    _coef: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.spacing <= 0:
            raise FactorError("spacing must be positive")
        object.__setattr__(self, "_coef", ndimage.spline_filter(np.asarray(self.h, float), order=3))

    @classmethod
    def sample(cls, f: ConformalFactor, half_width: float, spacing: float, center=0j):
        """Sample the regular part of ``f`` on [-w, w]^2 around ``center``."""
        n = int(round(2 * half_width / spacing)) + 1
        xs = center.real - half_width + spacing * np.arange(n)
        ys = center.imag - half_width + spacing * np.arange(n)
        Z = xs[None, :] + 1j * ys[:, None]
        logs, _ = _log_terms(Z, f.divisor.finite_points)
        with np.errstate(invalid="ignore"):
            h = f.u(Z) - logs
        # nodes sitting on a cone point: fill from neighbors
        bad = ~np.isfinite(h)
        if bad.any():
            h[bad] = 0.0
            good = ndimage.uniform_filter(np.where(bad, 0.0, h), 3)
            cnt = ndimage.uniform_filter((~bad).astype(float), 3)
            h[bad] = (good / np.maximum(cnt, 1e-12))[bad]
        return cls(f.divisor, h, float(xs[0]), float(ys[0]), float(spacing),
                   f.exclusion, tuple(f.seams()))

    @property
    def shape(self):
        return self.h.shape

    def nodes(self):
        ny, nx = self.h.shape
        xs = self.x0 + self.spacing * np.arange(nx)
        ys = self.y0 + self.spacing * np.arange(ny)
        return xs[None, :] + 1j * ys[:, None]

    def seams(self):
        return list(self.seam_list)

    def _idx(self, z):
        z = _asz(z)
        return (z.imag - self.y0) / self.spacing, (z.real - self.x0) / self.spacing

    def h_at(self, z, order=3):
        i, j = self._idx(z)
        coords = np.array([np.ravel(i), np.ravel(j)])
        src = self._coef if order == 3 else self.h
        return ndimage.map_coordinates(src, coords, order=order, mode="nearest",
                                       prefilter=False).reshape(np.shape(i))

    def u(self, z):
        z = _asz(z)
        logs, _ = _log_terms(z, self.divisor.finite_points)
        return logs + self.h_at(z)

    def _h_grad(self, z):
        d = self.spacing
        z = _asz(z)
        hx = (self.h_at(z + d / 2) - self.h_at(z - d / 2)) / d
        hy = (self.h_at(z + 1j * d / 2) - self.h_at(z - 1j * d / 2)) / d
        return hx + 1j * hy

    def grad(self, z):
        z = _asz(z)
        _, g = _log_terms(z, self.divisor.finite_points)
        return g + self._h_grad(z)

    def node_laplacian(self):
        """5-point Laplacian of h at interior nodes (NaN on the frame)."""
        from .kernels import laplacian5
        return laplacian5(self.h, self.spacing)

    def laplacian(self, z):
        # log terms are harmonic away from their poles
        d = self.spacing
        z = _asz(z)
        c = self.h_at(z)
        return (self.h_at(z + d) + self.h_at(z - d) + self.h_at(z + 1j * d)
                + self.h_at(z - 1j * d) - 4 * c) / d ** 2

    def node_curvature(self):
        Z = self.nodes()
        lap = self.node_laplacian()
        with np.errstate(invalid="ignore", over="ignore"):
            K = -np.exp(-2.0 * self.u(Z)) * lap
        return Z, K

    def describe(self):
        return {"family": "cartesian_grid", "x0": self.x0, "y0": self.y0,
                "spacing": self.spacing, "shape": list(self.h.shape),
                "divisor": self.divisor.to_dict()}


@dataclass(frozen=True)
class LogPolarGridFactor(ConformalFactor):
    """u = beta_0 ln|z| + sum_{z_i != 0} beta_i ln|z - z_i| + h(ln|z|, arg z).

    ``h[i, j]`` is sampled at s = s0 + i*ds, theta = (j + 1/2) * 2 pi / n_theta.
    Outside the sampled s range h is continued linearly with the end slopes,
    which matches the logarithmic asymptotics at 0 and infinity.
    """

    divisor: ConicDivisor
    h: np.ndarray
    s0: float
    ds: float
    exclusion: float = DEFAULT_EXCLUSION
    cell_log_weight: np.ndarray | None = field(default=None, repr=False, compare=False)
    theta_offset: float = 0.0
    _coef: np.ndarray = field(default=None, repr=False, compare=False)
    _kfield: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        hp = _periodic_pad(np.asarray(self.h, float))
        object.__setattr__(self, "_coef", ndimage.spline_filter(hp, order=3, mode="nearest"))
        object.__setattr__(self, "_kfield", None)

    @property
    def n_s(self):
        return self.h.shape[0]

    @property
    def n_theta(self):
        return self.h.shape[1]

    @property
    def dtheta(self):
        return 2 * math.pi / self.n_theta

    @property
    def s_grid(self):
        return self.s0 + self.ds * np.arange(self.n_s)

    @property
    def theta_grid(self):
        return self.theta_offset + (np.arange(self.n_theta) + 0.5) * self.dtheta

    @property
    def s_max(self):
        return self.s0 + self.ds * (self.n_s - 1)

    def origin_order(self) -> float:
        for p in self.divisor.finite_points:
            if p.position == 0:
                return p.beta
        return 0.0

    def off_center_points(self):
        return [p for p in self.divisor.finite_points if p.position != 0]

    def nodes(self):
        S, T = np.meshgrid(self.s_grid, self.theta_grid, indexing="ij")
        return np.exp(S + 1j * T)

    def end_slopes(self):
        left = float(np.mean(self.h[1] - self.h[0]) / self.ds)
        right = float(np.mean(self.h[-1] - self.h[-2]) / self.ds)
        return left, right

    def _h_st(self, s, th, order=3):
        s = np.asarray(s, float)
        th = np.mod(np.asarray(th, float) - self.theta_offset, 2 * math.pi)
        i = (np.clip(s, self.s0, self.s_max) - self.s0) / self.ds
        j = th / self.dtheta - 0.5 + 3
        coords = np.array([np.ravel(i), np.ravel(j)])
        src = self._coef if order == 3 else _periodic_pad(self.h)
        val = ndimage.map_coordinates(src, coords, order=order, mode="nearest",
                                      prefilter=False).reshape(s.shape)
        left, right = self.end_slopes()
        val = val + np.where(s < self.s0, left * (s - self.s0), 0.0)
        val = val + np.where(s > self.s_max, right * (s - self.s_max), 0.0)
        return val

    def h_at(self, z, order=3):
        z = _asz(z)
        with np.errstate(divide="ignore"):
            return self._h_st(np.log(np.abs(z)), np.angle(z), order)

    def u(self, z):
        z = _asz(z)
        logs, _ = _log_terms(z, self.off_center_points())
        with np.errstate(divide="ignore"):
            return self.origin_order() * np.log(np.abs(z)) + logs + self.h_at(z)

    def grad(self, z):
        z = _asz(z)
        _, g = _log_terms(z, self.off_center_points())
        r = np.abs(z)
        with np.errstate(divide="ignore"):
            s = np.log(r)
        th = np.angle(z)
        e = 1e-4
        hs = (self._h_st(s + e, th) - self._h_st(s - e, th)) / (2 * e)
        ht = (self._h_st(s, th + e) - self._h_st(s, th - e)) / (2 * e)
        er = z / r
        b0 = self.origin_order()
        return g + ((hs + b0) * er + ht * 1j * er) / r

    def log_weight(self, S, T):
        """log of r^2 e^{2u - 2h}: the area weight on the (s, theta) cylinder."""
        Z = np.exp(S + 1j * T)
        logs, _ = _log_terms(Z, self.off_center_points())
        return 2.0 * S * (1.0 + self.origin_order()) + 2.0 * logs

    def node_curvature(self):
        """Curvature at nodes from the 5-point cylinder Laplacian of h."""
        if self._kfield is None:
            h = self.h
            ds, dt = self.ds, self.dtheta
            lap = np.full(h.shape, np.nan)
            lap[1:-1] = ((h[2:] - 2 * h[1:-1] + h[:-2]) / ds ** 2
                         + (np.roll(h, -1, 1) - 2 * h + np.roll(h, 1, 1))[1:-1] / dt ** 2)
            if self.cell_log_weight is not None:
                lw = self.cell_log_weight
            else:
                S, T = np.meshgrid(self.s_grid, self.theta_grid, indexing="ij")
                lw = self.log_weight(S, T)
            with np.errstate(over="ignore", invalid="ignore"):
                K = -lap * np.exp(-(lw + 2 * h))
            K[0] = K[1]
            K[-1] = K[-2]
            object.__setattr__(self, "_kfield", K)
        return self.nodes(), self._kfield

    def curvature(self, z, check: bool = True):
        z = _asz(z)
        if check and np.any(self.too_close(z)):
            raise FactorError("curvature requested at or too near a cone point or seam")
        _, K = self.node_curvature()
        s = np.log(np.abs(z))
        th = np.mod(np.angle(z) - self.theta_offset, 2 * math.pi)
        i = (np.clip(s, self.s0, self.s_max) - self.s0) / self.ds
        j = th / self.dtheta - 0.5 + 1
        Kp = np.concatenate([K[:, -1:], K, K[:, :1]], axis=1)
        return ndimage.map_coordinates(Kp, np.array([np.ravel(i), np.ravel(j)]), order=1,
                                       mode="nearest").reshape(z.shape)

    def laplacian(self, z):
        z = _asz(z)
        return -self.curvature(z, check=False) * np.exp(2 * self.u(z))

    def scaled(self, lam: float, shift: float = 0.0) -> "LogPolarGridFactor":
        """Exact rescale u(lam z) + ln lam + shift: a shift of the s grid."""
        b_total = self.origin_order() + sum(p.beta for p in self.off_center_points())
        h = self.h + (1.0 + b_total) * math.log(lam) + shift
        d = self.divisor.mapped(lambda p: p / lam)
        lw = self.cell_log_weight
        if lw is not None:
            lw = lw - 2.0 * (1.0 + b_total) * math.log(lam)
        return LogPolarGridFactor(d, h, self.s0 - math.log(lam), self.ds, self.exclusion / lam,
                                  lw, self.theta_offset)

    def with_h(self, h) -> "LogPolarGridFactor":
        return LogPolarGridFactor(self.divisor, h, self.s0, self.ds, self.exclusion,
                                  self.cell_log_weight, self.theta_offset)

    def describe(self):
        return {"family": "logpolar_grid", "s0": self.s0, "ds": self.ds,
                "shape": list(self.h.shape), "divisor": self.divisor.to_dict()}


# ---------------------------------------------------------------------------
# pinching


@dataclass(frozen=True)
class Sampling:
    """Log-polar sample of the plane around ``center``.

    Points within ``exclusion`` of cone points, or within ``seam_width`` of a
    seam circle, are dropped.
    """

    r_min: float = 1e-3
    r_max: float = DEFAULT_R_OUT
    n_r: int = 400
    n_theta: int = 64
    center: complex = 0j
    exclusion: float = DEFAULT_EXCLUSION
    seam_width: float | None = None

    def points(self):
        r = np.geomspace(self.r_min, self.r_max, self.n_r)
        th = (np.arange(self.n_theta) + 0.5) * 2 * math.pi / self.n_theta
        return (self.center + r[:, None] * np.exp(1j * th[None, :])).ravel()

    def to_dict(self):
        return {"r_min": self.r_min, "r_max": self.r_max, "n_r": self.n_r,
                "n_theta": self.n_theta, "center": [self.center.real, self.center.imag],
                "exclusion": self.exclusion, "seam_width": self.seam_width}


@dataclass
class PinchingReport:
    k_min: float
    k_max: float
    rho: float
    rho0: float
    classification: str
    domain: dict
    note: str | None = None

    def to_dict(self):
        return {"k_min": self.k_min, "k_max": self.k_max, "rho": self.rho,
                "rho0": self.rho0, "classification": self.classification,
                "domain": self.domain, "note": self.note}


def _seam_width(f, sampling: Sampling):
    if sampling.seam_width is not None:
        return sampling.seam_width
    if isinstance(f, CartesianGridFactor):
        return 1.5 * f.spacing
    return max(sampling.exclusion, 1e-9)


def curvature_samples(f: ConformalFactor, sampling: Sampling | None = None):
    """Curvature values over the sampling domain, exclusions removed."""
    sampling = sampling or Sampling()
    if isinstance(f, CartesianGridFactor):
        Z, K = f.node_curvature()
        Z, K = Z.ravel(), K.ravel()
    elif hasattr(f, "curvature_samples"):
        return f.curvature_samples(sampling)
    else:
        Z = sampling.points()
        K = None
    keep = ~f.too_close(Z, seam_width=_seam_width(f, sampling))
    for p in f.singular_positions():
        keep &= np.abs(Z - p) >= sampling.exclusion
    Z = Z[keep]
    if K is None:
        K = f.curvature(Z, check=False)
    else:
        K = K[keep]
    ok = np.isfinite(K)
    return Z[ok], K[ok]


def pinching_ratio(f: ConformalFactor, sampling: Sampling | None = None) -> PinchingReport:
    """K_min / K_max over the sampled smooth region, with rho0 and classification."""
    sampling = sampling or Sampling()
    Z, K = curvature_samples(f, sampling)
    if K.size == 0:
        raise FactorError("no admissible sample points")
    kmin, kmax = float(np.min(K)), float(np.max(K))
    if kmin <= 0:
        raise CurvatureError(f"nonpositive curvature {kmin:.3e} detected")
    d = f.divisor
    cl = classify(d)
    try:
        r0 = rho0(d)
    except ValueError:
        r0 = float("nan")
    dom = sampling.to_dict()
    dom["n_samples"] = int(K.size)
    return PinchingReport(kmin, kmax, kmin / kmax, r0, cl.label, dom, cl.note)
