"""Constant-curvature conic metrics and Dirichlet problems for Delta u = -K e^{2u}.

The plane is handled on the cylinder s = ln|z|, theta = arg z.  Writing
u = beta_0 ln|z| + sum_{z_i != 0} beta_i ln|z - z_i| + h, the unknown h solves

    h_ss + h_tt + K0 W(s, t) e^{2h} = 0,   W = r^{2 + 2 beta_0} prod |z - z_i|^{2 beta_i}

with Neumann closure h_s = 0 at the left end (u regular or conic at 0) and
h_s = -(2 + |D|) at the right end (cone order of infinity).  Off-center cone
points are placed at cell corners and their weights are cell-averaged.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .divisor import CRITICAL, SUBCRITICAL, ConicDivisor, classify
from .factors import LogPolarGridFactor, _log_terms

logger = logging.getLogger(__name__)


class SolverError(RuntimeError):
    def __init__(self, msg, history=None):
        super().__init__(msg)
        self.history = history or []


@dataclass(frozen=True)
class SolverConfig:
    ds: float = 1.0 / 32
    n_theta: int = 128
    s_min: float = -14.0
    s_max: float = 14.0
    tol: float = 1e-8
    max_iter: int = 60
    min_damping: float = 1.0 / 1024
    blowup_guard: float = 60.0
    continuation_steps: int = 4
    subcells: int = 8  # quadrature points per direction for cell-averaged weights

    def __post_init__(self):
        if self.tol <= 0 or self.ds <= 0:
            raise ValueError("tolerance and spacing must be positive")
        if self.n_theta % 2:
            raise ValueError("n_theta must be even")
        if self.s_max <= self.s_min:
            raise ValueError("empty s range")


@dataclass
class SolveReport:
    iterations: int
    residual_history: list
    damping_history: list
    K0: float
    tol_K: float = float("nan")
    gauss_bonnet: dict | None = None
    continuation: list = field(default_factory=list)

    def to_dict(self):
        return {"iterations": self.iterations, "residual_history": self.residual_history,
                "damping_history": self.damping_history, "K0": self.K0, "tol_K": self.tol_K,
                "gauss_bonnet": self.gauss_bonnet, "continuation": self.continuation}


class _Cylinder:
    def __init__(self, d: ConicDivisor, cfg: SolverConfig):
        self.d = d
        self.cfg = cfg
        off = [p for p in d.finite_points if p.position != 0]
        self.off = off
        self.beta0 = sum(p.beta for p in d.finite_points if p.position == 0)
        ds = cfg.ds
        # put the first off-center cone point (or s = 0) on a cell corner / node row
        anchor = math.log(abs(off[0].position)) if off else 0.0
        shift = 0.5 if off else 0.0
        i_lo = math.floor((cfg.s_min - anchor) / ds - shift)
        i_hi = math.ceil((cfg.s_max - anchor) / ds - shift)
        self.s = anchor + (np.arange(i_lo, i_hi + 1) + shift) * ds
        self.n_s = self.s.size
        self.n_t = cfg.n_theta
        self.dt = 2 * math.pi / self.n_t
        rot = float(np.angle(off[0].position)) if off else 0.0
        # nodes at (j + 1/2) dt; rotate the divisor so off[0] sits at theta = 0 mod dt
        self.rot = rot - round(rot / self.dt) * self.dt
        self.theta = (np.arange(self.n_t) + 0.5) * self.dt
        self.row0 = int(np.argmin(np.abs(self.s)))
        self.gL = 0.0
        self.gR = -(2.0 + d.degree)
        self.logw = self._cell_log_weight()

    def _log_weight(self, S, T):
        Z = np.exp(S + 1j * (T + self.rot))
        logs, _ = _log_terms(Z, self.off)
        return 2.0 * S * (1.0 + self.beta0) + 2.0 * logs

    def _cell_log_weight(self):
        S, T = np.meshgrid(self.s, self.theta, indexing="ij")
        lw = self._log_weight(S, T)
        if not self.off:
            return lw
        m = self.cfg.subcells
        g = (np.arange(m) + 0.5) / m - 0.5
        ds, dt = self.cfg.ds, self.dt
        near = np.zeros(S.shape, dtype=bool)
        Z = np.exp(S + 1j * (T + self.rot))
        for p in self.off:
            # cells within ~3 cell widths of a cone point get sub-cell averaging
            near |= np.abs(Z - p.position) < 3.0 * max(ds, dt) * abs(p.position) + 1e-300
        idx = np.nonzero(near)
        if idx[0].size:
            s_c = S[idx][:, None, None] + ds * g[None, :, None]
            t_c = T[idx][:, None, None] + dt * g[None, None, :]
            sub = self._log_weight(s_c, t_c)
            # cell average of r^2 W, divided by the node's r^2 factor for consistency
            mx = sub.max(axis=(1, 2), keepdims=True)
            avg = np.log(np.mean(np.exp(sub - mx), axis=(1, 2))) + mx[:, 0, 0]
            lw[idx] = avg
        return lw

    def laplacian_matrix(self):
        ns, nt, ds, dt = self.n_s, self.n_t, self.cfg.ds, self.dt
        I_s = sp.diags([np.ones(ns - 1), -2 * np.ones(ns), np.ones(ns - 1)], [-1, 0, 1], format="lil")
        I_s[0, 1] = 2.0
        I_s[ns - 1, ns - 2] = 2.0
        Ds = sp.csr_matrix(I_s) / ds ** 2
        Dt = sp.diags([np.ones(nt - 1), -2 * np.ones(nt), np.ones(nt - 1)], [-1, 0, 1], format="lil")
        Dt[0, nt - 1] = 1.0
        Dt[nt - 1, 0] = 1.0
        Dt = sp.csr_matrix(Dt) / dt ** 2
        return (sp.kron(Ds, sp.identity(nt)) + sp.kron(sp.identity(ns), Dt)).tocsc()

    def boundary_vector(self, gL, gR):
        b = np.zeros((self.n_s, self.n_t))
        b[0] = -2.0 * gL / self.cfg.ds
        b[-1] = 2.0 * gR / self.cfg.ds
        return b.ravel()

    def background(self, K0):
        """Smooth guess with the right slopes and the Gauss-Bonnet mass."""
        c = (2.0 + self.d.degree) / 2.0
        S = self.s[:, None] * np.ones((1, self.n_t))
        h = -c * np.logaddexp(0.0, 2.0 * S)
        mass = K0 * np.sum(np.exp(self.logw + 2 * h) * self._trap()) * self.cfg.ds * self.dt
        target = 2 * math.pi * (2.0 + self.d.degree)
        return h + 0.5 * math.log(target / mass)

    def _trap(self):
        w = np.ones((self.n_s, 1))
        w[0] = w[-1] = 0.5
        return w

    def factor(self, h):
        d = self.d
        return LogPolarGridFactor(d, h.reshape(self.n_s, self.n_t), float(self.s[0]), self.cfg.ds,
                                  cell_log_weight=self.logw, theta_offset=self.rot)


def _admissible(d: ConicDivisor) -> bool:
    cl = classify(d).label
    if cl == SUBCRITICAL:
        return True
    if d.n == 0:
        return True
    if d.n == 2 and cl == CRITICAL and abs(d.points[0].beta - d.points[1].beta) < 1e-14:
        return True
    return False


def _newton(cyl: _Cylinder, K0: float, h0: np.ndarray, gauge: tuple | None, cfg: SolverConfig):
    L = cyl.laplacian_matrix()
    N = L.shape[0]
    lw = cyl.logw.ravel()
    bvec = cyl.boundary_vector(cyl.gL, cyl.gR)
    h = h0.ravel().copy()
    mu = 0.0
    if gauge is not None:
        row, value = gauge
        c = np.zeros(N)
        # centered s-derivative of the theta-average at the gauge row; pinning a
        # value there is degenerate because h(0) is stationary along the family
        c[(row + 1) * cyl.n_t:(row + 2) * cyl.n_t] = 0.5 / (cyl.n_t * cfg.ds)
        c[(row - 1) * cyl.n_t:row * cyl.n_t] = -0.5 / (cyl.n_t * cfg.ds)
        e = np.zeros(N)
        e[:cyl.n_t] = -2.0 / cfg.ds

    def residual(h, mu):
        with np.errstate(over="ignore"):
            F = L @ h + bvec + K0 * np.exp(lw + 2 * h)
        if gauge is None:
            return F, None
        F = F + mu * e
        return F, float(c @ h - value)

    def norm(F, g):
        n = np.max(np.abs(F))
        return n if g is None else max(n, abs(g))

    F, g = residual(h, mu)
    res = norm(F, g)
    hist, damp = [res], []
    for it in range(1, cfg.max_iter + 1):
        if res <= cfg.tol:
            return h.reshape(cyl.n_s, cyl.n_t), hist, damp, it - 1
        q = 2 * K0 * np.exp(lw + 2 * h)
        J = (L + sp.diags(q)).tocsc()
        if gauge is None:
            step = splu(J).solve(-F)
            dmu = 0.0
        else:
            Jb = sp.bmat([[J, sp.csc_matrix(e[:, None])], [sp.csr_matrix(c[None, :]), None]]).tocsc()
            sol = splu(Jb).solve(-np.concatenate([F, [g]]))
            step, dmu = sol[:N], sol[N]
        t = 1.0
        while True:
            hn, mun = h + t * step, mu + t * dmu
            Fn, gn = residual(hn, mun)
            rn = norm(Fn, gn)
            if np.isfinite(rn) and rn < (1 - 1e-4 * t) * res:
                break
            t *= 0.5
            if t < cfg.min_damping:
                raise SolverError(f"Newton stalled at residual {res:.3e}", hist)
        h, mu, F, g, res = hn, mun, Fn, gn, rn
        hist.append(res)
        damp.append(t)
        if np.max(h) > cfg.blowup_guard:
            raise SolverError(f"solution exceeds blow-up guard ({np.max(h):.1f})", hist)
        logger.debug("newton %d residual %.3e damping %.3g", it, res, t)
    if res <= cfg.tol:
        return h.reshape(cyl.n_s, cyl.n_t), hist, damp, cfg.max_iter
    raise SolverError(f"Newton did not converge: residual {res:.3e}", hist)


def solve_constant_curvature(d: ConicDivisor, K0: float = 1.0, cfg: SolverConfig | None = None,
                             initial: LogPolarGridFactor | None = None,
                             gauge_slope: float | None = None):
    """Solve -e^{-2u} Delta u = K0 for a subcritical (or football/empty) divisor.

    Radial divisors (cone points only at 0 and infinity) have a scaling family
    of solutions; the gauge pins the s-slope of the theta-average of h at s = 0,
    by default to the centered football value -(1 + beta).
    Returns (LogPolarGridFactor, SolveReport).
    """
    cfg = cfg or SolverConfig()
    if K0 <= 0:
        raise ValueError("K0 must be positive")
    if not _admissible(d):
        raise SolverError(f"divisor is {classify(d).label}; constant curvature solutions "
                          "exist only for subcritical divisors or footballs")
    cyl = _Cylinder(d, cfg)
    gauge = None
    if not cyl.off:
        if gauge_slope is None:
            gauge_slope = -(1.0 + cyl.beta0)
        gauge = (cyl.row0, gauge_slope)
    if initial is not None:
        h0 = initial.h_at(np.exp(cyl.s[:, None] + 1j * (cyl.theta[None, :] + cyl.rot)))
        h0 = h0 - _shift_logs(initial, d, cyl)
    else:
        h0 = cyl.background(K0)
    report_cont = []
    try:
        h, hist, damp, its = _newton(cyl, K0, h0, gauge, cfg)
    except SolverError as exc:
        if initial is not None or not d.points or cfg.continuation_steps < 1:
            raise
        # continuation in the cone orders: t * beta from a milder divisor up to 1
        logger.info("direct solve failed (%s); continuing over cone orders", exc)
        h = None
        ts = np.linspace(0.0, 1.0, cfg.continuation_steps + 2)[1:]
        prev = None
        for t in ts:
            dt_ = ConicDivisor(tuple(type(p)(p.position, p.beta * t) for p in d.points))
            f_t, _ = solve_constant_curvature(dt_, K0, _replace(cfg, continuation_steps=0),
                                              initial=prev, gauge_slope=None)
            prev = f_t
            report_cont.append(float(t))
        return prev, SolveReport(0, [], [], K0, continuation=report_cont)
    f = cyl.factor(h)
    rep = SolveReport(its, [float(x) for x in hist], [float(x) for x in damp], K0)
    rep.tol_K = float(curvature_spread(f, K0))
    return f, rep


def _replace(cfg, **kw):
    from dataclasses import replace
    return replace(cfg, **kw)


def _shift_logs(initial, d, cyl):
    """Difference of log terms between the target divisor and the initial guess's."""
    Z = np.exp(cyl.s[:, None] + 1j * (cyl.theta[None, :] + cyl.rot))
    new_logs, _ = _log_terms(Z, [p for p in d.finite_points])
    old_logs, _ = _log_terms(Z, [p for p in initial.divisor.finite_points])
    return new_logs - old_logs


def curvature_spread(f: LogPolarGridFactor, K0: float, mass_floor: float = 1e-8) -> float:
    """max |K/K0 - 1| over nodes carrying non-negligible area."""
    _, K = f.node_curvature()
    lw = f.cell_log_weight if f.cell_log_weight is not None else None
    dens = np.exp(lw + 2 * f.h) if lw is not None else np.ones_like(f.h)
    m = dens > mass_floor * dens.max()
    m[0] = m[-1] = False
    return float(np.max(np.abs(K[m] / K0 - 1.0)))


def continuation_family(base, alphas, cfg: SolverConfig | None = None, positions=None,
                        step: float = 0.0125, start: float | None = None):
    """Solve D_j = sum_{i>1} beta_i p_i + alpha_j * infinity for a decreasing alpha_j sequence.

    ``base`` lists the orders beta_2..beta_n (placed on the unit circle unless
    ``positions`` is given).  Near the critical value the direct solve loses
    its basin, so alpha is marched down from ``start`` (default: midway between
    the limit sum(base) and max(base)) in steps of at most ``step``, each solve
    warm-started from the previous one.  Returns a list of (alpha_j, factor, report).
    """
    cfg = cfg or SolverConfig()
    base = [float(b) for b in base]
    alphas = [float(a) for a in alphas]
    if any(a2 >= a1 for a1, a2 in zip(alphas, alphas[1:])):
        raise ValueError("alpha sequence must be strictly decreasing")
    if positions is None:
        k = len(base)
        positions = [complex(math.cos(2 * math.pi * i / k), math.sin(2 * math.pi * i / k))
                     for i in range(k)]
    a_lim = sum(base)
    if start is None:
        start = 0.5 * (a_lim + max(base))
    start = max(start, alphas[0])
    path = [start]
    for a in alphas:
        n = max(1, int(math.ceil((path[-1] - a) / step - 1e-9))) if a < path[-1] else 0
        path.extend(np.linspace(path[-1], a, n + 1)[1:].tolist())
    wanted = {round(a, 12) for a in alphas}
    out = []
    prev = None
    visited = []
    for a in path:
        d = ConicDivisor.from_orders(base + [a], list(positions) + [None])
        if classify(d).label != SUBCRITICAL:
            raise SolverError(f"D_j with alpha_j = {a} is {classify(d).label}")
        K0 = (1.0 + a) ** 2
        try:
            f, rep = solve_constant_curvature(d, K0, cfg, initial=prev)
        except SolverError:
            if prev is None:
                raise
            f, rep = solve_constant_curvature(d, K0, cfg)
        visited.append(float(a))
        prev = f
        if round(a, 12) in wanted:
            rep.continuation = list(visited)
            out.append((a, f, rep))
    return out


@dataclass(frozen=True)
class DiskConfig:
    n_r: int = 256
    n_theta: int = 128
    tol: float = 1e-9
    max_iter: int = 60
    min_damping: float = 1.0 / 1024
    blowup_guard: float = 60.0


@dataclass
class DirichletSolution:
    """Solution of Delta u = -K e^{2u} on the unit disk with u = s on the circle.

    ``u`` lives at cell centers r_j = (j + 1/2)/n_r, theta_k = (k + 1/2) 2 pi/n_theta.
    """

    r: np.ndarray
    theta: np.ndarray
    u: np.ndarray
    s: float
    K: object
    a: float
    b: float
    report: SolveReport

    @property
    def origin_value(self) -> float:
        # u ~ c + d r^2 near 0 from the two innermost ring means
        m0, m1 = self.u[0].mean(), self.u[1].mean()
        return float((9.0 * m0 - m1) / 8.0)

    @property
    def H(self) -> float:
        return float(max(self.u.max(), self.origin_value))

    def _fine(self, refine: int = 4):
        from scipy.interpolate import CubicSpline
        rk = np.concatenate([[0.0], self.r, [1.0]])
        vals = np.concatenate([np.full((1, self.u.shape[1]), self.origin_value), self.u,
                               np.full((1, self.u.shape[1]), self.s)])
        rf = np.linspace(0.0, 1.0, refine * len(self.r) + 1)
        uf = CubicSpline(rk, vals, axis=0)(rf)
        Z = rf[:, None] * np.exp(1j * self.theta[None, :])
        dens = np.asarray(self.K(Z), dtype=float) * np.exp(2 * uf)
        if dens.ndim == 0:
            dens = np.full(uf.shape, float(dens))
        return rf, uf, dens

    def level_functionals(self, ts, refine: int = 4):
        """(A(t), B(t)) for {u >= t}: per-ray linear crossing, trapezoid in r dr."""
        rf, uf, dens = self._fine(refine)
        dth = 2 * math.pi / len(self.theta)
        r0, r1 = rf[:-1, None], rf[1:, None]
        u0, u1 = uf[:-1], uf[1:]
        g0, g1 = dens[:-1], dens[1:]
        A, B = [], []
        for t in np.atleast_1d(ts):
            in0, in1 = u0 >= t, u1 >= t
            with np.errstate(divide="ignore", invalid="ignore"):
                lam = np.clip(np.where(u1 != u0, (t - u0) / (u1 - u0), 0.5), 0.0, 1.0)
            rc = r0 + lam * (r1 - r0)
            gc = g0 + lam * (g1 - g0)
            # portion of [r0, r1] with u >= t, as a sub-interval [lo, hi]
            lo = np.where(in0, r0, np.where(in1, rc, 0.0))
            hi = np.where(in0, np.where(in1, r1, rc), np.where(in1, r1, 0.0))
            glo = np.where(in0, g0, np.where(in1, gc, 0.0))
            ghi = np.where(in0, np.where(in1, g1, gc), np.where(in1, g1, 0.0))
            B.append(float(np.sum(0.5 * (hi ** 2 - lo ** 2)) * dth))
            A.append(float(np.sum(0.5 * (glo * lo + ghi * hi) * (hi - lo)) * dth))
        return np.array(A), np.array(B)


def _disk_laplacian(n_r, n_t):
    dr = 1.0 / n_r
    r = (np.arange(n_r) + 0.5) * dr
    rp, rm = r + 0.5 * dr, r - 0.5 * dr
    main = -(rp + rm) / (r * dr * dr)
    main[-1] -= rp[-1] / (r[-1] * dr * dr)  # Dirichlet ghost u_n = 2s - u_{n-1}
    up = rp[:-1] / (r[:-1] * dr * dr)
    lo = rm[1:] / (r[1:] * dr * dr)
    Lr = sp.diags([lo, main, up], [-1, 0, 1])
    dth = 2 * math.pi / n_t
    e = np.ones(n_t)
    Lt = sp.diags([e[:-1], -2 * e, e[:-1]], [-1, 0, 1]).tolil()
    Lt[0, -1] = Lt[-1, 0] = 1.0
    Lt = Lt.tocsr() / dth ** 2
    L = sp.kron(Lr, sp.identity(n_t)) + sp.kron(sp.diags(1.0 / r ** 2), Lt)
    bnd = np.zeros((n_r, n_t))
    bnd[-1] = 2.0 * rp[-1] / (r[-1] * dr * dr)
    return L.tocsr(), bnd.ravel(), r


def solve_dirichlet_disk(K, s: float, a: float | None = None, b: float | None = None,
                         cfg: DiskConfig | None = None) -> DirichletSolution:
    """Damped Newton for Delta u = -K e^{2u} on |z| < 1, u = s on |z| = 1.

    ``K`` maps complex points to curvature values (a float means constant K).
    Bounds a, b default to the sampled min and max of K.
    """
    cfg = cfg or DiskConfig()
    if callable(K):
        Kf = K
    else:
        k0 = float(K)
        Kf = lambda z: np.full(np.shape(z), k0)  # noqa: E731
    L, bnd, r = _disk_laplacian(cfg.n_r, cfg.n_theta)
    theta = (np.arange(cfg.n_theta) + 0.5) * 2 * math.pi / cfg.n_theta
    Kv = np.asarray(Kf(r[:, None] * np.exp(1j * theta[None, :])), dtype=float).ravel()
    if np.any(Kv <= 0):
        raise SolverError("curvature must be positive on the disk")
    a = float(Kv.min()) if a is None else float(a)
    b = float(Kv.max()) if b is None else float(b)
    bvec = bnd * s
    u = np.full(L.shape[0], float(s))
    # rows scaled by r (flux form) so round-off near the origin stays below tol
    w = np.repeat(r, cfg.n_theta)

    def residual(u):
        with np.errstate(over="ignore"):
            return w * (L @ u + bvec + Kv * np.exp(2 * u))

    F = residual(u)
    res = float(np.max(np.abs(F)))
    hist, damp = [res], []
    it = 0
    while res > cfg.tol:
        it += 1
        if it > cfg.max_iter:
            raise SolverError(f"Newton did not converge: residual {res:.3e}", hist)
        J = (sp.diags(w) @ (L + sp.diags(2 * Kv * np.exp(2 * u)))).tocsc()
        step = splu(J).solve(-F)
        t = 1.0
        while True:
            un = u + t * step
            Fn = residual(un)
            rn = float(np.max(np.abs(Fn)))
            if np.isfinite(rn) and rn < (1 - 1e-4 * t) * res:
                break
            t *= 0.5
            if t < cfg.min_damping:
                raise SolverError(f"Newton stalled at residual {res:.3e}; boundary value "
                                  f"{s} may admit no solution", hist)
        u, F, res = un, Fn, rn
        hist.append(res)
        damp.append(t)
        if np.max(u) > cfg.blowup_guard:
            raise SolverError("solution exceeds blow-up guard", hist)
    rep = SolveReport(it, hist, damp, float("nan"))
    return DirichletSolution(r, theta, u.reshape(cfg.n_r, cfg.n_theta), float(s), Kf, a, b, rep)


def disk_closed_form(s: float):
    """K = 1 radial solution ln(2 lam/(1 + lam^2 r^2)) with u(1) = s (minimal branch)."""
    es = math.exp(s)
    if es >= 1.0:
        raise ValueError("no radial K = 1 solution for s >= 0")
    lam = (1.0 - math.sqrt(1.0 - es * es)) / es
    return lam, (lambda r: np.log(2 * lam / (1 + (lam * np.asarray(r)) ** 2)))
