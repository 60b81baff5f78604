"""Pure-numpy implementations of the hot kernels (fallback for the compiled module)."""

import numpy as np

from ._mstable import POLYS, SEGS

_CORNERS = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def laplacian5(h, spacing):
    h = np.asarray(h, dtype=np.float64)
    out = np.full(h.shape, np.nan)
    inv = 1.0 / (spacing * spacing)  # same rounding as the compiled kernel
    out[1:-1, 1:-1] = (h[2:, 1:-1] + h[:-2, 1:-1] + h[1:-1, 2:] + h[1:-1, :-2]
                       - 4.0 * h[1:-1, 1:-1]) * inv
    return out


def _cell_vertices(f, level):
    """(ny-1, nx-1, 8, 2) vertex coordinates relative to the cell origin."""
    c = [f[:-1, :-1], f[:-1, 1:], f[1:, 1:], f[1:, :-1]]
    shape = c[0].shape
    V = np.zeros(shape + (8, 2))
    for k in range(4):
        V[..., k, :] = _CORNERS[k]
        a, b = c[k], c[(k + 1) % 4]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (level - a) / (b - a)
        t = np.clip(np.nan_to_num(t, nan=0.5), 0.0, 1.0)
        P, Q = _CORNERS[k], _CORNERS[(k + 1) % 4]
        V[..., 4 + k, 0] = P[0] + t * (Q[0] - P[0])
        V[..., 4 + k, 1] = P[1] + t * (Q[1] - P[1])
    return c, V


def _codes(c, level):
    code = np.zeros(c[0].shape, dtype=np.int64)
    for k in range(4):
        code |= (c[k] >= level).astype(np.int64) << k
    center = 0.25 * (c[0] + c[1] + c[2] + c[3])
    code = np.where((code == 5) & (center >= level), 16, code)
    code = np.where((code == 10) & (center >= level), 17, code)
    return code


def level_set_cells(f, level):
    """Marching squares on a node field.

    Returns (frac, segments): per-cell area fraction of {f >= level} and an
    (M, 4) array of interface segments (x1, y1, x2, y2) in index units
    (x = column, y = row).
    """
    f = np.asarray(f, dtype=np.float64)
    c, V = _cell_vertices(f, level)
    code = _codes(c, level)
    frac = np.zeros(code.shape)
    frac[code == 15] = 1.0
    segs, keys = [], []
    ny, nx = code.shape
    jj, ii = np.meshgrid(np.arange(nx, dtype=float), np.arange(ny, dtype=float))
    for cc in range(18):
        if cc in (0, 15):
            continue
        m = code == cc
        if not m.any():
            continue
        Vm = V[m]
        for poly in POLYS[cc]:
            P = Vm[:, poly, :]
            x, y = P[..., 0], P[..., 1]
            frac[m] += 0.5 * np.abs(np.sum(x * np.roll(y, -1, 1) - np.roll(x, -1, 1) * y, axis=1))
        cells = np.flatnonzero(m.ravel())
        for p, (a, b) in enumerate(SEGS[cc]):
            segs.append(np.column_stack([Vm[:, a, 0] + jj[m], Vm[:, a, 1] + ii[m],
                                         Vm[:, b, 0] + jj[m], Vm[:, b, 1] + ii[m]]))
            keys.append(2 * cells + p)
    if not segs:
        return frac, np.zeros((0, 4))
    # row-major cell order, as in the compiled kernel, so sums agree bit for bit
    order = np.argsort(np.concatenate(keys), kind="stable")
    return frac, np.concatenate(segs)[order]
