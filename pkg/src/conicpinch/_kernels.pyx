# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: 5-point Laplacian and marching-squares level-set cells."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

from ._mstable import flat_tables

cnp.import_array()

_PL, _PV, _SL, _SV = flat_tables()


def laplacian5(double[:, ::1] h, double spacing):
    cdef Py_ssize_t ny = h.shape[0], nx = h.shape[1], i, j
    out_arr = np.full((ny, nx), np.nan)
    cdef double[:, ::1] out = out_arr
    cdef double inv = 1.0 / (spacing * spacing)
    for i in range(1, ny - 1):
        for j in range(1, nx - 1):
            out[i, j] = (h[i + 1, j] + h[i - 1, j] + h[i, j + 1] + h[i, j - 1]
                         - 4.0 * h[i, j]) * inv
    return out_arr


cdef inline double _t(double a, double b, double level) nogil:
    cdef double d = b - a
    cdef double t
    if d == 0.0:
        return 0.5
    t = (level - a) / d
    if t < 0.0:
        return 0.0
    if t > 1.0:
        return 1.0
    return t


def level_set_cells(double[:, ::1] f, double level):
    cdef Py_ssize_t ny = f.shape[0], nx = f.shape[1]
    cdef Py_ssize_t i, j, k, p, v, nv, nseg = 0, s
    cdef int code
    cdef double c[4]
    cdef double vx[8]
    cdef double vy[8]
    cdef double cx[4]
    cdef double cy[4]
    cdef double t, area, center
    cdef int[:, ::1] PL = _PL
    cdef int[:, :, ::1] PV = _PV
    cdef int[::1] SL = _SL
    cdef int[:, :, ::1] SV = _SV
    frac_arr = np.zeros((ny - 1, nx - 1))
    cdef double[:, ::1] frac = frac_arr
    seg_arr = np.empty((2 * (ny - 1) * (nx - 1) if ny > 1 and nx > 1 else 0, 4))
    cdef double[:, ::1] seg = seg_arr
    cx[0] = 0.0; cy[0] = 0.0
    cx[1] = 1.0; cy[1] = 0.0
    cx[2] = 1.0; cy[2] = 1.0
    cx[3] = 0.0; cy[3] = 1.0
    with nogil:
        for i in range(ny - 1):
            for j in range(nx - 1):
                c[0] = f[i, j]
                c[1] = f[i, j + 1]
                c[2] = f[i + 1, j + 1]
                c[3] = f[i + 1, j]
                code = 0
                for k in range(4):
                    if c[k] >= level:
                        code = code | (1 << k)
                if code == 0:
                    continue
                if code == 15:
                    frac[i, j] = 1.0
                    continue
                if code == 5 or code == 10:
                    center = 0.25 * (c[0] + c[1] + c[2] + c[3])
                    if center >= level:
                        code = 16 if code == 5 else 17
                for k in range(4):
                    vx[k] = cx[k]
                    vy[k] = cy[k]
                    t = _t(c[k], c[(k + 1) % 4], level)
                    vx[4 + k] = cx[k] + t * (cx[(k + 1) % 4] - cx[k])
                    vy[4 + k] = cy[k] + t * (cy[(k + 1) % 4] - cy[k])
                for p in range(2):
                    nv = PL[code, p]
                    if nv == 0:
                        continue
                    area = 0.0
                    for v in range(nv):
                        k = PV[code, p, v]
                        s = PV[code, p, (v + 1) % nv]
                        area += vx[k] * vy[s] - vx[s] * vy[k]
                    frac[i, j] += 0.5 * fabs(area)
                for p in range(SL[code]):
                    k = SV[code, p, 0]
                    s = SV[code, p, 1]
                    seg[nseg, 0] = vx[k] + j
                    seg[nseg, 1] = vy[k] + i
                    seg[nseg, 2] = vx[s] + j
                    seg[nseg, 3] = vy[s] + i
                    nseg += 1
    return frac_arr, seg_arr[:nseg].copy()
