"""Marching-squares case table shared by the compiled and pure-Python kernels.

Cell corners (index units): c0=(0,0), c1=(1,0), c2=(1,1), c3=(0,1); edge k
runs from corner k to corner k+1 (mod 4).  Vertex codes 0..3 are corners,
4..7 are the crossing points on edges 0..3.  Case bit k is set when corner k
lies in {f >= level}.  Codes 16 and 17 are the saddle cases 5 and 10 when the
cell-center average is inside (the two inside corners are connected).
"""

import numpy as np


def _traverse(case):
    verts = []
    for k in range(4):
        a = (case >> k) & 1
        b = (case >> ((k + 1) % 4)) & 1
        if a:
            verts.append(k)
        if a != b:
            verts.append(4 + k)
    return verts


POLYS = {c: ([_traverse(c)] if 0 < c < 15 and c not in (5, 10) else []) for c in range(16)}
POLYS[15] = [[0, 1, 2, 3]]
POLYS[5] = [[0, 4, 7], [5, 2, 6]]
POLYS[10] = [[4, 1, 5], [6, 3, 7]]
POLYS[16] = [_traverse(5)]
POLYS[17] = [_traverse(10)]

SEGS = {}
for c in range(16):
    edges = [k for k in range(4) if ((c >> k) & 1) != ((c >> ((k + 1) % 4)) & 1)]
    SEGS[c] = [tuple(edges)] if len(edges) == 2 else []
SEGS[5] = [(7, 4), (5, 6)]
SEGS[10] = [(4, 5), (6, 7)]
SEGS[16] = [(4, 5), (6, 7)]
SEGS[17] = [(7, 4), (5, 6)]
SEGS = {c: [tuple(e if e >= 4 else e + 4 for e in s) for s in v] for c, v in SEGS.items()}

N_CODES = 18
MAX_POLY = 2
MAX_VERT = 6


def flat_tables():
    """Dense int32 arrays for the compiled kernel.

    poly_len[code, p]      number of vertices of polygon p (0 = absent)
    poly_vert[code, p, v]  vertex codes
    seg_len[code]          number of segments
    seg_vert[code, s, 2]   vertex codes of segment endpoints
    """
    poly_len = np.zeros((N_CODES, MAX_POLY), np.int32)
    poly_vert = np.zeros((N_CODES, MAX_POLY, MAX_VERT), np.int32)
    seg_len = np.zeros(N_CODES, np.int32)
    seg_vert = np.zeros((N_CODES, 2, 2), np.int32)
    for c in range(N_CODES):
        for p, poly in enumerate(POLYS[c]):
            poly_len[c, p] = len(poly)
            poly_vert[c, p, :len(poly)] = poly
        seg_len[c] = len(SEGS[c])
        for s, seg in enumerate(SEGS[c]):
            seg_vert[c, s] = seg
    return poly_len, poly_vert, seg_len, seg_vert
