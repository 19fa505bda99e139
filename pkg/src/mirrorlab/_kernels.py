"""Compiled hot loops.

States are uint8 arrays over a storage box with origin (x0, y0); anything
outside the box is empty.  ``w`` is the cylinder circumference, 0 on the
plane.  Headings: 0=E, 1=N, 2=W, 3=S.  Mirror codes: 0 empty, 1 NW, 2 NE.

Status codes returned by ``trace_kernel``: 0 closed, 1 exited, 2 cap hit.
"""

import numpy as np
from numba import njit

CLOSED, EXITED, CAPPED = 0, 1, 2
BIG = 1 << 60

_DX = np.array([1, 0, -1, 0], dtype=np.int64)
_DY = np.array([0, 1, 0, -1], dtype=np.int64)


@njit(cache=True, inline="always")
def _reflect(d, s):
    if s == 0:
        return d
    if s == 1:
        return 3 - d
    return d ^ 1


@njit(cache=True, inline="always")
def _lookup(states, x0, y0, x, y):
    i = x - x0
    j = y - y0
    if 0 <= i < states.shape[0] and 0 <= j < states.shape[1]:
        return states[i, j]
    return 0


@njit(cache=True)
def trace_kernel(states, x0, y0, w, xlo, xhi, ylo, yhi, sx, sy, sd, cap, rec):
    """Follow the light from edge (sx, sy, sd).

    Records up to ``rec.shape[0]`` edges into ``rec``.  Returns
    (status, length, last_x, last_y, last_heading).
    """
    x, y, d = sx, sy, sd
    n = 0
    nrec = rec.shape[0]
    while True:
        if n >= cap:
            return CAPPED, n, x, y, d
        if n < nrec:
            rec[n, 0] = x
            rec[n, 1] = y
            rec[n, 2] = d
        n += 1
        nx = x + _DX[d]
        ny = y + _DY[d]
        if w > 0:
            if ny > w:
                ny -= w
            elif ny < 1:
                ny += w
        if nx < xlo or nx > xhi or ny < ylo or ny > yhi:
            return EXITED, n, x, y, d
        nd = _reflect(d, _lookup(states, x0, y0, nx, ny))
        if nx == sx and ny == sy and nd == sd:
            return CLOSED, n, x, y, d
        x, y, d = nx, ny, nd


@njit(cache=True)
def section_extent(states, x0, w, M):
    """Largest |x| visited by any orbit through the section x = 0.

    Tracing is confined to -M <= x <= M; an orbit that leaves it reports
    M + 1.  Every orbit through a vertex (0, y) contains an edge leaving
    that vertex, so the 4w edges out of the section cover all of them.
    """
    best = 0
    for y in range(1, w + 1):
        for d in range(4):
            x, yy, dd = 0, y, d
            while True:
                nx = x + _DX[dd]
                ny = yy + _DY[dd]
                if ny > w:
                    ny -= w
                elif ny < 1:
                    ny += w
                if nx < -M or nx > M:
                    return M + 1
                ax = nx if nx >= 0 else -nx
                if ax > best:
                    best = ax
                nd = _reflect(dd, _lookup(states, x0, 1, nx, ny))
                if nx == 0 and ny == y and nd == d:
                    break
                x, yy, dd = nx, ny, nd
    return best


@njit(cache=True)
def batch_section_extent(states3, x0, w, M):
    out = np.empty(states3.shape[0], dtype=np.int64)
    for r in range(states3.shape[0]):
        out[r] = section_extent(states3[r], x0, w, M)
    return out


@njit(cache=True)
def first_exit(states, x0, y0, w, xlo, xhi, ylo, yhi, starts, cap):
    """Index of the first row of ``starts`` whose trace leaves the bound,
    or -1 when every trace closes.  Also returns the total edge count."""
    rec = np.empty((0, 3), dtype=np.int64)
    total = 0
    for k in range(starts.shape[0]):
        status, n, _, _, _ = trace_kernel(
            states, x0, y0, w, xlo, xhi, ylo, yhi,
            starts[k, 0], starts[k, 1], starts[k, 2], cap, rec,
        )
        total += n
        if status == EXITED:
            return k, total
    return -1, total
