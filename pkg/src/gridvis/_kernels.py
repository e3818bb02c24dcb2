"""Compiled inner loops for the transport sweep and the ray-casting oracle."""

from __future__ import annotations

import numba
import numpy as np

# the bundled TBB is too old for numba and only produces a warning
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

RADIAL = 0
SCALED = 1
TABULATED = 2

# (sx, sy, skip_i0, skip_j0): each axis half-line is owned by the first
# quadrant that reaches it.
QUADRANTS = (
    (1, 1, False, False),
    (-1, 1, True, False),
    (-1, -1, False, True),
    (1, -1, True, True),
)

_BIG = np.iinfo(np.int64).max


@numba.njit(cache=True, nogil=True, inline="always")
def _blend(a, diag, c):
    # convex combination, clamped so rounding never leaves [min, max]
    v = (1.0 - c) * a + c * diag
    if a < diag:
        lo, hi = a, diag
    else:
        lo, hi = diag, a
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


@numba.njit(cache=True, nogil=True)
def _sweep_quadrant(occ, out, lx, ly, sx, sy, skip_i0, skip_j0,
                    light, alpha, ryx, rxy, mode, k, tab_a, tab_b):
    ny, nx = occ.shape
    mx = nx - lx if sx > 0 else lx + 1
    my = ny - ly if sy > 0 else ly + 1
    for j in range(my):
        if skip_j0 and j == 0:
            continue
        py = ly + sy * j
        for i in range(mx):
            if skip_i0 and i == 0:
                continue
            px = lx + sx * i
            if i == 0 and j == 0:
                v = light
            elif i == 0:
                v = out[py - sy, px]
            elif j == 0:
                v = out[py, px - sx]
            else:
                if mode == RADIAL:
                    num = j * ryx
                    den = float(i)
                elif mode == SCALED:
                    num = j * ryx
                    den = k * i
                else:
                    num = tab_b[py, px] * ryx
                    den = tab_a[py, px]
                diag = out[py - sy, px - sx]
                if num < den:
                    c = num / den
                    v = _blend(out[py, px - sx], diag, c)
                elif num == den:
                    v = diag
                else:
                    if mode == TABULATED:
                        c = (den * rxy) / tab_b[py, px]
                    else:
                        c = (den * rxy) / j
                    if c > 1.0:
                        c = 1.0
                    v = _blend(out[py - sy, px], diag, c)
            out[py, px] = v * (1.0 - occ[py, px]) * alpha


@numba.njit(cache=True, nogil=True)
def transport(occ, lx, ly, light, alpha, ryx, rxy, mode, k, tab_a, tab_b):
    out = np.empty_like(occ)
    _sweep_quadrant(occ, out, lx, ly, 1, 1, False, False, light, alpha, ryx, rxy, mode, k, tab_a, tab_b)
    _sweep_quadrant(occ, out, lx, ly, -1, 1, True, False, light, alpha, ryx, rxy, mode, k, tab_a, tab_b)
    _sweep_quadrant(occ, out, lx, ly, -1, -1, False, True, light, alpha, ryx, rxy, mode, k, tab_a, tab_b)
    _sweep_quadrant(occ, out, lx, ly, 1, -1, True, True, light, alpha, ryx, rxy, mode, k, tab_a, tab_b)
    return out


@numba.njit(cache=True, nogil=True)
def segment_clear(occ, ax, ay, bx, by, threshold, block_target):
    """Supercover walk from the centre of ``a`` to the centre of ``b``.

    Crossing times are compared in exact integer arithmetic: the k-th vertical
    boundary is crossed at t = (2k+1) / (2|dx|), the k-th horizontal one at
    t = (2k+1) / (2|dy|). A tie is a lattice corner and both side cells count.
    """
    if ax == bx and ay == by:
        return True
    dx = abs(bx - ax)
    dy = abs(by - ay)
    sx = 1 if bx > ax else -1
    sy = 1 if by > ay else -1
    x = ax
    y = ay
    kx = 0
    ky = 0
    while kx < dx or ky < dy:
        tx = (2 * kx + 1) * dy if kx < dx else _BIG
        ty = (2 * ky + 1) * dx if ky < dy else _BIG
        if tx < ty:
            x += sx
            kx += 1
        elif ty < tx:
            y += sy
            ky += 1
        else:
            if occ[y, x + sx] >= threshold or occ[y + sy, x] >= threshold:
                return False
            x += sx
            y += sy
            kx += 1
            ky += 1
        if x == bx and y == by:
            if block_target and occ[y, x] >= threshold:
                return False
        elif occ[y, x] >= threshold:
            return False
    return True


@numba.njit(cache=True, parallel=True)
def raycast_all(occ, sx, sy, threshold):
    ny, nx = occ.shape
    mask = np.empty((ny, nx), dtype=np.bool_)
    for y in numba.prange(ny):
        for x in range(nx):
            mask[y, x] = segment_clear(occ, sx, sy, x, y, threshold, True)
    return mask
