"""Pure-Python (numpy) implementations of the geometric hot loops.

These mirror ``_ckernels.pyx`` operation for operation so both backends
classify points identically. Rotations are passed in as precomputed
cosine/sine values; the kernels never call trig functions themselves.
"""

from __future__ import annotations

import numpy as np

# Inclusive boundary slack, mm.
EPS = 1e-9

# max poses evaluated per vectorized block in grid_counts
_BLOCK = 4096


def in_rect_mask(px, py, cx, cy, c, s, half_w, half_d):
    dx = px - cx
    dy = py - cy
    lx = dx * c + dy * s
    ly = dy * c - dx * s
    return (np.abs(lx) <= half_w + EPS) & (np.abs(ly) <= half_d + EPS)


def in_disc_mask(px, py, cx, cy, radius):
    dx = px - cx
    dy = py - cy
    r = radius + EPS
    return dx * dx + dy * dy <= r * r


def first_feasible_yaw(mx, my, ox, oy, cx, cy, cos_arr, sin_arr, half_w, half_d):
    """Index of the first rotation whose rectangle holds every member point
    and no outsider point, or -1."""
    for k in range(len(cos_arr)):
        c = cos_arr[k]
        s = sin_arr[k]
        if not in_rect_mask(mx, my, cx, cy, c, s, half_w, half_d).all():
            continue
        if len(ox) and in_rect_mask(ox, oy, cx, cy, c, s, half_w, half_d).any():
            continue
        return k
    return -1


def grid_counts(px, py, layers, gx, gy, cos_arr, sin_arr, half_w, half_d, disc_radius, max_layers):
    """Candidate counts for every pose of a grid.

    Poses are ordered ``(ix * len(gy) + iy) * len(cos_arr) + k``. A point is
    a candidate when its center is inside the footprint and its layer is
    within ``max_layers`` of the highest layer inside the footprint.
    A positive ``disc_radius`` selects a disc footprint (rotation ignored).
    """
    nx, ny, nk = len(gx), len(gy), len(cos_arr)
    n_pose = nx * ny * nk
    out = np.zeros(n_pose, dtype=np.int64)
    if len(px) == 0 or n_pose == 0:
        return out
    ix, iy, k = np.unravel_index(np.arange(n_pose), (nx, ny, nk))
    pcx = np.asarray(gx, dtype=float)[ix]
    pcy = np.asarray(gy, dtype=float)[iy]
    pc = np.asarray(cos_arr, dtype=float)[k]
    ps = np.asarray(sin_arr, dtype=float)[k]
    lay = np.asarray(layers, dtype=np.int64)
    for start in range(0, n_pose, _BLOCK):
        sl = slice(start, start + _BLOCK)
        bx = pcx[sl, None]
        by = pcy[sl, None]
        if disc_radius > 0:
            mask = in_disc_mask(px[None, :], py[None, :], bx, by, disc_radius)
        else:
            mask = in_rect_mask(px[None, :], py[None, :], bx, by, pc[sl, None], ps[sl, None], half_w, half_d)
        top = np.where(mask, lay[None, :], -1).max(axis=1)
        floor = top - (max_layers - 1)
        out[sl] = (mask & (lay[None, :] >= floor[:, None])).sum(axis=1)
    return out
