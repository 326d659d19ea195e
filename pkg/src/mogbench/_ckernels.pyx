# cython: language_level=3
"""Compiled geometric hot loops; see ``_pykernels`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

cdef double EPS = 1e-9


cdef inline bint _in_rect(double px, double py, double cx, double cy,
                          double c, double s, double hw, double hd) noexcept nogil:
    cdef double dx = px - cx
    cdef double dy = py - cy
    cdef double lx = dx * c + dy * s
    cdef double ly = dy * c - dx * s
    return fabs(lx) <= hw + EPS and fabs(ly) <= hd + EPS


cdef inline bint _in_disc(double px, double py, double cx, double cy, double r) noexcept nogil:
    cdef double dx = px - cx
    cdef double dy = py - cy
    return dx * dx + dy * dy <= r * r


def in_rect_mask(px, py, double cx, double cy, double c, double s, double half_w, double half_d):
    cdef const double[:] xs = np.ascontiguousarray(px, dtype=np.float64)
    cdef const double[:] ys = np.ascontiguousarray(py, dtype=np.float64)
    cdef Py_ssize_t n = xs.shape[0], i
    out = np.zeros(n, dtype=np.bool_)
    cdef cnp.npy_bool[:] o = out
    with nogil:
        for i in range(n):
            o[i] = _in_rect(xs[i], ys[i], cx, cy, c, s, half_w, half_d)
    return out


def in_disc_mask(px, py, double cx, double cy, double radius):
    cdef const double[:] xs = np.ascontiguousarray(px, dtype=np.float64)
    cdef const double[:] ys = np.ascontiguousarray(py, dtype=np.float64)
    cdef Py_ssize_t n = xs.shape[0], i
    cdef double r = radius + EPS
    out = np.zeros(n, dtype=np.bool_)
    cdef cnp.npy_bool[:] o = out
    with nogil:
        for i in range(n):
            o[i] = _in_disc(xs[i], ys[i], cx, cy, r)
    return out


def first_feasible_yaw(mx, my, ox, oy, double cx, double cy, cos_arr, sin_arr,
                       double half_w, double half_d):
    cdef const double[:] mxs = np.ascontiguousarray(mx, dtype=np.float64)
    cdef const double[:] mys = np.ascontiguousarray(my, dtype=np.float64)
    cdef const double[:] oxs = np.ascontiguousarray(ox, dtype=np.float64)
    cdef const double[:] oys = np.ascontiguousarray(oy, dtype=np.float64)
    cdef const double[:] cs = np.ascontiguousarray(cos_arr, dtype=np.float64)
    cdef const double[:] ss = np.ascontiguousarray(sin_arr, dtype=np.float64)
    cdef Py_ssize_t nm = mxs.shape[0], no = oxs.shape[0], nk = cs.shape[0]
    cdef Py_ssize_t k, i
    cdef bint ok
    cdef Py_ssize_t found = -1
    with nogil:
        for k in range(nk):
            ok = True
            for i in range(nm):
                if not _in_rect(mxs[i], mys[i], cx, cy, cs[k], ss[k], half_w, half_d):
                    ok = False
                    break
            if not ok:
                continue
            for i in range(no):
                if _in_rect(oxs[i], oys[i], cx, cy, cs[k], ss[k], half_w, half_d):
                    ok = False
                    break
            if ok:
                found = k
                break
    return found


def grid_counts(px, py, layers, gx, gy, cos_arr, sin_arr, double half_w, double half_d,
                double disc_radius, long max_layers):
    cdef const double[:] xs = np.ascontiguousarray(px, dtype=np.float64)
    cdef const double[:] ys = np.ascontiguousarray(py, dtype=np.float64)
    cdef const cnp.int64_t[:] lay = np.ascontiguousarray(layers, dtype=np.int64)
    cdef const double[:] gxs = np.ascontiguousarray(gx, dtype=np.float64)
    cdef const double[:] gys = np.ascontiguousarray(gy, dtype=np.float64)
    cdef const double[:] cs = np.ascontiguousarray(cos_arr, dtype=np.float64)
    cdef const double[:] ss = np.ascontiguousarray(sin_arr, dtype=np.float64)
    cdef Py_ssize_t n = xs.shape[0], nx = gxs.shape[0], ny = gys.shape[0], nk = cs.shape[0]
    cdef Py_ssize_t ix, iy, k, i, pose
    cdef double r = disc_radius + EPS
    cdef bint disc = disc_radius > 0
    cdef long top, floor_, cnt
    out = np.zeros(nx * ny * nk, dtype=np.int64)
    cdef cnp.int64_t[:] o = out
    inside_buf = np.zeros(max(n, 1), dtype=np.uint8)
    cdef cnp.uint8_t[:] inside = inside_buf
    if n == 0:
        return out
    with nogil:
        for ix in range(nx):
            for iy in range(ny):
                for k in range(nk):
                    pose = (ix * ny + iy) * nk + k
                    top = -1
                    for i in range(n):
                        if disc:
                            inside[i] = _in_disc(xs[i], ys[i], gxs[ix], gys[iy], r)
                        else:
                            inside[i] = _in_rect(xs[i], ys[i], gxs[ix], gys[iy], cs[k], ss[k], half_w, half_d)
                        if inside[i] and lay[i] > top:
                            top = lay[i]
                    floor_ = top - (max_layers - 1)
                    cnt = 0
                    for i in range(n):
                        if inside[i] and lay[i] >= floor_:
                            cnt += 1
                    o[pose] = cnt
    return out
