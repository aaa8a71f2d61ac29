# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled strip accumulation kernel. Twin of ``_edie_py``; keep in sync."""

import numpy as np

cimport numpy as cnp
from libc.math cimport isfinite


cdef double _polygon_area(double* pt, double* px, int n) noexcept nogil:
    cdef double acc = 0.0
    cdef int i, j
    if n < 3:
        return 0.0
    for i in range(n):
        j = i + 1
        if j == n:
            j = 0
        acc += pt[i] * px[j] - pt[j] * px[i]
    if acc < 0.0:
        acc = -acc
    return acc * 0.5


cdef int _clip_halfplane(double* pt, double* px, int n,
                         double* qt, double* qx,
                         int axis, double bound, int keep_ge) noexcept nogil:
    cdef int m = 0
    cdef int i, ip
    cdef double cv, pv, f
    cdef bint cur_in, prev_in
    if n == 0:
        return 0
    for i in range(n):
        ip = i - 1
        if ip < 0:
            ip = n - 1
        cv = pt[i] if axis == 0 else px[i]
        pv = pt[ip] if axis == 0 else px[ip]
        if keep_ge:
            cur_in = cv >= bound
            prev_in = pv >= bound
        else:
            cur_in = cv <= bound
            prev_in = pv <= bound
        if cur_in != prev_in:
            f = (bound - pv) / (cv - pv)
            qt[m] = pt[ip] + f * (pt[i] - pt[ip])
            qx[m] = px[ip] + f * (px[i] - px[ip])
            m += 1
        if cur_in:
            qt[m] = pt[i]
            qx[m] = px[i]
            m += 1
    return m


cdef double _clip_quad_rect(double ta, double tb, double la, double lb,
                            double ua, double ub,
                            double t_lo, double t_hi,
                            double x_lo, double x_hi) noexcept nogil:
    cdef double bt[16]
    cdef double bx[16]
    cdef double ct[16]
    cdef double cx[16]
    cdef int n
    bt[0] = ta; bx[0] = la
    bt[1] = tb; bx[1] = lb
    bt[2] = tb; bx[2] = ub
    bt[3] = ta; bx[3] = ua
    n = _clip_halfplane(bt, bx, 4, ct, cx, 0, t_lo, 1)
    n = _clip_halfplane(ct, cx, n, bt, bx, 0, t_hi, 0)
    n = _clip_halfplane(bt, bx, n, ct, cx, 1, x_lo, 1)
    n = _clip_halfplane(ct, cx, n, bt, bx, 1, x_hi, 0)
    return _polygon_area(bt, bx, n)


def accumulate_strips(object strips_in, int n_h, int n_s, double dt, double dx,
                      cnp.ndarray[cnp.float64_t, ndim=2] d_out,
                      cnp.ndarray[cnp.float64_t, ndim=2] t_out,
                      cnp.ndarray[cnp.float64_t, ndim=2] a_out):
    """Accumulate per-cell distance, time and band area from trajectory strips.

    Same contract as ``_edie_py.accumulate_strips``.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] strips = np.ascontiguousarray(
        strips_in, dtype=np.float64)
    cdef double[:, ::1] S = strips
    cdef double[:, ::1] D = d_out
    cdef double[:, ::1] T = t_out
    cdef double[:, ::1] A = a_out
    cdef Py_ssize_t k, n = S.shape[0]
    cdef int c, c0, c1, r, r0, r1
    cdef double t0, t1, xl0, xl1, xu0, xu1
    cdef double ta_full, tb_full, inv_span, ta, tb, fa, fb
    cdef double la, lb, lo, hi, ua, ub, top
    cdef double seg, seg_lo, seg_hi, tscale, area
    cdef double t_len = n_h * dt
    cdef bint has_band

    with nogil:
        for k in range(n):
            t0 = S[k, 0]; t1 = S[k, 1]
            xl0 = S[k, 2]; xl1 = S[k, 3]
            xu0 = S[k, 4]; xu1 = S[k, 5]
            if not (t1 > t0):
                continue
            ta_full = t0 if t0 > 0.0 else 0.0
            tb_full = t1 if t1 < t_len else t_len
            if not (tb_full > ta_full):
                continue
            inv_span = 1.0 / (t1 - t0)
            c0 = <int>(ta_full / dt)
            if c0 > n_h - 1:
                c0 = n_h - 1
            c1 = <int>(tb_full / dt)
            if c1 > n_h - 1:
                c1 = n_h - 1
            has_band = isfinite(xu0) and isfinite(xu1)
            for c in range(c0, c1 + 1):
                ta = ta_full if ta_full > c * dt else c * dt
                tb = tb_full if tb_full < (c + 1) * dt else (c + 1) * dt
                if not (tb > ta):
                    continue
                fa = (ta - t0) * inv_span
                fb = (tb - t0) * inv_span
                la = xl0 + fa * (xl1 - xl0)
                lb = xl0 + fb * (xl1 - xl0)
                if la <= lb:
                    lo = la; hi = lb
                else:
                    lo = lb; hi = la
                if hi - lo <= 1e-12:
                    r = <int>(lo / dx)
                    if r > n_s - 1:
                        r = n_s - 1
                    if r < 0:
                        r = 0
                    T[r, c] += tb - ta
                else:
                    tscale = (tb - ta) / (hi - lo)
                    r0 = <int>(lo / dx)
                    if r0 < 0:
                        r0 = 0
                    r1 = <int>(hi / dx)
                    if r1 > n_s - 1:
                        r1 = n_s - 1
                    for r in range(r0, r1 + 1):
                        seg_lo = lo if lo > r * dx else r * dx
                        seg_hi = hi if hi < (r + 1) * dx else (r + 1) * dx
                        seg = seg_hi - seg_lo
                        if seg > 0.0:
                            D[r, c] += seg
                            T[r, c] += seg * tscale
                if has_band:
                    ua = xu0 + fa * (xu1 - xu0)
                    ub = xu0 + fb * (xu1 - xu0)
                    top = ua if ua > ub else ub
                    r0 = <int>(lo / dx)
                    if r0 < 0:
                        r0 = 0
                    r1 = <int>(top / dx)
                    if r1 > n_s - 1:
                        r1 = n_s - 1
                    for r in range(r0, r1 + 1):
                        area = _clip_quad_rect(ta, tb, la, lb, ua, ub,
                                               c * dt, (c + 1) * dt,
                                               r * dx, (r + 1) * dx)
                        if area > 0.0:
                            A[r, c] += area
