"""Pure-Python strip accumulation kernel.

Fallback used when the compiled extension is unavailable. Mirrors
``_edie_cy`` operation for operation so both backends agree to float
rounding; keep the two in sync when touching either.
"""

import math

import numpy as np


def polygon_area(pts):
    """Shoelace area of a polygon given as a list of (t, x) vertices."""
    n = len(pts)
    if n < 3:
        return 0.0
    acc = 0.0
    for i in range(n):
        t0, x0 = pts[i]
        t1, x1 = pts[(i + 1) % n]
        acc += t0 * x1 - t1 * x0
    return abs(acc) * 0.5


def _clip_halfplane(pts, axis, bound, keep_ge):
    """Sutherland-Hodgman clip of `pts` against one axis-aligned half-plane."""
    if not pts:
        return pts
    out = []
    n = len(pts)
    for i in range(n):
        cur = pts[i]
        prev = pts[i - 1]
        if keep_ge:
            cur_in = cur[axis] >= bound
            prev_in = prev[axis] >= bound
        else:
            cur_in = cur[axis] <= bound
            prev_in = prev[axis] <= bound
        if cur_in != prev_in:
            # edge crosses the boundary; denominator nonzero by construction
            f = (bound - prev[axis]) / (cur[axis] - prev[axis])
            out.append(
                (
                    prev[0] + f * (cur[0] - prev[0]),
                    prev[1] + f * (cur[1] - prev[1]),
                )
            )
        if cur_in:
            out.append(cur)
    return out


def clip_polygon_rect(pts, t_lo, t_hi, x_lo, x_hi):
    """Area of polygon ∩ axis-aligned rectangle [t_lo,t_hi]×[x_lo,x_hi]."""
    pts = _clip_halfplane(pts, 0, t_lo, True)
    pts = _clip_halfplane(pts, 0, t_hi, False)
    pts = _clip_halfplane(pts, 1, x_lo, True)
    pts = _clip_halfplane(pts, 1, x_hi, False)
    return polygon_area(pts)


def accumulate_strips(strips, n_h, n_s, dt, dx, d_out, t_out, a_out):
    """Accumulate per-cell distance, time and band area from trajectory strips.

    Each strip row is (t0, t1, xlo0, xlo1, xup0, xup1): the trajectory moves
    linearly from xlo0 to xlo1 over [t0, t1]; the band upper boundary moves
    from xup0 to xup1. A non-finite upper boundary means no band (distance
    and time still accrue). Outputs are (n_s, n_h) arrays accumulated in
    place: d_out meters, t_out seconds, a_out m*s.
    """
    strips = np.ascontiguousarray(strips, dtype=np.float64)
    t_len = n_h * dt
    for k in range(strips.shape[0]):
        t0, t1, xl0, xl1, xu0, xu1 = strips[k]
        if not (t1 > t0):
            continue
        ta_full = t0 if t0 > 0.0 else 0.0
        tb_full = t1 if t1 < t_len else t_len
        if not (tb_full > ta_full):
            continue
        inv_span = 1.0 / (t1 - t0)
        c0 = int(ta_full / dt)
        if c0 > n_h - 1:
            c0 = n_h - 1
        c1 = int(tb_full / dt)
        if c1 > n_h - 1:
            c1 = n_h - 1
        has_band = math.isfinite(xu0) and math.isfinite(xu1)
        for c in range(c0, c1 + 1):
            ta = max(ta_full, c * dt)
            tb = min(tb_full, (c + 1) * dt)
            if not (tb > ta):
                continue
            fa = (ta - t0) * inv_span
            fb = (tb - t0) * inv_span
            la = xl0 + fa * (xl1 - xl0)
            lb = xl0 + fb * (xl1 - xl0)
            # distance / time from the trajectory segment
            if la <= lb:
                lo, hi = la, lb
            else:
                lo, hi = lb, la
            if hi - lo <= 1e-12:
                r = int(lo / dx)
                if r > n_s - 1:
                    r = n_s - 1
                if r < 0:
                    r = 0
                t_out[r, c] += tb - ta
            else:
                tscale = (tb - ta) / (hi - lo)
                r0 = int(lo / dx)
                if r0 < 0:
                    r0 = 0
                r1 = int(hi / dx)
                if r1 > n_s - 1:
                    r1 = n_s - 1
                for r in range(r0, r1 + 1):
                    seg_lo = max(lo, r * dx)
                    seg_hi = min(hi, (r + 1) * dx)
                    seg = seg_hi - seg_lo
                    if seg > 0.0:
                        d_out[r, c] += seg
                        t_out[r, c] += seg * tscale
            # headway band area
            if has_band:
                ua = xu0 + fa * (xu1 - xu0)
                ub = xu0 + fb * (xu1 - xu0)
                top = ua if ua > ub else ub
                r0 = int(lo / dx)
                if r0 < 0:
                    r0 = 0
                r1 = int(top / dx)
                if r1 > n_s - 1:
                    r1 = n_s - 1
                quad = [(ta, la), (tb, lb), (tb, ub), (ta, ua)]
                for r in range(r0, r1 + 1):
                    area = clip_polygon_rect(quad, c * dt, (c + 1) * dt, r * dx, (r + 1) * dx)
                    if area > 0.0:
                        a_out[r, c] += area
