# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner kernels; API and numerics mirror ``_kernels_py``.

``solve_node`` uses an Illinois-safeguarded regula falsi instead of plain
bisection, so results agree with the fallback to within ``NODE_TOL``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log1p, tanh, fabs, sqrt, ceil, log2

cnp.import_array()

PHI_T = 0.02585
N_SLOPE = 1.4
THETA = 1.2
NODE_TOL = 1e-7

cdef double C_PHI_T = 0.02585
cdef double C_N = 1.4
cdef double C_THETA = 1.2
cdef double C_TOL = 1e-7
cdef double C_SQRT2 = sqrt(2.0)


cdef inline double softplus(double x) nogil:
    if x > 30.0:
        return x + log1p(exp(-x))
    return log1p(exp(x))


cdef inline double ids(double vgs, double vds, double beta, double vt, double dvoff) nogil:
    cdef double nphi = C_N * C_PHI_T
    cdef double s = 0.5 * (1.0 - tanh(0.5 * (vgs - vt) / nphi))
    cdef double vte = vt + dvoff * s
    cdef double xf = (vgs - vte) / (2.0 * nphi)
    cdef double xr = xf - vds / (2.0 * C_PHI_T)
    cdef double spf = softplus(xf)
    cdef double spr = softplus(xr)
    cdef double vov = 2.0 * nphi * spf
    return beta * 2.0 * C_N * C_PHI_T * C_PHI_T * (spf * spf - spr * spr) / (1.0 + C_THETA * vov)


cdef inline double residual(double v, double vin, double pdb, double pdv, double pdo,
                            double pub, double puv, double puo,
                            double pgb, double pgv, double pgo,
                            double vwl, double vbl, double vdd) nogil:
    cdef double i_pd = ids(vin, v, pdb, pdv, pdo)
    cdef double i_pu = ids(vdd - vin, vdd - v, pub, puv, puo)
    cdef double lo = v if v < vbl else vbl
    cdef double mag = ids(vwl - lo, fabs(v - vbl), pgb, pgv, pgo)
    if v < vbl:
        mag = -mag
    return i_pd - i_pu + mag


def drain_current(vgs, vds, beta, vt, dvoff):
    cdef cnp.ndarray[double, ndim=1] a = np.ascontiguousarray(vgs, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=1] b = np.ascontiguousarray(vds, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=1] c = np.ascontiguousarray(beta, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=1] d = np.ascontiguousarray(vt, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=1] e = np.ascontiguousarray(dvoff, dtype=np.float64).ravel()
    cdef Py_ssize_t n = a.shape[0], i
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
    with nogil:
        for i in range(n):
            out[i] = ids(a[i], b[i], c[i], d[i], e[i])
    return out


def solve_node(vin, pd_beta, pd_vt, pd_dvoff, pu_beta, pu_vt, pu_dvoff,
               pg_beta, pg_vt, pg_dvoff, v_wl, v_bl, double vdd):
    cdef const double[::1] x = np.ascontiguousarray(vin, dtype=np.float64)
    cdef const double[::1] pdb = np.ascontiguousarray(pd_beta, dtype=np.float64)
    cdef const double[::1] pdv = np.ascontiguousarray(pd_vt, dtype=np.float64)
    cdef const double[::1] pdo = np.ascontiguousarray(pd_dvoff, dtype=np.float64)
    cdef const double[::1] pub = np.ascontiguousarray(pu_beta, dtype=np.float64)
    cdef const double[::1] puv = np.ascontiguousarray(pu_vt, dtype=np.float64)
    cdef const double[::1] puo = np.ascontiguousarray(pu_dvoff, dtype=np.float64)
    cdef const double[::1] pgb = np.ascontiguousarray(pg_beta, dtype=np.float64)
    cdef const double[::1] pgv = np.ascontiguousarray(pg_vt, dtype=np.float64)
    cdef const double[::1] pgo = np.ascontiguousarray(pg_dvoff, dtype=np.float64)
    cdef const double[::1] wl = np.ascontiguousarray(v_wl, dtype=np.float64)
    cdef const double[::1] bl = np.ascontiguousarray(v_bl, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], i
    cdef int it, side
    cdef double a, b, fa, fb, c, fc
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(n):
            a = 0.0
            b = vdd
            fa = residual(a, x[i], pdb[i], pdv[i], pdo[i], pub[i], puv[i], puo[i],
                          pgb[i], pgv[i], pgo[i], wl[i], bl[i], vdd)
            fb = residual(b, x[i], pdb[i], pdv[i], pdo[i], pub[i], puv[i], puo[i],
                          pgb[i], pgv[i], pgo[i], wl[i], bl[i], vdd)
            if fa >= 0.0:
                out[i] = 0.0
                continue
            if fb <= 0.0:
                out[i] = vdd
                continue
            side = 0
            c = 0.5 * (a + b)
            for it in range(200):
                c = (a * fb - b * fa) / (fb - fa)
                if not (c > a and c < b):
                    c = 0.5 * (a + b)
                fc = residual(c, x[i], pdb[i], pdv[i], pdo[i], pub[i], puv[i], puo[i],
                              pgb[i], pgv[i], pgo[i], wl[i], bl[i], vdd)
                if fc > 0.0:
                    b = c
                    fb = fc
                    if side == 1:
                        fa = 0.5 * fa
                    side = 1
                else:
                    a = c
                    fa = fc
                    if side == -1:
                        fb = 0.5 * fb
                    side = -1
                if b - a < C_TOL:
                    break
            out[i] = 0.5 * (a + b)
    return out_arr


cdef inline double illinois(double a, double fa, double b, double fb, double vin,
                            const double[:, ::1] p, Py_ssize_t r, double vdd) nogil:
    # Root of the node residual inside [a, b] given fa < 0 < fb.
    cdef int it, side = 0
    cdef double c = 0.5 * (a + b), fc
    for it in range(200):
        if b - a < C_TOL:
            break
        c = (a * fb - b * fa) / (fb - fa)
        if not (c > a and c < b):
            c = 0.5 * (a + b)
        fc = residual(c, vin, p[r, 0], p[r, 1], p[r, 2], p[r, 3], p[r, 4], p[r, 5],
                      p[r, 6], p[r, 7], p[r, 8], p[r, 9], p[r, 10], vdd)
        if fc > 0.0:
            b = c
            fb = fc
            if side == 1:
                fa = 0.5 * fa
            side = 1
        else:
            a = c
            fa = fc
            if side == -1:
                fb = 0.5 * fb
            side = -1
    return 0.5 * (a + b)


def vtc_batch(grid, params, double vdd):
    """Warm-started transfer curves; each point brackets below the previous one."""
    cdef const double[::1] g = np.ascontiguousarray(grid, dtype=np.float64)
    cdef const double[:, ::1] p = np.ascontiguousarray(np.atleast_2d(params), dtype=np.float64)
    cdef Py_ssize_t m = p.shape[0], n = g.shape[0], r, j
    out_arr = np.empty((m, n))
    cdef double[:, ::1] out = out_arr
    cdef double hi, fhi, lo, flo, w, prev_step
    with nogil:
        for r in range(m):
            prev_step = 0.0
            for j in range(n):
                if j == 0:
                    hi = vdd
                else:
                    hi = out[r, j - 1] + C_TOL
                    if hi > vdd:
                        hi = vdd
                fhi = residual(hi, g[j], p[r, 0], p[r, 1], p[r, 2], p[r, 3], p[r, 4], p[r, 5],
                               p[r, 6], p[r, 7], p[r, 8], p[r, 9], p[r, 10], vdd)
                if fhi <= 0.0:
                    if hi < vdd:
                        hi = vdd
                        fhi = residual(hi, g[j], p[r, 0], p[r, 1], p[r, 2], p[r, 3], p[r, 4],
                                       p[r, 5], p[r, 6], p[r, 7], p[r, 8], p[r, 9], p[r, 10], vdd)
                    if fhi <= 0.0:
                        out[r, j] = vdd
                        continue
                w = 2.0 * prev_step
                if w < 1e-4:
                    w = 1e-4
                while True:
                    lo = hi - w
                    if lo <= 0.0:
                        lo = 0.0
                    flo = residual(lo, g[j], p[r, 0], p[r, 1], p[r, 2], p[r, 3], p[r, 4], p[r, 5],
                                   p[r, 6], p[r, 7], p[r, 8], p[r, 9], p[r, 10], vdd)
                    if flo < 0.0 or lo == 0.0:
                        break
                    hi = lo
                    fhi = flo
                    w = 4.0 * w
                if flo >= 0.0:
                    out[r, j] = 0.0
                else:
                    out[r, j] = illinois(lo, flo, hi, fhi, g[j], p, r, vdd)
                if j > 0:
                    prev_step = out[r, j - 1] - out[r, j]
                    if prev_step < 0.0:
                        prev_step = -prev_step
    return out_arr


cdef inline double interp_at(double u, double[::1] xs, double[::1] ys, Py_ssize_t n,
                             Py_ssize_t* cursor) nogil:
    # Linear interpolation on increasing xs with a forward-moving cursor.
    cdef Py_ssize_t k = cursor[0]
    while k < n - 2 and xs[k + 1] < u:
        k += 1
    cursor[0] = k
    if u <= xs[0]:
        return ys[0]
    if u >= xs[n - 1]:
        return ys[n - 1]
    cdef double dx = xs[k + 1] - xs[k]
    if dx <= 0.0:
        return ys[k + 1]
    return ys[k] + (ys[k + 1] - ys[k]) * (u - xs[k]) / dx


def rotated_gaps(lobe1, lobe2, grid):
    cdef const double[:, ::1] l1 = np.ascontiguousarray(np.atleast_2d(lobe1), dtype=np.float64)
    cdef const double[:, ::1] l2 = np.ascontiguousarray(np.atleast_2d(lobe2), dtype=np.float64)
    cdef const double[::1] g = np.ascontiguousarray(grid, dtype=np.float64)
    cdef Py_ssize_t m = l1.shape[0], n = g.shape[0], i, j, ia, ib, k, cnt, kbest
    ul_arr = np.empty(m)
    lr_arr = np.empty(m)
    wm_arr = np.empty(m)
    cdef double[::1] ul = ul_arr, lr = lr_arr, wm = wm_arr
    ua_arr = np.empty(n); va_arr = np.empty(n); ub_arr = np.empty(n); vb_arr = np.empty(n)
    d_arr = np.empty(2 * n)
    cdef double[::1] ua = ua_arr, va = va_arr, ub = ub_arr, vb = vb_arr, d = d_arr
    cdef double lo, hi, u, dmax, ndmax, wmin, last
    cdef Py_ssize_t ca, cb
    with nogil:
        for i in range(m):
            for j in range(n):
                ua[j] = (g[j] - l1[i, j]) / C_SQRT2
                va[j] = (g[j] + l1[i, j]) / C_SQRT2
                # curve B reversed so its u is increasing
                ub[j] = (l2[i, n - 1 - j] - g[n - 1 - j]) / C_SQRT2
                vb[j] = (l2[i, n - 1 - j] + g[n - 1 - j]) / C_SQRT2
            lo = ua[0] if ua[0] > ub[0] else ub[0]
            hi = ua[n - 1] if ua[n - 1] < ub[n - 1] else ub[n - 1]
            ia = 0
            ib = 0
            ca = 0
            cb = 0
            cnt = 0
            last = -1e300
            while ia < n or ib < n:
                if ib >= n or (ia < n and ua[ia] <= ub[ib]):
                    u = ua[ia]
                    ia += 1
                else:
                    u = ub[ib]
                    ib += 1
                if u < lo or u > hi or u == last:
                    continue
                last = u
                d[cnt] = interp_at(u, ua, va, n, &ca) - interp_at(u, ub, vb, n, &cb)
                cnt += 1
            dmax = -1e300
            ndmax = -1e300
            kbest = 0
            for k in range(cnt):
                if d[k] > dmax:
                    dmax = d[k]
                if -d[k] > ndmax:
                    ndmax = -d[k]
                    kbest = k
            wmin = 1e300
            for k in range(kbest + 1):
                if -d[k] < wmin:
                    wmin = -d[k]
            ul[i] = dmax / C_SQRT2
            lr[i] = ndmax / C_SQRT2
            wm[i] = wmin / C_SQRT2
    return ul_arr, lr_arr, wm_arr
