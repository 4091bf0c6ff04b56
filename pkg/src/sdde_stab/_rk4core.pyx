# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled RK4 kernel; same contract as ``sdde_stab._rk4py.integrate_rk4``."""
from libc.math cimport fabs, isfinite

import numpy as np
cimport numpy as cnp

cnp.import_array()

DEF MAX_SWEEPS = 5
DEF SWEEP_TOL = 1e-12


cdef struct Ctx:
    int mode
    double A
    double B
    double a
    int dkind
    double r0
    double c
    const double *ts
    const double *tr
    const double *tdr
    Py_ssize_t ntab
    double h
    const double *seg_y
    const double *seg_m
    Py_ssize_t nseg
    double dtheta
    double dt
    double *X
    double *M
    Py_ssize_t cur_n
    double cur_x
    double cur_m
    double prov_x
    double prov_m
    bint overlap
    bint bad


cdef inline double _hermite(double u, double dx, double y0, double y1, double m0, double m1) nogil:
    cdef double u2 = u * u
    cdef double u3 = u2 * u
    return ((2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * dx * m0
            + (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * dx * m1)


cdef inline double _delay(Ctx *ctx, double x) nogil:
    cdef double ax, ds
    cdef Py_ssize_t k
    if ctx.dkind == 0:
        return ctx.r0
    if ctx.dkind == 1:
        return 1.0 / (1.0 + ctx.c * x * x)
    ax = fabs(x)
    if ax >= ctx.ts[ctx.ntab - 1]:
        return ctx.tr[ctx.ntab - 1]
    ds = ctx.ts[1] - ctx.ts[0]
    k = <Py_ssize_t>(ax / ds)
    if k > ctx.ntab - 2:
        k = ctx.ntab - 2
    return _hermite((ax - ctx.ts[k]) / ds, ds, ctx.tr[k], ctx.tr[k + 1], ctx.tdr[k], ctx.tdr[k + 1])


cdef inline double _hist(Ctx *ctx, double s) nogil:
    cdef double q
    cdef Py_ssize_t k
    if s <= 0.0:
        if s < -ctx.h * (1.0 + 1e-12):
            ctx.bad = True
            return 0.0
        q = (s + ctx.h) / ctx.dtheta
        k = <Py_ssize_t>q
        if k > ctx.nseg - 2:
            k = ctx.nseg - 2
        if k < 0:
            k = 0
        return _hermite(q - k, ctx.dtheta, ctx.seg_y[k], ctx.seg_y[k + 1], ctx.seg_m[k], ctx.seg_m[k + 1])
    q = s / ctx.dt
    k = <Py_ssize_t>q
    if k >= ctx.cur_n:
        ctx.overlap = True
        return _hermite((s - ctx.cur_n * ctx.dt) / ctx.dt, ctx.dt, ctx.cur_x, ctx.prov_x, ctx.cur_m, ctx.prov_m)
    return _hermite(q - k, ctx.dt, ctx.X[k], ctx.X[k + 1], ctx.M[k], ctx.M[k + 1])


cdef inline double _rhs(Ctx *ctx, double t, double x) nogil:
    cdef double r
    if ctx.mode == 1:
        return ctx.A * x + ctx.B * _hist(ctx, t - ctx.h)
    r = _delay(ctx, x)
    if not (0.0 < r <= ctx.h * (1.0 + 1e-12)):
        ctx.bad = True
        return 0.0
    return ctx.a * (x - _hist(ctx, t - r)) - fabs(x) * x


def integrate_rk4(int mode, double A, double B, double a, int dkind, double r0, double c,
                  tab_s, tab_r, tab_dr, double h, seg_y, seg_m, double dt, Py_ssize_t n_steps,
                  double bound, double[::1] xs, double[::1] xps):
    """Fill ``xs``/``xps`` (length n_steps + 1) with knot values and slopes.

    Returns ``(steps_done, status, max_sweeps_used)``.
    """
    cdef const double[::1] sy = np.ascontiguousarray(seg_y, dtype=np.float64)
    cdef const double[::1] sm = np.ascontiguousarray(seg_m, dtype=np.float64)
    cdef const double[::1] tsv = np.ascontiguousarray(tab_s if dkind == 2 else [0.0, 1.0], dtype=np.float64)
    cdef const double[::1] trv = np.ascontiguousarray(tab_r if dkind == 2 else [1.0, 1.0], dtype=np.float64)
    cdef const double[::1] tdv = np.ascontiguousarray(tab_dr if dkind == 2 else [0.0, 0.0], dtype=np.float64)
    cdef Ctx ctx
    cdef Py_ssize_t n, done = 0
    cdef int status = 0, sweeps, max_sweeps = 0
    cdef double t, xn, mn, k1, k2, k3, k4, x1 = 0.0, m1 = 0.0, scale
    cdef bint converged

    ctx.mode = mode
    ctx.A = A
    ctx.B = B
    ctx.a = a
    ctx.dkind = dkind
    ctx.r0 = r0
    ctx.c = c
    ctx.ts = &tsv[0]
    ctx.tr = &trv[0]
    ctx.tdr = &tdv[0]
    ctx.ntab = tsv.shape[0]
    ctx.h = h
    ctx.seg_y = &sy[0]
    ctx.seg_m = &sm[0]
    ctx.nseg = sy.shape[0]
    ctx.dtheta = h / (ctx.nseg - 1)
    ctx.dt = dt
    ctx.X = &xs[0]
    ctx.M = &xps[0]
    ctx.cur_n = 0
    ctx.overlap = False
    ctx.bad = False

    with nogil:
        xps[0] = _rhs(&ctx, 0.0, xs[0])
        if ctx.bad or not isfinite(xps[0]):
            status = 2
            n_steps = 0
        for n in range(n_steps):
            t = n * dt
            xn = xs[n]
            mn = xps[n]
            ctx.cur_n = n
            ctx.cur_x = xn
            ctx.cur_m = mn
            ctx.prov_x = xn + dt * mn
            ctx.prov_m = mn
            sweeps = 0
            while True:
                ctx.overlap = False
                k1 = mn
                k2 = _rhs(&ctx, t + 0.5 * dt, xn + 0.5 * dt * k1)
                k3 = _rhs(&ctx, t + 0.5 * dt, xn + 0.5 * dt * k2)
                k4 = _rhs(&ctx, t + dt, xn + dt * k3)
                x1 = xn + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
                m1 = _rhs(&ctx, t + dt, x1)
                sweeps += 1
                if not ctx.overlap or sweeps > MAX_SWEEPS:
                    break
                scale = 1.0 + fabs(x1) + fabs(m1)
                converged = (fabs(x1 - ctx.prov_x) <= SWEEP_TOL * scale
                             and fabs(m1 - ctx.prov_m) <= SWEEP_TOL * scale)
                ctx.prov_x = x1
                ctx.prov_m = m1
                if converged:
                    break
            if sweeps > max_sweeps:
                max_sweeps = sweeps
            if ctx.bad or not (isfinite(x1) and isfinite(m1)):
                status = 2
                break
            xs[n + 1] = x1
            xps[n + 1] = m1
            done = n + 1
            if fabs(x1) >= bound:
                status = 1
                break
    return done, status, max_sweeps
