"""Pure-Python RK4 kernel; reference twin of the compiled ``_rk4core``.

Both kernels share one signature and must agree to rounding.  Status codes:
0 completed, 1 stopped at the blowup bound, 2 step failure.
"""
import math

MODE_MODEL, MODE_LINEAR = 0, 1
KIND_CONSTANT, KIND_RATIONAL, KIND_TABLE = 0, 1, 2
MAX_SWEEPS = 5
SWEEP_TOL = 1e-12


def _hermite(u, dx, y0, y1, m0, m1):
    u2 = u * u
    u3 = u2 * u
    return ((2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * dx * m0
            + (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * dx * m1)


def integrate_rk4(mode, A, B, a, dkind, r0, c, tab_s, tab_r, tab_dr,
                  h, seg_y, seg_m, dt, n_steps, bound, xs, xps):
    """Fill ``xs``/``xps`` (length n_steps + 1) with knot values and slopes.

    Returns ``(steps_done, status, max_sweeps_used)``.
    """
    seg_y = [float(v) for v in seg_y]
    seg_m = [float(v) for v in seg_m]
    nseg = len(seg_y)
    dtheta = h / (nseg - 1)
    ts = [float(v) for v in tab_s] if dkind == KIND_TABLE else []
    tr = [float(v) for v in tab_r] if dkind == KIND_TABLE else []
    tdr = [float(v) for v in tab_dr] if dkind == KIND_TABLE else []
    X = [0.0] * (n_steps + 1)
    M = [0.0] * (n_steps + 1)

    def delay(x):
        if dkind == KIND_CONSTANT:
            return r0
        if dkind == KIND_RATIONAL:
            return 1.0 / (1.0 + c * x * x)
        ax = abs(x)
        if ax >= ts[-1]:
            return tr[-1]
        ds = ts[1] - ts[0]
        k = min(int(ax / ds), len(ts) - 2)
        return _hermite((ax - ts[k]) / ds, ds, tr[k], tr[k + 1], tdr[k], tdr[k + 1])

    cur_n, cur_x, cur_m, prov_x, prov_m = 0, 0.0, 0.0, 0.0, 0.0
    overlap = bad = False

    def hist(s):
        nonlocal overlap, bad
        if s <= 0.0:
            if s < -h * (1.0 + 1e-12):
                bad = True
                return 0.0
            q = (s + h) / dtheta
            k = int(q)
            if k > nseg - 2:
                k = nseg - 2
            if k < 0:
                k = 0
            return _hermite(q - k, dtheta, seg_y[k], seg_y[k + 1], seg_m[k], seg_m[k + 1])
        q = s / dt
        k = int(q)
        if k >= cur_n:
            overlap = True
            return _hermite((s - cur_n * dt) / dt, dt, cur_x, prov_x, cur_m, prov_m)
        return _hermite(q - k, dt, X[k], X[k + 1], M[k], M[k + 1])

    def rhs(t, x):
        nonlocal bad
        if mode == MODE_LINEAR:
            return A * x + B * hist(t - h)
        r = delay(x)
        if not (0.0 < r <= h * (1.0 + 1e-12)):
            bad = True
            return 0.0
        return a * (x - hist(t - r)) - abs(x) * x

    X[0] = float(xs[0])
    M[0] = rhs(0.0, X[0])
    status = 0
    max_sweeps = 0
    done = 0
    if bad or not math.isfinite(M[0]):
        status = 2
        n_steps = 0
    for n in range(n_steps):
        t = n * dt
        xn, mn = X[n], M[n]
        cur_n, cur_x, cur_m, prov_x, prov_m = n, xn, mn, xn + dt * mn, mn
        sweeps = 0
        while True:
            overlap = False
            k1 = mn
            k2 = rhs(t + 0.5 * dt, xn + 0.5 * dt * k1)
            k3 = rhs(t + 0.5 * dt, xn + 0.5 * dt * k2)
            k4 = rhs(t + dt, xn + dt * k3)
            x1 = xn + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            m1 = rhs(t + dt, x1)
            sweeps += 1
            if not overlap or sweeps > MAX_SWEEPS:
                break
            scale = 1.0 + abs(x1) + abs(m1)
            converged = abs(x1 - prov_x) <= SWEEP_TOL * scale and abs(m1 - prov_m) <= SWEEP_TOL * scale
            prov_x, prov_m = x1, m1
            if converged:
                break
        max_sweeps = max(max_sweeps, sweeps)
        if bad or not (math.isfinite(x1) and math.isfinite(m1)):
            status = 2
            break
        X[n + 1], M[n + 1] = x1, m1
        done = n + 1
        if abs(x1) >= bound:
            status = 1
            break
    for i in range(done + 1):
        xs[i] = X[i]
        xps[i] = M[i]
    return done, status, max_sweeps
