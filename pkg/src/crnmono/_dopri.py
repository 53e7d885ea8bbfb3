"""Compiled Dormand-Prince 5(4) kernel for mass-action right-hand sides.

The network is passed in flattened CSR form so the whole integration loop
runs inside numba without touching Python objects.
"""

import numpy as np
from numba import njit

# status codes returned by integrate()
OK = 0
MAX_STEPS = 1
NON_FINITE = 2
STEP_UNDERFLOW = 3

KEEP_CAP = 1_000_000

a21 = 1 / 5
a31, a32 = 3 / 40, 9 / 40
a41, a42, a43 = 44 / 45, -56 / 15, 32 / 9
a51, a52, a53, a54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
a61, a62, a63, a64, a65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
b1, b3, b4, b5, b6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
e1, e3, e4, e5, e6, e7 = -71 / 57600, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40
# Shampine's quartic continuous extension
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)


@njit(cache=True, inline="always", error_model="numpy")
def _ipow(x, n):
    if n == 1:
        return x
    r = x
    for _ in range(n - 1):
        r *= x
    return r


@njit(cache=True, inline="always", error_model="numpy")
def mass_action_rhs(x, out, kf, kb, rev, fptr, fsp, fexp, bptr, bsp, bexp, gptr, gsp, gval):
    for j in range(out.shape[0]):
        out[j] = 0.0
    n_r = kf.shape[0]
    for i in range(n_r):
        v = kf[i]
        for p in range(fptr[i], fptr[i + 1]):
            v *= _ipow(x[fsp[p]], fexp[p])
        if rev[i]:
            w = kb[i]
            for p in range(bptr[i], bptr[i + 1]):
                w *= _ipow(x[bsp[p]], bexp[p])
            v -= w
        for p in range(gptr[i], gptr[i + 1]):
            out[gsp[p]] += gval[p] * v


@njit(cache=True, error_model="numpy")
def _rms_norm(v, scale):
    n = v.shape[0]
    if n == 0:
        return 0.0
    acc = 0.0
    for j in range(n):
        q = v[j] / scale[j]
        acc += q * q
    return np.sqrt(acc / n)


@njit(cache=True, nogil=True, error_model="numpy")
def integrate(
    y0, t_end, grid, rtol, atol, max_steps, keep_steps,
    kf, kb, rev, fptr, fsp, fexp, bptr, bsp, bexp, gptr, gsp, gval,
):
    """Integrate from t=0 to t_end, sampling the dense output on ``grid``.

    Returns (status, t_fail, grid_states, n_steps, step_times, step_states).
    ``step_times``/``step_states`` hold accepted step endpoints only when
    ``keep_steps`` is set (at most ``KEEP_CAP`` of them); otherwise they are
    empty.
    """
    n = y0.shape[0]
    n_grid = grid.shape[0]
    out = np.zeros((n_grid, n))
    cap = min(max_steps, KEEP_CAP) if keep_steps else 0
    st = np.zeros(cap)
    ss = np.zeros((cap, n))
    n_kept = 0

    k1 = np.zeros(n)
    k2 = np.zeros(n)
    k3 = np.zeros(n)
    k4 = np.zeros(n)
    k5 = np.zeros(n)
    k6 = np.zeros(n)
    k7 = np.zeros(n)
    y = y0.copy()
    w = np.zeros(7)
    y_new = np.zeros(n)
    ytmp = np.zeros(n)
    err = np.zeros(n)
    scale = np.zeros(n)

    gi = 0
    while gi < n_grid and grid[gi] <= 0.0:
        out[gi, :] = y0
        gi += 1
    if n == 0 or t_end <= 0.0:
        for g in range(gi, n_grid):
            out[g, :] = y0
        return OK, 0.0, out, 0, st[:0], ss[:0]

    mass_action_rhs(y, k1, kf, kb, rev, fptr, fsp, fexp, bptr, bsp, bexp, gptr, gsp, gval)
    for j in range(n):
        if not (k1[j] - k1[j] == 0.0):
            return NON_FINITE, 0.0, out, 0, st[:0], ss[:0]

    # initial step (Hairer, Norsett & Wanner II.4)
    for j in range(n):
        scale[j] = atol + rtol * abs(y[j])
    d0 = _rms_norm(y, scale)
    d1 = _rms_norm(k1, scale)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, t_end)
    for j in range(n):
        ytmp[j] = y[j] + h0 * k1[j]
    mass_action_rhs(ytmp, k2, kf, kb, rev, fptr, fsp, fexp, bptr, bsp, bexp, gptr, gsp, gval)
    for j in range(n):
        err[j] = k2[j] - k1[j]
    d2 = _rms_norm(err, scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    h = min(100.0 * h0, h1, t_end)

    t = 0.0
    steps = 0
    log_err_old = np.log(1e-4)
    beta = 0.04
    expo = 0.2 - 0.75 * beta
    rejected = False
    status = OK
    while t < t_end:
        if steps >= max_steps:
            status = MAX_STEPS
            break
        if h < 1e-14 * max(1.0, t):
            status = STEP_UNDERFLOW
            break
        if t + h > t_end:
            h = t_end - t

        for j in range(n):
            ytmp[j] = y[j] + h * (a21 * k1[j])
        mass_action_rhs(ytmp, k2, kf, kb, rev, fptr, fsp, fexp, bptr, bsp, bexp, gptr, gsp, gval)
        for j in range(n):
            ytmp[j] = y[j] + h * (a31 * k1[j] + a32 * k2[j])
        mass_action_rhs(ytmp, k3, kf, kb, rev, fptr, fsp, fexp, bptr, bsp, bexp, gptr, gsp, gval)
        for j in range(n):
            ytmp[j] = y[j] + h * (a41 * k1[j] + a42 * k2[j] + a43 * k3[j])
        mass_action_rhs(ytmp, k4, kf, kb, rev, fptr, fsp, fexp, bptr, bsp, bexp, gptr, gsp, gval)
        for j in range(n):
            ytmp[j] = y[j] + h * (a51 * k1[j] + a52 * k2[j] + a53 * k3[j] + a54 * k4[j])
        mass_action_rhs(ytmp, k5, kf, kb, rev, fptr, fsp, fexp, bptr, bsp, bexp, gptr, gsp, gval)
        for j in range(n):
            ytmp[j] = y[j] + h * (
                a61 * k1[j] + a62 * k2[j] + a63 * k3[j] + a64 * k4[j] + a65 * k5[j]
            )
        mass_action_rhs(ytmp, k6, kf, kb, rev, fptr, fsp, fexp, bptr, bsp, bexp, gptr, gsp, gval)
        for j in range(n):
            y_new[j] = y[j] + h * (
                b1 * k1[j] + b3 * k3[j] + b4 * k4[j] + b5 * k5[j] + b6 * k6[j]
            )
        mass_action_rhs(y_new, k7, kf, kb, rev, fptr, fsp, fexp, bptr, bsp, bexp, gptr, gsp, gval)
        steps += 1

        finite = True
        for j in range(n):
            # false for nan and +-inf
            if not (y_new[j] - y_new[j] == 0.0):
                finite = False
        if not finite:
            if h < 1e-10 * max(1.0, t):
                status = NON_FINITE
                break
            h *= 0.5
            rejected = True
            continue

        for j in range(n):
            err[j] = h * (
                e1 * k1[j] + e3 * k3[j] + e4 * k4[j] + e5 * k5[j] + e6 * k6[j] + e7 * k7[j]
            )
            scale[j] = atol + rtol * max(abs(y[j]), abs(y_new[j]))
        en = _rms_norm(err, scale)

        if en > 1.0:
            fac = max(0.2, 0.9 * en ** (-0.2))
            if rejected:
                fac = min(fac, 1.0)
            h *= fac
            rejected = True
            continue

        # clamp tiny negatives, retry at half size on real ones
        bad = False
        for j in range(n):
            if y_new[j] < 0.0 and -y_new[j] >= atol:
                bad = True
        if bad:
            h *= 0.5
            rejected = True
            continue

        t_new = t + h
        if t_new >= t_end:
            t_new = t_end
        while gi < n_grid and grid[gi] <= t_new:
            theta = (grid[gi] - t) / h
            if theta > 1.0:
                theta = 1.0
            for q in range(7):
                w[q] = theta * (_P[q, 0] + theta * (_P[q, 1] + theta * (_P[q, 2] + theta * _P[q, 3])))
            for j in range(n):
                acc = (
                    w[0] * k1[j] + w[2] * k3[j] + w[3] * k4[j] + w[4] * k5[j]
                    + w[5] * k6[j] + w[6] * k7[j]
                )
                v = y[j] + h * acc
                out[gi, j] = v if v > 0.0 else 0.0
            gi += 1

        clamped = False
        for j in range(n):
            if y_new[j] < 0.0:
                y_new[j] = 0.0
                clamped = True
        for j in range(n):
            y[j] = y_new[j]
        if clamped:
            mass_action_rhs(y, k1, kf, kb, rev, fptr, fsp, fexp, bptr, bsp, bexp, gptr, gsp, gval)
        else:
            for j in range(n):
                k1[j] = k7[j]
        t = t_new

        if n_kept < cap:
            st[n_kept] = t
            for j in range(n):
                ss[n_kept, j] = y[j]
            n_kept += 1

        en = max(en, 1e-10)
        log_en = np.log(en)
        # PI controller: 0.9 * en**-expo * err_old**beta
        fac = 0.9 * np.exp(beta * log_err_old - expo * log_en)
        fac = min(10.0, max(0.2, fac))
        if rejected:
            fac = min(fac, 1.0)
        h *= fac
        log_err_old = log_en
        rejected = False

    if status != OK:
        return status, t, out, steps, st[:n_kept], ss[:n_kept]
    while gi < n_grid:
        out[gi, :] = y
        gi += 1
    return OK, t, out, steps, st[:n_kept], ss[:n_kept]
