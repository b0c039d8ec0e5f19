"""Hot loops: tridiagonal solves, inertia counts, inverse iteration and the
log-radius Dormand-Prince integrator.

Every function here is written in the numba-compatible subset. With
``SINGULAR_EIG_DISABLE_JIT=1`` they run uncompiled, and the tridiagonal
solve is routed through LAPACK's banded solver instead of the scalar loop.
"""
import numpy as np
from scipy.linalg import solve_banded

from ._jit import USE_JIT, jit

# status codes returned by shoot_integrate
ZERO_FOUND = 0
REACHED_END = 1
STEP_UNDERFLOW = 2
MAX_STEPS = 3


@jit
def _thomas(lower, diag, upper, rhs):
    n = diag.shape[0]
    c = np.empty(n)
    x = np.empty(n)
    beta = diag[0]
    if beta == 0.0:
        return x, 1
    x[0] = rhs[0] / beta
    for i in range(1, n):
        c[i - 1] = upper[i - 1] / beta
        beta = diag[i] - lower[i] * c[i - 1]
        if beta == 0.0:
            return x, 1
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / beta
    for i in range(n - 2, -1, -1):
        x[i] -= c[i] * x[i + 1]
    return x, 0


def _banded(lower, diag, upper, rhs):
    n = diag.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    try:
        x = solve_banded((1, 1), ab, rhs, check_finite=False)
    except np.linalg.LinAlgError:
        return np.full(n, np.nan), 1
    return x, 0


# ``lower[i]`` multiplies x[i-1] and ``upper[i]`` multiplies x[i+1].
solve_tridiagonal = _thomas if USE_JIT else _banded


@jit
def count_below(diag, off, mdiag, moff, sigma):
    """Number of eigenvalues of the pencil (K, M) below ``sigma``.

    Sylvester inertia of the symmetric tridiagonal ``K - sigma M``.
    """
    n = diag.shape[0]
    count = 0
    d = diag[0] - sigma * mdiag[0]
    if d < 0.0:
        count += 1
    for i in range(1, n):
        e = off[i - 1] - sigma * moff[i - 1]
        if d == 0.0:
            d = 1e-300
        d = diag[i] - sigma * mdiag[i] - e * e / d
        if d < 0.0:
            count += 1
    return count


@jit
def _sym_matvec(diag, off, x):
    n = diag.shape[0]
    y = diag * x
    for i in range(n - 1):
        y[i] += off[i] * x[i + 1]
        y[i + 1] += off[i] * x[i]
    return y


@jit
def inverse_iteration(diag, off, mdiag, moff, x0, tol, max_iter, history):
    """Shift-free inverse iteration for the smallest eigenpair of (K, M).

    Returns ``(quotient, x, iterations, status)`` with status 0 on
    convergence, 1 on hitting ``max_iter`` and 2 on a singular pivot.
    """
    n = diag.shape[0]
    lower = np.empty(n)
    upper = np.empty(n)
    lower[0] = 0.0
    upper[n - 1] = 0.0
    for i in range(n - 1):
        lower[i + 1] = off[i]
        upper[i] = off[i]
    x = x0.copy()
    q_old = np.inf
    for it in range(max_iter):
        rhs = _sym_matvec(mdiag, moff, x)
        y, flag = solve_tridiagonal(lower, diag, upper, rhs)
        if flag != 0:
            return np.nan, x, it, 2
        ky = _sym_matvec(diag, off, y)
        my = _sym_matvec(mdiag, moff, y)
        num = 0.0
        den = 0.0
        for i in range(n):
            num += y[i] * ky[i]
            den += y[i] * my[i]
        q = num / den
        history[it] = q
        x = y / np.sqrt(den)
        if abs(q - q_old) < tol * abs(q):
            return q, x, it + 1, 0
        q_old = q
    return q_old, x, max_iter, 1


# --- Dormand-Prince 5(4) in t = ln r, state (u, w = r u') -----------------

@jit
def _rhs(t, u, w, sw, sr, decay, mu, nm1, a_pos, a_neg, b_pos, b_neg):
    b = b_pos if sw > 0 else b_neg
    a = a_pos if sr > 0 else a_neg
    big_r = -mu * np.exp(decay * t) * u - nm1 * b * w
    return w, big_r / a + w


@jit
def _branch_value(t, u, w, sw, decay, mu, nm1, b_pos, b_neg):
    b = b_pos if sw > 0 else b_neg
    return -mu * np.exp(decay * t) * u - nm1 * b * w


@jit
def _dp_step(t, u, w, h, sw, sr, decay, mu, nm1, a_pos, a_neg, b_pos, b_neg):
    k1u, k1w = _rhs(t, u, w, sw, sr, decay, mu, nm1, a_pos, a_neg, b_pos, b_neg)
    k2u, k2w = _rhs(t + h / 5, u + h * k1u / 5, w + h * k1w / 5,
                    sw, sr, decay, mu, nm1, a_pos, a_neg, b_pos, b_neg)
    k3u, k3w = _rhs(t + 3 * h / 10,
                    u + h * (3 * k1u / 40 + 9 * k2u / 40),
                    w + h * (3 * k1w / 40 + 9 * k2w / 40),
                    sw, sr, decay, mu, nm1, a_pos, a_neg, b_pos, b_neg)
    k4u, k4w = _rhs(t + 4 * h / 5,
                    u + h * (44 * k1u / 45 - 56 * k2u / 15 + 32 * k3u / 9),
                    w + h * (44 * k1w / 45 - 56 * k2w / 15 + 32 * k3w / 9),
                    sw, sr, decay, mu, nm1, a_pos, a_neg, b_pos, b_neg)
    k5u, k5w = _rhs(t + 8 * h / 9,
                    u + h * (19372 * k1u / 6561 - 25360 * k2u / 2187
                             + 64448 * k3u / 6561 - 212 * k4u / 729),
                    w + h * (19372 * k1w / 6561 - 25360 * k2w / 2187
                             + 64448 * k3w / 6561 - 212 * k4w / 729),
                    sw, sr, decay, mu, nm1, a_pos, a_neg, b_pos, b_neg)
    k6u, k6w = _rhs(t + h,
                    u + h * (9017 * k1u / 3168 - 355 * k2u / 33
                             + 46732 * k3u / 5247 + 49 * k4u / 176
                             - 5103 * k5u / 18656),
                    w + h * (9017 * k1w / 3168 - 355 * k2w / 33
                             + 46732 * k3w / 5247 + 49 * k4w / 176
                             - 5103 * k5w / 18656),
                    sw, sr, decay, mu, nm1, a_pos, a_neg, b_pos, b_neg)
    u1 = u + h * (35 * k1u / 384 + 500 * k3u / 1113 + 125 * k4u / 192
                  - 2187 * k5u / 6784 + 11 * k6u / 84)
    w1 = w + h * (35 * k1w / 384 + 500 * k3w / 1113 + 125 * k4w / 192
                  - 2187 * k5w / 6784 + 11 * k6w / 84)
    k7u, k7w = _rhs(t + h, u1, w1, sw, sr, decay, mu, nm1,
                    a_pos, a_neg, b_pos, b_neg)
    eu = h * (71 * k1u / 57600 - 71 * k3u / 16695 + 71 * k4u / 1920
              - 17253 * k5u / 339200 + 22 * k6u / 525 - k7u / 40)
    ew = h * (71 * k1w / 57600 - 71 * k3w / 16695 + 71 * k4w / 1920
              - 17253 * k5w / 339200 + 22 * k6w / 525 - k7w / 40)
    return u1, w1, eu, ew, k1u, k1w, k7u, k7w


@jit
def _hermite(y0, f0, y1, f1, h, s):
    # cubic Hermite on [0, h] at fraction s
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


@jit
def _event_value(kind, t, u, w, sw, decay, mu, nm1, b_pos, b_neg):
    if kind == 0:
        return u
    if kind == 1:
        return w
    return _branch_value(t, u, w, sw, decay, mu, nm1, b_pos, b_neg)


@jit
def _locate(kind, t, u, w, h, u1, w1, f0u, f0w, f1u, f1w, sw, sr, decay, mu,
            nm1, a_pos, a_neg, b_pos, b_neg, tol):
    """Root of event ``kind`` inside the step [t, t + h].

    Bisection on the dense Hermite interpolant to ``tol``, followed by a few
    regula-falsi passes on fresh single Runge-Kutta steps so the event time
    carries the integrator's accuracy rather than the interpolant's.
    """
    g0 = _event_value(kind, t, u, w, sw, decay, mu, nm1, b_pos, b_neg)
    lo = 0.0
    hi = 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        um = _hermite(u, f0u, u1, f1u, h, mid)
        wm = _hermite(w, f0w, w1, f1w, h, mid)
        gm = _event_value(kind, t + mid * h, um, wm, sw, decay, mu, nm1,
                          b_pos, b_neg)
        if (gm > 0) == (g0 > 0) and gm != 0.0:
            lo = mid
        else:
            hi = mid
        if (hi - lo) * abs(h) < tol:
            break
    # polish: secant iterations on RK-accurate states
    tau_a = lo * h
    tau_b = hi * h
    ga = g0
    if tau_a > 0:
        ua, wa, _, _, _, _, _, _ = _dp_step(t, u, w, tau_a, sw, sr, decay, mu,
                                            nm1, a_pos, a_neg, b_pos, b_neg)
        ga = _event_value(kind, t + tau_a, ua, wa, sw, decay, mu, nm1,
                          b_pos, b_neg)
    ub, wb, _, _, _, _, _, _ = _dp_step(t, u, w, tau_b, sw, sr, decay, mu,
                                        nm1, a_pos, a_neg, b_pos, b_neg)
    gb = _event_value(kind, t + tau_b, ub, wb, sw, decay, mu, nm1,
                      b_pos, b_neg)
    tau = tau_b
    for _ in range(8):
        if gb == ga:
            break
        tau_new = tau_b - gb * (tau_b - tau_a) / (gb - ga)
        if not (min(tau_a, tau_b) <= tau_new <= max(tau_a, tau_b)):
            tau_new = 0.5 * (tau_a + tau_b)
        un, wn, _, _, _, _, _, _ = _dp_step(t, u, w, tau_new, sw, sr, decay,
                                            mu, nm1, a_pos, a_neg, b_pos,
                                            b_neg)
        gn = _event_value(kind, t + tau_new, un, wn, sw, decay, mu, nm1,
                          b_pos, b_neg)
        step = abs(tau_new - tau)
        tau = tau_new
        if (gn > 0) == (ga > 0):
            tau_a = tau_new
            ga = gn
        else:
            tau_b = tau_new
            gb = gn
        if step < tol or gn == 0.0:
            break
    return tau


@jit
def shoot_integrate(t0, u0, w0, t_end, h0, decay, mu, nm1, a_pos, a_neg,
                    b_pos, b_neg, rtol, atol, event_tol, out_t, out_u, out_w,
                    out_m, out_s):
    """Integrate outward from ``t0`` until ``u`` vanishes or ``t_end``.

    The regime (sign of w, sign of the inverted branch) is frozen within a
    step; crossings are located, the step is shortened to land on the
    event, and the regime flips before continuing. Within a regime the
    problem is linear, so the state is renormalized whenever its size
    leaves [1e-150, 1e150]; ``out_s`` holds the natural log of the factor
    to multiply stored values by.

    Returns ``(n_out, status, t_zero, n_rejected, n_switches)``.
    """
    max_out = out_t.shape[0]
    t = t0
    u = u0
    w = w0
    sw = 1 if w >= 0 else -1
    g = _branch_value(t, u, w, sw, decay, mu, nm1, b_pos, b_neg)
    sr = 1 if g >= 0 else -1
    h = h0
    n_rej = 0
    n_sw = 0
    log_scale = 0.0
    out_s[0] = 0.0
    out_t[0] = t
    out_u[0] = u
    out_w[0] = w
    out_m[0] = g / (a_pos if sr > 0 else a_neg)
    n = 1
    while n < max_out:
        if t >= t_end:
            return n, REACHED_END, np.nan, n_rej, n_sw
        if h > t_end - t:
            h = t_end - t
        if h < max(1e-14, 4 * 2.2e-16 * abs(t)):
            return n, STEP_UNDERFLOW, np.nan, n_rej, n_sw
        u1, w1, eu, ew, f0u, f0w, f1u, f1w = _dp_step(
            t, u, w, h, sw, sr, decay, mu, nm1, a_pos, a_neg, b_pos, b_neg)
        # atol is taken relative to the state norm: near the first zero the
        # eigenfunction amplitude can sit hundreds of decades below u(0)
        scale = max(abs(u), abs(w), abs(u1), abs(w1))
        su = atol * scale + rtol * max(abs(u), abs(u1))
        sv = atol * scale + rtol * max(abs(w), abs(w1))
        err = np.sqrt(0.5 * ((eu / su) ** 2 + (ew / sv) ** 2))
        if not np.isfinite(err) or err > 1.0:
            n_rej += 1
            fac = 0.2 if not np.isfinite(err) else max(0.2, 0.9 * err ** -0.2)
            h *= fac
            continue
        # event scan: 0 -> u, 1 -> w, 2 -> branch residual
        g1 = _branch_value(t + h, u1, w1, sw, decay, mu, nm1, b_pos, b_neg)
        hit_u = u1 <= 0.0
        hit_w = (w1 > 0) != (sw > 0) and w1 != 0.0
        hit_r = (g1 > 0) != (sr > 0) and g1 != 0.0
        if hit_u or hit_w or hit_r:
            best_tau = h
            best_kind = -1
            for kind in range(3):
                if (kind == 0 and hit_u) or (kind == 1 and hit_w) or \
                        (kind == 2 and hit_r):
                    tau = _locate(kind, t, u, w, h, u1, w1, f0u, f0w, f1u,
                                  f1w, sw, sr, decay, mu, nm1, a_pos, a_neg,
                                  b_pos, b_neg, event_tol)
                    if tau < best_tau or best_kind < 0:
                        best_tau = tau
                        best_kind = kind
            if best_tau > 0:
                u1, w1, _, _, _, _, _, _ = _dp_step(
                    t, u, w, best_tau, sw, sr, decay, mu, nm1, a_pos, a_neg,
                    b_pos, b_neg)
            t = t + best_tau
            u = u1
            w = w1
            if best_kind == 0:
                u = 0.0
            elif best_kind == 1:
                sw = -sw
                n_sw += 1
            else:
                sr = -sr
                n_sw += 1
            out_t[n] = t
            out_u[n] = u
            out_w[n] = w
            g = _branch_value(t, u, w, sw, decay, mu, nm1, b_pos, b_neg)
            out_m[n] = g / (a_pos if sr > 0 else a_neg)
            out_s[n] = log_scale
            n += 1
            if best_kind == 0:
                return n, ZERO_FOUND, t, n_rej, n_sw
            continue
        t = t + h
        u = u1
        w = w1
        out_t[n] = t
        out_u[n] = u
        out_w[n] = w
        out_m[n] = g1 / (a_pos if sr > 0 else a_neg)
        out_s[n] = log_scale
        n += 1
        size = max(abs(u), abs(w))
        if size < 1e-150 or size > 1e150:
            u /= size
            w /= size
            log_scale += np.log(size)
        fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h *= fac
    return n, MAX_STEPS, np.nan, n_rej, n_sw
