"""numba implementations of the hot loops.

Every function here has a twin with the same signature in ``_numpy``.
Reductions run in a fixed index order so results do not depend on the
thread count.
"""
import math

import numpy as np
from numba import njit, prange


@njit(cache=True, inline="always")
def _mod2(u):
    # every double of modulus >= 2**53 is an even integer; this also maps
    # an overflowed -beta/x (x subnormal) to 0 instead of an int64 wrap
    if not abs(u) < 9007199254740992.0:
        return 0.0
    k = np.ceil((u - 1.0) * 0.5)
    r = u - 2.0 * k
    if r <= -1.0:
        r += 2.0
    elif r > 1.0:
        r -= 2.0
    return r


@njit(cache=True, inline="always")
def _u(x, p, beta):
    if x == 0.0:
        return 0.0
    return p * _mod2(-beta / x)


@njit(cache=True, inline="always")
def _bin(x, p, w, n):
    k = math.ceil((x + p) / w) - 1
    if k < 0:
        return 0
    if k >= n:
        return n - 1
    return k


@njit(cache=True)
def mod2_array(u):
    out = np.empty(u.shape[0])
    for i in range(u.shape[0]):
        out[i] = _mod2(u[i])
    return out


@njit(cache=True)
def gauss_u_array(x, p, beta):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = _u(x[i], p, beta)
    return out


@njit(cache=True)
def orbit_points(x0, n, p, beta):
    out = np.empty(n + 1)
    x = x0
    out[0] = x
    for k in range(1, n + 1):
        x = _u(x, p, beta)
        out[k] = x
    return out


@njit(cache=True)
def abs_orbit(x0, n, p):
    out = np.empty(n)
    x = x0
    for k in range(n):
        out[k] = x
        x = abs(_u(x, p, float(p)))
    return out


@njit(cache=True)
def partial_fraction(t, p, J):
    out = np.empty(t.shape[0])
    for i in range(t.shape[0]):
        s = 0.0
        ti = t[i]
        # smallest terms first
        for j in range(J, 0, -1):
            a = 2.0 * p * j - ti
            b = -2.0 * p * j - ti
            s += 1.0 / (a * a - p * p) + 1.0 / (b * b - p * p)
        out[i] = s
    return out


@njit(cache=True, parallel=True)
def branch_sum_grid(values, p, beta, xs, J):
    n = values.shape[0]
    w = 2.0 * p / n
    out = np.zeros(xs.shape[0], dtype=np.complex128)
    for i in prange(xs.shape[0]):
        x = xs[i]
        s = 0.0 + 0.0j
        for j in range(J, 0, -1):
            d1 = 2.0 * p * j - x
            d2 = -2.0 * p * j - x
            h1 = p * beta / d1
            h2 = p * beta / d2
            s += (p * beta / (d1 * d1)) * values[_bin(h1, p, w, n)]
            s += (p * beta / (d2 * d2)) * values[_bin(h2, p, w, n)]
        out[i] = s
    return out


@njit(cache=True, parallel=True)
def ulam_coo(n, p, beta, J, slots):
    w = 2.0 * p / n
    per_k = 2 * J * slots
    rows = np.full(n * per_k, -1, dtype=np.int64)
    cols = np.full(n * per_k, -1, dtype=np.int64)
    vals = np.zeros(n * per_k)
    for k in prange(n):
        a = -p + k * w
        b = -p + (k + 1) * w
        for jj in range(2 * J):
            j = jj - J if jj < J else jj - J + 1
            lo = p * beta / (2.0 * p * j - a)
            hi = p * beta / (2.0 * p * j - b)
            if lo < -p:
                lo = -p
            if hi > p:
                hi = p
            if hi <= lo:
                continue
            first = int(math.floor((lo + p) / w))
            if first < 0:
                first = 0
            base = (k * 2 * J + jj) * slots
            for s in range(slots):
                l = first + s
                if l >= n:
                    break
                el = -p + l * w
                er = -p + (l + 1) * w
                ov = min(hi, er) - max(lo, el)
                if ov > 0.0:
                    rows[base + s] = k
                    cols[base + s] = l
                    vals[base + s] = ov / w
    return rows, cols, vals


@njit(cache=True, parallel=True)
def survival_steps(xs, p, beta, nmax):
    out = np.zeros(xs.shape[0], dtype=np.int64)
    for i in prange(xs.shape[0]):
        x = xs[i]
        m = 0
        while m < nmax and -beta < x <= beta:
            m += 1
            x = _u(x, p, beta)
        out[i] = m
    return out


@njit(cache=True)
def pullback(lo, hi, p, beta, eps, cap):
    out_lo = np.empty(cap)
    out_hi = np.empty(cap)
    m = 0
    dropped = 0.0
    for i in range(lo.shape[0]):
        a = lo[i]
        b = hi[i]
        L = b - a
        for side in range(2):
            sgn = 1.0 if side == 0 else -1.0
            jj = 1
            while True:
                ha = p * beta / (2.0 * p * sgn * jj - a)
                hb = p * beta / (2.0 * p * sgn * jj - b)
                length = hb - ha
                if length < eps:
                    # branches jj, jj+1, ... : h' <= beta / (p (2j-1)^2)
                    dropped += length + L * (beta / p) / (2.0 * (2.0 * jj - 1.0))
                    break
                if m >= cap:
                    return out_lo[:0], out_hi[:0], dropped, True
                out_lo[m] = ha
                out_hi[m] = hb
                m += 1
                jj += 1
    return out_lo[:m], out_hi[:m], dropped, False
