"""Pure-numpy twins of the numba kernels (selected with HUPLAB_NUMBA=0)."""
import numpy as np

_CHUNK = 4096


def mod2_array(u):
    u = np.asarray(u, dtype=float)
    with np.errstate(invalid="ignore"):
        r = u - 2.0 * np.ceil((u - 1.0) * 0.5)
    r = np.where(r <= -1.0, r + 2.0, r)
    r = np.where(r > 1.0, r - 2.0, r)
    # doubles of modulus >= 2**53 are even integers (inf is sent to 0 too)
    return np.where(np.abs(u) < 9007199254740992.0, r, 0.0)


def gauss_u_array(x, p, beta):
    x = np.asarray(x, dtype=float)
    safe = np.where(x == 0.0, 1.0, x)
    with np.errstate(over="ignore"):
        y = -beta / safe
    return np.where(x == 0.0, 0.0, p * mod2_array(y))


def orbit_points(x0, n, p, beta):
    out = np.empty(n + 1)
    out[0] = x0
    for k in range(1, n + 1):
        out[k] = gauss_u_array(out[k - 1:k], p, beta)[0]
    return out


def abs_orbit(x0, n, p):
    out = np.empty(n)
    x = np.array([x0], dtype=float)
    for k in range(n):
        out[k] = x[0]
        x = np.abs(gauss_u_array(x, p, float(p)))
    return out


def _j_chunks(J):
    """Descending chunks of branch indices, smallest terms first."""
    for top in range(J, 0, -_CHUNK):
        yield np.arange(top, max(top - _CHUNK, 0), -1, dtype=float)


def partial_fraction(t, p, J):
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape[0])
    for js in _j_chunks(J):
        a = 2.0 * p * js[None, :] - t[:, None]
        b = -2.0 * p * js[None, :] - t[:, None]
        out += np.sum(1.0 / (a * a - p * p) + 1.0 / (b * b - p * p), axis=1)
    return out


def _bins(x, p, w, n):
    return np.clip(np.ceil((x + p) / w).astype(np.int64) - 1, 0, n - 1)


def branch_sum_grid(values, p, beta, xs, J):
    values = np.asarray(values, dtype=complex)
    n = values.shape[0]
    w = 2.0 * p / n
    xs = np.asarray(xs, dtype=float)
    out = np.zeros(xs.shape[0], dtype=complex)
    for js in _j_chunks(J):
        for sgn in (1.0, -1.0):
            d = 2.0 * p * sgn * js[None, :] - xs[:, None]
            h = p * beta / d
            out += np.sum((p * beta / (d * d)) * values[_bins(h, p, w, n)], axis=1)
    return out


def ulam_coo(n, p, beta, J, slots):
    w = 2.0 * p / n
    k = np.arange(n, dtype=float)[:, None]
    jj = np.arange(2 * J)
    j = np.where(jj < J, jj - J, jj - J + 1).astype(float)[None, :]
    a = -p + k * w
    b = -p + (k + 1) * w
    lo = np.maximum(p * beta / (2.0 * p * j - a), -p)
    hi = np.minimum(p * beta / (2.0 * p * j - b), p)
    first = np.maximum(np.floor((lo + p) / w).astype(np.int64), 0)
    rows = np.full((n, 2 * J, slots), -1, dtype=np.int64)
    cols = np.full((n, 2 * J, slots), -1, dtype=np.int64)
    vals = np.zeros((n, 2 * J, slots))
    kk = np.broadcast_to(np.arange(n)[:, None], lo.shape)
    for s in range(slots):
        l = first + s
        el = -p + l * w
        er = -p + (l + 1) * w
        ov = np.minimum(hi, er) - np.maximum(lo, el)
        ok = (ov > 0.0) & (l < n) & (hi > lo)
        rows[..., s] = np.where(ok, kk, -1)
        cols[..., s] = np.where(ok, l, -1)
        vals[..., s] = np.where(ok, ov / w, 0.0)
    return rows.ravel(), cols.ravel(), vals.ravel()


def survival_steps(xs, p, beta, nmax):
    x = np.array(xs, dtype=float)
    out = np.zeros(x.shape[0], dtype=np.int64)
    alive = np.ones(x.shape[0], dtype=bool)
    for _ in range(nmax):
        alive &= (x > -beta) & (x <= beta)
        if not alive.any():
            break
        out += alive
        x[alive] = gauss_u_array(x[alive], p, beta)
    return out


def pullback(lo, hi, p, beta, eps, cap):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    out_lo, out_hi = [], []
    total = 0
    dropped = 0.0
    L_all = hi - lo
    for start in range(0, lo.shape[0], _CHUNK):
        a = lo[start:start + _CHUNK]
        b = hi[start:start + _CHUNK]
        L = L_all[start:start + _CHUNK]
        # past jcap every branch image is shorter than eps
        jcap = np.floor((np.sqrt(p * beta * L / eps) + p) / (2.0 * p)).astype(np.int64) + 2
        owner = np.repeat(np.arange(a.shape[0]), jcap)
        offs = np.arange(owner.shape[0]) - np.repeat(np.cumsum(jcap) - jcap, jcap)
        jj = (offs + 1).astype(float)
        for sgn in (1.0, -1.0):
            ha = p * beta / (2.0 * p * sgn * jj - a[owner])
            hb = p * beta / (2.0 * p * sgn * jj - b[owner])
            length = hb - ha
            keep = length >= eps
            kept = np.bincount(owner, weights=keep, minlength=a.shape[0]).astype(np.int64)
            # first failing branch of each interval is kept + 1
            fail_idx = np.cumsum(jcap) - jcap + kept
            j_fail = kept + 1.0
            dropped += float(np.sum(length[fail_idx]
                                    + L * (beta / p) / (2.0 * (2.0 * j_fail - 1.0))))
            sel = keep & (offs < kept[owner])
            total += int(sel.sum())
            if total > cap:
                return np.empty(0), np.empty(0), dropped, True
            out_lo.append(ha[sel])
            out_hi.append(hb[sel])
    if not out_lo:
        return np.empty(0), np.empty(0), dropped, False
    return np.concatenate(out_lo), np.concatenate(out_hi), dropped, False
