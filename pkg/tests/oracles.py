"""Independent reference computations used by the test-suite.

Nothing here imports the package under test.  The routines are slow or
low-order on purpose; they only need to be right.
"""
from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import numpy as np
from scipy.special import polygamma


def mod2_exact(u: Fraction) -> Fraction:
    """Representative of ``u`` modulo 2 in ``(-1, 1]``, in exact arithmetic."""
    u = Fraction(u)
    k = math.ceil((u - 1) / 2)
    return u - 2 * k


def u_map(x, p, beta):
    """``U_beta`` written from scratch with ``np.floor`` (no shared code)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = -beta / x
        r = y - 2.0 * np.floor((y + 1.0) / 2.0)  # in [-1, 1)
        r = np.where(r == -1.0, 1.0, r)
    return np.where(x == 0.0, 0.0, p * r)


def pf_series(f, x, p, beta, dps=30):
    """``sum_{j != 0} p beta/(2pj - x)^2 f(p beta/(2pj - x))`` by mpmath acceleration.

    ``f`` must work on mpmath numbers (use ``mpmath.cos`` etc.); rounding
    through floats spoils the extrapolation.
    """
    mpmath.mp.dps = dps

    x = mpmath.mpf(x)

    def term(j):
        d = 2 * p * j - x
        return p * beta / d ** 2 * f(p * beta / d)

    pos = mpmath.nsum(term, [1, mpmath.inf])
    neg = mpmath.nsum(lambda j: term(-j), [1, mpmath.inf])
    return float(pos + neg)


def chebyshev_transfer(p, beta, nodes=64, J=2000):
    """Collocation matrix of the transfer operator on Chebyshev nodes.

    Returns ``(M, weights, x)``: ``M`` maps node values of a smooth
    density to node values of its image, ``weights`` integrate the
    interpolant over ``(-p, p)``.  Branches past ``J`` are folded in by
    freezing the density at the first omitted preimage with the exact
    trigamma weight sum.
    """
    k = np.arange(nodes)
    x = p * np.cos(np.pi * (k + 0.5) / nodes)
    w = (-1.0) ** k * np.sin(np.pi * (k + 0.5) / nodes)

    def interp_rows(pts):
        d = pts[:, None] - x[None, :]
        C = w[None, :] / d
        return C / C.sum(axis=1, keepdims=True)

    js = np.concatenate([np.arange(-J, 0), np.arange(1, J + 1)]).astype(float)
    D = 2 * p * js[None, :] - x[:, None]
    H = p * beta / D
    W = p * beta / D ** 2
    C = interp_rows(H.ravel()).reshape(nodes, 2 * J, nodes)
    M = np.einsum("ij,ijk->ik", W, C)
    for sgn in (1.0, -1.0):
        tail = beta / (4 * p) * polygamma(1, J + 1 - sgn * x / (2 * p))
        M += tail[:, None] * interp_rows(p * beta / (2 * p * sgn * (J + 1) - x))
    V = np.polynomial.chebyshev.chebvander(x / p, nodes - 1)
    intT = np.array([(1 + (-1) ** n) / (1 - n * n) if n != 1 else 0.0
                     for n in range(nodes)]) * p
    return M, intT @ np.linalg.inv(V), x


def escape_chebyshev(p, beta, n_max, nodes=64, J=2000):
    """``|E(n)| = int P^n 1`` for ``n = 1..n_max`` from the collocation matrix."""
    M, qw, _ = chebyshev_transfer(p, beta, nodes, J)
    g = np.ones(M.shape[0])
    out = []
    for _ in range(n_max):
        g = M @ g
        out.append(qw @ g)
    return np.array(out)


def leading_eigenvalue_chebyshev(p, beta, nodes=64, J=2000):
    M, _, _ = chebyshev_transfer(p, beta, nodes, J)
    ev = np.linalg.eigvals(M)
    return ev[np.argmax(np.abs(ev))]


def ulam_monte_carlo(n_bins, p, beta, per_bin=20000, seed=7):
    """Ulam matrix estimated by pushing uniform samples through ``u_map``."""
    rng = np.random.default_rng(seed)
    w = 2.0 * p / n_bins
    M = np.zeros((n_bins, n_bins))
    for col in range(n_bins):
        a = -p + col * w
        xs = a + w * (1.0 - rng.random(per_bin))  # (a, a + w]
        live = (xs > -beta) & (xs <= beta)
        ys = u_map(xs[live], p, beta)
        rows = np.clip(np.ceil((ys + p) / w).astype(int) - 1, 0, n_bins - 1)
        M[:, col] = np.bincount(rows, minlength=n_bins) / per_bin
    return M


def escape_closed_form_2(p, beta):
    """``|E(2)| = int_{-beta}^{beta} 1{|U x| <= beta} dx``, summed branch by branch."""
    # on branch j the image U((beta/(2j+1), beta/(2j-1)]) covers (-p, p] once;
    # the part landing in (-beta, beta] has length sum_j [h_j(beta) - h_j(-beta)]
    return 2 * p - math.pi * beta / math.tan(math.pi * beta / (2 * p))
