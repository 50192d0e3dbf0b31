"""Transfer, Koopman and composition operators for ``U_beta``.

Operators act pointwise on callables ``phi(x_array) -> array``; a
:class:`~huplab.grids.GridFunction` or :class:`~huplab.grids.GridDensity`
qualifies.  Sample points on branch endpoints are rejected, since every
identity here holds only off that countable set.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import polygamma

from . import kernels
from .errors import AmbiguityError, DomainError, ParameterError
from .gaussmap import MapParams, check_regular, is_branch_endpoint, is_zero_preimage
from .grids import GridDensity, GridFunction, bin_index

_CHUNK = 4096


def _as_points(x):
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise DomainError("sample points must be finite")
    return xa


def _ret(xa, out):
    return out.item() if xa.ndim == 0 else out


def _check_domain(xa, params):
    if np.any((xa <= -params.p) | (xa > params.p)):
        raise DomainError(f"points must lie in (-{params.p}, {params.p}]")


# -- Perron-Frobenius ------------------------------------------------------

@dataclass(frozen=True)
class PFValue:
    """Truncated transfer-operator sum with tail information.

    ``value`` sums branches ``0 < |j| <= J``.  The omitted weights
    ``sum_{|j|>J} p beta/(2pj-x)^2`` are known in closed form (trigamma);
    ``tail_bound`` is that weight times ``sup |f|`` near 0 and
    ``tail_estimate`` freezes ``f`` at the first omitted preimage on each
    side.
    """

    value: np.ndarray | complex
    tail_bound: np.ndarray | float
    tail_estimate: np.ndarray | complex

    @property
    def corrected(self):
        return self.value + self.tail_estimate


def weight_tails(x, params: MapParams, J: int):
    """Closed-form sums of ``p beta/(2pj - x)^2`` over ``j > J`` and ``j < -J``."""
    p, beta = params.p, params.beta
    c = beta / (4.0 * p)
    xa = np.asarray(x, dtype=float)
    return (c * polygamma(1, J + 1 - xa / (2.0 * p)),
            c * polygamma(1, J + 1 + xa / (2.0 * p)))


def _tail_region_sup(f, params, J, f_sup):
    if f_sup is not None:
        return float(f_sup)
    r = params.beta / (2 * J + 1)
    if isinstance(f, GridDensity):
        lo, hi = bin_index([-r, r], params, f.n_bins)
        return float(np.max(np.abs(f.values[lo:hi + 1])))
    # sampled estimate for opaque callables
    probe = np.linspace(-r, r, 257)
    return float(np.max(np.abs(np.asarray(f(probe)))))


def pf_apply(f, x, params: MapParams, J: int, f_sup: float | None = None) -> PFValue:
    """Evaluate ``P_beta[f](x) = sum_j p beta/(2pj-x)^2 f(p beta/(2pj-x))``.

    ``f`` is a :class:`GridDensity` (fast kernel path) or a vectorised
    callable.  ``f_sup`` overrides the sup of ``|f|`` on the tail region
    ``|t| <= beta/(2J+1)`` used by ``tail_bound``; for opaque callables it
    is otherwise estimated by sampling.
    """
    if J < 2:
        raise ParameterError(f"branch cutoff J must be >= 2, got {J}")
    xa = _as_points(x)
    _check_domain(xa, params)
    xs = np.ascontiguousarray(np.atleast_1d(xa))
    p, beta = float(params.p), params.beta
    if isinstance(f, GridDensity):
        val = kernels.branch_sum_grid(f.values, p, beta, xs, int(J))
    else:
        val = np.zeros(xs.shape[0], dtype=complex)
        for top in range(J, 0, -_CHUNK):
            js = np.arange(top, max(top - _CHUNK, 0), -1, dtype=float)
            for sgn in (1.0, -1.0):
                d = 2.0 * p * sgn * js[None, :] - xs[:, None]
                val += np.sum((p * beta / (d * d)) * f(p * beta / d), axis=1)
    wp, wm = weight_tails(xs, params, J)
    hp = p * beta / (2.0 * p * (J + 1) - xs)
    hm = p * beta / (-2.0 * p * (J + 1) - xs)
    est = wp * np.asarray(f(hp)) + wm * np.asarray(f(hm))
    bound = (wp + wm) * _tail_region_sup(f, params, J, f_sup)
    if xa.ndim == 0:
        return PFValue(complex(val[0]), float(bound[0]), complex(est[0]))
    return PFValue(val, bound, est)


# -- Koopman and composition operators ------------------------------------

def _u(xs, params):
    return kernels.gauss_u_array(np.ascontiguousarray(xs, dtype=float),
                                 float(params.p), params.beta)


def _inside(xs, params):
    return (xs > -params.beta) & (xs <= params.beta)


def _koopman(phi, xs, params):
    out = np.zeros(xs.shape, dtype=complex)
    m = _inside(xs, params)
    if m.any():
        out[m] = phi(_u(xs[m], params))
    return out


def koopman_apply(phi, x, params: MapParams):
    """``C_beta[phi](x) = phi(U_beta(x))`` on ``(-beta, beta]``, 0 elsewhere."""
    xa = _as_points(x)
    _check_domain(xa, params)
    xs = np.atleast_1d(xa)
    check_regular(xs[_inside(xs, params)], params)
    return _ret(xa, _koopman(phi, xs, params))


def koopman_power(phi, x, params: MapParams, k: int):
    """``C_beta^k[phi](x)`` by repeated composition."""
    xa = _as_points(x)
    _check_domain(xa, params)
    xs = np.atleast_1d(xa)
    check_regular(xs[_inside(xs, params)], params)
    fn = phi
    for _ in range(k):
        fn = (lambda g: (lambda t: _koopman(g, np.atleast_1d(t), params)))(fn)
    return _ret(xa, np.asarray(fn(xs), dtype=complex))


def s_apply(phi, x, params: MapParams):
    """``S[phi](x) = phi(p {x/p}_2)`` off ``(-p, p]``, 0 on it."""
    xa = _as_points(x)
    xs = np.atleast_1d(xa)
    p = params.p
    out = np.zeros(xs.shape, dtype=complex)
    m = ~((xs > -p) & (xs <= p))
    if m.any():
        out[m] = phi(p * kernels.mod2_array(np.ascontiguousarray(xs[m] / p)))
    return _ret(xa, out)


def t_beta_apply(psi, x, params: MapParams):
    """``T_beta[psi](x) = psi(beta / {beta/x}_2)`` on ``(-beta, beta]``, 0 elsewhere."""
    xa = _as_points(x)
    xs = np.atleast_1d(xa)
    beta = params.beta
    out = np.zeros(xs.shape, dtype=complex)
    m = _inside(xs, params)
    if m.any():
        xm = xs[m]
        if np.any(xm == 0.0):
            raise DomainError("T_beta is undefined at x = 0")
        s = kernels.mod2_array(np.ascontiguousarray(beta / xm))
        if np.any(s == 0.0):
            raise DomainError("{beta/x}_2 = 0: evaluation point is singular for T_beta")
        out[m] = psi(beta / s)
    return _ret(xa, out)


def _ts(phi, xs, params):
    p, beta = params.p, params.beta
    out = np.zeros(xs.shape, dtype=complex)
    m = _inside(xs, params) & (xs != 0.0)
    if not m.any():
        return out
    s = kernels.mod2_array(np.ascontiguousarray(beta / xs[m]))
    # beta/(p s) == beta0 / {beta/x}_2; this order of operations matches C_beta^2
    with np.errstate(divide="ignore"):
        v = beta / (p * s)
    in_e = ~((v > -1.0) & (v <= 1.0))
    vals = np.zeros(s.shape, dtype=complex)
    if in_e.any():
        vals[in_e] = phi(p * kernels.mod2_array(np.ascontiguousarray(v[in_e])))
    out[m] = vals
    return out


def ts_apply(phi, x, params: MapParams):
    """``T_beta S[phi](x) = phi(p {beta0/{beta/x}_2}_2) 1_{E_beta}(x)``.

    ``E_beta`` collects the nonzero ``x`` in ``(-beta, beta]`` with
    ``beta0/{beta/x}_2`` outside ``(-1, 1]``.  Equals ``C_beta^2[phi]``
    away from branch endpoints, preimages of 0, and 0 itself.
    """
    xa = _as_points(x)
    _check_domain(xa, params)
    xs = np.atleast_1d(xa)
    inner = xs[_inside(xs, params)]
    check_regular(inner, params)
    if np.any(is_zero_preimage(inner, params)):
        raise AmbiguityError("x is a preimage of 0, where {beta/x}_2 vanishes")
    return _ret(xa, _ts(phi, xs, params))


def in_e_beta(x, params: MapParams):
    """Indicator of ``E_beta`` (two-step survivor set, without 0)."""
    return np.real(ts_apply(lambda t: np.ones(np.shape(t)), x, params)).astype(bool)


def factorization_residual(phi, grid, params: MapParams) -> float:
    """Max over ``grid`` of ``|(I - T_beta S)phi - (I + C_beta)(I - C_beta)phi|``."""
    xs = np.atleast_1d(_as_points(grid))
    _check_domain(xs, params)
    check_regular(xs[_inside(xs, params)], params)

    def minus(t):
        t = np.atleast_1d(t)
        return np.asarray(phi(t), dtype=complex) - _koopman(phi, t, params)

    lhs = np.asarray(phi(xs), dtype=complex) - _ts(phi, xs, params)
    rhs = minus(xs) + _koopman(minus, xs, params)
    return float(np.max(np.abs(lhs - rhs))) if xs.size else 0.0


def identity_residual(phi, grid, params: MapParams) -> float:
    """Max over ``grid`` of ``|T_beta S[phi] - C_beta^2[phi]|``."""
    xs = np.atleast_1d(_as_points(grid))
    lhs = ts_apply(phi, xs, params)
    rhs = koopman_power(phi, xs, params, 2)
    return float(np.max(np.abs(np.atleast_1d(lhs) - np.atleast_1d(rhs)))) if xs.size else 0.0


def l1_contraction_ratio(f: GridDensity, J: int, n_eval: int | None = None) -> float:
    """``||P_beta f||_1 / ||f||_1`` with the image sampled at bin midpoints.

    The image norm includes the tail bound, so a value <= 1 (up to
    quadrature) is evidence of the contraction property.
    """
    params = f.params
    n = n_eval or f.n_bins
    from .grids import safe_points
    xs = safe_points(params, n)
    res = pf_apply(f, xs, params, J)
    image = (np.sum(np.abs(res.value)) + np.sum(res.tail_bound)) * (2.0 * params.p / n)
    return float(image / f.l1_norm())


@dataclass(frozen=True)
class IdentitySuite:
    """Worst residuals of both operator identities over random test functions."""

    identity: float
    factorization: float
    n_functions: int
    n_points: int
    seed: int

    def to_dict(self) -> dict:
        return {"identity_residual": self.identity, "factorization_residual": self.factorization,
                "n_functions": self.n_functions, "n_points": self.n_points, "seed": self.seed}


def regular_points(params: MapParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` uniform points of ``(-p, p)`` whose first two iterates avoid every ambiguity.

    Points (and their images) on branch endpoints or preimages of 0 are
    resampled, as is 0 itself.
    """
    p = params.p
    out = np.empty(0)
    while out.size < n:
        x = rng.uniform(-p, p, 2 * (n - out.size) + 16)
        ok = (x != 0.0) & ~is_branch_endpoint(x, params) & ~is_zero_preimage(x, params)
        x = x[ok]
        m = _inside(x, params)
        ux = _u(x[m], params)
        bad = is_branch_endpoint(ux, params) | is_zero_preimage(ux, params) | (ux == 0.0)
        keep = np.ones(x.size, dtype=bool)
        keep[np.flatnonzero(m)[bad]] = False
        out = np.concatenate([out, x[keep]])
    return out[:n]


def _piecewise_linear(params, vals):
    """Continuous interpolant of ``vals`` on equispaced knots spanning ``[-p, p]``."""
    knots = np.linspace(-params.p, params.p, vals.size)

    def phi(t):
        t = np.asarray(t, dtype=float)
        return np.interp(t, knots, vals.real) + 1j * np.interp(t, knots, vals.imag)
    return phi


def identity_suite(params: MapParams, n_functions: int = 100, n_points: int = 10_000,
                   seed: int = 0, max_pieces: int = 64) -> IdentitySuite:
    """Run both identities on seeded random test functions.

    Even-numbered functions are piecewise constant on a random number of
    bins, odd-numbered ones piecewise linear.
    """
    if n_functions < 1 or n_points < 1:
        raise ParameterError("n_functions and n_points must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    xs = regular_points(params, n_points, rng)
    worst_id = 0.0
    worst_fac = 0.0
    for i in range(n_functions):
        pieces = int(rng.integers(2, max_pieces + 1))
        vals = rng.standard_normal(pieces) + 1j * rng.standard_normal(pieces)
        if i % 2 == 0:
            phi = GridFunction(params, vals)
        else:
            phi = _piecewise_linear(params, vals)
        worst_id = max(worst_id, identity_residual(phi, xs, params))
        worst_fac = max(worst_fac, factorization_residual(phi, xs, params))
    return IdentitySuite(worst_id, worst_fac, n_functions, n_points, seed)
