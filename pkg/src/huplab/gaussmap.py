"""Mod-2 reduction and the Gauss-type maps on (-p, p].

For a pair ``(p, beta)`` the map is ``U_beta(x) = p * {-beta/x}_2`` with
``U_beta(0) = 0``, where ``{u}_2`` is the representative of ``u`` modulo
``2Z`` in ``(-1, 1]``.  On ``(-beta, beta]`` the map has one monotone
Moebius branch per nonzero integer ``j``::

    (beta/(2j+1), beta/(2j-1)]  ->  (-p, p],   x  ->  p(2j - beta/x)

with inverse ``h_j(t) = p*beta / (2pj - t)``.  The plain Gauss-type map
is the case ``beta == p``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import AmbiguityError, DomainError


@dataclass(frozen=True)
class MapParams:
    """Parameters ``(p, beta)`` of the map ``U_beta`` on ``(-p, p]``.

    ``beta > p`` is accepted for exploration; ``exploratory`` is then set
    and branch intervals reaching past ``(-p, p]`` are clipped.
    """

    p: int
    beta: float
    exploratory: bool = field(init=False, repr=False)

    def __post_init__(self):
        if isinstance(self.p, bool) or int(self.p) != self.p or self.p < 1:
            raise DomainError(f"p must be a positive integer, got {self.p!r}")
        beta = float(self.beta)
        if not math.isfinite(beta) or beta <= 0.0:
            raise DomainError(f"beta must be a positive real, got {self.beta!r}")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "exploratory", beta > self.p)
        if self.exploratory:
            warnings.warn(
                f"beta={beta} > p={self.p}: outside the uniqueness range, "
                "results are exploratory", stacklevel=3)

    @property
    def beta0(self) -> float:
        return self.beta / self.p

    def to_dict(self):
        return {"p": self.p, "beta": self.beta}


def mod2(u: float) -> float:
    """Return the representative of ``u`` modulo ``2Z`` in ``(-1, 1]``.

    Uses ``u - 2k`` with ``k = ceil((u - 1)/2)``, i.e. ``u/2`` rounded with
    halves going down, so odd integers land on ``+1``.

    >>> mod2(3.0), mod2(-1.0), mod2(-1.5)
    (1.0, 1.0, 0.5)
    """
    u = float(u)
    if not math.isfinite(u):
        raise DomainError(f"mod2 needs a finite input, got {u}")
    if abs(u) >= 9007199254740992.0:  # 2**53: only even integers up here
        return 0.0
    r = u - 2.0 * math.ceil((u - 1.0) * 0.5)
    if r <= -1.0:
        r += 2.0
    elif r > 1.0:
        r -= 2.0
    return r


def _check_in_domain(x: float, params: MapParams):
    if not (-params.p < x <= params.p):
        raise DomainError(f"x={x} is outside (-{params.p}, {params.p}]")


def gauss_tau(x: float, params: MapParams) -> float:
    """``tau_beta(x) = {-beta/x}_2`` with ``tau_beta(0) = 0``."""
    x = float(x)
    _check_in_domain(x, params)
    y = -params.beta / x if x != 0.0 else 0.0
    # beta/x overflows only for subnormal x; treat it like the even integers above 2**53
    return mod2(y) if math.isfinite(y) else 0.0


def gauss_u(x: float, params: MapParams) -> float:
    """``U_beta(x) = p * tau_beta(x)``, a self-map of ``(-p, p]``."""
    return params.p * gauss_tau(x, params)


def gauss_u_array(x, params: MapParams) -> np.ndarray:
    """Vectorised :func:`gauss_u` (no domain checks)."""
    return kernels.gauss_u_array(np.ascontiguousarray(x, dtype=float),
                                 float(params.p), params.beta)


def branch_index(x: float, params: MapParams) -> int:
    """Return the ``j != 0`` with ``x`` in ``(beta/(2j+1), beta/(2j-1)]``."""
    x = float(x)
    if x == 0.0 or not (-params.beta < x <= params.beta):
        raise DomainError(f"x={x} is not in (-beta, beta] \\ {{0}} for beta={params.beta}")
    # same rounding as mod2(-beta/x): tau = 2j - beta/x
    j = int(math.floor((params.beta / x + 1.0) * 0.5))
    if j == 0:  # pragma: no cover - guarded by the range check
        raise DomainError(f"x={x} falls in no branch")
    return j


def branch_endpoints(j: int, params: MapParams) -> tuple[float, float]:
    """Half-open branch interval ``(beta/(2j+1), beta/(2j-1)]``."""
    if j == 0:
        raise DomainError("branch index must be nonzero")
    return params.beta / (2 * j + 1), params.beta / (2 * j - 1)


def branch_inverse(t: float, j: int, params: MapParams) -> float:
    """Inverse branch ``h_j(t) = p*beta / (2pj - t)``."""
    if int(j) != j or j == 0:
        raise DomainError(f"branch index must be a nonzero integer, got {j!r}")
    t = float(t)
    _check_in_domain(t, params)
    p = params.p
    return p * params.beta / (2.0 * p * int(j) - t)


def gauss_deriv(x: float, params: MapParams) -> float:
    """Derivative ``tau_beta'(x) = beta / x**2`` off the branch endpoints."""
    x = float(x)
    if x == 0.0:
        raise DomainError("tau_beta is singular at 0")
    return params.beta / (x * x)


def is_branch_endpoint(x, params: MapParams, rtol: float = 64 * np.finfo(float).eps):
    """True where ``beta/x`` is within ``rtol`` of an odd integer.

    These are the branch endpoints ``beta/(2j +- 1)``, where the
    piecewise map (and anything composed with it) is ambiguous.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        y = np.where(x == 0.0, 0.0, params.beta / np.where(x == 0.0, 1.0, x))
    nearest = 2.0 * np.round((y - 1.0) / 2.0) + 1.0
    return (x != 0.0) & (np.abs(y - nearest) <= rtol * np.maximum(1.0, np.abs(y)))


def is_zero_preimage(x, params: MapParams, rtol: float = 64 * np.finfo(float).eps):
    """True where ``beta/x`` is within ``rtol`` of an even integer (``U(x) = 0``)."""
    x = np.asarray(x, dtype=float)
    y = np.where(x == 0.0, 1.0, params.beta / np.where(x == 0.0, 1.0, x))
    nearest = 2.0 * np.round(y / 2.0)
    return (x != 0.0) & (np.abs(y - nearest) <= rtol * np.maximum(1.0, np.abs(y)))


def check_regular(x, params: MapParams):
    """Raise :class:`AmbiguityError` if any point is a branch endpoint."""
    bad = is_branch_endpoint(x, params)
    if np.any(bad):
        first = np.asarray(x, dtype=float)[bad].ravel()[0]
        raise AmbiguityError(
            f"x={first!r} is a branch endpoint beta/(2j+-1); perturb the sample point")


@dataclass
class Orbit:
    """Forward orbit ``x0, U(x0), ..., U^n(x0)``.

    ``survivor_steps`` counts the leading points that stay in
    ``(-beta, beta]``; ``hit_zero`` records whether the orbit reached the
    fixed point 0.
    """

    points: np.ndarray
    survivor_steps: int
    hit_zero: bool


def orbit(x0: float, n: int, params: MapParams) -> Orbit:
    x0 = float(x0)
    _check_in_domain(x0, params)
    if n < 1:
        raise DomainError(f"orbit length must be >= 1, got {n}")
    pts = kernels.orbit_points(x0, int(n), float(params.p), params.beta)
    inside = (pts[:n] > -params.beta) & (pts[:n] <= params.beta)
    survivors = int(n if inside.all() else np.argmin(inside))
    return Orbit(points=pts, survivor_steps=survivors, hit_zero=bool(np.any(pts == 0.0)))
