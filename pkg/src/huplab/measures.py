"""The infinite invariant measure ``dx / (p^2 - x^2)`` and ergodic averages."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateError, DomainError, ParameterError
from .gaussmap import MapParams


def omega_density(x, p: int):
    """Density ``1/(p^2 - x^2)`` of the U-invariant measure, for ``|x| < p``."""
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) >= p):
        raise DomainError(f"omega density is only finite on |x| < p={p}")
    out = 1.0 / (p * p - xa * xa)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PartialFractionSum:
    """Truncated branch sum ``sum_{0<|j|<=J} 1/((2pj - t)^2 - p^2)``.

    ``tail_bound`` bounds the omitted terms ``|j| > J`` from above.
    ``tail_value`` is the omitted part in closed form: the series
    telescopes, ``1/((2pj-t)^2-p^2) = (1/2p)(1/(p(2j-1)-t) - 1/(p(2j+1)-t))``,
    so ``value + tail_value`` reproduces ``1/(p^2 - t^2)`` up to rounding.
    """

    value: np.ndarray | float
    tail_bound: float
    tail_value: np.ndarray | float

    @property
    def completed(self):
        return self.value + self.tail_value


def partial_fraction_sum(t, p: int, J: int) -> PartialFractionSum:
    """Branch-weight sum whose full value is the omega density at ``t``.

    For ``|t| < p`` and ``|j| >= 2``,
    ``(2pj - t)^2 - p^2 >= p^2((2|j|-1)^2 - 1) = 4p^2 |j|(|j|-1)``, so the
    tail over ``|j| > J`` is at most ``2 * sum_{j>J} 1/(4p^2 j(j-1))
    = 1/(2 p^2 J)``.
    """
    if J < 2:
        raise ParameterError(f"branch cutoff J must be >= 2, got {J}")
    ta = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(np.abs(ta) >= p):
        raise DomainError(f"partial fraction identity needs |t| < p={p}")
    raw = kernels.partial_fraction(np.ascontiguousarray(ta), float(p), int(J))
    tail_value = (0.5 / p) * (1.0 / (p * (2 * J + 1) - ta) + 1.0 / (p * (2 * J + 1) + ta))
    bound = 1.0 / (2.0 * p * p * J)
    if np.ndim(t) == 0:
        return PartialFractionSum(float(raw[0]), bound, float(tail_value[0]))
    return PartialFractionSum(raw, bound, tail_value)


@dataclass(frozen=True)
class HopfRatio:
    value: float
    n: int
    exploratory: bool = True


def hopf_ratio_average(f, g, x0: float, n: int, params: MapParams) -> HopfRatio:
    """Ratio of Birkhoff sums of ``f`` and ``g`` along an orbit of ``|U|``.

    For the infinite invariant measure the ratio is expected to approach
    ``int f d(omega) / int g d(omega)``, with no known rate, so the result
    is flagged exploratory.  Requires ``beta == p``.
    """
    if params.beta != params.p:
        raise DomainError("ratio averages are defined for the full map (beta == p)")
    if not (0.0 < x0 <= params.p):
        raise DomainError(f"x0={x0} is outside (0, {params.p}]")
    if n < 1:
        raise ParameterError("orbit length must be >= 1")
    pts = kernels.abs_orbit(float(x0), int(n), float(params.p))
    num = np.sum(np.asarray(f(pts)))
    den = np.sum(np.asarray(g(pts)))
    if den == 0:
        raise DegenerateError("denominator Birkhoff sum vanished along the orbit")
    return HopfRatio(value=float(np.real_if_close(num / den)), n=int(n))
