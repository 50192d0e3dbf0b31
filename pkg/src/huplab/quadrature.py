"""Adaptive quadrature for ``int_{R\\{0}} A(t) exp(i pi (a t + b/t)) dt``.

``A`` is a slowly varying amplitude (vectorised callable).  The line is
cut at ``|t| = 1``.  Pieces with no oscillation at their infinite end are
mapped onto finite intervals by ``t -> 1/t``; the others become half-line
integrals ``int_c^inf H(s) exp(i w s) ds``, integrated on panels up to a
cut ``S`` and finished with an asymptotic tail from repeated integration
by parts::

    int_S^inf H e^{iws} ds = -e^{iwS} [H/(iw) - H'/(iw)^2 + H''/(iw)^3 - ...]

Panels use 16-point Gauss-Legendre rules with bisection driven by the
difference between one panel and its two halves.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
MAX_PANELS = 400_000
_EPS = np.finfo(float).eps
FREQ_FLOOR = 1e-60


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float

    def __add__(self, other):
        return QuadResult(self.value + other.value, self.error + other.error)


def _gl(F, lo, hi):
    """Panel integrals of ``F`` and of ``|F|`` (the latter sets a rounding floor)."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = mid[:, None] + half[:, None] * _GL_X[None, :]
    f = np.asarray(F(x), dtype=complex)
    return half * (f @ _GL_W), half * (np.abs(f) @ _GL_W)


def adaptive(F, lo: float, hi: float, tol: float, width: float = 1.0,
             max_panels: int = MAX_PANELS, edges=None) -> QuadResult:
    """Panel-adaptive Gauss-Legendre integral of ``F`` over ``[lo, hi]``.

    ``F`` must accept a 2-D array of nodes.  Starting panels are at most
    ``width`` wide (or given explicitly as ``edges``); a panel is accepted
    once its error estimate falls below its length-proportional share of
    ``tol`` or below the rounding level of ``int |F|`` over it.
    """
    if hi <= lo:
        return QuadResult(0.0j, 0.0)
    if edges is None:
        n0 = max(1, int(np.ceil((hi - lo) / width)))
        edges = np.linspace(lo, hi, n0 + 1)
    edges = np.asarray(edges, dtype=float)
    n0 = edges.size - 1
    if n0 > max_panels:
        raise ConvergenceError(f"{n0} starting panels exceed the cap of {max_panels}",
                               estimate=None, residual=np.inf)
    a, b = edges[:-1], edges[1:]
    total = 0.0j
    err = 0.0
    mag = 0.0
    length = hi - lo
    seen = n0
    coarse = _gl(F, a, b)[0]
    while a.size:
        m = 0.5 * (a + b)
        left, mag_l = _gl(F, a, m)
        right, mag_r = _gl(F, m, b)
        fine = left + right
        e = np.abs(fine - coarse)
        ok = e <= np.maximum(tol * (b - a) / length, 32 * _EPS * (mag_l + mag_r))
        # stop splitting panels that have shrunk to rounding level
        ok |= (b - a) <= 1e-13 * max(1.0, abs(lo), abs(hi))
        total += np.sum(fine[ok])
        err += float(np.sum(e[ok]))
        mag += float(np.sum((mag_l + mag_r)[ok]))
        a, b, m = a[~ok], b[~ok], m[~ok]
        left, right = left[~ok], right[~ok]
        seen += 2 * a.size
        if seen > max_panels:
            est = total + np.sum(left + right)
            raise ConvergenceError(
                f"quadrature exceeded {max_panels} panels",
                estimate=est, residual=err + float(np.sum(np.abs(left + right))))
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        coarse = np.concatenate([left, right])
    if err > tol and err > 64 * _EPS * mag:
        # only panels squeezed to rounding width can get here: a singularity
        raise ConvergenceError(f"quadrature error {err:.3g} exceeds tolerance {tol:.3g}",
                               estimate=complex(total), residual=err)
    return QuadResult(complex(total), err)


def _derivs(H, S, h):
    """Values of ``H, H', H'', H'''`` at ``S`` by central differences."""
    x = S + h * np.arange(-3, 4, dtype=float)
    f = np.asarray(H(x), dtype=complex)
    d0 = f[3]
    d1 = (f[1] - 8 * f[2] + 8 * f[4] - f[5]) / (12 * h)
    d2 = (-f[1] + 16 * f[2] - 30 * f[3] + 16 * f[4] - f[5]) / (12 * h * h)
    d3 = (f[0] - 8 * f[1] + 13 * f[2] - 13 * f[4] + 8 * f[5] - f[6]) / (8 * h ** 3)
    return d0, d1, d2, d3


def ibp_tail(H, omega: float, S: float):
    """Three-term integration-by-parts tail and the size of the next term."""
    h0, h1, h2, h3 = _derivs(H, S, max(1e-3 * S, 1e-3))
    iw = 1j * omega
    tail = -np.exp(1j * omega * S) * (h0 / iw - h1 / iw ** 2 + h2 / iw ** 3)
    return complex(tail), float(abs(h3) / abs(omega) ** 4 + 1e-6 * abs(h2 / iw ** 3))


def halfline(H, omega: float, c: float, tol: float, S0: float = 0.0,
             max_panels: int = MAX_PANELS) -> QuadResult:
    """``int_c^inf H(s) exp(i omega s) ds`` for slowly varying ``H`` and ``omega != 0``."""
    w = abs(omega)
    S = max(S0, c + 32.0, c + 64.0 * np.pi / w)
    for _ in range(40):
        tail, terr = ibp_tail(H, omega, S)
        if terr <= 0.25 * tol:
            break
        S *= 2.0
    else:
        raise ConvergenceError("no tail cut found for half-line integral",
                               estimate=None, residual=terr)
    body = adaptive(lambda s: H(s) * np.exp(1j * omega * s), c, S, 0.75 * tol,
                    max_panels=max_panels, edges=_halfline_edges(c, S, np.pi / w))
    return body + QuadResult(tail, terr)


def _halfline_edges(c, S, wmax):
    """Panels doubling in width from ``c`` (for the algebraic decay of ``H``)
    until they reach ``wmax`` (half a period), then uniform up to ``S``."""
    edges = [c]
    x = c
    step = min(1.0, wmax)
    while x + step < S and step < wmax:
        x += step
        edges.append(x)
        step = min(2.0 * step, wmax)
    n = max(1, int(np.ceil((S - x) / wmax)))
    return np.concatenate([edges[:-1], np.linspace(x, S, n + 1)])


def osc_integral(amp, a: float = 0.0, b: float = 0.0, tol: float = 1e-11,
                 window: float = 0.0, max_panels: int = MAX_PANELS) -> QuadResult:
    """``int_{R\\{0}} amp(t) exp(i pi (a t + b/t)) dt``.

    ``window`` is a lower bound for the cut where asymptotic tails take
    over (use the scale beyond which ``amp`` is in its decay regime).
    """
    a = float(a)
    b = float(b)
    # below this the phase moves by < 1e-20 for |t| or |1/t| up to 1e40
    a = 0.0 if abs(a) < FREQ_FLOOR else a
    b = 0.0 if abs(b) < FREQ_FLOOR else b
    pa, pb = np.pi * a, np.pi * b
    width = 1.0 / (1.0 + abs(a) + abs(b))
    t4 = tol / 4.0
    out = QuadResult(0.0j, 0.0)
    for sgn in (1.0, -1.0):
        # inner piece, 0 < u < 1 with t = sgn*u
        if b == 0.0:
            out += adaptive(lambda u, s=sgn: amp(s * u) * np.exp(1j * s * pa * u),
                            0.0, 1.0, t4, width=width, max_panels=max_panels)
        else:
            def H_in(s, sg=sgn):
                return amp(sg / s) * np.exp(1j * sg * pa / s) / (s * s)
            out += halfline(H_in, sgn * pb, 1.0, t4, S0=window, max_panels=max_panels)
        # outer piece, u > 1
        if a == 0.0:
            def F_out(s, sg=sgn):
                with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                    v = amp(sg / s) * np.exp(1j * sg * pb * s) / (s * s)
                return np.where(s > 0.0, v, 0.0)
            out += adaptive(F_out, 0.0, 1.0, t4, width=width, max_panels=max_panels)
        else:
            def H_out(u, sg=sgn):
                return amp(sg * u) * np.exp(1j * sg * pb / u)
            out += halfline(H_out, sgn * pa, 1.0, t4, S0=window, max_panels=max_panels)
    return out
