"""Fourier transforms of measures carried by the hyperbola ``xy = 1``.

A measure is described by a density ``g`` on ``R \\ {0}`` (the point
``(t, 1/t)`` carries ``g(t) dt``) or by finitely many point masses.  Its
transform uses the convention

    mu_hat(xi1, xi2) = int exp(i pi (xi1 t + xi2 / t)) g(t) dt

with ``pi`` rather than ``2 pi`` in the exponent, so that integer
congruences on lattice crosses read ``phase in 2Z``.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import _backend
from .errors import DomainError, ParameterError
from .quadrature import MAX_PANELS, osc_integral

DEFAULT_TOL = 1e-11


def arc_density_to_g(f: Callable, t):
    """Convert an arc-length density ``f`` into the ``dt`` density ``g``.

    ``g(t) = f(t) sqrt(1 + 1/t^4)``, the arc-length element of
    ``t -> (t, 1/t)``.
    """
    ta = np.asarray(t, dtype=float)
    if np.any(ta == 0.0):
        raise DomainError("arc-length conversion is undefined at t = 0")
    out = np.asarray(f(ta), dtype=float) * np.sqrt(1.0 + ta ** -4.0)
    return out.item() if out.ndim == 0 else out


@dataclass(frozen=True)
class HyperbolaMeasure:
    """Finite measure on the hyperbola, in density or atom form.

    Parameters
    ----------
    kind : {"density", "atoms"}
    g : callable, optional
        Vectorised density against ``dt`` (density mode).  It should be
        integrable with slowly varying tails beyond ``window``.
    window : float
        Scale beyond which ``g`` is in its decay regime; quadrature
        switches to asymptotic tails no earlier than this.
    atoms_t, atoms_w : ndarray
        Atom abscissae ``t_k != 0`` and weights; ``w_k`` sits at
        ``(t_k, 1/t_k)``.
    tol : float
        Absolute quadrature tolerance per evaluation.
    offset : (float, float)
        Translation applied to the support, which multiplies the
        transform by ``exp(i pi <offset, xi>)``.
    """

    kind: str
    g: Callable | None = None
    window: float = 0.0
    atoms_t: np.ndarray = field(default_factory=lambda: np.zeros(0))
    atoms_w: np.ndarray = field(default_factory=lambda: np.zeros(0))
    tol: float = DEFAULT_TOL
    offset: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("density", "atoms"):
            raise ParameterError(f"unknown measure kind {self.kind!r}")
        if self.kind == "density" and self.g is None:
            raise ParameterError("density mode needs a callable g")
        if self.kind == "atoms":
            t = np.asarray(self.atoms_t, dtype=float).ravel()
            w = np.asarray(self.atoms_w).ravel()
            if t.shape != w.shape:
                raise ParameterError("atoms_t and atoms_w differ in length")
            if np.any(t == 0.0) or not np.all(np.isfinite(t)):
                raise DomainError("atoms must sit at finite t != 0")
            object.__setattr__(self, "atoms_t", t)
            object.__setattr__(self, "atoms_w", w)
        if not self.tol > 0:
            raise ParameterError("quadrature tolerance must be positive")

    @classmethod
    def density(cls, g: Callable, window: float = 0.0, tol: float = DEFAULT_TOL):
        return cls("density", g=g, window=float(window), tol=tol)

    @classmethod
    def from_arc_density(cls, f: Callable, window: float = 0.0, tol: float = DEFAULT_TOL):
        return cls.density(lambda t: arc_density_to_g(f, t), window, tol)

    @classmethod
    def atoms(cls, t: Sequence[float], w: Sequence[float]):
        return cls("atoms", atoms_t=np.asarray(t, dtype=float), atoms_w=np.asarray(w))

    @classmethod
    def zero(cls):
        return cls.atoms([], [])

    @property
    def is_zero(self) -> bool:
        return self.kind == "atoms" and not np.any(self.atoms_w != 0)

    def total_mass(self) -> complex:
        if self.kind == "atoms":
            return complex(np.sum(self.atoms_w))
        return osc_integral(self.g, 0.0, 0.0, self.tol, self.window).value

    def total_variation(self) -> float:
        if self.kind == "atoms":
            return float(np.sum(np.abs(self.atoms_w)))
        g = self.g
        return osc_integral(lambda t: np.abs(g(t)), 0.0, 0.0, self.tol, self.window).value.real


@dataclass(frozen=True)
class FTValue:
    """A transform value and its absolute error estimate."""

    value: complex
    error: float


# -- accurate phases --------------------------------------------------------

_SPLIT = 134217729.0  # 2**27 + 1


def _two_prod(a, b):
    """Error-free product ``a*b = p + e``."""
    p = a * b
    c = _SPLIT * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLIT * b
    bh = c - (c - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _phase(xi1, xi2, t):
    """``(xi1 t + xi2 / t) mod 2`` with the products carried exactly.

    Reducing the rounded product mod 2 would lose every digit above the
    binary point; splitting off the rounding error first keeps the
    reduced phase accurate to a few ulps of 2.
    """
    p1, e1 = _two_prod(xi1, t)
    q = xi2 / t
    pq, eq = _two_prod(q, t)
    corr = ((xi2 - pq) - eq) / t
    return np.fmod(p1, 2.0) + e1 + np.fmod(q, 2.0) + corr


def _atoms_ft(mu, xi1, xi2):
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    if mu.atoms_t.size == 0:
        return np.zeros(np.broadcast(xi1, xi2).shape, dtype=complex)
    ph = _phase(xi1[..., None], xi2[..., None], mu.atoms_t)
    return np.exp(1j * np.pi * ph) @ mu.atoms_w.astype(complex)


def _offset_factor(mu, xi1, xi2):
    u1, u2 = mu.offset
    if u1 == 0.0 and u2 == 0.0:
        return 1.0
    return np.exp(1j * np.pi * (u1 * xi1 + u2 * xi2))


def ft_eval(mu: HyperbolaMeasure, xi1: float, xi2: float, tol: float | None = None,
            max_panels: int = MAX_PANELS) -> FTValue:
    """Evaluate ``mu_hat(xi1, xi2)``.

    Atom measures are summed directly.  Densities go through
    :func:`huplab.quadrature.osc_integral`; a
    :class:`~huplab.errors.ConvergenceError` carrying the best estimate is
    raised when the panel cap is hit first.
    """
    xi1 = float(xi1)
    xi2 = float(xi2)
    if mu.kind == "atoms":
        val = complex(_atoms_ft(mu, xi1, xi2))
        return FTValue(val * _offset_factor(mu, xi1, xi2), 0.0)
    r = osc_integral(mu.g, xi1, xi2, mu.tol if tol is None else tol, mu.window, max_panels)
    return FTValue(r.value * _offset_factor(mu, xi1, xi2), r.error)


# -- lattice crosses --------------------------------------------------------

@dataclass(frozen=True)
class CrossPoints:
    """Labelled frequency points: ``axis`` is "h" or "v" (or "t" once moved off the axes)."""

    axis: tuple
    index: np.ndarray
    xi1: np.ndarray
    xi2: np.ndarray

    def __len__(self):
        return len(self.axis)


@dataclass(frozen=True)
class LatticeCross:
    """``((Z + q/p) x {0})  U  ({0} x beta Z)`` truncated to ``|n|, |m| <= N``.

    Horizontal abscissae are formed as ``(n p + q) / p`` so the shift
    ``q/p`` never accumulates rounding.  When ``p = 1`` one horizontal
    point coincides with the origin; it is dropped in favour of the
    vertical ``m = 0`` point.
    """

    p: int
    q: int
    beta: float
    N: int

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise ParameterError(f"p must be a positive integer, got {self.p}")
        if int(self.q) != self.q:
            raise ParameterError(f"q must be an integer, got {self.q}")
        if math.gcd(int(self.p), int(self.q)) != 1:
            raise ParameterError(f"gcd(p, q) must be 1, got p={self.p}, q={self.q}")
        if not self.beta > 0:
            raise ParameterError("beta must be positive")
        if self.N < 0:
            raise ParameterError("index window N must be >= 0")

    @property
    def theta(self) -> Fraction:
        return Fraction(int(self.q), int(self.p))

    def points(self) -> CrossPoints:
        n = np.arange(-self.N, self.N + 1)
        num = n * self.p + self.q
        keep = num != 0
        n = n[keep]
        h = num[keep] / self.p
        m = np.arange(-self.N, self.N + 1)
        v = self.beta * m
        return CrossPoints(
            axis=("h",) * n.size + ("v",) * m.size,
            index=np.concatenate([n, m]),
            xi1=np.concatenate([h.astype(float), np.zeros(m.size)]),
            xi2=np.concatenate([np.zeros(n.size), v]),
        )


@dataclass(frozen=True)
class CrossResidual:
    points: CrossPoints
    values: np.ndarray
    errors: np.ndarray

    @property
    def max_modulus(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    @property
    def max_error(self) -> float:
        return float(np.max(self.errors)) if self.errors.size else 0.0

    def to_csv(self) -> str:
        """Rows ``axis,index,xi1,xi2,re,im,abs,quad_error`` with 17 significant digits."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["axis", "index", "xi1", "xi2", "re", "im", "abs", "quad_error"])
        P = self.points
        for k in range(len(P)):
            z = self.values[k]
            w.writerow([P.axis[k], int(P.index[k])] + [
                _fmt(v) for v in (P.xi1[k], P.xi2[k], z.real, z.imag, abs(z), self.errors[k])])
        return buf.getvalue()


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def ft_on_cross(mu: HyperbolaMeasure, cross, tol: float | None = None) -> CrossResidual:
    """Evaluate ``mu_hat`` at every point of a cross (or any :class:`CrossPoints`).

    Density evaluations are spread over at most ``HUPLAB_THREADS``
    threads; results keep point order.
    """
    P = cross.points() if isinstance(cross, LatticeCross) else cross
    if mu.kind == "atoms":
        vals = _atoms_ft(mu, P.xi1, P.xi2) * _offset_factor(mu, P.xi1, P.xi2)
        return CrossResidual(P, np.asarray(vals, dtype=complex), np.zeros(len(P)))

    def one(k):
        return ft_eval(mu, P.xi1[k], P.xi2[k], tol)

    workers = _backend.thread_cap() or 1
    if workers > 1 and len(P) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            res = list(ex.map(one, range(len(P))))
    else:
        res = [one(k) for k in range(len(P))]
    return CrossResidual(P, np.array([r.value for r in res], dtype=complex),
                         np.array([r.error for r in res]))


# -- Klein-Gordon -----------------------------------------------------------

@dataclass(frozen=True)
class KGResidual:
    field: np.ndarray
    h: float

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.field)))


def klein_gordon_residual(mu: HyperbolaMeasure, xi, eta, h: float,
                          tol: float | None = None) -> KGResidual:
    """Residual of ``(d_xi d_eta + pi^2) mu_hat`` by central differences.

    ``xi`` and ``eta`` list the centres of a rectangle; the mixed
    derivative at each centre uses the four points ``(xi +- h, eta +- h)``.
    The exact residual is zero for every measure on the hyperbola, so the
    field measures the ``O(h^2)`` truncation error.
    """
    if not h > 0:
        raise ParameterError("finite-difference step h must be positive")
    X, Y = np.meshgrid(np.asarray(xi, float), np.asarray(eta, float), indexing="ij")
    tol = mu.tol if tol is None else tol

    def u(a, b):
        if mu.kind == "atoms":
            return _atoms_ft(mu, a, b) * _offset_factor(mu, a, b)
        flat = [ft_eval(mu, s, t, tol).value for s, t in zip(a.ravel(), b.ravel())]
        return np.array(flat, dtype=complex).reshape(a.shape)

    mixed = (u(X + h, Y + h) - u(X + h, Y - h) - u(X - h, Y + h) + u(X - h, Y - h)) / (4 * h * h)
    return KGResidual(mixed + np.pi ** 2 * u(X, Y), float(h))


# -- invariance transforms --------------------------------------------------

def _as_T(T):
    A = np.asarray(T, dtype=float)
    if A.shape != (2, 2):
        raise DomainError("linear transform must be a 2x2 matrix")
    if abs(np.linalg.det(A)) < 1e-300 or not np.all(np.isfinite(A)):
        raise DomainError("linear transform is singular")
    return A


def invariance_transform(obj, translation=None, T=None):
    """Move a measure or a frequency set by the HUP invariance group.

    A measure ``mu`` on ``Gamma`` becomes ``T^{-1}``-pushed (support
    ``T^{-1} Gamma``) and then translated by ``translation``; a frequency
    set ``Lambda`` becomes ``T^* Lambda + translation``.  With
    ``nu = (T^{-1})_* mu`` one has ``nu_hat(T^* zeta) = mu_hat(zeta)``,
    so vanishing on ``Lambda`` transfers exactly.  Measures only accept
    ``T = diag(a, 1/a)``, the maps that keep the support on ``xy = 1``;
    atoms then move from ``(t, 1/t)`` to ``(t/a, a/t)``.
    """
    if isinstance(obj, HyperbolaMeasure):
        mu = obj
        if T is not None:
            A = _as_T(T)
            a = A[0, 0]
            if A[0, 1] != 0 or A[1, 0] != 0 or a == 0 or abs(a * A[1, 1] - 1) > 1e-15:
                raise DomainError("only T = diag(a, 1/a) keeps a measure on the hyperbola")
            u1, u2 = mu.offset
            off = (u1 / a, u2 * a)
            if mu.kind == "atoms":
                mu = replace(mu, atoms_t=mu.atoms_t / a, offset=off)
            else:
                g0 = mu.g
                mu = replace(mu, g=lambda s: abs(a) * g0(a * s),
                             window=mu.window / abs(a), offset=off)
        if translation is not None:
            u1, u2 = mu.offset
            mu = replace(mu, offset=(u1 + float(translation[0]), u2 + float(translation[1])))
        return mu
    P = obj.points() if isinstance(obj, LatticeCross) else obj
    x1, x2 = P.xi1, P.xi2
    axis = P.axis
    if T is not None:
        A = _as_T(T).T
        x1, x2 = A[0, 0] * x1 + A[0, 1] * x2, A[1, 0] * x1 + A[1, 1] * x2
        if A[0, 1] != 0 or A[1, 0] != 0:
            axis = ("t",) * len(P)
    if translation is not None:
        x1 = x1 + float(translation[0])
        x2 = x2 + float(translation[1])
        if translation[0] != 0 or translation[1] != 0:
            axis = ("t",) * len(P)
    return CrossPoints(axis, P.index.copy(), np.asarray(x1, float), np.asarray(x2, float))
