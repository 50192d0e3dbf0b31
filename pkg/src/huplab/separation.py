"""Bounded harmonic extensions to the upper half-plane and separation tests.

The boundary characters ``e_n^p(t) = exp(i pi (n + 1/p) t)`` and
``e_n^beta(t) = exp(i pi n beta / t)`` extend to bounded harmonic
functions on ``Im z > 0``; the conjugate is taken on whichever side
keeps the exponent's real part nonpositive.  Two points ``z1 != z2``
that no extension can tell apart exist exactly when ``beta > p``, and
their real counterparts give point-mass pairs whose transform vanishes
on a lattice cross.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, ParameterError
from .hyperbola_ft import HyperbolaMeasure, LatticeCross, ft_on_cross
from .quadrature import MAX_PANELS, osc_integral

SEPARATION_TOL = 1e-12


def _check_z(z) -> complex:
    z = complex(z)
    if not z.imag > 0:
        raise DomainError(f"point must lie in the open upper half-plane, got {z}")
    return z


def ext_ep(n: int, p: int, z) -> complex:
    """Harmonic extension of ``exp(i pi (n + 1/p) t)`` evaluated at ``z``."""
    z = _check_z(z)
    c = (n * p + 1) / p
    w = z if n >= 0 else z.conjugate()
    return complex(np.exp(1j * np.pi * c * w))


def ext_ebeta(n: int, beta: float, z) -> complex:
    """Harmonic extension of ``exp(i pi n beta / t)`` evaluated at ``z``."""
    z = _check_z(z)
    w = z.conjugate() if n >= 0 else z
    return complex(np.exp(1j * np.pi * n * beta / w))


# -- Poisson integral ---------------------------------------------------------

@dataclass(frozen=True)
class BoundaryData:
    """Boundary function ``amp(t) * exp(i pi (a t + b / t))``.

    ``amp`` is slowly varying and bounded by ``sup``; the phase pair
    ``(a, b)`` is handed to the oscillatory quadrature separately.
    """

    amp: object = None
    a: float = 0.0
    b: float = 0.0
    sup: float = 1.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        amp = np.ones_like(t) if self.amp is None else np.asarray(self.amp(t))
        return amp * np.exp(1j * np.pi * (self.a * t + self.b / t))

    @classmethod
    def ep(cls, n: int, p: int):
        return cls(None, (n * p + 1) / p, 0.0)

    @classmethod
    def ebeta(cls, n: int, beta: float):
        return cls(None, 0.0, n * beta)


def poisson_kernel(z, t):
    """``y / ((x - t)^2 + y^2)``; it integrates to ``pi`` over the real line."""
    z = _check_z(z)
    t = np.asarray(t, dtype=float)
    return z.imag / ((z.real - t) ** 2 + z.imag ** 2)


def poisson_extend(f: BoundaryData, z, tol: float = 1e-10,
                   max_panels: int = MAX_PANELS) -> complex:
    """``(1/pi) int f(t) P_z(t) dt`` to absolute tolerance ``tol``.

    The kernel's ``1/t^2`` decay lets the far field be folded onto a
    finite interval (or finished by an integration-by-parts tail when
    ``f`` oscillates there), so no truncation window is needed.
    """
    z = _check_z(z)
    if not isinstance(f, BoundaryData):
        f = BoundaryData(f)
    amp = f.amp

    def A(t):
        k = poisson_kernel(z, t) / np.pi
        return k if amp is None else k * np.asarray(amp(t))

    return osc_integral(A, f.a, f.b, tol, max(1.0, abs(z)), max_panels).value


# -- separation system --------------------------------------------------------

@dataclass(frozen=True)
class SeparationSolution:
    """A candidate pair ``z1, z2`` with ``z1 - z2 = 2p`` and ``1/z1 - 1/z2 = 2/beta``."""

    p: int
    beta: float
    exists: bool
    z1: complex | None = None
    z2: complex | None = None

    def congruence_residuals(self) -> tuple[float, float]:
        d = self.z1 - self.z2
        inv = 1 / self.z1 - 1 / self.z2
        return abs(d - 2 * self.p), abs(inv - 2 / self.beta)

    def to_dict(self) -> dict:
        if not self.exists:
            return {"p": self.p, "beta": self.beta, "exists": False, "z1": "none", "z2": "none"}
        return {"p": self.p, "beta": self.beta, "exists": True,
                "z1": [self.z1.real, self.z1.imag], "z2": [self.z2.real, self.z2.imag]}


def solve_separation(p: int, beta: float) -> SeparationSolution:
    """Closed-form solution of the separation system, if one exists.

    Writing ``z1 = z2 + 2p`` and ``z1 z2 = -p beta`` gives
    ``z = p(+-1 + i sqrt(beta/p - 1))``, which lies in the upper
    half-plane only for ``beta > p``.
    """
    if int(p) != p or p < 1:
        raise ParameterError(f"p must be a positive integer, got {p}")
    if not beta > 0:
        raise ParameterError("beta must be positive")
    if beta <= p:
        return SeparationSolution(int(p), float(beta), False)
    r = math.sqrt(beta / p - 1.0)
    sol = SeparationSolution(int(p), float(beta), True, complex(p, p * r), complex(-p, p * r))
    d, inv = sol.congruence_residuals()
    # the relations hold by construction; a failure here means r lost precision
    assert d <= SEPARATION_TOL * max(1, p) and inv <= SEPARATION_TOL * max(1, 1 / beta), (d, inv)
    return sol


@dataclass(frozen=True)
class SingularPair:
    """Real points ``u0 - v0 = 2pk`` with ``1/u0 - 1/v0 = 2m/beta``."""

    p: int
    beta: float
    k: int
    m: int
    u0: float
    v0: float

    @property
    def degenerate(self) -> bool:
        return self.u0 == self.v0

    def measure(self) -> HyperbolaMeasure:
        """``delta_(u0, 1/u0) - delta_(v0, 1/v0)`` (the zero measure if degenerate)."""
        if self.degenerate:
            return HyperbolaMeasure.zero()
        return HyperbolaMeasure.atoms([self.u0, self.v0], [1.0, -1.0])

    def congruences_exact(self, q: int, N: int) -> bool:
        """Check both lattice congruences for ``|n| <= N`` in rational arithmetic.

        ``u0 - v0 = 2pk`` and ``1/u0 - 1/v0 = 2m/beta`` hold by
        construction, so the phases ``(n + q/p)(u0 - v0)/2`` and
        ``n beta (1/u0 - 1/v0)/2`` are formed from those exact values
        (``beta`` is taken as the exact binary rational it stores).
        """
        du = Fraction(2 * self.p * self.k)
        b = Fraction(self.beta)
        dinv = Fraction(2 * self.m) / b
        theta = Fraction(q, self.p)
        for n in range(-N, N + 1):
            if ((n + theta) * du / 2).denominator != 1:
                return False
            if (n * b * dinv / 2).denominator != 1:
                return False
        return True

    def to_dict(self) -> dict:
        return {"p": self.p, "beta": self.beta, "k": self.k, "m": self.m,
                "u0": self.u0, "v0": self.v0}


def singular_pair(p: int, beta: float, k: int, m: int) -> SingularPair | None:
    """Solve ``v^2 + 2pk v + pk beta/m = 0`` and shift ``u0 = v0 + 2pk``.

    Returns the pair built from the root ``v0 = -pk + sqrt(D)``, or
    ``None`` when ``D = (pk)^2 - pk beta/m`` is negative.
    """
    if k == 0 or m == 0:
        raise ParameterError("k and m must be nonzero integers")
    if int(p) != p or p < 1 or not beta > 0:
        raise ParameterError("need a positive integer p and beta > 0")
    pk = p * k
    c = pk * beta / m
    disc = pk * pk - c
    if disc < 0:
        return None
    s = math.sqrt(disc)
    # avoid cancellation in -pk + s when pk > 0
    v0 = -c / (pk + s) if pk > 0 else -pk + s
    u0 = v0 + 2 * pk
    if u0 == 0.0 or v0 == 0.0:
        return None
    return SingularPair(int(p), float(beta), int(k), int(m), u0, v0)


# -- verification -------------------------------------------------------------

@dataclass
class VerificationReport:
    mode: str
    max_residual: float
    tol: float
    inputs: dict
    table: list = field(default_factory=list)
    degenerate: bool = False

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tol

    def to_dict(self) -> dict:
        return {"mode": self.mode, "inputs": self.inputs, "tolerance": self.tol,
                "max_residual": self.max_residual, "passed": self.passed,
                "degenerate": self.degenerate, "table": self.table}


def verify_separation_or_annihilation(subject, p: int, beta: float, q: int = 1, N: int = 50,
                                      tol: float = SEPARATION_TOL) -> VerificationReport:
    """Largest mismatch of the extensions (separation) or of ``mu_hat`` on the cross (annihilation)."""
    if isinstance(subject, SeparationSolution):
        if not subject.exists:
            raise DomainError("no separating pair to verify")
        z1, z2 = subject.z1, subject.z2
        rows = []
        worst = 0.0
        for n in range(-N, N + 1):
            dp = abs(ext_ep(n, p, z1) - ext_ep(n, p, z2))
            db = abs(ext_ebeta(n, beta, z1) - ext_ebeta(n, beta, z2))
            rows.append({"n": n, "ep": dp, "ebeta": db})
            worst = max(worst, dp, db)
        inputs = {"p": p, "beta": beta, "N": N, **{k: v for k, v in subject.to_dict().items()
                                                   if k in ("z1", "z2")}}
        return VerificationReport("separation", worst, tol, inputs, rows)
    if isinstance(subject, SingularPair):
        cross = LatticeCross(p, q, beta, N)
        res = ft_on_cross(subject.measure(), cross)
        P = res.points
        rows = [{"axis": P.axis[i], "index": int(P.index[i]), "xi1": float(P.xi1[i]),
                 "xi2": float(P.xi2[i]), "abs": float(abs(res.values[i]))}
                for i in range(len(P))]
        inputs = {"q": q, "N": N, **subject.to_dict()}
        return VerificationReport("annihilation", res.max_modulus, tol, inputs, rows,
                                  degenerate=subject.degenerate)
    raise ParameterError(f"cannot verify subject of type {type(subject).__name__}")


def poisson_consistency(p: int, beta: float, ns, zs, tol: float = 1e-10) -> list[dict]:
    """Compare Poisson integrals with the case-split extensions for both families."""
    rows = []
    for z in zs:
        z = _check_z(z)
        for n in ns:
            for family, data, exact in (
                    ("ep", BoundaryData.ep(n, p), ext_ep(n, p, z)),
                    ("ebeta", BoundaryData.ebeta(n, beta), ext_ebeta(n, beta, z))):
                val = poisson_extend(data, z, tol)
                rows.append({"family": family, "n": int(n), "z": [z.real, z.imag],
                             "poisson": [val.real, val.imag], "closed_form": [exact.real, exact.imag],
                             "abs_diff": abs(val - exact)})
    return rows
