"""Numerics for Gauss-type interval maps and Heisenberg uniqueness pairs on the hyperbola.

Submodules
----------
gaussmap      the maps ``tau_beta`` and ``U_beta`` with their branch structure
measures      the infinite invariant measure and ergodic averages
operators     transfer, Koopman and composition operators
ulam          Ulam discretisation and leading spectra
escape        escape sets of the open system
hyperbola_ft  Fourier transforms of measures on ``xy = 1``
separation    harmonic extensions, separation system, annihilating pairs
cli           the ``huplab`` command-line harness
"""
from ._backend import backend_name
from .errors import (AmbiguityError, ConvergenceError, DegenerateError, DomainError,
                     HuplabError, ParameterError, ResourceError)
from .gaussmap import MapParams, gauss_tau, gauss_u, mod2, orbit
from .hyperbola_ft import HyperbolaMeasure, LatticeCross, ft_eval, ft_on_cross
from .separation import singular_pair, solve_separation
from .ulam import spectral_top, ulam_assemble

__version__ = "0.1.0"

__all__ = [
    "AmbiguityError", "ConvergenceError", "DegenerateError", "DomainError", "HuplabError",
    "ParameterError", "ResourceError", "MapParams", "gauss_tau", "gauss_u", "mod2", "orbit",
    "HyperbolaMeasure", "LatticeCross", "ft_eval", "ft_on_cross", "singular_pair",
    "solve_separation", "spectral_top", "ulam_assemble", "backend_name", "__version__",
]
