"""Hot numeric kernels, numba-compiled or pure numpy.

The implementation is chosen once at import time from ``HUPLAB_NUMBA``
(see :mod:`huplab._backend`).  Both modules expose the same functions.
"""
from .._backend import USE_NUMBA, apply_thread_cap

if USE_NUMBA:
    from . import _numba as _impl
    apply_thread_cap()
else:
    from . import _numpy as _impl

mod2_array = _impl.mod2_array
gauss_u_array = _impl.gauss_u_array
orbit_points = _impl.orbit_points
abs_orbit = _impl.abs_orbit
partial_fraction = _impl.partial_fraction
branch_sum_grid = _impl.branch_sum_grid
ulam_coo = _impl.ulam_coo
survival_steps = _impl.survival_steps
pullback = _impl.pullback

__all__ = [
    "mod2_array", "gauss_u_array", "orbit_points", "abs_orbit",
    "partial_fraction", "branch_sum_grid", "ulam_coo", "survival_steps",
    "pullback",
]
