"""Sampled test functions and densities on (-p, p].

Both containers store one value per half-open bin ``(a_k, a_k + w]`` of an
equal partition of ``(-p, p]`` and evaluate as piecewise constants.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussmap import MapParams, is_branch_endpoint, is_zero_preimage


def bin_edges(params: MapParams, n: int) -> np.ndarray:
    p = params.p
    return -p + np.arange(n + 1) * (2.0 * p / n)


def bin_index(x, params: MapParams, n: int) -> np.ndarray:
    """Index of the half-open bin containing each ``x`` (clipped to range)."""
    w = 2.0 * params.p / n
    k = np.ceil((np.asarray(x, dtype=float) + params.p) / w).astype(np.int64) - 1
    return np.clip(k, 0, n - 1)


def safe_points(params: MapParams, n: int) -> np.ndarray:
    """Bin midpoints, nudged off branch endpoints, zero preimages and 0.

    The identities between the composition operators hold away from these
    countable sets; every sample grid in the package is built here.
    """
    w = 2.0 * params.p / n
    x = -params.p + (np.arange(n) + 0.5) * w
    for attempt in range(1, 8):
        bad = (is_branch_endpoint(x, params, rtol=1e-9)
               | is_zero_preimage(x, params, rtol=1e-9) | (x == 0.0))
        if not bad.any():
            break
        # irrational fraction of the bin width keeps the shift inside the bin
        x = np.where(bad, x + w * 0.0381966 / attempt, x)
    return x


@dataclass
class GridFunction:
    """Piecewise-constant test function with one complex value per bin."""

    params: MapParams
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 1 or self.values.size < 1:
            raise ValueError("values must be a non-empty 1-D array")

    @property
    def n_points(self) -> int:
        return self.values.size

    @property
    def points(self) -> np.ndarray:
        return safe_points(self.params, self.n_points)

    @classmethod
    def from_callable(cls, fn, params: MapParams, n: int) -> "GridFunction":
        return cls(params, fn(safe_points(params, n)))

    def __call__(self, x):
        return self.values[bin_index(x, self.params, self.n_points)]

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass
class GridDensity:
    """Complex density w.r.t. length on ``(-p, p]`` plus an atom at 0.

    ``values[k]`` is the density on bin ``k``; ``atom0`` is the mass of
    the point 0, kept apart because the invariance identities treat
    ``nu({0}) delta_0`` separately.
    """

    params: MapParams
    values: np.ndarray
    atom0: complex = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 1 or self.values.size < 1:
            raise ValueError("values must be a non-empty 1-D array")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("density values must be finite")

    @property
    def n_bins(self) -> int:
        return self.values.size

    @property
    def bin_width(self) -> float:
        return 2.0 * self.params.p / self.n_bins

    @classmethod
    def from_callable(cls, fn, params: MapParams, n: int, atom0=0.0) -> "GridDensity":
        return cls(params, fn(safe_points(params, n)), atom0)

    def __call__(self, x):
        return self.values[bin_index(x, self.params, self.n_bins)]

    def total_mass(self) -> complex:
        return complex(np.sum(self.values) * self.bin_width + self.atom0)

    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.values)) * self.bin_width + abs(self.atom0))

    def l1_norm(self) -> float:
        """L1 norm of the absolutely continuous part."""
        return float(np.sum(np.abs(self.values)) * self.bin_width)
