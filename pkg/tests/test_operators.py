import math

import mpmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from huplab.errors import AmbiguityError, DomainError, ParameterError
from huplab.gaussmap import MapParams
from huplab.grids import GridDensity, GridFunction, safe_points
from huplab.measures import omega_density
from huplab.operators import (factorization_residual, identity_residual, identity_suite,
                              in_e_beta, koopman_apply, koopman_power, l1_contraction_ratio,
                              pf_apply, regular_points, s_apply, t_beta_apply, ts_apply,
                              weight_tails)
from oracles import pf_series

one = lambda t: np.ones(np.shape(t))  # noqa: E731
ident = lambda t: np.asarray(t, dtype=float)  # noqa: E731


@pytest.mark.parametrize("beta, expected", [(1.0, math.pi ** 2 / 12), (0.5, math.pi ** 2 / 24)])
def test_pf_constant_closed_form(beta, expected):
    r = pf_apply(one, 0.0, MapParams(1, beta), 10_000)
    assert abs(r.value - expected) <= r.tail_bound + 1e-14
    assert abs(r.corrected - expected) < 1e-12


def test_pf_against_series_oracle():
    params = MapParams(2, 1.3)
    f = lambda t: np.cos(t) + 0.5 * t  # noqa: E731
    for x in (-1.7, 0.0, 0.9):
        r = pf_apply(f, x, params, 2000)
        ref = pf_series(lambda t: mpmath.cos(t) + 0.5 * t, x, 2, 1.3)
        assert abs(r.corrected - ref) < 1e-9
        assert abs(r.value - ref) <= r.tail_bound * (1 + 1e-9)


def test_pf_fixes_omega():
    params = MapParams(1, 1.0)
    xs = np.linspace(-0.95, 0.95, 11)
    r = pf_apply(lambda t: omega_density(t, 1), xs, params, 20_000)
    assert np.max(np.abs(r.corrected / omega_density(xs, 1) - 1)) < 1e-9


def test_weight_tails_match_direct_sum():
    params = MapParams(3, 2.0)
    x = 0.7
    plus, minus = weight_tails(x, params, 50)
    mpmath.mp.dps = 30
    direct = mpmath.nsum(lambda j: 6 / (6 * j - x) ** 2, [51, mpmath.inf])
    mirror = mpmath.nsum(lambda j: 6 / (6 * j + x) ** 2, [51, mpmath.inf])
    assert plus == pytest.approx(float(direct), rel=1e-13)
    assert minus == pytest.approx(float(mirror), rel=1e-13)


def test_pf_grid_density_kernel_path_agrees_with_callable():
    params = MapParams(1, 0.8)
    dens = GridDensity.from_callable(lambda t: 1 + t ** 2, params, 64)
    xs = safe_points(params, 16)
    a = pf_apply(dens, xs, params, 300)
    b = pf_apply(lambda t: dens(t), xs, params, 300)
    assert np.allclose(a.value, b.value, rtol=1e-13, atol=1e-15)


def test_pf_errors():
    with pytest.raises(ParameterError):
        pf_apply(one, 0.0, MapParams(1, 1.0), 1)
    with pytest.raises(DomainError):
        pf_apply(one, 1.5, MapParams(1, 1.0), 10)


def test_koopman_examples():
    params = MapParams(1, 1.0)
    assert koopman_apply(ident, 0.5, params) == 0
    assert koopman_apply(one, 0.37, MapParams(1, 0.5)) == 1
    assert koopman_apply(ident, 0.9, MapParams(1, 0.5)) == 0
    with pytest.raises(AmbiguityError):
        koopman_apply(ident, 1 / 3, params)


def test_s_and_t_examples():
    params = MapParams(1, 1.0)
    assert s_apply(one, 2.5, params) == 1
    assert s_apply(ident, 2.5, params) == 0.5
    assert s_apply(ident, 0.3, params) == 0
    assert t_beta_apply(ident, 0.4, params) == pytest.approx(2.0, rel=1e-15)
    assert t_beta_apply(one, 0.9, MapParams(1, 0.5)) == 0
    with pytest.raises(DomainError):
        t_beta_apply(ident, 0.5, params)  # {1/0.5}_2 = 0


def test_ts_with_one_is_survivor_indicator():
    params = MapParams(1, 0.5)
    rng = np.random.default_rng(11)
    xs = regular_points(params, 5000, rng)
    ts = np.real(ts_apply(one, xs, params))
    inside = (xs > -0.5) & (xs <= 0.5)
    u = np.where(inside, np.array([koopman_apply(ident, x, params) for x in xs]).real, 9)
    expected = (inside & (u > -0.5) & (u <= 0.5)).astype(float)
    assert np.array_equal(ts, expected)
    assert np.array_equal(in_e_beta(xs, params), expected.astype(bool))
    assert np.all(ts[~inside] == 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.floats(0.1, 1.0), st.integers(0, 2**32 - 1))
def test_identities_hold_on_random_functions(p, frac, seed):
    params = MapParams(p, frac * p)
    suite = identity_suite(params, n_functions=4, n_points=500, seed=seed)
    assert suite.identity < 1e-12
    assert suite.factorization < 1e-12


def test_factorization_examples():
    params = MapParams(2, 1.4)
    xs = regular_points(params, 2000, np.random.default_rng(2))
    assert factorization_residual(one, xs, params) < 1e-12
    assert factorization_residual(lambda t: np.exp(1j * np.pi * t / 2), xs, params) < 1e-12
    phi = GridFunction(params, np.arange(9) * (1 - 2j))
    assert identity_residual(phi, xs, params) < 1e-12


def test_koopman_power_composes():
    params = MapParams(1, 0.9)
    xs = regular_points(params, 200, np.random.default_rng(5))
    two = koopman_power(ident, xs, params, 2)
    manual = koopman_apply(lambda t: koopman_apply(ident, t, params), xs, params)
    assert np.array_equal(two, manual)


def test_l1_contraction():
    params = MapParams(1, 0.6)
    rng = np.random.default_rng(8)
    for _ in range(5):
        f = GridDensity(params, rng.standard_normal(128) + 1j * rng.standard_normal(128))
        assert l1_contraction_ratio(f, 400) <= 1 + 1e-9


def test_duality_pairing():
    # <phi, P f> = <C phi, f> for a smooth density and observable
    params = MapParams(1, 0.7)
    phi = lambda t: np.cos(2 * t)  # noqa: E731
    f = lambda t: 1 + 0.3 * t  # noqa: E731
    n = 4000
    xs = safe_points(params, n)
    w = 2.0 / n
    lhs = np.sum(phi(xs) * pf_apply(f, xs, params, 400).corrected) * w
    rhs = np.sum(np.real(koopman_apply(phi, xs, params)) * f(xs)) * w
    assert abs(lhs - rhs) < 5e-3
