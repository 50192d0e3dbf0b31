import mpmath
import numpy as np
import pytest
from scipy.special import kv

from huplab.errors import ConvergenceError
from huplab.quadrature import adaptive, halfline, osc_integral


def test_adaptive_polynomial():
    r = adaptive(lambda x: x ** 5, 0.0, 2.0, 1e-14)
    assert abs(r.value - 64 / 6) < 1e-12


def test_adaptive_integrable_endpoint_singularity():
    r = adaptive(lambda x: np.log(x), 0.0, 1.0, 1e-10)
    assert abs(r.value + 1.0) < 1e-9


def test_halfline_against_long_direct_quadrature():
    w = 3.0
    r = halfline(lambda s: 1 / s ** 2, w, 1.0, 1e-12)
    ref = adaptive(lambda s: np.exp(1j * w * s) / s ** 2, 1.0, 4000.0, 1e-13, width=0.5).value
    tail = -np.exp(1j * w * 4000.0) / (1j * w * 4000.0 ** 2)
    assert abs(r.value - (ref + tail)) < 1e-10


def test_bessel_k0_integral():
    # int_0^inf exp(-t - c/t) dt / t = 2 K_0(2 sqrt(c)): both ends decay, no phase
    c = 0.7

    def amp(t):
        pos = t > 0
        ts = np.where(pos, t, 1.0)
        return np.where(pos, np.exp(-ts - c / ts) / ts, 0.0)
    r = osc_integral(amp, 0.0, 0.0, 1e-12)
    assert abs(r.value - 2 * kv(0, 2 * np.sqrt(c))) < 1e-10


@pytest.mark.parametrize("b", [0.0, 0.3, -1.7, 6.0])
def test_lorentzian_inverse_phase(b):
    # dt/(1+t^2) is invariant under t -> 1/t, so the 1/t phase is a plain Fourier integral
    r = osc_integral(lambda t: 1 / (1 + t * t), 0.0, b, 1e-12)
    assert abs(r.value - np.pi * np.exp(-np.pi * abs(b))) < 1e-10


@pytest.mark.parametrize("a", [0.0, 0.5, -2.5])
def test_lorentzian_linear_phase(a):
    r = osc_integral(lambda t: 1 / (1 + t * t), a, 0.0, 1e-12)
    assert abs(r.value - np.pi * np.exp(-np.pi * abs(a))) < 1e-10


def test_mixed_phase_against_mpmath():
    mpmath.mp.dps = 25
    a, b = 0.7, -1.1

    def outer(t):
        return mpmath.exp(-t * t) * mpmath.cos(mpmath.pi * (a * t + b / t))

    def inner(s):  # t = 1/s on (0, 1)
        return mpmath.exp(-1 / s ** 2) * mpmath.cos(mpmath.pi * (a / s + b * s)) / s ** 2
    # even amplitude: the imaginary parts of t and -t cancel
    ref = 2 * float(mpmath.quad(outer, [1, 2, 4, 8])
                    + mpmath.quadosc(inner, [1, mpmath.inf], omega=mpmath.pi * abs(b)))
    r = osc_integral(lambda t: np.exp(-t * t), a, b, 1e-12)
    assert abs(r.value.real - ref) < 1e-9
    assert abs(r.value.imag) < 1e-13


def test_non_integrable_amplitude_fails_loudly():
    with pytest.raises(ConvergenceError) as info:
        osc_integral(lambda t: np.ones_like(t), 0.0, 0.0, 1e-10, max_panels=2000)
    assert info.value.estimate is not None
