import numpy as np
import pytest

from lineshape.bath import (BathSpec, QuadratureError, bath_spectrum_J, bose_n, half_fourier_F,
                            half_fourier_Fs, half_fourier_time, kappa_i, ohmic_I, phi_analytic,
                            phi_from_spectrum, phi_quadrature, pv_integral, trigamma)
from lineshape.kernel import BathTransforms

# Frozen references computed with mpmath at 30 digits (independent of this package).
PHI_0 = 0.0332028527242367795
PHI_3 = 0.00319783718975926878 - 0.00710059171597633136j
HILBERT_03 = -0.0124988820122234843
TRIGAMMA_1_2I = 0.124931162140944583 - 0.477825550147229748j


def test_phi_matches_mpmath(toggle_bath):
    vals = phi_analytic(np.array([0.0, 3.0]), toggle_bath)
    assert vals[0] == pytest.approx(PHI_0, rel=1e-12)
    assert vals[1] == pytest.approx(PHI_3, rel=1e-10)


def test_trigamma_matches_mpmath():
    assert trigamma(1 + 2j) == pytest.approx(TRIGAMMA_1_2I, rel=1e-13)
    assert trigamma(1.0) == pytest.approx(np.pi ** 2 / 6, rel=1e-14)


def test_hilbert_transform_matches_mpmath(toggle_bath):
    got = BathTransforms(toggle_bath, 3.0).hilbert(np.array([0.3]))[0]
    assert got == pytest.approx(HILBERT_03, rel=1e-9)


def test_kms_and_zero_limit(toggle_bath):
    w = np.linspace(0.01, 5.0, 100)
    b = toggle_bath.beta
    assert np.allclose(bath_spectrum_J(-w, toggle_bath),
                       np.exp(-b * w) * bath_spectrum_J(w, toggle_bath), rtol=1e-12, atol=0)
    assert bath_spectrum_J(0.0, toggle_bath) == pytest.approx(toggle_bath.s / b, rel=1e-15)
    assert bath_spectrum_J(1e-9, toggle_bath) == pytest.approx(toggle_bath.s / b, rel=1e-8)


def test_spectrum_is_coupling_times_occupation(toggle_bath):
    w = 0.7
    assert bath_spectrum_J(w, toggle_bath) == pytest.approx(
        ohmic_I(w, toggle_bath) * (bose_n(w, toggle_bath.beta) + 1), rel=1e-13)
    assert kappa_i(1e-10, 5.0) == pytest.approx(5.0, rel=1e-9)


@pytest.mark.parametrize("t", [0.0, 1.0, 7.5, 40.0])
def test_three_phi_routes_agree(toggle_bath, t):
    ana = phi_analytic(t, toggle_bath)
    assert phi_quadrature(t, toggle_bath) == pytest.approx(ana, rel=1e-6)
    assert phi_from_spectrum(t, toggle_bath) == pytest.approx(ana, rel=1e-6)


def test_phi_is_hermitian_in_time(toggle_bath):
    t = np.array([0.5, 2.0])
    assert np.allclose(phi_analytic(-t, toggle_bath), np.conj(phi_analytic(t, toggle_bath)))


def test_pv_integral_known_values():
    assert pv_integral(lambda w: w * w, 1.0, 0.0, 2.0) == pytest.approx(4.0, abs=1e-10)
    assert pv_integral(lambda w: np.ones_like(w), 0.5, 0.0, 2.0) == pytest.approx(
        np.log(1.5 / 0.5), abs=1e-10)


@pytest.mark.parametrize("sign,omega", [(1, 0.8), (-1, 1.2)])
def test_half_fourier_frequency_vs_time_route(toggle_bath, sign, omega):
    f = half_fourier_F(sign, omega, 1.0, toggle_bath).combined
    fs = half_fourier_Fs(sign, omega, 1.0, toggle_bath).combined
    assert half_fourier_time(sign, omega, 1.0, toggle_bath) == pytest.approx(f, rel=1e-4)
    assert half_fourier_time(sign, omega, 1.0, toggle_bath, conjugate=True) == pytest.approx(
        fs, rel=1e-4)


def test_shift_toggle_removes_imaginary_part(toggle_bath):
    on = half_fourier_F(1, 0.8, 1.0, toggle_bath, include_shift=True).combined
    off = half_fourier_F(1, 0.8, 1.0, toggle_bath, include_shift=False).combined
    assert off.real == pytest.approx(on.real, rel=1e-12)
    assert off.imag == 0.0 and on.imag != 0.0


def test_invalid_bath_rejected():
    for args in ((-0.1, 0.5, 1.0), (0.1, 0.0, 1.0), (0.1, 0.5, 0.0)):
        with pytest.raises(ValueError):
            BathSpec(*args)
    with pytest.raises(ValueError):
        bose_n(0.0, 1.0)
    assert issubclass(QuadratureError, RuntimeError)
