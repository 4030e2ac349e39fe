import numpy as np
import pytest

from lineshape.bath import BathSpec
from lineshape.hamiltonian import CouplingSpec, SpinSystemSpec
from lineshape.kernel import KernelToggles
from lineshape.susceptibility import (NumericalError, SusceptibilityEngine, SusceptibilitySweep,
                                      born_markov_lorentzian, chi_at, chi_sweep, field_sweep,
                                      peak_analysis, response_pair)

SINGLE = SpinSystemSpec.single()


def test_decoupled_spin_is_free_lorentzian():
    bath = BathSpec(0.0, 0.5, 5.0)
    eps = 0.01
    for w in (0.9, 1.0, 1.3):
        got = chi_at(w, SINGLE, CouplingSpec.uniform(1, 0.0), bath, response_pair("+-", 1),
                     epsilon=eps)
        assert got == pytest.approx(-np.tanh(2.5) / (w - 1.0 - 1j * eps), rel=1e-12)


def test_born_markov_pure_dephasing_lorentzian(toggle_bath):
    tg = KernelToggles(True, False, "born_markov")
    grid = np.linspace(0.9, 1.1, 11)
    sweep = chi_sweep(grid, SINGLE, CouplingSpec.uniform(1, 0.0), toggle_bath,
                      response_pair("+-", 1), tg)
    assert np.allclose(sweep.chi, born_markov_lorentzian(grid, 1.0, toggle_bath), rtol=1e-8)


def test_response_pair_labels():
    assert response_pair("+-", 2).label == "+-"
    assert np.allclose(response_pair("xy", 1).B, 0.5 * np.array([[0, 1], [1, 0]]))
    with pytest.raises(ValueError):
        response_pair("ab", 1)


def _engine(pair="xx"):
    return SusceptibilityEngine(SpinSystemSpec.two_spin(-1.0, 0.1, 0.5),
                                CouplingSpec.uniform(2, 0.4, 0.2), BathSpec(0.02, 0.5, 1.0),
                                response_pair(pair, 2))


@pytest.mark.parametrize("omega", [0.3, 0.95, 1.4])
def test_xx_response_reality_and_residual(omega):
    eng = _engine()
    assert eng.chi(-omega) == pytest.approx(np.conj(eng.chi(omega)), rel=1e-8)
    assert eng.solve(omega)[1] <= 1e-10


def test_thread_count_does_not_change_results(toggle_bath):
    grid = np.linspace(0.8, 1.2, 13)
    args = (SINGLE, CouplingSpec.uniform(1, 0.7), toggle_bath, response_pair("+-", 1))
    one = chi_sweep(grid, *args, threads=1)
    four = chi_sweep(grid, *args, threads=4)
    assert np.array_equal(one.chi, four.chi)
    assert one.metadata["hash"] == four.metadata["hash"]


def test_grid_validation(toggle_bath):
    args = (SINGLE, CouplingSpec.uniform(1, 0.0), toggle_bath, response_pair("+-", 1))
    with pytest.raises(ValueError):
        chi_sweep([1.0, 0.9, 1.1], *args)
    with pytest.raises(ValueError):
        chi_sweep([], *args)


def test_pure_dephasing_at_zero_frequency_is_singular():
    # populations are conserved without transverse coupling, so omega = 0 has no solution
    eng = _engine()
    eng = SusceptibilityEngine(SpinSystemSpec.two_spin(-1.0, 0.1, 0.0),
                               CouplingSpec.uniform(2, 0.0), eng.bath, eng.pair)
    with pytest.raises(NumericalError):
        eng.chi(0.0)


def test_peak_analysis_on_synthetic_lorentzian():
    x = np.linspace(0.5, 1.5, 1001)
    chi = -1.0 / (x - 1.01 - 0.05j)
    peaks = peak_analysis(SusceptibilitySweep(x, chi, KernelToggles()))
    assert len(peaks) == 1
    assert peaks[0].position == pytest.approx(1.01, abs=1e-4)
    assert peaks[0].fwhm == pytest.approx(0.1, rel=1e-3)
    with pytest.raises(ValueError):
        peak_analysis(SusceptibilitySweep(x, 0j * x, KernelToggles()))


def test_field_sweep_of_free_spin_peaks_at_drive(toggle_bath):
    grid = np.linspace(0.8, 1.2, 41)
    sweep = field_sweep(1.0, grid, SINGLE, CouplingSpec.uniform(1, 0.0),
                        BathSpec(0.01, 0.5, 5.0), response_pair("+-", 1),
                        KernelToggles(True, False, "born_markov"))
    assert sweep.kind == "field"
    assert peak_analysis(sweep)[0].position == pytest.approx(1.0, abs=2e-3)
