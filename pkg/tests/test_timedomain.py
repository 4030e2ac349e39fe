import numpy as np
import pytest

from lineshape.hamiltonian import CouplingSpec, SpinSystemSpec
from lineshape.susceptibility import SusceptibilityEngine, response_pair
from lineshape.timedomain import (Trajectory, chi_from_trajectory, kernel_time,
                                  laplace_of, propagate)
from lineshape.validate import dual_route, step_order

SINGLE = SpinSystemSpec.single()


@pytest.fixture(scope="module")
def short_run():
    from lineshape.validate import FIG2_BATH
    pair = response_pair("xx", 1)
    return propagate(SINGLE, CouplingSpec.uniform(1, np.pi / 4), FIG2_BATH, pair.A, 0.02, 20.0)


def test_trace_is_conserved(short_run):
    mats = short_run.samples.reshape(-1, 2, 2)
    scale = np.max(np.abs(short_run.samples[0]))
    assert np.max(np.abs(np.trace(mats, axis1=1, axis2=2))) <= 1e-10 * scale


def test_commutator_stays_anti_hermitian(short_run):
    mats = short_run.samples.reshape(-1, 2, 2)
    assert np.allclose(mats, -np.conj(np.transpose(mats, (0, 2, 1))), atol=1e-8)


def test_trajectory_time_axis(short_run):
    assert short_run.times[1] == pytest.approx(0.02)
    assert short_run.horizon == pytest.approx(20.0)


def test_kernel_at_zero_time_is_finite(toggle_bath):
    k0 = kernel_time(0.0, SINGLE, CouplingSpec.uniform(1, 0.3), toggle_bath)
    assert k0.shape == (4, 4) and np.all(np.isfinite(k0))
    # trace preservation holds at every time lag
    assert np.allclose(np.eye(2).reshape(-1) @ k0, 0.0, atol=1e-14)


def test_laplace_of_exponential():
    dt = 0.01
    t = np.arange(0, 60.0 + dt / 2, dt)
    traj = Trajectory(dt, np.exp(-(0.5 + 1j) * t)[:, None])
    got = laplace_of(traj, 0.3)[0]
    assert got == pytest.approx(1.0 / (0.5 + 1j + 0.3j), rel=1e-8)


def test_free_precession_phase(toggle_bath):
    from lineshape.bath import BathSpec
    pair = response_pair("+-", 1)
    traj = propagate(SINGLE, CouplingSpec.uniform(1, 0.0), BathSpec(0.0, 0.5, 5.0), pair.A,
                     0.05, 5.0)
    first = traj.samples[:, 2]          # the (-, +) element
    assert np.allclose(first, first[0] * np.exp(1j * traj.times), rtol=1e-6)


def test_dual_route_single_spin(toggle_bath):
    err = dual_route(SINGLE, CouplingSpec.uniform(1, np.pi / 4), toggle_bath,
                     response_pair("+-", 1), (0.97, 1.01, 1.05), t_max=150.0)
    assert err <= 0.02


def test_step_halving_order():
    assert step_order(t_max=10.0, dt=0.04) == pytest.approx(2.0, abs=0.1)


def test_chi_from_trajectory_uses_response_operator(toggle_bath):
    pair = response_pair("+-", 1)
    coupling = CouplingSpec.uniform(1, 0.0)
    traj = propagate(SINGLE, coupling, toggle_bath, pair.A, 0.02, 150.0)
    eng = SusceptibilityEngine(SINGLE, coupling, toggle_bath, pair)
    got = chi_from_trajectory(traj, pair.B, 1.0, epsilon=0.005)
    assert got == pytest.approx(eng.chi(1.0), rel=0.02)
