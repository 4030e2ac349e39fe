import numpy as np
import pytest

from lineshape.hamiltonian import (CouplingSpec, SpinSystemSpec, build_coupling_operator,
                                   build_system_hamiltonian, effective_couplings,
                                   eigendecompose, thermal_populations, thermal_state,
                                   triangle_pairs, two_spin_analytic_eigensystem)
from lineshape.hs import spin_ops

MAGIC = np.arccos(1 / np.sqrt(3))


@pytest.mark.parametrize("theta", [0.0, np.pi / 2])
def test_two_spin_levels_match_closed_form(theta):
    # the closed form needs a diagonal dipolar tensor, true only for these angles
    spec = SpinSystemSpec.two_spin(-1.0, 0.1, theta)
    jx, jy, jz = effective_couplings(spec) / 2
    ref = two_spin_analytic_eigensystem(jx, jy, jz, 1.0)
    eig = eigendecompose(build_system_hamiltonian(spec))
    assert np.allclose(np.sort(list(ref["energies"].values())), eig.energies, atol=1e-12)
    ham = build_system_hamiltonian(spec)
    for key, vec in ref["states"].items():
        assert np.allclose(ham @ vec, ref["energies"][key] * vec, atol=1e-12)


def test_magic_angle_removes_dipolar_anisotropy():
    spec = SpinSystemSpec.two_spin(-1.0, 0.1, MAGIC)
    jx, jy, jz = effective_couplings(spec)
    # along z the dipolar diagonal vanishes; x and y share the remainder
    assert np.isclose(jz, -1.0, atol=1e-12)
    assert np.isclose(jx + jy, -2.0, atol=1e-12)


def test_state_a_is_all_up_without_dipole():
    spec = SpinSystemSpec.two_spin(-1.0, 0.0, 0.0)
    ref = two_spin_analytic_eigensystem(*(effective_couplings(spec) / 2), 1.0)
    assert np.allclose(ref["states"]["a"], [1, 0, 0, 0])


def test_triangle_geometry_is_equilateral():
    for theta in (0.0, np.pi / 2, 0.4):
        dirs = [p.direction for p in triangle_pairs(theta)]
        assert np.allclose(dirs[0], [np.sin(theta), 0, np.cos(theta)])
        cosines = [abs(np.dot(dirs[a], dirs[b])) for a, b in ((0, 1), (0, 2), (1, 2))]
        assert np.allclose(cosines, 0.5)


def test_coupling_operator_limits():
    spec = SpinSystemSpec.single()
    s = spin_ops(1, 1)
    assert np.allclose(build_coupling_operator(spec, CouplingSpec.uniform(1, 0.0)), s["z"])
    assert np.allclose(build_coupling_operator(spec, CouplingSpec.uniform(1, np.pi / 2)),
                       s["x"])
    with pytest.raises(ValueError):
        build_coupling_operator(SpinSystemSpec.two_spin(1, 0, 0), CouplingSpec.uniform(1, 0))


def test_eigendecompose_is_deterministic_in_degenerate_blocks():
    ham = build_system_hamiltonian(SpinSystemSpec.triangle(1.0, 0.0, 0.0))
    first, second = eigendecompose(ham), eigendecompose(ham.copy())
    assert np.array_equal(first.vectors, second.vectors)
    assert np.allclose(first.vectors.conj().T @ first.vectors, np.eye(8), atol=1e-12)


def test_thermal_state_properties():
    ham = build_system_hamiltonian(SpinSystemSpec.two_spin(-1.0, 0.1, 0.3))
    rho = thermal_state(ham, 2.0)
    assert np.isclose(np.trace(rho).real, 1.0)
    assert np.allclose(rho @ ham, ham @ rho, atol=1e-12)
    assert np.allclose(thermal_populations([0.0, 1.0], np.inf), [1.0, 0.0])
    assert np.all(np.isfinite(thermal_populations([0.0, 800.0], 5.0)))


def test_invalid_specs_rejected():
    with pytest.raises(ValueError):
        SpinSystemSpec(num_spins=2, J=1.0)
    with pytest.raises(ValueError):
        SpinSystemSpec(num_spins=0)
    with pytest.raises(ValueError):
        CouplingSpec((0.0,), (0.0, 0.0))
