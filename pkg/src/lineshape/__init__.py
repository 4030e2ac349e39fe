"""Spin-1/2 line shapes from a second-order time-convolution master equation.

The package assembles the frequency-domain memory kernel and the
initial-correlation source term of a spin cluster coupled linearly to an
Ohmic boson bath, solves the resulting Hilbert-Schmidt linear system and
returns the complex susceptibility ``chi(w)``.  A time-domain propagator
serves as an independent check.

Submodules
----------
hs
    Vectorisation, Kronecker products and spin operators.
hamiltonian
    Zeeman, exchange and dipolar Hamiltonians and their eigensystems.
bath
    Ohmic spectrum, correlation function and half-Fourier transforms.
kernel
    Memory kernel, source term and their single-spin closed forms.
susceptibility
    Linear solve, frequency and field sweeps, peak analysis.
timedomain
    Volterra propagation plus numerical Laplace transform.
config, cli, validate, output
    Run configuration, command line front end and validation report.
"""
from ._accel import BACKEND, HAVE_NUMBA
from .bath import BathSpec
from .hamiltonian import CouplingSpec, SpinSystemSpec
from .kernel import KernelToggles
from .susceptibility import (SusceptibilitySweep, chi_at, chi_sweep, field_sweep, peak_analysis,
                             response_pair)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "HAVE_NUMBA", "BathSpec", "CouplingSpec", "SpinSystemSpec", "KernelToggles",
    "SusceptibilitySweep", "chi_at", "chi_sweep", "field_sweep", "peak_analysis",
    "response_pair", "__version__",
]
