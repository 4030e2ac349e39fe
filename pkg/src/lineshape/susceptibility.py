"""Frequency-domain susceptibility: linear solve per point, sweeps and peaks.

For each drive frequency the engine solves::

    (i w + i M_S - Xi[w]) x = rho0 + Psi[w]

and returns ``chi = i Tr(B x)``.  With this sign convention the
absorption ``chi'' = -Im chi`` is positive at resonance.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
import hashlib
import json
import os

import numpy as np
from scipy.signal import find_peaks

from .bath import bath_spectrum_J
from .hamiltonian import (build_coupling_operator, build_system_hamiltonian, eigendecompose,
                          thermal_populations)
from .hs import total_spin_ops, vectorize
from .kernel import (BORN_MARKOV, BathTransforms, KernelToggles, born_markov_kernel,
                     inhomogeneous_general, memory_kernel_general)

__all__ = [
    "ResponsePair", "SusceptibilitySweep", "Peak", "NumericalError", "SusceptibilityEngine",
    "response_pair", "initial_vector", "chi_at", "chi_sweep", "field_sweep",
    "peak_analysis", "born_markov_lorentzian", "default_threads",
]


class NumericalError(RuntimeError):
    """Singular or inaccurate linear solve."""


@dataclass(frozen=True)
class ResponsePair:
    """Observed operator ``B`` and perturbation ``A`` of ``chi_BA``."""

    B: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)
    label: str = ""


def response_pair(label, num_spins):
    """Standard pairs built from total spin operators.

    ``"+-"`` is ``(B, A) = (S+, S-)``; ``"xx"``, ``"yy"``, ``"zz"`` use the
    same Cartesian component on both sides; ``"-+"`` swaps the ladder pair.
    """
    tot = total_spin_ops(num_spins)
    if label in ("+-", "-+"):
        return ResponsePair(tot[label[0]], tot[label[1]], label)
    if len(label) == 2 and set(label) <= set("xyz"):
        return ResponsePair(tot[label[0]], tot[label[1]], label)
    raise ValueError(f"unknown response pair {label!r}")


def initial_vector(a_nu, rho_a):
    """``vec([A, rho_A])``, the initial condition of the response equation."""
    a_nu = np.asarray(a_nu, dtype=complex)
    return vectorize(a_nu @ rho_a - rho_a @ a_nu)


def default_threads():
    return os.cpu_count() or 1


class SusceptibilityEngine:
    """Precomputed eigensystem and bath data for repeated ``chi`` evaluations.

    Parameters
    ----------
    system : SpinSystemSpec
    coupling : CouplingSpec
    bath : BathSpec
    pair : ResponsePair
    toggles : KernelToggles
    epsilon : float
        Extra damping added to ``i w``; only meant for the decoupled limit.
    transforms : BathTransforms, optional
        Shared bath transforms (field sweeps reuse one instance).
    """

    def __init__(self, system, coupling, bath, pair, toggles=KernelToggles(),
                 epsilon=0.0, transforms=None):
        self.system, self.coupling, self.bath = system, coupling, bath
        self.pair, self.toggles, self.epsilon = pair, toggles, epsilon
        ham = build_system_hamiltonian(system)
        self.eig = eigendecompose(ham)
        to_eig = self.eig.to_eigenbasis
        self.x_eig = to_eig(build_coupling_operator(system, coupling))
        self.a_eig = to_eig(np.asarray(pair.A, dtype=complex))
        self.b_eig = to_eig(np.asarray(pair.B, dtype=complex))
        self.populations = thermal_populations(self.eig.energies, bath.beta)
        rho_eig = np.diag(self.populations).astype(complex)
        self.rho0 = initial_vector(self.a_eig, rho_eig)
        self.lsys = 1j * self.eig.bohr.reshape(-1)
        self.decoupled = bath.s == 0.0
        max_bohr = float(np.max(np.abs(self.eig.bohr)))
        self.transforms = transforms or BathTransforms(bath, max_bohr)
        self._markov = None
        if toggles.mode == BORN_MARKOV and not self.decoupled:
            self._markov = born_markov_kernel(self.eig, self.x_eig, self.transforms,
                                              toggles.include_frequency_shift)

    def kernel(self, omega):
        dim = self.rho0.shape[0]
        if self.decoupled:
            return np.zeros((dim, dim), dtype=complex)
        if self._markov is not None:
            return self._markov
        return memory_kernel_general(omega, self.eig, self.x_eig, self.transforms,
                                     self.toggles.include_frequency_shift)

    def source(self, omega):
        if self.decoupled or not self.toggles.include_initial_correlation:
            return np.zeros_like(self.rho0)
        return inhomogeneous_general(omega, self.eig, self.x_eig, self.a_eig, self.transforms,
                                     self.bath.beta, self.toggles.include_frequency_shift)

    def solve(self, omega):
        """Solve the HS linear system; returns ``(x, relative residual)``."""
        xi = self.kernel(omega)
        mat = -xi
        mat[np.diag_indices_from(mat)] += 1j * omega + self.epsilon + self.lsys
        rhs = self.rho0 + self.source(omega)
        try:
            sol = np.linalg.solve(mat, rhs)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"singular system at omega={omega}: {exc}") from None
        scale = max(np.linalg.norm(rhs), 1e-300)
        resid = np.linalg.norm(mat @ sol - rhs) / scale
        if not np.all(np.isfinite(sol)) or resid > 1e-10:
            cond = np.linalg.cond(mat)
            raise NumericalError(
                f"inaccurate solve at omega={omega}: residual {resid:.2e}, condition {cond:.2e}")
        return sol, resid

    def chi(self, omega):
        sol, _ = self.solve(omega)
        n = self.b_eig.shape[0]
        return complex(1j * np.sum(self.b_eig.T * sol.reshape(n, n)))


def chi_at(omega, system, coupling, bath, pair, toggles=KernelToggles(), epsilon=0.0):
    """Susceptibility at a single frequency (builds a fresh engine)."""
    return SusceptibilityEngine(system, coupling, bath, pair, toggles, epsilon).chi(omega)


@dataclass
class SusceptibilitySweep:
    """Susceptibility on a monotone grid.

    ``chi`` follows ``chi = chi' - i chi''``; :attr:`absorption` is ``chi''``.
    """

    grid: np.ndarray
    chi: np.ndarray
    toggles: KernelToggles
    kind: str = "omega"
    metadata: dict = field(default_factory=dict)

    @property
    def absorption(self):
        return -self.chi.imag


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a non-empty 1-D sequence")
    steps = np.diff(grid)
    if grid.size > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
        raise ValueError("grid must be strictly monotone")
    return grid


def _parallel_map(func, values, threads):
    threads = max(1, int(threads or 1))
    if threads == 1 or len(values) == 1:
        return [func(v) for v in values]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, values))


def _run_points(func, grid, threads):
    def guarded(item):
        idx, value = item
        try:
            return func(value)
        except NumericalError as exc:
            raise NumericalError(f"grid point {idx} ({value:g}): {exc}") from None
    return np.array(_parallel_map(guarded, list(enumerate(grid)), threads), dtype=complex)


def _spec_hash(payload):
    text = json.dumps(payload, sort_keys=True, default=repr)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def chi_sweep(grid, system, coupling, bath, pair, toggles=KernelToggles(), threads=1,
              epsilon=0.0):
    """``chi`` on every point of a monotone frequency grid.

    Points are independent, evaluated by ``threads`` workers and gathered
    in grid order, so the result does not depend on ``threads``.
    """
    grid = _check_grid(grid)
    engine = SusceptibilityEngine(system, coupling, bath, pair, toggles, epsilon)
    chi = _run_points(engine.chi, grid, threads)
    meta = {"system": repr(system), "coupling": repr(coupling), "bath": repr(bath),
            "pair": pair.label, "toggles": repr(toggles)}
    meta["hash"] = _spec_hash(meta)
    return SusceptibilitySweep(grid, chi, toggles, "omega", meta)


def field_sweep(omega_fixed, field_grid, system, coupling, bath, pair,
                toggles=KernelToggles(), threads=1):
    """``chi`` at fixed drive frequency while the Zeeman frequency is swept.

    All quantities are in units of the caller's choice (``|J|`` for the
    field-sweep presets); ``field_grid`` lists the Zeeman frequencies.
    """
    grid = _check_grid(field_grid)
    extremes = [eigendecompose(build_system_hamiltonian(replace(system, omega0=h)))
                for h in (grid.min(), grid.max())]
    max_bohr = max(float(np.max(np.abs(e.bohr))) for e in extremes) + abs(omega_fixed)
    transforms = BathTransforms(bath, max_bohr)

    def point(h):
        eng = SusceptibilityEngine(replace(system, omega0=h), coupling, bath, pair, toggles,
                                   transforms=transforms)
        return eng.chi(omega_fixed)

    chi = _run_points(point, grid, threads)
    meta = {"system": repr(system), "coupling": repr(coupling), "bath": repr(bath),
            "pair": pair.label, "toggles": repr(toggles), "omega_fixed": omega_fixed}
    meta["hash"] = _spec_hash(meta)
    return SusceptibilitySweep(grid, chi, toggles, "field", meta)


@dataclass(frozen=True)
class Peak:
    position: float
    height: float
    fwhm: float


def _half_crossing(x, y, i, half, step):
    j = i
    while 0 <= j + step < len(y):
        if y[j + step] < half:
            x0, x1, y0, y1 = x[j], x[j + step], y[j], y[j + step]
            return x0 + (half - y0) * (x1 - x0) / (y1 - y0)
        j += step
    return np.nan


def peak_analysis(sweep, prominence=0.02):
    """Locate absorption peaks.

    Local maxima of ``chi''`` whose prominence exceeds ``prominence``
    times the global maximum are kept.  Positions and heights come from a
    3-point parabola; the FWHM from linear interpolation of the half-height
    crossings (NaN when a crossing lies outside the grid).

    Returns
    -------
    list of Peak
        Sorted by position.

    Raises
    ------
    ValueError
        If no peak passes the threshold.
    """
    x = np.asarray(sweep.grid, dtype=float)
    y = np.asarray(sweep.absorption, dtype=float)
    if x[0] > x[-1]:
        x, y = x[::-1], y[::-1]
    top = float(np.max(y))
    idx, _ = find_peaks(y, prominence=prominence * abs(top)) if top > 0 else ([], None)
    if len(idx) == 0:
        raise ValueError("no peak found")
    peaks = []
    for i in idx:
        pos, height = x[i], y[i]
        if 0 < i < len(y) - 1:
            y0, y1, y2 = y[i - 1], y[i], y[i + 1]
            denom = y0 - 2 * y1 + y2
            if denom != 0:
                shift = 0.5 * (y0 - y2) / denom
                h = 0.5 * (x[i + 1] - x[i - 1])
                pos = x[i] + shift * h
                height = y1 - 0.25 * (y0 - y2) * shift
        half = 0.5 * height
        width = _half_crossing(x, y, i, half, 1) - _half_crossing(x, y, i, half, -1)
        peaks.append(Peak(float(pos), float(height), float(width)))
    return peaks


def born_markov_lorentzian(omega, omega0, bath):
    """Closed-form pure-dephasing ``chi_+-`` of one spin in the Born-Markov limit.

    ``-tanh(beta omega0 / 2) / (omega - omega0 - (i/2) phi4)`` with the
    real rate ``phi4 = 2 pi J(0)``; the principal values cancel.
    """
    phi4 = 2.0 * np.pi * bath_spectrum_J(0.0, bath)
    return -np.tanh(bath.beta * omega0 / 2.0) / (omega - omega0 - 0.5j * phi4)
