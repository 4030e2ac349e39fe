"""Time-domain propagation of the response equation, used as an oracle.

The trajectory ``rho(t)`` obeys::

    d rho/dt = -i M_S rho + int_0^t K(t - tau) rho(tau) dtau + Psi(t)

with ``K(s) rho = -Phi(s)[X, U(X rho)U^+] + conj(Phi(s))[X, U(rho X)U^+]``,
``U = exp(-i H_S s)`` and::

    Psi(t) = i int_0^beta dlam Phi(-i lam - t) [X, [A(-t), rho_A X(-i lam - t)]]

(Heisenberg picture operators).  ``Phi`` comes from the closed form in
:func:`lineshape.bath.phi_analytic`, so nothing here shares code with the
frequency-domain principal-value machinery.
"""
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .bath import phi_analytic
from .hamiltonian import build_coupling_operator, build_system_hamiltonian, eigendecompose
from .kernels import volterra_heun
from .susceptibility import NumericalError, initial_vector

__all__ = [
    "TimeDomainModel", "Trajectory", "kernel_time", "inhomogeneous_time", "propagate",
    "laplace_of", "chi_from_trajectory", "kernel_laplace_time", "inhomogeneous_laplace_time",
]


class TimeDomainModel:
    """Eigenbasis data shared by all time-domain routines.

    Parameters
    ----------
    system : SpinSystemSpec
    coupling : CouplingSpec
    bath : BathSpec
    a_nu : ndarray, optional
        Perturbation operator (computational basis), needed for ``Psi``.
    n_lambda : int
        Gauss-Legendre points for the imaginary-time integral.
    """

    def __init__(self, system, coupling, bath, a_nu=None, n_lambda=64):
        self.bath = bath
        self.eig = eigendecompose(build_system_hamiltonian(system))
        self.n = self.eig.energies.shape[0]
        self.x = self.eig.to_eigenbasis(build_coupling_operator(system, coupling))
        self.bohr = self.eig.bohr
        eye = np.eye(self.n)
        self.left = np.kron(self.x, eye)            # rho -> X rho
        self.right = np.kron(eye, self.x.T)         # rho -> rho X
        self.comm = self.left - self.right          # rho -> [X, rho]
        vecs = self.eig.vectors
        self.to_comp = np.kron(vecs, vecs.conj())   # eigenbasis vec -> computational vec
        shifted = self.eig.energies - self.eig.energies.min()
        self.shifted = shifted
        self.z = np.sum(np.exp(-bath.beta * shifted))
        self.rho = np.diag(np.exp(-bath.beta * shifted) / self.z).astype(complex)
        self.a = None
        if a_nu is not None:
            self.a = self.eig.to_eigenbasis(np.asarray(a_nu, dtype=complex))
            self._build_lambda_table(n_lambda)

    def _build_lambda_table(self, n_lambda):
        beta = self.bath.beta
        nodes, weights = np.polynomial.legendre.leggauss(n_lambda)
        self.lam = 0.5 * beta * (nodes + 1.0)
        self.lam_w = 0.5 * beta * weights
        e = self.shifted
        lam = self.lam[:, None, None]
        # p_c exp(lam w_cb) and p_a exp(lam w_ac) without overflow
        w_cb = np.exp(-(beta - lam) * e[None, :, None] - lam * e[None, None, :]) / self.z
        w_ac = np.exp(-(beta - lam) * e[None, :, None] - lam * e[None, None, :]) / self.z
        a, x = self.a, self.x
        term1 = np.einsum("ac,lcb,cb->lab", a, w_cb, x)
        term2 = np.einsum("lac,ac,cb->lab", w_ac, x, a)
        self.c_table = (term1 - term2).reshape(n_lambda, -1)

    def phase(self, t):
        """``u(t)[(n,m)] = exp(-i (E_n - E_m) t)``, the free HS evolution."""
        return np.exp(-1j * self.bohr.reshape(-1) * t)

    def source_matrix(self, times):
        """``D(t) = int_0^beta Phi(-i lam - t) C(lam) dlam`` for each time (vectorised)."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        out = np.empty((times.size, self.c_table.shape[1]), dtype=complex)
        chunk = max(1, 200000 // self.lam.size)
        for start in range(0, times.size, chunk):
            t = times[start:start + chunk, None]
            phi = phi_analytic(-1j * self.lam[None, :] - t, self.bath)
            out[start:start + chunk] = (phi * self.lam_w[None, :]) @ self.c_table
        return out

    def source(self, times):
        """``Psi(t)`` in the eigenbasis, one row per time."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        d = self.source_matrix(times)
        u = np.exp(-1j * np.outer(times, self.bohr.reshape(-1)))
        return 1j * (u * d) @ self.comm.T

    def kernel(self, t):
        """Time-domain kernel superoperator in the eigenbasis."""
        phi = phi_analytic(float(t), self.bath)
        inner = -phi * self.left + np.conj(phi) * self.right
        return self.comm @ (self.phase(t)[:, None] * inner)


def kernel_time(t, system, coupling, bath):
    """Memory kernel ``K(t)`` as a superoperator in the computational basis."""
    if t < 0:
        raise ValueError("kernel_time requires t >= 0")
    model = TimeDomainModel(system, coupling, bath)
    return model.to_comp @ model.kernel(t) @ model.to_comp.conj().T


def inhomogeneous_time(t, system, coupling, bath, a_nu, n_lambda=64):
    """Inhomogeneous vector ``Psi(t)`` in the computational basis."""
    if t < 0:
        raise ValueError("inhomogeneous_time requires t >= 0")
    model = TimeDomainModel(system, coupling, bath, a_nu, n_lambda)
    return model.to_comp @ model.source([t])[0]


def _fourier_half_line(func, freq):
    """``int_0^inf func(t) exp(-i freq t) dt`` for a complex scalar function."""
    opts = dict(limit=2000, epsabs=1e-13)
    fr = lambda t: func(t).real
    fi = lambda t: func(t).imag
    if freq == 0.0:
        re, _ = integrate.quad(fr, 0.0, np.inf, **opts)
        im, _ = integrate.quad(fi, 0.0, np.inf, **opts)
        return complex(re, im)
    w, sgn = abs(freq), np.sign(freq)
    rc, _ = integrate.quad(fr, 0.0, np.inf, weight="cos", wvar=w, **opts)
    rs, _ = integrate.quad(fr, 0.0, np.inf, weight="sin", wvar=w, **opts)
    ic, _ = integrate.quad(fi, 0.0, np.inf, weight="cos", wvar=w, **opts)
    is_, _ = integrate.quad(fi, 0.0, np.inf, weight="sin", wvar=w, **opts)
    return complex(rc + sgn * is_, ic - sgn * rs)


def kernel_laplace_time(omega, system, coupling, bath):
    """Laplace transform of :func:`kernel_time` by Fourier quadrature in time.

    Uses ``K(s) = C_X diag(u(s)) (-Phi(s) L_X + conj(Phi(s)) R_X)`` and
    integrates ``Phi`` against each distinct phase on ``[0, inf)``.
    """
    model = TimeDomainModel(system, coupling, bath)
    freqs = omega + model.bohr.reshape(-1)
    keys = np.round(freqs, 12)
    cache = {}
    g = np.empty(freqs.size, dtype=complex)
    gs = np.empty(freqs.size, dtype=complex)
    for i, (f, k) in enumerate(zip(freqs, keys)):
        if k not in cache:
            phi = lambda t: phi_analytic(t, bath)
            cache[k] = (_fourier_half_line(phi, f),
                        _fourier_half_line(lambda t: np.conj(phi(t)), f))
        g[i], gs[i] = cache[k]
    sup = model.comm @ (-g[:, None] * model.left + gs[:, None] * model.right)
    return model.to_comp @ sup @ model.to_comp.conj().T


def inhomogeneous_laplace_time(omega, system, coupling, bath, a_nu, n_lambda=64):
    """Laplace transform of :func:`inhomogeneous_time` by Fourier quadrature."""
    model = TimeDomainModel(system, coupling, bath, a_nu, n_lambda)
    freqs = omega + model.bohr.reshape(-1)
    lap = np.empty(freqs.size, dtype=complex)
    for i, f in enumerate(freqs):
        lap[i] = _fourier_half_line(lambda t: model.source_matrix([t])[0, i], f)
    return model.to_comp @ (1j * model.comm @ lap)


@dataclass
class Trajectory:
    """Uniformly sampled ``rho(t_k)``, ``t_k = k dt``, in the computational basis."""

    dt: float
    samples: np.ndarray

    @property
    def horizon(self):
        return self.dt * (self.samples.shape[0] - 1)

    @property
    def times(self):
        return self.dt * np.arange(self.samples.shape[0])


def propagate(system, coupling, bath, a_nu, dt, t_max, n_lambda=64, growth_limit=1e6):
    """Second-order Volterra propagation of the response equation.

    Heun predictor-corrector in the interaction picture of ``H_S``; the
    memory integral is a trapezoidal sum over the full stored history.
    The kernel's product structure reduces each memory sum to scalar
    convolutions of ``Phi`` with two vector histories.

    Parameters
    ----------
    system, coupling, bath
        Model definition.
    a_nu : ndarray
        Perturbation operator; ``rho(0) = vec([A, rho_A])``.
    dt, t_max : float
        Step and horizon.

    Returns
    -------
    Trajectory

    Raises
    ------
    NumericalError
        If the state norm grows beyond ``growth_limit`` times its start.
    """
    if dt <= 0 or t_max <= 0:
        raise ValueError("dt and t_max must be positive")
    model = TimeDomainModel(system, coupling, bath, a_nu, n_lambda)
    steps = int(round(t_max / dt))
    times = dt * np.arange(steps + 1)
    phi = np.ascontiguousarray(phi_analytic(times, bath), dtype=complex)
    psi = model.source(times)
    bohr = model.bohr.reshape(-1)
    left, right, comm = model.left, model.right, model.comm

    rho0 = np.ascontiguousarray(initial_vector(model.a, model.rho), dtype=complex)
    limit = growth_limit * max(np.linalg.norm(rho0), 1e-300)
    rho, ok = volterra_heun(phi, np.ascontiguousarray(psi, dtype=complex),
                            np.ascontiguousarray(bohr, dtype=complex),
                            np.ascontiguousarray(left, dtype=complex),
                            np.ascontiguousarray(right, dtype=complex),
                            np.ascontiguousarray(comm, dtype=complex), rho0, float(dt), float(limit))
    if not ok:
        bad = int(np.argmax(~np.isfinite(rho).all(axis=1)))
        raise NumericalError(f"propagation unstable at t={times[max(bad - 1, 0)]:.4g}")
    return Trajectory(dt, rho @ model.to_comp.T)


def _simpson_laplace(samples, dt, omega, eps):
    t = dt * np.arange(samples.shape[0])
    weight = np.exp(-1j * omega * t - eps * t)[:, None]
    body = integrate.simpson(weight * samples, dx=dt, axis=0)
    last, prev = samples[-1], samples[-2]
    tail = np.zeros_like(last)
    ok = (np.abs(prev) > 0) & (np.abs(last) > 0)
    rate = np.zeros_like(last)
    rate[ok] = np.log(last[ok] / prev[ok]) / dt - eps
    ok &= rate.real < 0
    tail[ok] = last[ok] * weight[-1, 0] / (1j * omega - rate[ok])
    return body + tail


def laplace_of(traj, omega, epsilon=0.0, decay_tol=1e-6):
    """Numerical Fourier-Laplace transform ``int_0^inf exp(-i w t) rho(t) dt``.

    Composite Simpson on the samples plus an exponential tail fitted to
    the last two samples.  With ``epsilon > 0`` the damped transforms at
    ``epsilon`` and ``epsilon/2`` are Richardson-combined.

    Raises
    ------
    ValueError
        If ``epsilon == 0`` and the trajectory has not decayed to
        ``decay_tol`` of its initial scale.
    """
    samples = np.asarray(traj.samples)
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if epsilon == 0.0:
        scale = np.max(np.abs(samples[0])) or np.max(np.abs(samples))
        if np.max(np.abs(samples[-1])) > decay_tol * scale:
            raise ValueError("trajectory has not decayed; use epsilon > 0 or a longer horizon")
        return _simpson_laplace(samples, traj.dt, omega, 0.0)
    return (2.0 * _simpson_laplace(samples, traj.dt, omega, epsilon / 2.0)
            - _simpson_laplace(samples, traj.dt, omega, epsilon))


def chi_from_trajectory(traj, b_mu, omega, epsilon=0.0):
    """``i Tr(B rho[omega])`` from a trajectory."""
    lap = laplace_of(traj, omega, epsilon)
    n = b_mu.shape[0]
    return complex(1j * np.sum(np.asarray(b_mu).T * lap.reshape(n, n)))
