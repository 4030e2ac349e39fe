"""Hot numerical loops with interchangeable numba and numpy implementations.

Two loops dominate the run time of this package:

* ``pv_sum`` evaluates a principal-value (Hilbert-type) transform
  ``P int f(w) / (y - w) dw`` over a fixed quadrature grid for many poles
  ``y`` at once, using pole subtraction plus the analytic logarithm.
* ``volterra_heun`` runs the time-domain Volterra propagator; its
  memory sum (``history_sum``) costs O(n) per step, O(n^2) in total.

The public names dispatch to the numba versions unless numba is missing
or disabled through ``LINESHAPE_DISABLE_NUMBA``.
"""
import numpy as np

from ._accel import HAVE_NUMBA, njit

__all__ = ["pv_sum", "history_sum", "volterra_heun", "pv_sum_numpy", "history_sum_numpy",
           "volterra_heun_numpy"]

_CHUNK = 64


def _node_slope(nodes, fnodes, k):
    lo = max(k - 1, 0)
    hi = min(k + 1, nodes.shape[0] - 1)
    return (fnodes[hi] - fnodes[lo]) / (nodes[hi] - nodes[lo])


def pv_sum_numpy(nodes, weights, fnodes, poles, fpoles, half_width):
    """Pole-subtracted principal-value transform, vectorised numpy version.

    Parameters
    ----------
    nodes, weights : ndarray
        Quadrature rule on ``[-half_width, half_width]``.
    fnodes : ndarray
        Integrand numerator sampled at ``nodes``.
    poles : ndarray
        Real pole positions ``y``.
    fpoles : ndarray
        Numerator evaluated at the poles.
    half_width : float
        Integration range is symmetric, ``[-half_width, half_width]``.

    Returns
    -------
    ndarray
        ``P int f(w) / (y - w) dw`` for every pole.
    """
    poles = np.asarray(poles, dtype=float)
    fpoles = np.asarray(fpoles, dtype=float)
    out = np.empty(poles.shape[0])
    for start in range(0, poles.shape[0], _CHUNK):
        y = poles[start:start + _CHUNK, None]
        fy = fpoles[start:start + _CHUNK, None]
        diff = y - nodes[None, :]
        hit = diff == 0.0
        safe = np.where(hit, 1.0, diff)
        terms = weights[None, :] * (fnodes[None, :] - fy) / safe
        if hit.any():
            for r, k in zip(*np.nonzero(hit)):
                terms[r, k] = -weights[k] * _node_slope(nodes, fnodes, k)
        out[start:start + _CHUNK] = terms.sum(axis=1)
    logs = np.log(np.abs((half_width + poles) / (half_width - poles)))
    return out + fpoles * logs


@njit
def _pv_sum_loop(nodes, weights, fnodes, poles, fpoles, half_width):
    n_nodes = nodes.shape[0]
    out = np.empty(poles.shape[0])
    for j in range(poles.shape[0]):
        y = poles[j]
        fy = fpoles[j]
        acc = 0.0
        for k in range(n_nodes):
            d = y - nodes[k]
            if d != 0.0:
                acc += weights[k] * (fnodes[k] - fy) / d
            else:
                lo = max(k - 1, 0)
                hi = min(k + 1, n_nodes - 1)
                acc -= weights[k] * (fnodes[hi] - fnodes[lo]) / (nodes[hi] - nodes[lo])
        out[j] = acc + fy * np.log(abs((half_width + y) / (half_width - y)))
    return out


def history_sum_numpy(phi, v_hist, w_hist, n):
    """Trapezoidal memory sum over the stored history, numpy version.

    Computes ``sum_{j<n} c_j (phi[n-j] v_j + conj(phi[n-j]) w_j)`` with
    ``c_0 = 1/2`` and ``c_j = 1`` otherwise.  The ``j = n`` end point is
    left to the caller because it involves the not-yet-accepted state.
    """
    lags = phi[n:0:-1]
    acc = lags @ v_hist[:n] + np.conj(lags) @ w_hist[:n]
    acc -= 0.5 * (phi[n] * v_hist[0] + np.conj(phi[n]) * w_hist[0])
    return acc


@njit
def _history_sum_loop(phi, v_hist, w_hist, n):
    dim = v_hist.shape[1]
    acc = np.zeros(dim, dtype=np.complex128)
    for j in range(n):
        p = phi[n - j]
        pc = p.conjugate()
        c = 0.5 if j == 0 else 1.0
        for i in range(dim):
            acc[i] += c * (p * v_hist[j, i] + pc * w_hist[j, i])
    return acc


def _drive_numpy(u, state, hist, phi0, dt, left, right, comm, psi_k):
    v = -np.conj(u) * (left @ state)
    w = np.conj(u) * (right @ state)
    memory = hist + 0.5 * dt * (phi0 * v + np.conj(phi0) * w)
    full = comm @ (u * memory) + psi_k
    return np.conj(u) * full, v, w


_drive = njit(_drive_numpy)


def volterra_heun_numpy(phi, psi, bohr, left, right, comm, rho0, dt, limit):
    """Heun predictor-corrector for the memory equation, numpy version.

    Integrates ``d rho/dt = -i diag(bohr) rho + C (u(t) * int_0^t
    [phi(t-s) v(s) + conj(phi(t-s)) w(s)] ds) + psi(t)`` where
    ``v = -conj(u) * (L rho)``, ``w = conj(u) * (R rho)`` and
    ``u(t) = exp(-i bohr t)``, stepping ``y = conj(u) * rho`` (interaction
    picture) with a trapezoidal memory sum.

    Returns
    -------
    rho : ndarray
        ``(steps + 1, dim)`` samples.
    ok : bool
        False when the norm exceeded ``limit`` (samples are then truncated
        with NaN).
    """
    steps = psi.shape[0] - 1
    dim = rho0.shape[0]
    rho = np.full((steps + 1, dim), np.nan + 0j)
    v_hist = np.zeros((steps + 1, dim), dtype=np.complex128)
    w_hist = np.zeros((steps + 1, dim), dtype=np.complex128)
    rho[0] = rho0
    zero = np.zeros(dim, dtype=np.complex128)
    u = np.ones(dim, dtype=np.complex128)
    f_now, v_hist[0], w_hist[0] = _drive_numpy(u, rho0, zero, phi[0], dt, left, right, comm, psi[0])
    y = rho0.copy()
    for k in range(steps):
        hist = dt * history_sum_numpy(phi, v_hist, w_hist, k + 1)
        u = np.exp(-1j * bohr * (dt * (k + 1)))
        y_pred = y + dt * f_now
        f_pred = _drive_numpy(u, u * y_pred, hist, phi[0], dt, left, right, comm, psi[k + 1])[0]
        y = y + 0.5 * dt * (f_now + f_pred)
        rho[k + 1] = u * y
        f_now, v_hist[k + 1], w_hist[k + 1] = _drive_numpy(u, rho[k + 1], hist, phi[0], dt,
                                                     left, right, comm, psi[k + 1])
        if not np.all(np.isfinite(y)) or np.linalg.norm(y) > limit:
            return rho, False
    return rho, True


@njit
def _volterra_heun_loop(phi, psi, bohr, left, right, comm, rho0, dt, limit):
    steps = psi.shape[0] - 1
    dim = rho0.shape[0]
    rho = np.full((steps + 1, dim), np.nan + 0j)
    v_hist = np.zeros((steps + 1, dim), dtype=np.complex128)
    w_hist = np.zeros((steps + 1, dim), dtype=np.complex128)
    rho[0] = rho0
    hist = np.zeros(dim, dtype=np.complex128)
    u = np.ones(dim, dtype=np.complex128)
    f_now, v0, w0 = _drive(u, rho0, hist, phi[0], dt, left, right, comm, psi[0])
    v_hist[0] = v0
    w_hist[0] = w0
    y = rho0.copy()
    for k in range(steps):
        hist = dt * _history_sum_loop(phi, v_hist, w_hist, k + 1)
        u = np.exp(-1j * bohr * (dt * (k + 1)))
        y_pred = y + dt * f_now
        f_pred, _, _ = _drive(u, u * y_pred, hist, phi[0], dt, left, right, comm, psi[k + 1])
        y = y + 0.5 * dt * (f_now + f_pred)
        rho[k + 1] = u * y
        f_now, vk, wk = _drive(u, rho[k + 1], hist, phi[0], dt, left, right, comm, psi[k + 1])
        v_hist[k + 1] = vk
        w_hist[k + 1] = wk
        if not np.all(np.isfinite(y)) or np.linalg.norm(y) > limit:
            return rho, False
    return rho, True


if HAVE_NUMBA:
    pv_sum = _pv_sum_loop
    history_sum = _history_sum_loop
    volterra_heun = _volterra_heun_loop
else:  # pragma: no cover - exercised with LINESHAPE_DISABLE_NUMBA=1
    pv_sum = pv_sum_numpy
    history_sum = history_sum_numpy
    volterra_heun = volterra_heun_numpy
