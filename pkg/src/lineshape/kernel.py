"""Memory kernel, inhomogeneous term and Born-Markov kernel in HS space.

Every superoperator acts on row-major vectorised operators.  The general
routines work in the eigenbasis of ``H_S``; ``G`` and ``Gs`` are the
half-Fourier transforms of ``Phi`` and ``conj(Phi)`` (see :mod:`.bath`).

With ``Gm[a, b] = G(w + E_a - E_b)`` and ``Gsm[a, b] = Gs(w + E_a - E_b)``
the Laplace-transformed kernel reads::

    Xi[(n,m),(n',m')] = - d_{mm'} sum_k X_nk X_kn' Gm[k,m]
                        + X_nn' X*_mm' (Gm[n,m'] + Gsm[n',m])
                        - d_{nn'} sum_k X*_mk X*_km' Gsm[n,k]

which is the transform of ``rho -> -Phi(s)[X, U(X rho)U^+] +
conj(Phi(s))[X, U(rho X)U^+]`` with ``U = exp(-i H_S s)``.
"""
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .bath import QuadratureError, SpectralGrid, bath_spectrum_J, integration_half_width, kappa_i
from .hamiltonian import thermal_populations
from .hs import vectorize

__all__ = [
    "KernelToggles", "BathTransforms", "liouvillian_superop", "superop_to_basis",
    "memory_kernel_general", "memory_kernel_single_spin", "inhomogeneous_general",
    "inhomogeneous_single_spin", "born_markov_kernel", "eta_functions",
]

FULL = "full"
BORN_MARKOV = "born_markov"


@dataclass(frozen=True)
class KernelToggles:
    """Which corrections enter the kernel.

    ``mode="born_markov"`` always disables the initial correlation.
    """

    include_frequency_shift: bool = True
    include_initial_correlation: bool = True
    mode: str = FULL

    def __post_init__(self):
        if self.mode not in (FULL, BORN_MARKOV):
            raise ValueError(f"unknown kernel mode {self.mode!r}")
        if self.mode == BORN_MARKOV and self.include_initial_correlation:
            object.__setattr__(self, "include_initial_correlation", False)


def liouvillian_superop(h):
    """``M_S = H (x) 1 - 1 (x) H^*``; the equation of motion uses ``-i M_S``."""
    h = np.asarray(h, dtype=complex)
    eye = np.eye(h.shape[0])
    return np.kron(h, eye) - np.kron(eye, h.conj())


def superop_to_basis(sup, vectors):
    """Re-express a superoperator given in the basis of ``vectors``' columns.

    For ``rho = V rho' V^+`` the HS map is ``T = V (x) V^*``.
    """
    t = np.kron(vectors, vectors.conj())
    return t @ sup @ t.conj().T


class BathTransforms:
    """Vectorised ``G(x)``, ``Gs(x)`` and Hilbert transforms for one bath.

    Parameters
    ----------
    bath : BathSpec
    max_frequency : float
        Largest |argument| expected; sets the frequency cutoff.
    """

    def __init__(self, bath, max_frequency=1.0, grid=None):
        self.bath = bath
        self.grid = grid or SpectralGrid(bath, integration_half_width(bath, max_frequency))

    def hilbert(self, y):
        """``H(y) = P int J(w) / (y - w) dw``, with exact duplicates evaluated once."""
        y = np.asarray(y, dtype=float)
        uniq, inv = np.unique(y.ravel(), return_inverse=True)
        return self.grid.hilbert_J(uniq)[inv].reshape(y.shape)

    def g_pair(self, x, include_shift=True):
        """``(G(x), Gs(x))`` for an array of arguments."""
        x = np.asarray(x, dtype=float)
        jm = np.pi * bath_spectrum_J(-x, self.bath)
        jp = np.pi * bath_spectrum_J(x, self.bath)
        if not include_shift:
            return jm + 0j, jp + 0j
        h = self.hilbert(np.concatenate((x.ravel(), -x.ravel())))
        hp, hm = h[:x.size].reshape(x.shape), h[x.size:].reshape(x.shape)
        return jm + 1j * hm, jp - 1j * hp


def _assemble(x_eig, t1, t2, t3, t4):
    """Place the four kernel pieces into an ``(N^2, N^2)`` matrix.

    ``t1[n, m, p]`` sits at ``(n, m, p, m)``, ``t4[n, m, q]`` at
    ``(n, m, n, q)`` and ``t2``/``t3`` are full ``(n, m, p, q)`` tensors.
    """
    n = x_eig.shape[0]
    xi = t2 + t3
    idx = np.arange(n)
    xi[:, idx, :, idx] += np.transpose(t1, (1, 0, 2))
    xi[idx, :, idx, :] += t4
    return xi.reshape(n * n, n * n)


def memory_kernel_general(omega, eig, x_eig, transforms, include_shift=True):
    """Laplace-transformed memory kernel at drive frequency ``omega``.

    Parameters
    ----------
    omega : float
    eig : EigenSystem
    x_eig : ndarray
        Coupling operator in the eigenbasis.
    transforms : BathTransforms
    include_shift : bool
        Keep the principal-value (frequency-shift) parts.

    Returns
    -------
    ndarray
        ``(N^2, N^2)`` superoperator in the eigenbasis.
    """
    x = np.asarray(x_eig, dtype=complex)
    xc = x.conj()
    gm, gsm = transforms.g_pair(omega + eig.bohr, include_shift)
    t1 = -np.einsum("nk,kp,km->nmp", x, x, gm)
    t2 = np.einsum("np,mq,nq->nmpq", x, xc, gm)
    t3 = np.einsum("np,mq,pm->nmpq", x, xc, gsm)
    t4 = -np.einsum("mk,kq,nk->nmq", xc, xc, gsm)
    return _assemble(x, t1, t2, t3, t4)


def born_markov_kernel(eig, x_eig, transforms, include_shift=True):
    """Frequency-independent Born-Markov (Redfield) kernel in the eigenbasis.

    Element ``[(n,m),(n',m')]`` equals the full kernel evaluated at the
    free oscillation frequency ``E_m' - E_n'`` of the column it acts on.
    """
    x = np.asarray(x_eig, dtype=complex)
    xc = x.conj()
    g, gs = transforms.g_pair(eig.bohr, include_shift)
    n = x.shape[0]
    t1 = np.broadcast_to(-np.einsum("nk,kp,kp->np", x, x, g)[:, None, :], (n, n, n))
    t2 = np.einsum("np,mq,np->nmpq", x, xc, g)
    t3 = np.einsum("np,mq,qm->nmpq", x, xc, gs)
    t4 = np.broadcast_to(-np.einsum("mk,kq,qk->mq", xc, xc, gs)[None, :, :], (n, n, n))
    return _assemble(x, t1, t2, t3, t4)


# ---------------------------------------------------------------------------
# inhomogeneous term
# ---------------------------------------------------------------------------

def _r_values(w, pu, pv, nu, bath):
    """``R(w) = (pu J(w) - pv J(-w)) / (w - nu)`` evaluated stably."""
    w = np.asarray(w, dtype=float)
    d = w - nu
    near = np.abs(d) * bath.beta < 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        far = (pu * bath_spectrum_J(w, bath) - pv * bath_spectrum_J(-w, bath)) / d
    close = pu * bath_spectrum_J(w, bath) * kappa_i(np.where(near, d, 0.0), bath.beta)
    return np.where(near, close, far)


def _q_values(x, u, v, pop, bohr, transforms, include_shift, near_tol=1e-3):
    """``Q_uv(x) = pi R_uv(x) - i P int R_uv(w) / (x - w) dw`` elementwise.

    The principal value uses the partial-fraction identity
    ``(T(x) - T(nu)) / (x - nu)`` with ``T(y) = p_u H(y) + p_v H(-y)``;
    arguments within ``near_tol`` of ``nu`` are integrated directly.
    """
    bath = transforms.bath
    pu, pv, nu = pop[u], pop[v], bohr[u, v]
    delta = np.pi * _r_values(x, pu, pv, nu, bath)
    if not include_shift:
        return delta + 0j
    gap = x - nu
    near = np.abs(gap) < near_tol
    hx = transforms.hilbert(np.stack((x, -x)))
    hn = transforms.hilbert(np.stack((nu, -nu)))
    tx = pu * hx[0] + pv * hx[1]
    tn = pu * hn[0] + pv * hn[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        pv_part = (tx - tn) / np.where(near, 1.0, gap)
    if np.any(near):
        grid = transforms.grid
        for idx in zip(*np.nonzero(near)):
            key = (pu[idx], pv[idx], nu[idx])
            fnodes = _r_values(grid.nodes, *key, bath)
            fpole = _r_values(x[idx], *key, bath)
            pv_part[idx] = grid.hilbert(fnodes, [x[idx]], [fpole])[0]
    return delta - 1j * pv_part


def inhomogeneous_general(omega, eig, x_eig, a_eig, transforms, beta, include_shift=True):
    """Laplace-transformed inhomogeneous vector at drive frequency ``omega``.

    Computes ``Psi = i [X, C]`` with::

        C_ab = sum_c A_ac X_cb Q_cb(w + w_ab) - X_ac A_cb Q_ac(w + w_ab)

    where ``Q_uv(x) = int R_uv(w') kappa_p(x - w') dw'`` and
    ``R_uv(w') = p_u J(w') kappa_i(w' - w_uv)``.  Everything is in the
    eigenbasis and the result is returned vectorised.
    """
    x_op = np.asarray(x_eig, dtype=complex)
    a_op = np.asarray(a_eig, dtype=complex)
    n = x_op.shape[0]
    pop = thermal_populations(eig.energies, beta)
    bohr = eig.bohr
    ia, ib, ic = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    xarg = omega + bohr[ia, ib]
    q_right = _q_values(xarg, ic, ib, pop, bohr, transforms, include_shift)
    q_left = _q_values(xarg, ia, ic, pop, bohr, transforms, include_shift)
    c_mat = (np.einsum("ac,cb,abc->ab", a_op, x_op, q_right)
             - np.einsum("ac,cb,abc->ab", x_op, a_op, q_left))
    return vectorize(1j * (x_op @ c_mat - c_mat @ x_op))


# ---------------------------------------------------------------------------
# single-spin closed forms (independent quadrature route, used as oracles)
# ---------------------------------------------------------------------------

def _quad(f, lo, hi, points=None):
    opts = dict(limit=1000, epsabs=1e-15, epsrel=1e-13)
    pts = [p for p in (points or ()) if lo < p < hi]
    # QUADPACK warns when it cannot reach the (deliberately tight) target;
    # the returned error estimate is checked explicitly below instead.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, lo, hi, points=pts or None, **opts)
    if not err <= 1e-11 * (1.0 + abs(val)):
        raise QuadratureError(f"Cauchy quadrature error {err:.2e}")
    return val


def _cauchy(f, c, top, kink=0.0):
    """``P int_{-top}^{top} f(w) / (w - c) dw`` for ``f`` with a kink at ``kink``.

    The singular part is folded symmetrically about the pole,
    ``int_0^d (f(c + u) - f(c - u)) / u du``, which stays regular even
    when the pole sits on the kink.
    """
    if not -top < c < top:
        return _quad(lambda w: f(w) / (w - c), -top, top, [kink])
    d = min(top - c, c + top)
    core = _quad(lambda u: (f(c + u) - f(c - u)) / u, 0.0, d, [abs(c - kink)])
    tail = lambda w: f(w) / (w - c)
    if c + d < top:
        core += _quad(tail, c + d, top, [kink])
    if c - d > -top:
        core += _quad(tail, -top, c - d, [kink])
    return core


def _f_oracle(x, bath, conjugate, include_shift):
    """Half-Fourier of Phi (or conj Phi) at ``x`` by adaptive quadrature over ``J``."""
    top = 40.0 * bath.omega_c + abs(x)
    sign = 1.0 if conjugate else -1.0
    delta = np.pi * bath_spectrum_J(sign * x, bath)
    if not include_shift:
        return complex(delta)
    pv = -_cauchy(lambda w: bath_spectrum_J(sign * w, bath), x, top)
    return complex(delta, -pv)


def memory_kernel_single_spin(omega, omega0, lam, bath, include_shift=True):
    """Closed-form 4x4 kernel of one spin with ``X = sin(L) S_x + cos(L) S_z``.

    Written in the computational basis ``|+>, |->`` with the shorthands
    ``phi1 = F+ + Fs-``, ``phi2 = Fs+ + F-``, ``phi3 = F[w,0] - Fs[w,0]``,
    ``phi40 = F[w,0] + Fs[w,0]`` and ``phi4(+/-) = F(+/-) + Fs(+/-)``.
    """
    a, c = np.sin(lam), np.cos(lam)
    fp = _f_oracle(omega - omega0, bath, False, include_shift)
    fm = _f_oracle(omega + omega0, bath, False, include_shift)
    fsp = _f_oracle(omega - omega0, bath, True, include_shift)
    fsm = _f_oracle(omega + omega0, bath, True, include_shift)
    f0 = _f_oracle(omega, bath, False, include_shift)
    fs0 = _f_oracle(omega, bath, True, include_shift)
    phi1, phi2 = fp + fsm, fsp + fm
    phi3, phi40 = f0 - fs0, f0 + fs0
    phi4m, phi4p = fm + fsm, fp + fsp
    aa, ac, cc = a * a, a * c, c * c
    mat = np.array([
        [aa * phi1, -ac * phi4m, -ac * phi4p, -aa * phi2],
        [-ac * (2 * fsm + phi3), aa * phi40 + 2 * cc * phi4m, -aa * phi40, ac * (2 * fm - phi3)],
        [-ac * (2 * fp - phi3), -aa * phi40, aa * phi40 + 2 * cc * phi4p, ac * (2 * fsp + phi3)],
        [-aa * phi1, ac * phi4m, ac * phi4p, aa * phi2],
    ], dtype=complex)
    return -0.25 * mat


def _eta(x, pu, pv, nu, bath, include_shift):
    """``int R(w) kappa_p(x - w) dw`` for ``R = (pu J(w) - pv J(-w)) / (w - nu)``."""
    r = lambda w: float(_r_values(w, pu, pv, nu, bath))
    delta = np.pi * r(x)
    if not include_shift:
        return complex(delta)
    top = 40.0 * bath.omega_c + 10.0 * abs(nu)
    pv_int = -_cauchy(r, x, top)
    return complex(delta, -pv_int)


def eta_functions(omega, omega0, bath, include_shift=True):
    """Single-spin building blocks of the inhomogeneous vector.

    Returns a dict with ``eta1+/-``, ``eta2+/-``, ``eta3+/-`` and
    ``eta4+/-`` evaluated at drive frequency ``omega``.  With
    ``p+/-`` the populations of ``|+/->``:

    * ``eta1(+/-) = int s exp(-|w|/wc) kappa_p(omega +/- omega0 - w) dw``
    * ``eta2+ = p+ int J kappa_i(w - omega0) kappa_p(omega + omega0 - w) dw``
    * ``eta2- = p- int J kappa_i(w + omega0) kappa_p(omega - omega0 - w) dw``
    * ``eta3+ = p- int J kappa_i(w + omega0) kappa_p(omega - w) dw``
    * ``eta3- = p+ int J kappa_i(w - omega0) kappa_p(omega - w) dw``
    * ``eta4(+/-) = int J kappa_i(w) kappa_p(omega -/+ omega0 - w) dw`` with
      the diagonal weight ``p+/-``; no consumer in the susceptibility path.
    """
    pp, pm = thermal_populations([omega0 / 2, -omega0 / 2], bath.beta)
    e = lambda x, pu, pv, nu: _eta(x, pu, pv, nu, bath, include_shift)
    return {
        "eta1+": e(omega + omega0, 1.0, 1.0, 0.0),
        "eta1-": e(omega - omega0, 1.0, 1.0, 0.0),
        "eta2+": e(omega + omega0, pp, pm, omega0),
        "eta2-": e(omega - omega0, pm, pp, -omega0),
        "eta3+": e(omega, pm, pp, -omega0),
        "eta3-": e(omega, pp, pm, omega0),
        "eta4+": e(omega - omega0, pp, pp, 0.0),
        "eta4-": e(omega + omega0, pm, pm, 0.0),
    }


def inhomogeneous_single_spin(omega, omega0, lam, a_nu, bath, include_shift=True):
    """Closed-form inhomogeneous 4-vector of one spin (computational basis).

    ``a_nu`` is decomposed as ``A+ S+ + A- S- + Az Sz + A0``; the identity
    part drops out.
    """
    a_nu = np.asarray(a_nu, dtype=complex)
    ap, am = a_nu[0, 1], a_nu[1, 0]
    az = a_nu[0, 0] - a_nu[1, 1]
    a, c = np.sin(lam), np.cos(lam)
    eta = eta_functions(omega, omega0, bath, include_shift)
    e1p, e1m, e2p, e2m = eta["eta1+"], eta["eta1-"], eta["eta2+"], eta["eta2-"]
    e3p, e3m = eta["eta3+"], eta["eta3-"]
    s0 = a * c * (ap * e1p + am * e1m) - a * a * az * (e2p + e2m)
    s1 = 2 * (a * a * am * e3m - ap * (c * c * e1p + a * a * e3p) + a * c * az * e2p)
    s2 = 2 * (-am * (c * c * e1m + a * a * e3m) + a * a * ap * e3p + a * c * az * e2m)
    return 0.25j * np.array([s0, s1, s2, -s0])
