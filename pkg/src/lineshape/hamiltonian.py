"""Spin Hamiltonians, the bath coupling operator and eigensystems.

Energies are in units of the Larmor frequency (hbar = 1) unless a field
sweep rescales everything by ``|J|``.
"""
from dataclasses import dataclass, field

import numpy as np

from .hs import is_hermitian, spin_ops, total_spin_ops

__all__ = [
    "PairGeometry", "SpinSystemSpec", "CouplingSpec", "EigenSystem",
    "pair_coupling_matrix", "effective_couplings", "triangle_pairs",
    "build_system_hamiltonian", "build_coupling_operator", "eigendecompose",
    "thermal_populations", "thermal_state", "two_spin_analytic_eigensystem",
]

MAX_SPINS = 8


@dataclass(frozen=True)
class PairGeometry:
    """Interacting pair ``(i, j)``, 1-based, with the polar angles of r_ij."""

    i: int
    j: int
    theta: float = 0.0
    phi: float = 0.0

    @property
    def direction(self):
        st = np.sin(self.theta)
        return np.array([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])


@dataclass(frozen=True)
class SpinSystemSpec:
    """Declarative spin cluster.

    Parameters
    ----------
    num_spins : int
        Between 1 and 8.
    omega0 : float
        Larmor frequency (Zeeman term ``omega0 * sum S_z``).
    J : float
        Exchange constant in ``-2 J (S_x S_x + S_y S_y + A S_z S_z)``.
    anisotropy : float
        The ``A`` factor of the zz exchange term.
    D0 : float
        Dipolar strength, ``3 D / (2 r^3)``.
    pairs : tuple of PairGeometry
        Unordered interacting pairs; every pair shares ``J`` and ``D0``.
    """

    num_spins: int = 1
    omega0: float = 1.0
    J: float = 0.0
    anisotropy: float = 1.0
    D0: float = 0.0
    pairs: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not 1 <= self.num_spins <= MAX_SPINS:
            raise ValueError(f"num_spins must be in 1..{MAX_SPINS}, got {self.num_spins}")
        seen = set()
        for p in self.pairs:
            if not (1 <= p.i <= self.num_spins and 1 <= p.j <= self.num_spins) or p.i == p.j:
                raise ValueError(f"invalid pair ({p.i}, {p.j}) for {self.num_spins} spins")
            key = (min(p.i, p.j), max(p.i, p.j))
            if key in seen:
                raise ValueError(f"pair {key} listed twice")
            seen.add(key)
            if not (0.0 <= p.theta <= np.pi and 0.0 <= p.phi < 2 * np.pi):
                raise ValueError(f"pair angles out of range: theta={p.theta}, phi={p.phi}")
        if not self.pairs and (self.D0 != 0.0 or self.J != 0.0):
            raise ValueError("D0 or J is nonzero but no interacting pairs were given")

    @property
    def dim(self):
        return 2 ** self.num_spins

    @classmethod
    def single(cls, omega0=1.0):
        return cls(num_spins=1, omega0=omega0)

    @classmethod
    def two_spin(cls, J, D0, theta, phi=0.0, anisotropy=1.0, omega0=1.0):
        return cls(2, omega0, J, anisotropy, D0, (PairGeometry(1, 2, theta, phi),))

    @classmethod
    def triangle(cls, J, D0, theta, anisotropy=1.0, omega0=1.0):
        """Three spins on a unit equilateral triangle tilted by ``theta``."""
        return cls(3, omega0, J, anisotropy, D0, triangle_pairs(theta))


def _angles(vec):
    vec = vec / np.linalg.norm(vec)
    theta = float(np.arccos(np.clip(vec[2], -1.0, 1.0)))
    phi = float(np.arctan2(vec[1], vec[0]) % (2 * np.pi))
    if np.isclose(np.sin(theta), 0.0, atol=1e-15):
        phi = 0.0
    return theta, phi


def triangle_pairs(theta):
    """Pair geometry of the tilted equilateral triangle.

    The triangle always contains the y axis direction and the bond
    ``r_12 = (sin theta, 0, cos theta)``: at ``theta = 0`` it lies in the
    yz plane (normal along x) and at ``theta = pi/2`` in the xy plane.
    """
    r12 = np.array([np.sin(theta), 0.0, np.cos(theta)])
    r13 = 0.5 * r12 + np.array([0.0, np.sqrt(3.0) / 2.0, 0.0])
    r23 = r13 - r12
    return tuple(PairGeometry(i, j, *_angles(v)) for (i, j), v in
                 (((1, 2), r12), ((1, 3), r13), ((2, 3), r23)))


@dataclass(frozen=True)
class CouplingSpec:
    """Per-spin angles defining ``a_i = exp(i L2_i) sin L1_i`` and ``c_i = cos L1_i``."""

    lambda1: tuple
    lambda2: tuple

    def __post_init__(self):
        if len(self.lambda1) != len(self.lambda2):
            raise ValueError("lambda1 and lambda2 must have equal length")

    @classmethod
    def uniform(cls, num_spins, lambda1, lambda2=0.0):
        return cls((float(lambda1),) * num_spins, (float(lambda2),) * num_spins)

    @property
    def a(self):
        return np.exp(1j * np.asarray(self.lambda2)) * np.sin(self.lambda1)

    @property
    def c(self):
        return np.cos(np.asarray(self.lambda1, dtype=float))


def pair_coupling_matrix(J, anisotropy, D0, direction):
    """3x3 bilinear coupling ``h`` with ``H_pair = sum_ab h_ab S_ia S_jb``.

    ``h_aa = -2 (J_a + D0 (W_a^2 - 1/3))`` with ``J_x = J_y = J`` and
    ``J_z = A J``; ``h_ab = -2 D0 W_a W_b`` off the diagonal.
    """
    w = np.asarray(direction, dtype=float)
    h = -2.0 * D0 * (np.outer(w, w) - np.eye(3) / 3.0)
    h -= 2.0 * np.diag([J, J, anisotropy * J])
    return h


def effective_couplings(spec, pair=0):
    """Diagonal effective couplings ``J_eff = -h_aa / 2`` of one pair."""
    p = spec.pairs[pair]
    h = pair_coupling_matrix(spec.J, spec.anisotropy, spec.D0, p.direction)
    return -0.5 * np.diag(h)


def build_system_hamiltonian(spec):
    """Zeeman plus exchange plus dipolar Hamiltonian of ``spec``."""
    n = spec.num_spins
    ham = spec.omega0 * total_spin_ops(n)["z"]
    ops = [spin_ops(n, k) for k in range(1, n + 1)]
    for p in spec.pairs:
        h = pair_coupling_matrix(spec.J, spec.anisotropy, spec.D0, p.direction)
        si, sj = ops[p.i - 1], ops[p.j - 1]
        for a, ka in enumerate("xyz"):
            for b, kb in enumerate("xyz"):
                if h[a, b] != 0.0:
                    ham = ham + h[a, b] * (si[ka] @ sj[kb])
    return 0.5 * (ham + ham.conj().T)


def build_coupling_operator(spec, coupling):
    """Bath coupling operator ``X = sum_i (a_i^* S_i+ + a_i S_i-)/2 + c_i S_iz``."""
    n = spec.num_spins
    if len(coupling.lambda1) != n:
        raise ValueError(f"coupling has {len(coupling.lambda1)} spins, system has {n}")
    x = np.zeros((spec.dim, spec.dim), dtype=complex)
    for k, (a, c) in enumerate(zip(coupling.a, coupling.c)):
        s = spin_ops(n, k + 1)
        x += 0.5 * (np.conj(a) * s["+"] + a * s["-"]) + c * s["z"]
    return x


@dataclass(frozen=True)
class EigenSystem:
    """Eigen-energies (ascending) and the unitary whose columns are eigenvectors."""

    energies: np.ndarray
    vectors: np.ndarray

    @property
    def bohr(self):
        """``bohr[k, m] = E_k - E_m``."""
        return self.energies[:, None] - self.energies[None, :]

    def to_eigenbasis(self, op):
        return self.vectors.conj().T @ op @ self.vectors

    def from_eigenbasis(self, op):
        return self.vectors @ op @ self.vectors.conj().T


def eigendecompose(ham, degeneracy_tol=1e-10):
    """Deterministic Hermitian eigendecomposition.

    Energies ascend.  Each eigenvector is phase-fixed so that its first
    component of magnitude above 1e-10 is real and positive; inside a
    degenerate cluster vectors are ordered by the position of that
    component.
    """
    ham = np.asarray(ham, dtype=complex)
    if not is_hermitian(ham):
        raise ValueError("eigendecompose requires a Hermitian matrix")
    energies, vecs = np.linalg.eigh(ham)
    lead = np.empty(len(energies), dtype=int)
    for k in range(len(energies)):
        v = vecs[:, k]
        idx = int(np.argmax(np.abs(v) > 1e-10))
        lead[k] = idx
        vecs[:, k] = v * (abs(v[idx]) / v[idx])
    scale = max(1.0, float(np.max(np.abs(energies))))
    order = np.arange(len(energies))
    start = 0
    while start < len(energies):
        stop = start + 1
        while stop < len(energies) and energies[stop] - energies[start] <= degeneracy_tol * scale:
            stop += 1
        block = order[start:stop]
        order[start:stop] = block[np.argsort(lead[block], kind="stable")]
        start = stop
    return EigenSystem(energies[order].copy(), vecs[:, order].copy())


def thermal_populations(energies, beta):
    """Boltzmann weights with the ground energy subtracted (no overflow)."""
    energies = np.asarray(energies, dtype=float)
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    shifted = energies - energies.min()
    if np.isinf(beta):
        w = (shifted <= 1e-10 * max(1.0, np.abs(energies).max())).astype(float)
    else:
        w = np.exp(-beta * shifted)
    return w / w.sum()


def thermal_state(ham, beta):
    """Canonical density matrix ``exp(-beta H) / Z`` computed in the eigenbasis."""
    eig = eigendecompose(ham)
    p = thermal_populations(eig.energies, beta)
    return (eig.vectors * p) @ eig.vectors.conj().T


def two_spin_analytic_eigensystem(jx, jy, jz, omega0):
    """Closed-form two-spin levels for diagonal effective couplings.

    The Hamiltonian is ``omega0 (S1z + S2z) - 4 sum_a j_a S1a S2a`` with
    ``j_a = J_a^eff / 2``.  States are 4-vectors in the basis
    ``|++>, |+->, |-+>, |-->``.

    Returns
    -------
    dict
        ``energies`` maps ``"a".."d"`` to levels, ``states`` to vectors.
    """
    k = np.hypot(omega0, jx - jy)
    delta = jx - jy
    energies = {"a": -jz + k, "b": jz - jx - jy, "c": -jz - k, "d": jz + jx + jy}
    s2 = np.sqrt(0.5)
    upper = np.array([k + omega0, 0, 0, -delta], dtype=complex)
    lower = np.array([delta, 0, 0, k + omega0], dtype=complex)
    if k + omega0 <= 1e-14 * max(1.0, k):
        upper = np.array([0, 0, 0, 1], dtype=complex)
        lower = np.array([1, 0, 0, 0], dtype=complex)
    states = {
        "a": upper / np.linalg.norm(upper),
        "b": np.array([0, s2, s2, 0], dtype=complex),
        "c": lower / np.linalg.norm(lower),
        "d": np.array([0, s2, -s2, 0], dtype=complex),
    }
    return {"energies": energies, "states": states}
