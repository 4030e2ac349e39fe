"""Hilbert-Schmidt (Liouville) space calculus for spin-1/2 systems.

Operators are dense complex ``N x N`` arrays.  They are vectorised
row-major, ``vec(O)[n*N + m] = O[n, m]``, so the sandwich map
``rho -> O1 rho O2^dagger`` is the plain Kronecker product
``kron(O1, conj(O2))``.
"""
import numpy as np

__all__ = [
    "vectorize", "devectorize", "hs_inner", "kron", "sandwich_superop",
    "commutator_superop", "spin_ops", "total_spin_ops", "is_hermitian",
]

_SX = np.array([[0, 0.5], [0.5, 0]], dtype=complex)
_SY = np.array([[0, -0.5j], [0.5j, 0]], dtype=complex)
_SZ = np.array([[0.5, 0], [0, -0.5]], dtype=complex)


def _check_square(*ops):
    dims = {op.shape for op in ops}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")
    shape = dims.pop()
    if len(shape) != 2 or shape[0] != shape[1]:
        raise ValueError(f"operators must be square, got shape {shape}")
    return shape[0]


def is_hermitian(op, tol=1e-12):
    """True when ``max|O - O^dagger| <= tol * max|O|``."""
    op = np.asarray(op)
    scale = max(np.max(np.abs(op)), 1e-300)
    return bool(np.max(np.abs(op - op.conj().T)) <= tol * scale)


def vectorize(op):
    """Row-major stacking of an ``N x N`` operator into an ``N^2`` vector."""
    op = np.asarray(op, dtype=complex)
    _check_square(op)
    return op.reshape(-1).copy()


def devectorize(vec):
    """Inverse of :func:`vectorize`."""
    vec = np.asarray(vec, dtype=complex)
    n = int(round(np.sqrt(vec.shape[0])))
    if n * n != vec.shape[0]:
        raise ValueError(f"length {vec.shape[0]} is not a perfect square")
    return vec.reshape(n, n).copy()


def hs_inner(v, o):
    """Hilbert-Schmidt scalar product ``Tr(V^dagger O)``."""
    v = np.asarray(v, dtype=complex)
    o = np.asarray(o, dtype=complex)
    _check_square(v, o)
    return complex(np.vdot(v.reshape(-1), o.reshape(-1)))


def kron(a, b):
    """Kronecker product; thin wrapper kept for symmetry with the HS API."""
    return np.kron(a, b)


def sandwich_superop(o1, o2):
    """Superoperator of ``rho -> O1 rho O2^dagger`` in row-major HS space."""
    o1 = np.asarray(o1, dtype=complex)
    o2 = np.asarray(o2, dtype=complex)
    _check_square(o1, o2)
    return np.kron(o1, o2.conj())


def commutator_superop(h):
    """Superoperator of ``rho -> [H, rho]`` for Hermitian ``H``.

    Built as ``sandwich(H, I) - sandwich(I, H^dagger)``.
    """
    h = np.asarray(h, dtype=complex)
    eye = np.eye(h.shape[0])
    return sandwich_superop(h, eye) - sandwich_superop(eye, h.conj().T)


def spin_ops(num_spins, site):
    """Spin-1/2 operators of one site embedded in the full tensor space.

    Parameters
    ----------
    num_spins : int
        Number of spins; the Hilbert space has dimension ``2**num_spins``.
    site : int
        1-based site index, site 1 is the leftmost tensor factor.

    Returns
    -------
    dict
        Keys ``"x", "y", "z", "+", "-"``.  The basis ordering puts
        ``|+>`` (``S_z = +1/2``) before ``|->``.
    """
    if not 1 <= site <= num_spins:
        raise ValueError(f"site {site} out of range 1..{num_spins}")
    left = np.eye(2 ** (site - 1))
    right = np.eye(2 ** (num_spins - site))
    out = {}
    for key, mat in (("x", _SX), ("y", _SY), ("z", _SZ)):
        out[key] = np.kron(np.kron(left, mat), right)
    out["+"] = out["x"] + 1j * out["y"]
    out["-"] = out["x"] - 1j * out["y"]
    return out


def total_spin_ops(num_spins):
    """Sums of :func:`spin_ops` over all sites."""
    dim = 2 ** num_spins
    tot = {k: np.zeros((dim, dim), dtype=complex) for k in ("x", "y", "z", "+", "-")}
    for site in range(1, num_spins + 1):
        for key, mat in spin_ops(num_spins, site).items():
            tot[key] += mat
    return tot
