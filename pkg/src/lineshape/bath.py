"""Ohmic bosonic bath: spectra, correlation function and half-Fourier transforms.

Conventions (hbar = 1):

* coupling spectrum ``I(w) = s w exp(-w / wc)`` for ``w >= 0``;
* bath spectrum ``J(w) = I(w)(n(w) + 1)`` for ``w > 0`` and
  ``I(|w|) n(|w|)`` for ``w < 0``, which is the single expression
  ``s w exp(-|w|/wc) / (1 - exp(-beta w))`` with ``J(0) = s / beta``;
* correlation function ``Phi(t) = int J(w) exp(-i w t) dw`` over the
  whole real line;
* half-Fourier transforms ``G(x) = int_0^inf Phi(t) exp(-i x t) dt`` and
  ``Gs(x)``, the same with ``conj(Phi)``.  In closed form
  ``G(x) = pi J(-x) + i H(-x)`` and ``Gs(x) = pi J(x) - i H(x)`` where
  ``H(y) = P int J(w) / (y - w) dw`` is computed by :class:`SpectralGrid`.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .kernels import pv_sum

__all__ = [
    "BathSpec", "HalfFourierValue", "QuadratureError", "SpectralGrid",
    "ohmic_I", "bose_n", "bath_spectrum_J", "kappa_i",
    "trigamma", "phi_analytic", "phi_quadrature", "phi_from_spectrum",
    "pv_integral", "half_fourier_F", "half_fourier_Fs", "half_fourier_time",
    "integration_half_width",
]


class QuadratureError(RuntimeError):
    """A quadrature did not reach its accuracy target."""


@dataclass(frozen=True)
class BathSpec:
    """Ohmic bath parameters.

    Parameters
    ----------
    s : float
        Dimensionless coupling strength, ``s >= 0``.
    omega_c : float
        Cutoff frequency, ``> 0``.
    beta : float
        Inverse temperature ``1 / (k_B T)``, ``> 0``.
    """

    s: float
    omega_c: float
    beta: float

    def __post_init__(self):
        if not self.s >= 0:
            raise ValueError(f"s must be >= 0, got {self.s}")
        if not self.omega_c > 0:
            raise ValueError(f"omega_c must be > 0, got {self.omega_c}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")


@dataclass(frozen=True)
class HalfFourierValue:
    """On-shell and principal-value pieces of a half-Fourier transform.

    ``combined = delta_part - 1j * pv_part``.
    """

    delta_part: float
    pv_part: float

    @property
    def combined(self):
        return complex(self.delta_part, -self.pv_part)


def ohmic_I(omega, b):
    """Coupling spectrum ``s w exp(-w / wc)`` on ``w >= 0``."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("ohmic_I is defined for nonnegative frequencies only")
    out = b.s * w * np.exp(-w / b.omega_c)
    return out if out.ndim else float(out)


def bose_n(omega, beta):
    """Bose occupation ``1 / (exp(beta w) - 1)``; negative ``w`` gives ``-(n(|w|) + 1)``."""
    w = np.asarray(omega, dtype=float)
    if np.any(w == 0):
        raise ValueError("bose_n is singular at omega = 0")
    out = 1.0 / np.expm1(beta * w)
    return out if out.ndim else float(out)


def _x_over_one_minus_exp(x, beta):
    """``x / (1 - exp(-beta x))`` with its finite limit ``1/beta`` at 0."""
    x = np.asarray(x, dtype=float)
    bx = beta * x
    small = np.abs(bx) < 1e-6
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        regular = x / -np.expm1(-bx)
    series = (1.0 + bx / 2.0 + bx * bx / 12.0) / beta
    out = np.where(small, series, regular)
    return np.where(np.isfinite(out) | small, out, 0.0)


def bath_spectrum_J(omega, b):
    """Thermal bath spectrum ``J(w)``, finite and continuous at ``w = 0``."""
    w = np.asarray(omega, dtype=float)
    out = b.s * np.exp(-np.abs(w) / b.omega_c) * _x_over_one_minus_exp(w, b.beta)
    return out if out.ndim else float(out)


def kappa_i(omega, beta):
    """``(1 - exp(-beta w)) / w`` with the series ``beta - beta^2 w/2 + beta^3 w^2/6`` near 0."""
    w = np.asarray(omega, dtype=float)
    small = np.abs(w) < 1e-8
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        regular = -np.expm1(-beta * w) / w
    series = beta - beta ** 2 * w / 2.0 + beta ** 3 * w * w / 6.0
    out = np.where(small, series, regular)
    return out if out.ndim else float(out)


# Bernoulli numbers B_2 .. B_16 for the trigamma asymptotic series.
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510)


def trigamma(z):
    """Trigamma function ``psi'(z)`` for complex ``z``.

    Uses the reflection formula for ``Re z < 1/2``, upward recurrence
    ``psi'(z) = psi'(z + 1) + 1 / z^2`` until ``Re z >= 10`` and then the
    asymptotic Bernoulli series.  Relative accuracy is about 1e-14.

    Raises
    ------
    ValueError
        If ``z`` is a nonpositive integer (a pole).
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z).copy()
    at_pole = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if np.any(at_pole):
        raise ValueError("trigamma has poles at nonpositive integers")
    reflect = z.real < 0.5
    w = np.where(reflect, 1.0 - z, z)
    acc = np.zeros_like(w)
    shifts = np.maximum(0, np.ceil(10.0 - w.real)).astype(int)
    for k in range(int(shifts.max(initial=0))):
        active = k < shifts
        acc[active] += 1.0 / (w[active] + k) ** 2
    w = w + shifts
    inv = 1.0 / w
    inv2 = inv * inv
    series = np.zeros_like(w)
    for bk in reversed(_BERNOULLI):
        series = (series + bk) * inv2
    result = acc + inv + 0.5 * inv2 + series * inv
    if np.any(reflect):
        zr = z[reflect]
        with np.errstate(over="ignore", invalid="ignore"):
            sin2 = np.sin(np.pi * zr) ** 2
            refl = np.where(np.isfinite(sin2), np.pi ** 2 / sin2, 0.0)
        result[reflect] = refl - result[reflect]
    return complex(result[0]) if scalar else result


def phi_analytic(t, b):
    """Closed-form bath correlation function ``Phi(t)``.

    ``Phi(t) = s wc^2 / (1 + i wc t)^2
    + (s / beta^2) [psi'(a + i t/beta) + psi'(a - i t/beta)]`` with
    ``a = 1 + 1/(beta wc)``.  Complex ``t`` is accepted inside the strip
    of analyticity ``-(beta + 1/wc) < Im t < 1/wc``.
    """
    t = np.asarray(t, dtype=complex)
    wc, beta = b.omega_c, b.beta
    lower, upper = -(beta + 1.0 / wc), 1.0 / wc
    if np.any((t.imag <= lower) | (t.imag >= upper)):
        raise ValueError(
            f"Phi continuation requires {lower:g} < Im t < {upper:g}")
    a = 1.0 + 1.0 / (beta * wc)
    zero_point = b.s * wc ** 2 / (1.0 + 1j * wc * t) ** 2
    thermal = (b.s / beta ** 2) * (trigamma(a + 1j * t / beta) + trigamma(a - 1j * t / beta))
    out = zero_point + thermal
    return complex(out) if out.ndim == 0 else out


def _check_quad(value, err, what, scale, rel=1e-8, abs_scale=1e-10):
    if not err <= abs_scale * scale + rel * abs(value):
        raise QuadratureError(f"{what}: error estimate {err:.3e} exceeds target "
                              f"(value {value:.6e})")


def phi_quadrature(t, b, cutoff=40.0):
    """``Phi(t)`` by adaptive oscillatory quadrature of the mode sum.

    Integrates ``I(w)[(2 n(w) + 1) cos(w t) - i sin(w t)]`` on
    ``[0, cutoff * wc]``.
    """
    top = cutoff * b.omega_c
    t = float(t)
    scale = b.s * b.omega_c ** 2 + 2 * b.s * b.omega_c / b.beta

    def sym(w):
        return b.s * np.exp(-w / b.omega_c) * _x_over_one_minus_exp(w, b.beta) * (
            1.0 + np.exp(-b.beta * w))

    def plain(w):
        return b.s * w * np.exp(-w / b.omega_c)

    opts = dict(limit=400, epsabs=1e-14 * scale, epsrel=1e-12)
    if t == 0.0:
        re, e1 = integrate.quad(sym, 0.0, top, **opts)
        im, e2 = 0.0, 0.0
    else:
        re, e1 = integrate.quad(sym, 0.0, top, weight="cos", wvar=t, **opts)
        im, e2 = integrate.quad(plain, 0.0, top, weight="sin", wvar=t, **opts)
        im = -im
    _check_quad(re, e1, f"Re Phi({t})", scale)
    _check_quad(im, e2, f"Im Phi({t})", scale)
    return complex(re, im)


def integration_half_width(b, max_bohr=0.0):
    """Frequency cutoff ``40 wc + 10 max|Bohr|`` rounded up to a multiple of ``wc``."""
    raw = 40.0 * b.omega_c + 10.0 * abs(max_bohr)
    return b.omega_c * np.ceil(raw / b.omega_c - 1e-12)


@lru_cache(maxsize=8)
def _gauss_legendre(order):
    return np.polynomial.legendre.leggauss(order)


def _composite_rule(edges, order):
    x0, w0 = _gauss_legendre(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * x0[None, :]
    weights = half * w0[None, :]
    return nodes.ravel(), weights.ravel()


def _panel_edges(half_width, width, grading):
    """Uniform panels on [0, half_width], geometrically graded towards 0."""
    n = max(1, int(np.ceil(half_width / width)))
    uniform = np.linspace(0.0, half_width, n + 1)
    first = uniform[1]
    graded = first * 0.5 ** np.arange(grading, 0, -1)
    return np.concatenate(([0.0], graded, uniform[1:]))


class SpectralGrid:
    """Composite Gauss-Legendre rule on ``[-W, W]`` for bath-spectrum integrals.

    Panels split at 0, where ``J`` has a kink, and are graded geometrically
    towards it so that poles close to 0 stay resolved.  The panel width is
    halved until the Hilbert transform at a set of probe poles changes by
    less than the tolerance.

    Parameters
    ----------
    b : BathSpec
    half_width : float
        Integration range ``W``.
    order : int
        Gauss-Legendre points per panel.
    """

    def __init__(self, b, half_width, order=16, rtol=1e-11, atol=1e-13, max_refine=4):
        self.bath = b
        self.half_width = float(half_width)
        self.order = order
        width = min(1.0, 0.4 * 2 * np.pi / b.beta, 0.5 * b.omega_c)
        probes = np.array([-3.1, -1.0, -0.37, -0.05, 1e-4, 0.02, 0.41, 1.0, 2.3]) * max(1.0, b.omega_c)
        previous = None
        for _ in range(max_refine + 1):
            self._build(width)
            current = self.hilbert_J(probes)
            if previous is not None:
                diff = np.max(np.abs(current - previous))
                scale = np.max(np.abs(current)) + b.s
                if diff <= atol * max(scale, 1e-300) + rtol * scale:
                    break
            previous = current
            width *= 0.5
        else:
            raise QuadratureError(
                f"spectral grid did not converge (last change {diff:.3e})")

    def _build(self, width):
        edges = _panel_edges(self.half_width, width, grading=24)
        pos_x, pos_w = _composite_rule(edges, self.order)
        self.nodes = np.concatenate((-pos_x[::-1], pos_x))
        self.weights = np.concatenate((pos_w[::-1], pos_w))
        self.j_nodes = bath_spectrum_J(self.nodes, self.bath)
        self.panel_width = width

    def hilbert(self, fnodes, poles, fpoles):
        """``P int f(w) / (y - w) dw`` on ``[-W, W]`` for each pole ``y``."""
        poles = np.ascontiguousarray(np.atleast_1d(poles), dtype=float)
        fpoles = np.ascontiguousarray(np.atleast_1d(fpoles), dtype=float)
        return pv_sum(self.nodes, self.weights, np.ascontiguousarray(fnodes, dtype=float),
                      poles, fpoles, self.half_width)

    def hilbert_J(self, poles):
        """Hilbert transform ``H(y) = P int J(w) / (y - w) dw`` of the bath spectrum."""
        poles = np.atleast_1d(np.asarray(poles, dtype=float))
        return self.hilbert(self.j_nodes, poles, bath_spectrum_J(poles, self.bath))

    def integrate(self, fnodes):
        """Plain quadrature of values sampled on the nodes."""
        return np.dot(self.weights, fnodes)


def phi_from_spectrum(t, b, cutoff=40.0, order=20):
    """``Phi(t)`` as the inverse transform ``int J(w) exp(-i w t) dw``.

    A third, independent route (composite Gauss-Legendre on the full line).
    """
    t = float(t)
    top = cutoff * b.omega_c
    width = min(1.0, 0.4 * 2 * np.pi / b.beta, 0.5 * b.omega_c, 2.0 / (abs(t) + 1e-300))
    edges = _panel_edges(top, width, grading=0)
    x, w = _composite_rule(edges, order)
    nodes = np.concatenate((-x[::-1], x))
    weights = np.concatenate((w[::-1], w))
    return complex(np.sum(weights * bath_spectrum_J(nodes, b) * np.exp(-1j * nodes * t)))


def pv_integral(f, pole, a, b, epsabs=1e-13, epsrel=1e-11):
    """``P int_a^b f(w) / (w - pole) dw`` by pole subtraction.

    The smooth remainder ``(f(w) - f(pole)) / (w - pole)`` is integrated
    adaptively and ``f(pole) ln|(b - pole)/(a - pole)|`` is added back.
    A pole outside ``[a, b]`` gives the ordinary integral.

    Raises
    ------
    ValueError
        If the pole lies within 1e-12 of an end point.
    QuadratureError
        If the adaptive rule misses its target.
    """
    pole = float(pole)
    span = max(1.0, abs(b - a))
    if min(abs(pole - a), abs(pole - b)) < 1e-12 * span:
        raise ValueError(f"pole {pole} coincides with an end point")
    if not a < pole < b:
        val, err = integrate.quad(lambda w: f(w) / (w - pole), a, b,
                                  limit=400, epsabs=epsabs, epsrel=epsrel)
        _check_quad(val, err, "pv_integral", 1.0)
        return val
    fp = f(pole)

    def smooth(w):
        d = w - pole
        return (f(w) - fp) / d if d != 0.0 else 0.0

    val, err = integrate.quad(smooth, a, b, points=[pole], limit=400,
                              epsabs=epsabs, epsrel=epsrel)
    _check_quad(val, err, "pv_integral", 1.0)
    return val + fp * np.log(abs((b - pole) / (a - pole)))


def _default_grid(b, omega, omega0):
    return SpectralGrid(b, integration_half_width(b, max(abs(omega), abs(omega0)) / 10.0))


def half_fourier_F(sign, omega, omega0, b, include_shift=True, grid=None):
    """``F_sign[omega, omega0] = int_0^inf Phi(t) exp(i(sign omega0 - omega) t) dt``.

    Parameters
    ----------
    sign : {+1, -1}
    include_shift : bool
        Drop the principal-value part when False.
    grid : SpectralGrid, optional
        Reused quadrature grid.
    """
    x = omega - sign * omega0
    delta = np.pi * bath_spectrum_J(-x, b)
    if not include_shift:
        return HalfFourierValue(float(delta), 0.0)
    grid = grid or _default_grid(b, omega, omega0)
    return HalfFourierValue(float(delta), float(-grid.hilbert_J(-x)[0]))


def half_fourier_Fs(sign, omega, omega0, b, include_shift=True, grid=None):
    """``Fs_sign[omega, omega0]``, the half-Fourier transform of ``conj(Phi(t))``."""
    x = omega - sign * omega0
    delta = np.pi * bath_spectrum_J(x, b)
    if not include_shift:
        return HalfFourierValue(float(delta), 0.0)
    grid = grid or _default_grid(b, omega, omega0)
    return HalfFourierValue(float(delta), float(grid.hilbert_J(x)[0]))


def _damped_fourier(func, x, eps):
    """``int_0^inf func(t) exp(-i x t - eps t) dt`` for complex ``func``."""
    opts = dict(limit=2000, epsabs=1e-14, epsrel=1e-12)
    fr = (lambda t: func(t).real * np.exp(-eps * t))
    fi = (lambda t: func(t).imag * np.exp(-eps * t))
    if x == 0.0:
        re, _ = integrate.quad(fr, 0.0, np.inf, **opts)
        im, _ = integrate.quad(fi, 0.0, np.inf, **opts)
        return complex(re, im)
    opts.pop("epsrel")
    w = abs(x)
    sgn = np.sign(x)
    rc, _ = integrate.quad(fr, 0.0, np.inf, weight="cos", wvar=w, **opts)
    rs, _ = integrate.quad(fr, 0.0, np.inf, weight="sin", wvar=w, **opts)
    ic, _ = integrate.quad(fi, 0.0, np.inf, weight="cos", wvar=w, **opts)
    is_, _ = integrate.quad(fi, 0.0, np.inf, weight="sin", wvar=w, **opts)
    # (fr + i fi)(cos(w t) - i sgn sin(w t))
    return complex(rc + sgn * is_, ic - sgn * rs)


def half_fourier_time(sign, omega, omega0, b, conjugate=False, epsilon=0.0):
    """Time-domain route to ``F`` (or ``Fs`` with ``conjugate=True``).

    Integrates ``Phi(t)`` from :func:`phi_analytic` against
    ``exp(i(sign omega0 - omega) t)`` on ``[0, inf)`` with Fourier-type
    adaptive quadrature.  A positive ``epsilon`` adds the damping
    ``exp(-epsilon t)`` and returns the Richardson combination
    ``2 L(epsilon/2) - L(epsilon)``.
    """
    x = omega - sign * omega0

    def func(t):
        v = phi_analytic(t, b)
        return np.conj(v) if conjugate else v

    if epsilon <= 0.0:
        return _damped_fourier(func, x, 0.0)
    return 2.0 * _damped_fourier(func, x, epsilon / 2.0) - _damped_fourier(func, x, epsilon)
