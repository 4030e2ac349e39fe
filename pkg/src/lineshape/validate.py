"""Self-validation: oracle pairs and structural invariants.

``run_validate("quick")`` covers the algebra, bath identities, the
single-spin kernel oracle, the Born-Markov closed form, solve residuals,
the reality pairing of ``chi_xx`` and trace conservation along a short
trajectory.  ``"full"`` adds the time-domain dual routes at ``N = 2`` and
``N = 4`` and the step-halving order of the propagator.

The report is a plain dict (JSON serialisable); see :func:`report_to_json`.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from ._accel import BACKEND
from .bath import (BathSpec, bath_spectrum_J, half_fourier_F, half_fourier_Fs, half_fourier_time,
                   phi_analytic, phi_quadrature, pv_integral, trigamma)
from .hamiltonian import CouplingSpec, SpinSystemSpec
from .hs import commutator_superop, hs_inner, sandwich_superop, vectorize
from .kernel import (BORN_MARKOV, BathTransforms, KernelToggles, inhomogeneous_general,
                     inhomogeneous_single_spin, memory_kernel_general, memory_kernel_single_spin,
                     superop_to_basis)
from .susceptibility import SusceptibilityEngine, born_markov_lorentzian, response_pair
from .timedomain import (chi_from_trajectory, inhomogeneous_laplace_time, kernel_laplace_time,
                         propagate)

__all__ = ["CheckResult", "run_validate", "report_to_json", "report_from_json",
           "single_spin_routes", "FIG2_BATH", "relative_error"]

#: Bath of the single-spin toggle study: s = 0.1, w_c = 0.5, k_B T = w0 / 5.
FIG2_BATH = BathSpec(0.1, 0.5, 5.0)


@dataclass
class CheckResult:
    """Outcome of one check; ``error`` is the measured deviation."""

    name: str
    passed: bool
    error: float
    tolerance: float
    seconds: float = 0.0
    detail: str = ""


def relative_error(a, b) -> float:
    """``max |a - b| / max |b|`` over all entries."""
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def single_spin_routes(omega, lam, bath, include_shift=True, a_nu=None):
    """General and closed-form single-spin kernel and source, computational basis.

    Returns ``(xi_general, xi_closed, psi_general, psi_closed)``.
    """
    system = SpinSystemSpec.single(1.0)
    coupling = CouplingSpec.uniform(1, lam)
    pair = response_pair("+-", 1)
    a_nu = pair.A if a_nu is None else a_nu
    eng = SusceptibilityEngine(system, coupling, bath, pair,
                               KernelToggles(include_shift, True))
    eng.a_eig = eng.eig.to_eigenbasis(np.asarray(a_nu, dtype=complex))
    vecs = eng.eig.vectors
    xi_gen = superop_to_basis(memory_kernel_general(omega, eng.eig, eng.x_eig, eng.transforms,
                                                    include_shift), vecs)
    psi_eig = inhomogeneous_general(omega, eng.eig, eng.x_eig, eng.a_eig, eng.transforms,
                                    bath.beta, include_shift)
    psi_gen = np.kron(vecs, vecs.conj()) @ psi_eig
    xi_cl = memory_kernel_single_spin(omega, 1.0, lam, bath, include_shift)
    psi_cl = inhomogeneous_single_spin(omega, 1.0, lam, a_nu, bath, include_shift)
    return xi_gen, xi_cl, psi_gen, psi_cl


def _random_op(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


# ---------------------------------------------------------------------------
# quick checks
# ---------------------------------------------------------------------------

def _check_sandwich():
    rng = np.random.default_rng(11)
    worst = 0.0
    for k in range(200):
        n = (2, 4, 8)[k % 3]
        o1, o2, rho = (_random_op(rng, n) for _ in range(3))
        lhs = sandwich_superop(o1, o2) @ vectorize(rho)
        rhs = vectorize(o1 @ rho @ o2.conj().T)
        worst = max(worst, np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))
    return worst, 1e-12, "200 random triples at N = 2, 4, 8"


def _check_isometry():
    rng = np.random.default_rng(12)
    worst = 0.0
    for n in (2, 4, 8):
        v, o = _random_op(rng, n), _random_op(rng, n)
        worst = max(worst, abs(hs_inner(v, o) - np.vdot(vectorize(v), vectorize(o)))
                    / abs(hs_inner(v, o)))
        h = v + v.conj().T
        comm = commutator_superop(h)
        worst = max(worst, np.max(np.abs(comm @ vectorize(np.eye(n)))) / np.max(np.abs(h)),
                    np.max(np.abs(comm @ vectorize(h))) / np.max(np.abs(h)) ** 2)
    return worst, 1e-13, "hs_inner vs vec, [H, .] annihilates I and H"


def _check_kms():
    b = FIG2_BATH
    w = np.linspace(0.01, 5.0, 100)
    err = np.max(np.abs(bath_spectrum_J(-w, b) - np.exp(-b.beta * w) * bath_spectrum_J(w, b))
                 / bath_spectrum_J(w, b))
    return float(err), 1e-12, "J(-w) = exp(-beta w) J(w), 100 points"


def _check_trigamma():
    errs = [abs(trigamma(1.0) - np.pi ** 2 / 6) / (np.pi ** 2 / 6),
            abs(trigamma(0.5) - np.pi ** 2 / 2) / (np.pi ** 2 / 2)]
    rng = np.random.default_rng(13)
    for z in rng.uniform(0.2, 6, 10) + 1j * rng.uniform(-6, 6, 10):
        errs.append(abs(trigamma(z + 1) - (trigamma(z) - 1 / z ** 2)) / abs(trigamma(z)))
    return max(errs), 1e-12, "special values and recurrence"


def _check_phi_routes():
    b = FIG2_BATH
    t = np.linspace(0.0, 20.0 / b.omega_c, 9)
    ana = phi_analytic(t, b)
    quad = np.array([phi_quadrature(x, b) for x in t])
    return float(np.max(np.abs(ana - quad) / np.abs(ana))), 1e-6, "closed form vs quadrature"


def _check_pv_polynomials():
    worst = 0.0
    for deg in range(4):
        f = lambda w, d=deg: w ** d
        exact = {0: 0.0, 1: 2.0, 2: 4.0, 3: 20.0 / 3.0}[deg]   # P int_0^2 w^d/(w-1) dw
        worst = max(worst, abs(pv_integral(f, 1.0, 0.0, 2.0) - exact))
    return worst, 1e-10, "P int_0^2 w^d / (w - 1) dw, d = 0..3"


def _check_kernel_oracle(count):
    rng = np.random.default_rng(14)
    worst = 0.0
    for _ in range(count):
        bath = BathSpec(rng.uniform(0.02, 0.3), rng.uniform(0.3, 2.0), rng.uniform(0.5, 10.0))
        omega, lam = rng.uniform(-2.0, 3.0), rng.uniform(0.0, np.pi / 2)
        xg, xc, pg, pc = single_spin_routes(omega, lam, bath)
        worst = max(worst, relative_error(xg, xc), relative_error(pg, pc))
    return worst, 1e-8, f"{count} random (omega, Lambda, s, w_c, beta) tuples"


def _check_born_markov():
    system, pair = SpinSystemSpec.single(1.0), response_pair("+-", 1)
    coupling = CouplingSpec.uniform(1, 0.0)
    tg = KernelToggles(True, False, BORN_MARKOV)
    eng = SusceptibilityEngine(system, coupling, FIG2_BATH, pair, tg)
    grid = np.linspace(0.8, 1.2, 9)
    num = np.array([eng.chi(w) for w in grid])
    ref = born_markov_lorentzian(grid, 1.0, FIG2_BATH)
    g, gs = eng.transforms.g_pair(np.array([0.0]))
    im_phi4 = abs((g + gs)[0].imag)
    return max(relative_error(num, ref), im_phi4), 1e-8, \
        f"Lorentzian match; |Im phi4+[0,0]| = {im_phi4:.1e}"


def _two_spin_engine(pair="xx", beta=1.0):
    system = SpinSystemSpec.two_spin(-1.0, 0.1, np.pi / 3)
    return SusceptibilityEngine(system, CouplingSpec.uniform(2, np.pi / 5), BathSpec(0.02, 0.5,
                                                                                   beta),
                                response_pair(pair, 2))


def _check_residuals():
    eng = _two_spin_engine()
    worst = max(eng.solve(w)[1] for w in (-1.3, -0.4, 0.3, 0.9, 1.0, 1.7))
    return worst, 1e-10, "relative residual of the dense solve"


def _check_reality():
    eng = _two_spin_engine()
    worst = 0.0
    for w in (0.45, 0.9, 1.1, 2.0):
        worst = max(worst, abs(eng.chi(-w) - np.conj(eng.chi(w))) / abs(eng.chi(w)))
    return worst, 1e-8, "chi_xx(-w) = conj chi_xx(w)"


@lru_cache(maxsize=1)
def _short_trajectory():
    system, coupling = SpinSystemSpec.single(1.0), CouplingSpec.uniform(1, np.pi / 4)
    traj = propagate(system, coupling, FIG2_BATH, response_pair("xx", 1).A, 0.02, 20.0)
    mats = traj.samples.reshape(-1, 2, 2)
    return mats, float(np.max(np.abs(traj.samples[0])))


def _check_trace_conservation():
    mats, scale = _short_trajectory()
    trace = np.max(np.abs(np.trace(mats, axis1=1, axis2=2)))
    return trace / scale, 1e-10, "|Tr rho(t)| for t <= 20 (Lambda = pi/4, A = Sx)"


def _check_anti_hermitian():
    mats, scale = _short_trajectory()
    anti = np.max(np.abs(mats + np.conj(np.transpose(mats, (0, 2, 1)))))
    return anti / scale, 1e-8, "[A, rho_A] stays anti-Hermitian for Hermitian A"


# ---------------------------------------------------------------------------
# full checks
# ---------------------------------------------------------------------------

def _check_f_dual_route():
    b = FIG2_BATH
    grid = BathTransforms(b, 3.0).grid
    worst = 0.0
    for omega, sign in ((0.7, 1), (1.0, 1), (1.3, -1), (0.2, -1)):
        f = half_fourier_F(sign, omega, 1.0, b, grid=grid).combined
        fs = half_fourier_Fs(sign, omega, 1.0, b, grid=grid).combined
        worst = max(worst, abs(f - half_fourier_time(sign, omega, 1.0, b)) / abs(f),
                    abs(fs - half_fourier_time(sign, omega, 1.0, b, conjugate=True)) / abs(fs))
    return worst, 1e-4, "frequency-domain F/Fs vs time integral of Phi"


def _check_time_kernel():
    system, coupling = SpinSystemSpec.single(1.0), CouplingSpec.uniform(1, np.pi / 3)
    pair = response_pair("+-", 1)
    eng = SusceptibilityEngine(system, coupling, FIG2_BATH, pair)
    worst = 0.0
    vecs = eng.eig.vectors
    for omega in (0.9, 1.05):
        xi_f = superop_to_basis(eng.kernel(omega), vecs)
        psi_f = np.kron(vecs, vecs.conj()) @ eng.source(omega)
        xi_t = kernel_laplace_time(omega, system, coupling, FIG2_BATH)
        psi_t = inhomogeneous_laplace_time(omega, system, coupling, FIG2_BATH, pair.A)
        worst = max(worst, relative_error(xi_t, xi_f), relative_error(psi_t, psi_f))
    return worst, 1e-3, "Laplace transform of the time-domain kernel and source"


def dual_route(system, coupling, bath, pair, freqs, dt=0.02, t_max=200.0, epsilon=0.005):
    """Largest relative deviation between propagated and solved ``chi``."""
    traj = propagate(system, coupling, bath, pair.A, dt, t_max)
    eng = SusceptibilityEngine(system, coupling, bath, pair)
    errs = [abs(chi_from_trajectory(traj, pair.B, w, epsilon) - eng.chi(w)) / abs(eng.chi(w))
            for w in freqs]
    return max(errs)


def _check_dual_single():
    err = dual_route(SpinSystemSpec.single(1.0), CouplingSpec.uniform(1, 0.0), FIG2_BATH,
                     response_pair("+-", 1), (0.93, 0.98, 1.014, 1.05, 1.1))
    return err, 0.02, "N = 2, Lambda = 0, five frequencies around the peak"


def _check_dual_two_spin():
    err = dual_route(SpinSystemSpec.two_spin(-1.0, 0.1, 0.0), CouplingSpec.uniform(2, 0.0),
                     BathSpec(0.02, 0.5, 1.0), response_pair("xx", 2), (0.89, 1.0, 1.12))
    return err, 0.05, "N = 4, J = -1, D0 = 0.1, kT = 1"


def step_order(t_max=40.0, dt=0.04):
    """Observed convergence order of the propagator from three step sizes."""
    system, coupling = SpinSystemSpec.single(1.0), CouplingSpec.uniform(1, 0.0)
    a_nu = response_pair("+-", 1).A
    runs = [propagate(system, coupling, FIG2_BATH, a_nu, dt / 2 ** k, t_max).samples[::2 ** k]
            for k in range(3)]
    e1 = np.max(np.abs(runs[0] - runs[1]))
    e2 = np.max(np.abs(runs[1] - runs[2]))
    return float(np.log2(e1 / e2))


def _check_step_order():
    order = step_order()
    return max(0.0, 1.9 - order), 0.0, f"observed order {order:.3f} (needs >= 1.9)"


_QUICK = [
    ("hs.sandwich_identity", _check_sandwich),
    ("hs.isometry_and_commutator", _check_isometry),
    ("bath.kms", _check_kms),
    ("bath.trigamma", _check_trigamma),
    ("bath.phi_routes", _check_phi_routes),
    ("bath.pv_polynomials", _check_pv_polynomials),
    ("kernel.single_spin_oracle", lambda: _check_kernel_oracle(4)),
    ("susceptibility.born_markov", _check_born_markov),
    ("susceptibility.solve_residual", _check_residuals),
    ("susceptibility.chi_xx_reality", _check_reality),
    ("timedomain.trace_conservation", _check_trace_conservation),
    ("timedomain.anti_hermitian", _check_anti_hermitian),
]
_FULL = [
    ("kernel.single_spin_oracle_50", lambda: _check_kernel_oracle(50)),
    ("bath.half_fourier_dual_route", _check_f_dual_route),
    ("timedomain.laplace_kernel_source", _check_time_kernel),
    ("timedomain.dual_route_n2", _check_dual_single),
    ("timedomain.dual_route_n4", _check_dual_two_spin),
    ("timedomain.step_order", _check_step_order),
]


def run_validate(level: str = "quick", progress=None) -> dict:
    """Run the validation suite and return a report dict.

    Parameters
    ----------
    level : {"quick", "full"}
    progress : callable, optional
        Called with each :class:`CheckResult` as soon as it is available.
    """
    if level not in ("quick", "full"):
        raise ValueError(f"unknown validation level {level!r}")
    checks = _QUICK + (_FULL if level == "full" else [])
    results = []
    for name, func in checks:
        start = time.perf_counter()
        try:
            err, tol, detail = func()
            passed = bool(np.isfinite(err) and err <= tol)
        except Exception as exc:  # a crash is a failed check, reported as such
            err, tol, detail, passed = float("nan"), float("nan"), f"error: {exc}", False
        res = CheckResult(name, passed, float(err), float(tol),
                          round(time.perf_counter() - start, 3), detail)
        results.append(res)
        if progress is not None:
            progress(res)
    return {"schema": 1, "level": level, "backend": BACKEND,
            "passed": all(r.passed for r in results),
            "checks": [asdict(r) for r in results]}


def report_to_json(report: dict) -> str:
    """Serialise a report; NaN errors become ``null``."""
    def clean(value):
        if isinstance(value, float) and not math.isfinite(value):
            return None
        if isinstance(value, dict):
            return {k: clean(v) for k, v in value.items()}
        if isinstance(value, list):
            return [clean(v) for v in value]
        return value

    return json.dumps(clean(report), indent=2, sort_keys=True, allow_nan=False)


def report_from_json(text: str) -> dict:
    """Parse a report written by :func:`report_to_json`."""
    report = json.loads(text)
    for chk in report["checks"]:
        for key in ("error", "tolerance"):
            if chk[key] is None:
                chk[key] = float("nan")
    return report
