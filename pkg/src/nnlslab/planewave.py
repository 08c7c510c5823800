"""Plane-wave ray asymptotics.

Everything needed along rays |xi| > sqrt(2)A: the scalar factorization
function delta(k, k1) built from the unwrapped log of 1 + r1*r2, its local
exponents (nu, chi, Delta) at the stationary point, the cut factorization
F(k, k1) with its large-k constant F_inf, and the leading-plus-subleading
evaluator with the four oscillatory constants c1..c4.

The accumulated argument of 1 + r1*r2 must stay inside (-pi, pi) up to the
stationary point; every entry point checks this and raises WindingError
otherwise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BarycentricInterpolator

from .background import f_branch, stationary_points, theta_phase, w_branch
from .numerics import ComplexPath, cauchy_segment, gamma_complex, quad_path

__all__ = [
    "PlaneWaveData",
    "SubleadingCase",
    "subleading_case",
    "WindingError",
    "delta_fn",
    "chi_fn",
    "local_exponents",
    "F_fn",
    "F_inf",
    "F_inf_split",
    "planewave_params",
    "planewave_eval",
]

#: constants c1..c4 are zeroed below this size of |r1*r2| at the stationary
#: point, where the Gamma-pole cancellation makes the closed forms 0/0
_SMALL_REFLECTION = 1e-14


class WindingError(RuntimeError):
    """The accumulated argument of 1 + r1*r2 left (-pi, pi)."""


class SubleadingCase(enum.Enum):
    A = "a"  # Im nu in (-1/2, -1/6]
    B = "b"  # Im nu in (-1/6, 1/6)
    C = "c"  # Im nu in [1/6, 1/2)


def subleading_case(nu):
    """Which subleading-correction regime Im nu selects."""
    im = complex(nu).imag
    if -0.5 < im <= -1.0 / 6.0:
        return SubleadingCase.A
    if -1.0 / 6.0 < im < 1.0 / 6.0:
        return SubleadingCase.B
    if 1.0 / 6.0 <= im < 0.5:
        return SubleadingCase.C
    raise WindingError(f"Im nu = {im:.3f} outside (-1/2, 1/2)")


@dataclass(frozen=True)
class PlaneWaveData:
    """All ray constants of the plane-wave asymptotics at one xi."""

    xi: float
    A: float
    k1: float
    nu: complex
    chi_at_k1: complex
    Delta: float
    F_inf: complex
    F_at_k1: complex
    beta1: float
    theta_at_k1: float
    c1: complex
    c2: complex
    c3: complex
    c4: complex
    case_tag: SubleadingCase


def _check_winding(spectral, k_end):
    w = spectral.max_abs_winding(k_end)
    if w >= np.pi:
        raise WindingError(
            f"accumulated argument of 1 + r1*r2 reaches {w:.3f} >= pi"
        )


def _line_phi(spectral):
    """The unwrapped log of 1 + r1*r2 as a function of points on the real line."""
    return lambda z: spectral.log_rr(np.real(z))


def log_delta(k, k_end, spectral, tol=1e-11):
    """log of the lower-half-line factorization function delta(k, k_end)."""
    phi = _line_phi(spectral)
    val = cauchy_segment(phi, -spectral.k_tail, float(k_end), complex(k), tol=tol)
    return val / (2j * np.pi)


def delta_fn(k, k1, spectral, tol=1e-11):
    """delta(k, k1) = exp{(1/2 pi i) int_{-inf}^{k1} log(1+r1 r2)/(z-k) dz}.

    Only defined off the half-line (-inf, k1]."""
    _check_winding(spectral, k1)
    return np.exp(log_delta(k, k1, spectral, tol=tol))


def chi_fn(k, k_end, spectral, tol=1e-11):
    """The regular exponent chi(k, k_end) with delta = (k-k_end)^(i nu) e^chi.

    Continuous up to and including k = k_end (the stationary point value
    chi(k1, k1) enters the subleading constants)."""
    phi = _line_phi(spectral)
    k = complex(k)
    k_end = float(k_end)
    k_lo = -spectral.k_tail
    a = min(1.0, 0.25 * (k_end - k_lo))
    L_end = spectral.log_rr(k_end)

    def phi_shift(z):
        return phi(z) - L_end

    if abs(k - k_end) < 1e-14:
        # regular limit: the middle integrand is a smooth difference quotient
        mid = quad_path(
            lambda z: phi_shift(z) / (z - k_end),
            ComplexPath.segment(k_end - a, k_end),
            tol=tol,
        )
        first = cauchy_segment(phi, k_lo, k_end - a, k, tol=tol)
    else:
        mid = cauchy_segment(phi_shift, k_end - a, k_end, k, tol=tol)
        first = cauchy_segment(phi, k_lo, k_end - a, k, tol=tol)
    return (first + mid - L_end * np.log(k - k_end + a)) / (2j * np.pi)


def local_exponents(k1, spectral):
    """(nu, chi(k1,k1), Delta) at the stationary point."""
    _check_winding(spectral, k1)
    L1 = spectral.log_rr(float(k1))
    nu = -L1 / (2.0 * np.pi)
    Delta = float(L1.imag)
    chi = chi_fn(k1, k1, spectral)
    return nu, chi, Delta


def _lndelta_on_B(k1, spectral, n=96, tol=1e-11):
    """Barycentric interpolant of log delta(i y, k1) at Chebyshev nodes."""
    A = spectral.A
    j = np.arange(n)
    y = A * (1.0 - 1e-9) * np.cos(np.pi * (2 * j + 1) / (2 * n))
    vals = np.array([log_delta(1j * yy, k1, spectral, tol=tol) for yy in y])
    return BarycentricInterpolator(y, vals)


def F_fn(k, k1, spectral, tol=1e-10, _interp=None):
    """The cut factorization function F(k, k1), bounded at +-iA and infinity.

    F_+ F_- = delta^2 on the cut; F -> exp(i F_inf) at infinity."""
    A = spectral.A
    interp = _interp if _interp is not None else _lndelta_on_B(k1, spectral)

    def g(z):
        return interp(np.imag(z)) / f_branch(z, A)

    I = cauchy_segment(g, -1j * A, 1j * A, complex(k), tol=tol,
                       endpoint_singularity=("inverse_sqrt", "inverse_sqrt"))
    return np.exp(-f_branch(complex(k), A) / (1j * np.pi) * I)


def F_inf(k1, spectral, tol=1e-10, _interp=None):
    """F_inf(k1) = -(1/pi) int_B log delta(z, k1)/f(z) dz."""
    A = spectral.A
    interp = _interp if _interp is not None else _lndelta_on_B(k1, spectral)
    path = ComplexPath.segment(-1j * A, 1j * A, "inverse_sqrt", "inverse_sqrt")
    val = quad_path(lambda z: interp(np.imag(z)) / f_branch(z, A), path, tol=tol)
    return -val / np.pi


def F_inf_split(k1, spectral, tol=1e-10, n=96):
    """F_inf assembled from the separated real/imaginary double integrals.

    Independent route: the inner line integrals use log|1+r1r2| and the
    accumulated argument separately; both outer integrals are real up to
    quadrature noise."""
    A = spectral.A
    k_lo = -spectral.k_tail

    def phi_re(z):
        return spectral.log_rr(np.real(z)).real + 0j

    def phi_im(z):
        return spectral.log_rr(np.real(z)).imag + 0j

    j = np.arange(n)
    y = A * (1.0 - 1e-9) * np.cos(np.pi * (2 * j + 1) / (2 * n))
    H_re = np.array(
        [cauchy_segment(phi_re, k_lo, float(k1), 1j * yy, tol=tol) for yy in y]
    )
    H_im = np.array(
        [cauchy_segment(phi_im, k_lo, float(k1), 1j * yy, tol=tol) for yy in y]
    )
    # inner integrals are over s, with kernel 1/(s - zeta): flip sign to the
    # displayed kernel 1/(zeta - s) ... the displays use 1/(s - zeta) directly
    ip_re = BarycentricInterpolator(y, H_re)
    ip_im = BarycentricInterpolator(y, H_im)
    path = ComplexPath.segment(-1j * A, 1j * A, "inverse_sqrt", "inverse_sqrt")
    outer_re = quad_path(lambda z: ip_re(np.imag(z)) / f_branch(z, A), path, tol=tol)
    outer_im = quad_path(lambda z: ip_im(np.imag(z)) / f_branch(z, A), path, tol=tol)
    re_part = -outer_re / (2j * np.pi**2)
    im_part = -outer_im / (2j * np.pi**2)
    return complex(re_part.real + 1j * im_part.real), float(
        max(abs(re_part.imag), abs(im_part.imag))
    )


def planewave_params(xi, spectral, A=None, tol=1e-10):
    """Assemble every plane-wave ray constant at xi > sqrt(2) A."""
    A = spectral.A if A is None else A
    xi = float(xi)
    if not xi > np.sqrt(2.0) * A:
        raise ValueError("plane-wave rays require xi > sqrt(2) A")
    k1 = float(stationary_points(xi, A)[0].real)
    _check_winding(spectral, k1)
    nu, chi, Delta = local_exponents(k1, spectral)
    interp = _lndelta_on_B(k1, spectral)
    Finf = F_inf(k1, spectral, tol=tol, _interp=interp)
    Fk1 = F_fn(k1, k1, spectral, tol=tol, _interp=interp)
    fk1 = complex(f_branch(k1, A)).real
    wk1 = complex(w_branch(k1, A))
    theta1 = complex(theta_phase(k1, xi, A)).real
    theta2 = (4.0 * k1 + 2.0 * xi) / fk1
    beta1 = 0.5 / np.sqrt(theta2)
    log_term = np.log(2.0 * np.sqrt(theta2))

    r1k1, r2k1 = spectral.reflection_at(np.array([k1]))
    r1k1 = complex(r1k1[0])
    r2k1 = complex(r2k1[0])
    if abs(r1k1 * r2k1) < _SMALL_REFLECTION:
        c1 = c2 = c3 = c4 = 0.0j
    else:
        wm = (wk1 - 1.0 / wk1) ** 2
        wp = (wk1 + 1.0 / wk1) ** 2
        sq = np.sqrt(np.pi) / np.sqrt(2.0)
        nuc = np.conj(nu)
        c1 = sq * wm * Fk1**2 / (r2k1 * gamma_complex(1j * nu)) * np.exp(
            2j * Finf - np.pi * nu / 2 + 3j * np.pi / 4 - 2 * chi
            - (1 - 2j * nu) * log_term
        )
        c2 = sq * wp / (r1k1 * gamma_complex(-1j * nu) * Fk1**2) * np.exp(
            2j * Finf - np.pi * nu / 2 + 1j * np.pi / 4 + 2 * chi
            - (1 + 2j * nu) * log_term
        )
        c3 = sq * wp * np.conj(Fk1**2) / (
            np.conj(r2k1) * gamma_complex(-1j * nuc)
        ) * np.exp(
            2j * np.conj(Finf) - np.pi * nuc / 2 + 1j * np.pi / 4
            - 2 * np.conj(chi) - (1 + 2j * nuc) * log_term
        )
        c4 = sq * wm / (
            np.conj(r1k1) * gamma_complex(1j * nuc) * np.conj(Fk1**2)
        ) * np.exp(
            2j * np.conj(Finf) - np.pi * nuc / 2 + 3j * np.pi / 4
            + 2 * np.conj(chi) - (1 - 2j * nuc) * log_term
        )

    case = subleading_case(nu)

    return PlaneWaveData(
        xi=xi, A=A, k1=k1, nu=complex(nu), chi_at_k1=complex(chi), Delta=Delta,
        F_inf=complex(Finf), F_at_k1=complex(Fk1), beta1=float(beta1),
        theta_at_k1=theta1, c1=complex(c1), c2=complex(c2), c3=complex(c3),
        c4=complex(c4), case_tag=case,
    )


def planewave_eval(pwd, t):
    """Leading asymptotes and subleading corrections at time t > 0.

    Returns (q_plus, q_minus, E1, E2): the leading values of q at
    x = +-4 xi t and the decaying corrections there."""
    if not t > 0:
        raise ValueError("t must be positive")
    A = pwd.A
    nu = pwd.nu
    th = pwd.theta_at_k1
    phase = np.exp(2j * (A * A * t + pwd.F_inf.real))
    q_plus = A * np.exp(-2.0 * pwd.F_inf.imag) * phase
    q_minus = A * np.exp(2.0 * pwd.F_inf.imag) * phase

    osc_p = np.exp(2j * t * (A * A + th) + 1j * nu.real * np.log(t))
    osc_m = np.exp(2j * t * (A * A - th) - 1j * nu.real * np.log(t))
    slow = t ** (-0.5 - nu.imag)  # pairs with c1, c3
    fast = t ** (-0.5 + nu.imag)  # pairs with c2, c4

    term_c1 = slow * pwd.c1 * osc_p
    term_c2 = fast * pwd.c2 * osc_m
    term_c3 = slow * pwd.c3 * osc_m
    term_c4 = fast * pwd.c4 * osc_p
    if pwd.case_tag is SubleadingCase.A:
        E1, E2 = term_c1, term_c3
    elif pwd.case_tag is SubleadingCase.B:
        E1, E2 = term_c1 + term_c2, term_c3 + term_c4
    else:
        E1, E2 = term_c2, term_c4
    return complex(q_plus), complex(q_minus), complex(E1), complex(E2)
