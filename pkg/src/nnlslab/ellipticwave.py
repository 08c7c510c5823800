"""Modulated-elliptic-wave ray asymptotics (rays 0 < |xi| < sqrt(2) A).

Builds the genus-1 surface attached to a ray: the change-of-factorization
point k0 solving the vanishing b-period condition, the upper branch point
alpha, the normalized holomorphic differential with its period tau, the
deformed phase h(k) with its large-k constant H_inf and band frequency
Omega, the scalar factorization G(k) with phase constant omega and large-k
constant G_inf, the Abel-map constants, and the theta-ratio evaluator of
the leading asymptotics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BarycentricInterpolator, CubicSpline

from .background import f_branch
from .numerics import (ComplexPath, PhaseUnwrapError, bracket_root,
                       cauchy_segment, continuous_log, quad_path, theta3)
from .planewave import _lndelta_on_B, log_delta

__all__ = [
    "SurfaceData",
    "EllipticData",
    "alpha_of",
    "gamma2",
    "gamma_rs",
    "gamma_band_cut",
    "solve_k0",
    "build_surface",
    "h_machinery",
    "g_machinery",
    "abel_constants",
    "reality_residuals",
    "elliptic_data",
    "elliptic_eval",
    "dh_b_period",
]

#: rectangle offset for cycle integrals around the cut (checked offset
#: independent in the test suite)
_CYCLE_OFFSET = 1e-4


@dataclass(frozen=True)
class SurfaceData:
    k0: float
    alpha: complex
    A: float
    xi: float
    C_norm: complex
    tau: complex
    band_upper: ComplexPath  # k0 -> alpha
    band_lower: ComplexPath  # k0 -> conj(alpha)

    def __post_init__(self):
        if not self.alpha.imag > 0:
            raise ValueError("alpha must lie in the upper half plane")
        if not self.tau.imag > 0:
            raise ValueError("Im tau must be positive")
        # k0 and Re alpha = -k0 - xi sit mirror-symmetric about -xi/2; the
        # vanishing-b-period root places k0 on the left of the pair
        if not (-self.xi < self.k0 < 0):
            raise ValueError("k0 must lie in (-xi, 0)")


@dataclass(frozen=True)
class EllipticData:
    surface: SurfaceData
    H_inf: float
    Omega: float
    omega: complex
    G_inf: complex
    v_inf: complex
    c: complex
    khat0: float

    @property
    def A(self):
        return self.surface.A

    @property
    def xi(self):
        return self.surface.xi


def _angle_cut_down(z):
    a = np.angle(z)
    return a + 2.0 * np.pi * (a < -np.pi / 2)


def gamma2(k, alpha):
    """sqrt((k - alpha)(k - conj alpha)) cut along the vertical segment
    [conj alpha, alpha], behaving like k at infinity, positive at k = 0."""
    k = np.asarray(k, dtype=complex)
    ac = np.conj(alpha)
    phi = _angle_cut_down(k - alpha) + _angle_cut_down(k - ac)
    mod = np.sqrt(np.abs(k - alpha) * np.abs(k - ac))
    out = mod * np.exp(0.5j * phi)
    return out if out.ndim else complex(out)


def gamma_rs(k, A, alpha):
    """Product branch f(k) * gamma2(k): ~ k^2 at infinity, cuts on
    [-iA, iA] and the vertical segment [conj alpha, alpha]; on-axis
    evaluation gives the right (minus) side of the B cut."""
    return f_branch(k, A) * gamma2(k, alpha)


def _in_band_triangle(k, k0, alpha):
    """Point strictly inside the triangle k0, alpha, conj(alpha): the region
    between the band-arc cut and the vertical-segment cut, where the
    band-cut branch of gamma flips sign relative to gamma_rs."""
    k = complex(k)
    x, y = k.real, k.imag
    x0, xa = k0, alpha.real
    if not (min(x0, xa) < x < max(x0, xa)):
        return False
    # edges k0 -> alpha and k0 -> conj(alpha); vertical edge at Re = Re alpha
    t = (x - x0) / (xa - x0)
    y_up = t * alpha.imag
    return -abs(y_up) < y < abs(y_up)


def gamma_band_cut(k, surface):
    """Surface root with cuts on B and the band arc conj(alpha) -> k0 ->
    alpha: equals gamma_rs outside the triangle between the two candidate
    cuts and -gamma_rs inside it."""
    g = gamma_rs(k, surface.A, surface.alpha)
    if _in_band_triangle(k, surface.k0, surface.alpha):
        return -g
    return g


def alpha_of(k0, xi, A):
    im2 = A * A + 2.0 * k0 * k0 + 2.0 * k0 * xi
    if im2 <= 0:
        raise ValueError("alpha degenerate: outside the elliptic region")
    return complex(-k0 - xi, np.sqrt(im2))


def _k0_residual(k0, xi, A, tol=1e-12):
    """Imaginary part of the B-integral whose vanishing selects k0 (the
    integral is purely imaginary by the conjugation symmetry in y)."""
    alpha = alpha_of(k0, xi, A)
    path = ComplexPath.segment(-1j * A, 1j * A, "inverse_sqrt", "inverse_sqrt")
    val = quad_path(
        lambda z: (z - k0) * gamma2(z, alpha) / f_branch(z, A), path, tol=tol
    )
    return float(val.imag)


def solve_k0(xi, A, tol=1e-10, scan_points=24):
    """The change-of-factorization point: the unique zero of the vanishing
    b-period residual on (-xi, 0).

    The root and Re alpha = -k0 - xi are mirror images about -xi/2; the
    residual vanishes with k0 on the left of the pair, which is also the
    configuration whose Im h carries the steepest-descent signature (bands
    flanked by decay, growth beyond alpha).  The residual is discontinuous
    at c = -xi where the alpha cut crosses the background cut, so the scan
    stays strictly inside.
    """
    xi = float(xi)
    if not 0 < xi < np.sqrt(2.0) * A:
        raise ValueError("elliptic rays require 0 < xi < sqrt(2) A")
    margin = 1e-6 * min(xi, A)
    grid = np.linspace(-xi * (1 - 1e-3), -margin, scan_points)
    vals = [_k0_residual(c, xi, A, tol=max(tol, 1e-10)) for c in grid]
    for i in range(scan_points - 1):
        if vals[i] == 0.0:
            return float(grid[i])
        if vals[i] * vals[i + 1] < 0:
            return bracket_root(
                lambda c: _k0_residual(c, xi, A), grid[i], grid[i + 1], tol=tol
            )
    raise ValueError(f"no sign change of the k0 residual on (-{xi:g}, 0)")


def _rectangle_around_B(A, off):
    return [off - 1j * (A + off), off + 1j * (A + off),
            -off + 1j * (A + off), -off - 1j * (A + off), off - 1j * (A + off)]


def _cycle_rectangle(fn, A, off, tol=1e-11):
    verts = _rectangle_around_B(A, off)
    total = 0.0 + 0.0j
    for a, b in zip(verts[:-1], verts[1:]):
        total += quad_path(fn, ComplexPath.segment(a, b), tol=tol)
    return total


def _segments_cross(a1, b1, a2, b2):
    """Proper intersection test for two segments (shared endpoints allowed)."""
    def orient(p, q, r):
        return np.sign((q.real - p.real) * (r.imag - p.imag)
                       - (q.imag - p.imag) * (r.real - p.real))

    o1, o2 = orient(a1, b1, a2), orient(a1, b1, b2)
    o3, o4 = orient(a2, b2, a1), orient(a2, b2, b1)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


def build_surface(xi, A, spectral=None, tol=1e-10, offset=_CYCLE_OFFSET):
    """Solve for k0, fix alpha, and normalize the genus-1 periods.

    The surface is determined by (xi, A) alone; ``spectral`` is accepted for
    interface symmetry with the other ray constructors and ignored."""
    k0 = solve_k0(xi, A, tol=tol)
    alpha = alpha_of(k0, xi, A)
    band_u = ComplexPath.segment(k0, alpha, "log", "inverse_sqrt")
    band_l = ComplexPath.segment(k0, np.conj(alpha), "log", "inverse_sqrt")
    for seg in (band_u, band_l):
        if _segments_cross(seg.vertices[0], seg.vertices[1], -1j * A, 1j * A):
            raise ValueError("band contour crosses the background cut")

    def inv_gamma(z):
        return 1.0 / gamma_rs(z, A, alpha)

    b_period = _cycle_rectangle(inv_gamma, A, offset, tol=tol)
    C = 1.0 / b_period
    a_half = quad_path(
        inv_gamma,
        ComplexPath.segment(np.conj(alpha), -1j * A, "inverse_sqrt", "inverse_sqrt"),
        tol=tol,
    )
    tau = 2.0 * C * a_half
    if tau.imag < 0:
        tau = -tau
    return SurfaceData(k0=float(k0), alpha=alpha, A=A, xi=float(xi),
                       C_norm=complex(C), tau=complex(tau),
                       band_upper=band_u, band_lower=band_l)


def _dh_density(surface):
    k0, A, alpha = surface.k0, surface.A, surface.alpha

    def dh(z):
        return 4.0 * (z - k0) * gamma2(z, alpha) / f_branch(z, A)

    return dh


def dh_b_period(surface, offset=_CYCLE_OFFSET, tol=1e-11):
    """Independent check that the b-period of dh vanishes at the solved k0."""
    return _cycle_rectangle(_dh_density(surface), surface.A, offset, tol=tol)


def _ray_tail_integral(fn, base, S=1e6, tol=1e-11, spans=None):
    """Integral of fn along the vertical ray from base away from the real
    axis, truncated at |offset| = S with a two-term power-law tail appended."""
    dirn = 1j if base.imag > 0 else -1j
    if spans is None:
        spans = [1.0, 10.0, 100.0, 1e3, 1e4, 1e5, S]
    verts = [base] + [base + dirn * s for s in spans]
    val = quad_path(fn, ComplexPath(tuple(verts), ("inverse_sqrt", "none")), tol=tol)
    # fit fn ~ kap2/k^2 + kap3/k^3 at the last two probe offsets
    k1 = base + dirn * (S / 2)
    k2 = base + dirn * S
    f1 = complex(np.asarray(fn(np.array([k1])))[0])
    f2 = complex(np.asarray(fn(np.array([k2])))[0])
    M = np.array([[1.0 / k1**2, 1.0 / k1**3], [1.0 / k2**2, 1.0 / k2**3]])
    kap2, kap3 = np.linalg.solve(M, np.array([f1, f2]))
    tail = kap2 / k2 + kap3 / (2.0 * k2**2)
    return val + tail


def h_machinery(surface, xi=None, tol=1e-10, _raw=False):
    """(H_inf, Omega, h evaluator) for the deformed phase.

    h(k) = 2k^2 + 4 xi k + 2A^2 + 2 * sum over both base points of the
    integral of [dh/4 - (z + xi)] from the base point to k.  With ``_raw``
    the complex H_inf and Omega are returned without the reality checks.
    """
    xi = surface.xi if xi is None else xi
    A = surface.A
    k0 = surface.k0
    alpha = surface.alpha
    dh = _dh_density(surface)

    # dh/4 - (z + xi) = (N - D)/f with N = (z-k0)*gamma2, D = (z+xi)*f;
    # N^2 - D^2 collapses to a linear polynomial (the alpha identities kill
    # the z^4..z^2 terms), giving a cancellation-free far-field form
    aa = abs(alpha) ** 2
    p1 = -2.0 * k0 * aa - 2.0 * k0 * k0 * alpha.real - 2.0 * xi * A * A
    p0 = k0 * k0 * aa - xi * xi * A * A

    def decayed(z):
        z = np.asarray(z, dtype=complex)
        f = f_branch(z, A)
        g2 = gamma2(z, alpha)
        N = (z - k0) * g2
        D = (z + xi) * f
        s = N + D
        with np.errstate(invalid="ignore", divide="ignore"):
            stable = (p1 * z + p0) / (f * s)
            direct = (N - D) / f
        return np.where(np.abs(s) > 0.5 * np.abs(D), stable, direct)

    I_up = _ray_tail_integral(decayed, 1j * A, tol=tol)
    I_dn = _ray_tail_integral(decayed, -1j * A, tol=tol)
    H_inf = 2.0 * (I_up + I_dn) + 2.0 * A * A
    if not _raw and abs(H_inf.imag) > 1e-6:
        raise RuntimeError(f"H_inf has imaginary part {H_inf.imag:.2e}")

    om_u = quad_path(
        dh, ComplexPath.segment(1j * A, alpha, "inverse_sqrt", "inverse_sqrt"),
        tol=tol,
    )
    om_l = quad_path(
        dh, ComplexPath.segment(-1j * A, np.conj(alpha), "inverse_sqrt",
                                "inverse_sqrt"),
        tol=tol,
    )
    Omega = om_u + om_l
    if not _raw and abs(Omega.imag) > 1e-6:
        raise RuntimeError(f"Omega has imaginary part {Omega.imag:.2e}")

    cuts = [(-1j * A, 1j * A), (np.conj(alpha), alpha)]

    def h(k):
        k = complex(k)
        total = 2.0 * k * k + 4.0 * xi * k + 2.0 * A * A
        # sqrt-type endpoint behavior when k is any of the four branch points
        branch_pts = (alpha, np.conj(alpha), 1j * A, -1j * A)
        end_tag = (
            "inverse_sqrt"
            if min(abs(k - b) for b in branch_pts) < 1e-12
            else "none"
        )
        for base in (1j * A, -1j * A):
            if k == base:
                continue
            for c0, c1 in cuts:
                if _segments_cross(base, k, c0, c1):
                    raise ValueError("straight path from base crosses a cut")
            total += 2.0 * quad_path(
                decayed, ComplexPath.segment(base, k, "inverse_sqrt", end_tag),
                tol=tol,
            )
        return total

    if _raw:
        return complex(H_inf), complex(Omega), h
    return float(H_inf.real), float(Omega.real), h


def _sample_band_log(spectral, path, component, n=240, max_doublings=4):
    """Continuous log of a reflection coefficient along a band contour,
    anchored at the principal branch at the k0 end."""
    a, b = path.vertices[0], path.vertices[-1]
    for _ in range(max_doublings + 1):
        ts = np.linspace(0.0, 1.0, n)
        pts = a + ts * (b - a)
        r1, r2 = spectral.reflection_at(pts)
        vals = r1 if component == 1 else r2
        if np.any(np.abs(vals) < 1e-10):
            raise ValueError(
                f"r{component} nearly vanishes on the band contour"
            )
        try:
            logs = continuous_log(vals)
        except PhaseUnwrapError:
            n *= 2
            continue
        return CubicSpline(ts, logs)
    raise PhaseUnwrapError("band-contour log did not stabilize")


class _BandDelta:
    """log delta(zeta, k0) along a band contour split into the explicit
    i*nu*log(k0 - zeta) singular part plus a Chebyshev-smooth remainder."""

    def __init__(self, spectral, k0, path, n=48):
        self.k0 = float(k0)
        self.a = path.vertices[0]
        self.b = path.vertices[-1]
        self.nu = -spectral.log_rr(self.k0) / (2.0 * np.pi)
        j = np.arange(n)
        # Chebyshev nodes in (0, 1), open at both ends
        ts = 0.5 * (1.0 + np.cos(np.pi * (2 * j + 1) / (2 * n)))
        pts = self.a + ts * (self.b - self.a)
        vals = np.array(
            [log_delta(z, self.k0, spectral) - 1j * self.nu * np.log(self.k0 - z)
             for z in pts]
        )
        self._interp = BarycentricInterpolator(ts, vals)

    def __call__(self, z):
        t = np.real((z - self.a) / (self.b - self.a))
        return self._interp(t) + 1j * self.nu * np.log(self.k0 - z)


def g_machinery(surface, spectral, k0=None, tol=1e-9):
    """(omega, G_inf, G evaluator) for the band factorization function.

    Log branches of r1, r2 along the band contours are continued from the
    principal value at the k0 end; log delta uses the line-table branch.
    The surface root is cut along the band arc; the band densities take the
    left-of-orientation side, which is the triangle-interior sign (-gamma_rs)
    on the k0 -> alpha band and the exterior sign (+gamma_rs) on the
    k0 -> conj(alpha) band.  This choice makes omega and G_inf real whenever
    the data reduce to the local equation, and matches the split-step
    simulation along elliptic rays.
    """
    k0 = surface.k0 if k0 is None else k0
    A = surface.A
    alpha = surface.alpha

    lnr1 = _sample_band_log(spectral, surface.band_upper, 1)
    lnr2 = _sample_band_log(spectral, surface.band_lower, 2)
    bd_u = _BandDelta(spectral, k0, surface.band_upper)
    bd_l = _BandDelta(spectral, k0, surface.band_lower)
    lnd_B = _lndelta_on_B(k0, spectral)

    def inv_gamma_B(z):
        return 1.0 / gamma_rs(z, A, alpha)

    def inv_gamma_u(z):
        return -1.0 / gamma_rs(z, A, alpha)

    def inv_gamma_l(z):
        return 1.0 / gamma_rs(z, A, alpha)

    def t_of(path):
        a, b = path.vertices[0], path.vertices[-1]
        return lambda z: np.real((z - a) / (b - a))

    t_u = t_of(surface.band_upper)
    t_l = t_of(surface.band_lower)

    def rho_B(z):
        return 2.0 * lnd_B(np.imag(z)) * inv_gamma_B(z)

    def rho_u(z):
        return (2.0 * bd_u(z) - lnr1(t_u(z))) * inv_gamma_u(z)

    def rho_l(z):
        return (2.0 * bd_l(z) + lnr2(t_l(z))) * inv_gamma_l(z)

    B_path = ComplexPath.segment(-1j * A, 1j * A, "inverse_sqrt", "inverse_sqrt")
    I_B = quad_path(rho_B, B_path, tol=tol)
    I_u = quad_path(rho_u, surface.band_upper, tol=tol)
    I_l = quad_path(rho_l, surface.band_lower, tol=tol)
    D = quad_path(inv_gamma_u, surface.band_upper, tol=tol) + quad_path(
        inv_gamma_l, surface.band_lower, tol=tol
    )
    omega = 1j * (I_B + I_u + I_l) / D

    K_B = quad_path(lambda z: rho_B(z) * z, B_path, tol=tol)
    K_u = quad_path(lambda z: (rho_u(z) + 1j * omega * inv_gamma_u(z)) * z,
                    surface.band_upper, tol=tol)
    K_l = quad_path(lambda z: (rho_l(z) + 1j * omega * inv_gamma_l(z)) * z,
                    surface.band_lower, tol=tol)
    G_inf = -(K_B + K_u + K_l) / (2.0 * np.pi)

    def G(k):
        k = complex(k)
        gk = gamma_band_cut(k, surface)
        S = cauchy_segment(
            lambda z: 2.0 * lnd_B(np.imag(z)) * inv_gamma_B(z),
            -1j * A, 1j * A, k, tol=tol,
            endpoint_singularity=("inverse_sqrt", "inverse_sqrt"),
        )
        S += cauchy_segment(
            lambda z: (2.0 * bd_u(z) - lnr1(t_u(z)) + 1j * omega) * inv_gamma_u(z),
            surface.band_upper.vertices[0], surface.band_upper.vertices[-1],
            k, tol=tol, endpoint_singularity=("log", "inverse_sqrt"),
        )
        S += cauchy_segment(
            lambda z: (2.0 * bd_l(z) + lnr2(t_l(z)) + 1j * omega) * inv_gamma_l(z),
            surface.band_lower.vertices[0], surface.band_lower.vertices[-1],
            k, tol=tol, endpoint_singularity=("log", "inverse_sqrt"),
        )
        return np.exp(-gk * S / (2j * np.pi))

    return complex(omega), complex(G_inf), G


def reality_residuals(surface, tol=1e-10):
    """Raw imaginary parts and normalization residuals of the h machinery:
    {Im H_inf, Im Omega, |h(iA)|, |b-period of dh|, Im h(alpha)}."""
    H_inf, Omega, h = h_machinery(surface, tol=tol, _raw=True)
    return {
        "im_H_inf": abs(H_inf.imag),
        "im_Omega": abs(Omega.imag),
        "h_iA": abs(h(1j * surface.A)),
        "b_period_dh": abs(dh_b_period(surface)),
        "im_h_alpha": abs(h(surface.alpha).imag),
    }


def abel_constants(surface, tol=1e-11):
    """(v_inf, c, khat0) from the normalized differential dw = C dk/gamma."""
    A = surface.A
    alpha = surface.alpha
    C = surface.C_norm
    tau = surface.tau

    def dw(z):
        return C / gamma_rs(z, A, alpha)

    v_inf = _ray_tail_integral(dw, 1j * A, tol=tol)
    khat0 = A * alpha.real / (A + alpha.imag)
    v_khat = quad_path(
        dw, ComplexPath.segment(1j * A, khat0, "inverse_sqrt", "none"), tol=tol
    )
    c = v_khat + 0.5 * (1.0 + tau)
    for sign in (+1, -1):
        if abs(theta3(sign * v_inf + c, tau)) < 1e-8:
            raise RuntimeError("theta denominator vanishes at +-v_inf + c")
    return complex(v_inf), complex(c), float(khat0)


def elliptic_data(xi, A, spectral, tol=1e-9):
    """Assemble every modulated-elliptic ray constant at one xi."""
    surface = build_surface(xi, A)
    H_inf, Omega, _ = h_machinery(surface)
    omega, G_inf, _ = g_machinery(surface, spectral, tol=tol)
    v_inf, c, khat0 = abel_constants(surface)
    return EllipticData(surface=surface, H_inf=H_inf, Omega=Omega, omega=omega,
                        G_inf=G_inf, v_inf=v_inf, c=c, khat0=khat0)


def elliptic_eval(ed, t):
    """Leading modulated-elliptic values (q_plus, q_minus) at time t > 0.

    q_plus is the field at x = +4 xi t, q_minus at x = -4 xi t; both carry
    the common phase exp(2i(t H_inf + Re G_inf)) and theta-function ratios
    advancing with Omega t / (2 pi)."""
    if not t > 0:
        raise ValueError("t must be positive")
    s = ed.surface
    tau = s.tau
    amp = s.A + s.alpha.imag
    phase = np.exp(2j * (t * ed.H_inf + ed.G_inf.real))

    def ratio(arg_shift, v, cc):
        num = theta3(arg_shift - v + cc, tau) * theta3(v + cc, tau)
        den = theta3(arg_shift + v + cc, tau) * theta3(-v + cc, tau)
        if abs(den) < 1e-12 * max(1.0, abs(num)):
            raise RuntimeError("theta denominator vanished at this t")
        return num / den

    base = ed.Omega * t / (2.0 * np.pi) - 0.25
    q_plus = (
        amp * np.exp(-2.0 * ed.G_inf.imag)
        * ratio(base + ed.omega / (2.0 * np.pi), ed.v_inf, ed.c) * phase
    )
    vq = np.conj(ed.v_inf)
    cq = np.conj(ed.c)
    q_minus = (
        amp * np.exp(2.0 * ed.G_inf.imag)
        * ratio(base + np.conj(ed.omega) / (2.0 * np.pi), -vq, -cq) * phase
    )
    return complex(q_plus), complex(q_minus)
