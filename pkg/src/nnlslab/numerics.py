"""Foundation layer: complex special functions, adaptive contour quadrature
with endpoint-singularity handling, bracketed root finding, and continuous
branch tracking for logarithms along sampled curves.

All routines are pure functions of their inputs and safe to call concurrently.
Integrands passed to the quadrature routines must accept numpy arrays of
complex points and return arrays of the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq
from scipy.special import gamma as _scipy_gamma

__all__ = [
    "ComplexPath",
    "BranchTracker",
    "QuadratureError",
    "PhaseUnwrapError",
    "RootFindError",
    "gamma_complex",
    "theta3",
    "gauss_legendre",
    "quad_path",
    "cauchy_segment",
    "bracket_root",
    "continuous_log",
]

_SING_TAGS = ("none", "inverse_sqrt", "log")

#: geometric ratio of the graded mesh used for logarithmic endpoint
#: singularities; 0.25**_LOG_LEVELS reaches ~1e-17 of the panel width
_LOG_GRADE_RATIO = 0.25
_LOG_GRADE_LEVELS = 28


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to converge or hit a singular value."""


class PhaseUnwrapError(ValueError):
    """Adjacent samples differ in phase by >= pi; the caller must refine."""


class RootFindError(RuntimeError):
    """Bracketed root search exhausted its iteration budget."""


@dataclass(frozen=True)
class ComplexPath:
    """Piecewise-straight contour with optional endpoint singularity tags.

    ``endpoint_singularity`` tags the first and last vertex; interior
    vertices are assumed regular.
    """

    vertices: tuple
    endpoint_singularity: tuple = ("none", "none")

    def __post_init__(self):
        verts = tuple(complex(v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 2:
            raise ValueError("path needs at least 2 vertices")
        for a, b in zip(verts[:-1], verts[1:]):
            if a == b:
                raise ValueError("consecutive path vertices must be distinct")
        tags = tuple(self.endpoint_singularity)
        if len(tags) != 2 or any(t not in _SING_TAGS for t in tags):
            raise ValueError(f"endpoint tags must be a pair from {_SING_TAGS}")
        object.__setattr__(self, "endpoint_singularity", tags)

    @classmethod
    def segment(cls, a, b, start="none", end="none"):
        return cls((complex(a), complex(b)), (start, end))


@dataclass(frozen=True)
class BranchTracker:
    """Ordered samples of a nonvanishing function with their unwrapped logs."""

    samples: np.ndarray
    unwrapped_log: np.ndarray = field(default=None)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        object.__setattr__(self, "samples", samples)
        if self.unwrapped_log is None:
            object.__setattr__(self, "unwrapped_log", continuous_log(samples))
        logs = np.asarray(self.unwrapped_log, dtype=complex)
        object.__setattr__(self, "unwrapped_log", logs)
        gaps = np.abs(np.diff(logs.imag))
        if gaps.size and gaps.max() >= np.pi:
            raise PhaseUnwrapError("unwrapped phase gap >= pi; refine the grid")

    @property
    def total_winding(self):
        return float(self.unwrapped_log.imag[-1] - self.unwrapped_log.imag[0])


def gamma_complex(z):
    """Euler Gamma function for complex argument.

    Raises ValueError at the poles (nonpositive integers).
    """
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == int(z.real):
        raise ValueError(f"Gamma pole at z={z.real:g}")
    return complex(_scipy_gamma(z))


def theta3(v, tau):
    """Third Jacobi theta function Theta(v) = sum_l exp(2*pi*i*l*v + i*pi*l^2*tau).

    Requires Im tau > 0 for convergence of the series.  ``v`` may be a scalar
    or a numpy array.
    """
    tau = complex(tau)
    if tau.imag <= 0.0:
        raise ValueError("theta series needs Im tau > 0 (|nome| < 1)")
    v = np.asarray(v, dtype=complex)
    im_max = float(np.max(np.abs(v.imag))) if v.size else 0.0
    # pick L with exp(-pi*Im(tau)*L^2 + 2*pi*im_max*L) < 1e-18
    a = np.pi * tau.imag
    b = 2.0 * np.pi * im_max
    L = int(np.ceil((b + np.sqrt(b * b + 4.0 * a * np.log(1e18))) / (2.0 * a))) + 2
    L = max(L, 8)
    l = np.arange(-L, L + 1)
    terms = np.exp(
        2j * np.pi * np.multiply.outer(v, l) + 1j * np.pi * tau * l * l
    )
    out = terms.sum(axis=-1)
    return out if out.ndim else complex(out)


_GL_CACHE = {}


def _gl_nodes(n):
    if n not in _GL_CACHE:
        x, w = leggauss(n)
        _GL_CACHE[n] = (x, w)
    return _GL_CACHE[n]


def gauss_legendre(f, a, b, n=15):
    """Fixed n-point Gauss-Legendre rule on the straight segment [a, b]."""
    x, w = _gl_nodes(n)
    a = complex(a)
    b = complex(b)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    vals = np.asarray(f(mid + half * x))
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("non-finite integrand value on path interior")
    return half * np.sum(w * vals)


def _adaptive_panels(f, a, b, seeds, tol, max_panels, n=15):
    """Batched h-adaptive Gauss-Legendre on z(t) = a + t*(b-a), t in [0,1].

    ``seeds`` is a list of (t_lo, t_hi) panels covering the wanted range.
    Accepts a panel when |I_panel - I_left - I_right| <= tol * panel_fraction.
    """
    x, w = _gl_nodes(n)
    span = b - a

    def rule(tlo, thi):
        tm = 0.5 * (tlo + thi)
        th = 0.5 * (thi - tlo)
        nodes = a + (tm + th * x) * span
        vals = np.asarray(f(nodes))
        if not np.all(np.isfinite(vals)):
            raise QuadratureError("non-finite integrand value on path interior")
        return th * span * np.sum(w * vals)

    total_t = sum(thi - tlo for tlo, thi in seeds)
    active = [(tlo, thi, rule(tlo, thi), np.inf) for tlo, thi in seeds]
    result = 0.0 + 0.0j
    # roundoff floor relative to the magnitude the rule actually sums over
    scale = sum(abs(w) for _, _, w, _ in active)
    eps = np.finfo(float).eps
    n_panels = len(active)
    while active:
        tlo, thi, whole, parent_err = active.pop()
        tm = 0.5 * (tlo + thi)
        left = rule(tlo, tm)
        right = rule(tm, thi)
        scale = max(scale, abs(left) + abs(right))
        err = abs(whole - left - right)
        frac = (thi - tlo) / total_t
        # integrand chains (splines, branch roots, cancelling kernels) carry
        # noise well above eps; stop when bisection no longer improves
        stagnant = frac < 1e-4 and err > 0.25 * parent_err
        if (err <= max(tol * max(frac, 1e-6), 450 * eps * scale)
                or stagnant or (thi - tlo) < 1e-15):
            result += left + right
        else:
            active.append((tlo, tm, left, err))
            active.append((tm, thi, right, err))
            n_panels += 2
            if n_panels > max_panels:
                raise QuadratureError(
                    f"quadrature did not converge within {max_panels} panels "
                    f"(last panel error {err:.2e})"
                )
    return result


def _quad_segment(f, a, b, start_tag, end_tag, tol, max_panels):
    """Integrate f over the straight segment [a, b] honoring endpoint tags."""
    if start_tag != "none" and end_tag != "none":
        mid = 0.5 * (a + b)
        return _quad_segment(f, a, mid, start_tag, "none", tol / 2, max_panels) + \
            _quad_segment(f, mid, b, "none", end_tag, tol / 2, max_panels)
    if end_tag != "none":
        # mirror so the singular end sits at the start
        val = _quad_segment(lambda z: f(z), b, a, end_tag, "none", tol, max_panels)
        return -val
    span = b - a
    if start_tag == "inverse_sqrt":
        # t = u^2 removes a (z-a)^(-1/2) singularity and doubles smoothness
        def g(u):
            z = a + span * u * u
            return f(z) * 2.0 * u * span

        return _adaptive_panels(g, 0.0, 1.0, [(0.0, 1.0)], tol, max_panels)
    if start_tag == "log":
        r = _LOG_GRADE_RATIO
        edges = [r ** j for j in range(_LOG_GRADE_LEVELS, 0, -1)]
        seeds = [(0.0, edges[0])] + [
            (edges[j], edges[j + 1]) for j in range(len(edges) - 1)
        ] + [(edges[-1], 1.0)]
        return _adaptive_panels(f, a, b, seeds, tol, max_panels)
    return _adaptive_panels(f, a, b, [(0.0, 1.0)], tol, max_panels)


def quad_path(f, path, tol=1e-10, max_panels=20000):
    """Adaptive Gauss-Legendre integral of ``f`` along a ComplexPath.

    Endpoint singularities declared on the path are removed by substitution
    (inverse square root) or a geometrically graded mesh (logarithmic).
    ``tol`` is the absolute error target.
    """
    if not isinstance(path, ComplexPath):
        path = ComplexPath(tuple(path))
    verts = path.vertices
    nseg = len(verts) - 1
    start_tag, end_tag = path.endpoint_singularity
    total = 0.0 + 0.0j
    tol_seg = tol / nseg
    for i in range(nseg):
        s = start_tag if i == 0 else "none"
        e = end_tag if i == nseg - 1 else "none"
        total += _quad_segment(f, verts[i], verts[i + 1], s, e, tol_seg, max_panels)
    return total


def cauchy_segment(phi, a, b, k, tol=1e-10, endpoint_singularity=("none", "none"),
                   near_fraction=0.05):
    """Integral of phi(z)/(z - k) over the straight segment [a, b].

    When ``k`` lies close to the segment (within ``near_fraction`` of its
    length) the pole is subtracted: phi(p) * int dz/(z-k) is added in closed
    form with p the orthogonal projection of k onto the segment, leaving a
    bounded integrand.  ``endpoint_singularity`` tags apply to phi itself.
    """
    a = complex(a)
    b = complex(b)
    k = complex(k)
    span = b - a
    L = abs(span)
    t_raw = ((k - a) * np.conj(span)).real / (L * L)
    t_proj = min(max(t_raw, 0.0), 1.0)
    p = a + t_proj * span
    dist = abs(k - p)
    if dist < 1e-12 * L:
        raise QuadratureError("Cauchy kernel pole lies on the path")
    clamped_tag = (
        endpoint_singularity[0] if t_raw <= 0.0
        else endpoint_singularity[1] if t_raw >= 1.0
        else "none"
    )
    if dist >= near_fraction * L or clamped_tag != "none":
        # near a singular-tagged endpoint phi(p) is unusable; plain adaptive
        # refinement resolves the pole at its offset scale instead
        path = ComplexPath.segment(a, b, *endpoint_singularity)
        return quad_path(lambda z: phi(z) / (z - k), path, tol=tol)
    phi_p = complex(np.asarray(phi(np.array([p])))[0])
    # the angle a straight segment sweeps at an off-segment point lies in
    # (-pi, pi), so the principal log of the ratio is the continuous value
    log_term = phi_p * np.log((b - k) / (a - k))
    path = ComplexPath.segment(a, b, *endpoint_singularity)
    rest = quad_path(lambda z: (phi(z) - phi_p) / (z - k), path, tol=tol)
    return rest + log_term


def bracket_root(g, lo, hi, tol=1e-12, maxiter=200):
    """Root of a real scalar function on a sign-changing bracket.

    Uses Brent's bisection / inverse-quadratic hybrid, then verifies the
    residual |g(root)| against ``tol`` relative to the bracket values.
    """
    glo = g(lo)
    ghi = g(hi)
    if glo == 0.0:
        return float(lo)
    if ghi == 0.0:
        return float(hi)
    if glo * ghi > 0.0:
        raise ValueError(f"no sign change on bracket [{lo:g}, {hi:g}]")
    try:
        root = brentq(g, lo, hi, xtol=1e-15 * max(1.0, abs(lo), abs(hi)),
                      rtol=4 * np.finfo(float).eps, maxiter=maxiter)
    except RuntimeError as exc:
        raise RootFindError(str(exc)) from exc
    scale = max(1.0, abs(glo), abs(ghi))
    if abs(g(root)) > tol * scale:
        raise RootFindError(
            f"residual {abs(g(root)):.2e} exceeds {tol:.1e} * {scale:.2e}"
        )
    return float(root)


def continuous_log(values):
    """Logs of an ordered sample sequence with continuous imaginary part.

    The first sample uses the principal branch; subsequent phases accumulate
    the principal phase increments of consecutive ratios.  Raises on zero
    samples and on raw phase gaps that cannot be resolved (>= pi).
    """
    v = np.asarray(values, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a nonempty 1-d sample sequence")
    if np.any(v == 0.0):
        raise ValueError("zero sample: log undefined")
    dphi = np.angle(v[1:] / v[:-1])
    if dphi.size and np.max(np.abs(dphi)) >= np.pi - 1e-9:
        raise PhaseUnwrapError("adjacent phase gap >= pi; refine the sampling")
    phases = np.angle(v[0]) + np.concatenate(([0.0], np.cumsum(dphi)))
    return np.log(np.abs(v)) + 1j * phases
