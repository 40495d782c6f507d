"""Closed-form fields of the filtered vortex model.

Orientation convention, used everywhere in the package: perp(x) = (-x2, x1)
and curl u = d1 u2 - d2 u1, so the harmonic field H = perp(x)/(2*pi*|x|^2)
has curl H = delta with positive sign and unit circulation on every circle
around the origin.

The Helmholtz-filter kernel is fixed as g_alpha(r) = K0(r/sqrt(alpha)) /
(2*pi*alpha), the unique radial fundamental solution of (1 - alpha*Laplacian)
with unit mass.  The filtered Biot-Savart kernel follows as
k_alpha(x) = perp(x)/|x|^2 * int_0^|x| s g_alpha(s) ds, which is bounded,
vanishes at the origin and approaches H exponentially fast at infinity.

All field functions accept a single point of shape (2,) or a batch (..., 2);
radial profiles accept floats or arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import specfun

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class FilterParams:
    """Filter length squared alpha, obstacle radius eps, circulation gamma
    and vorticity mass m.

    beta = gamma + m is the conserved circulation budget multiplying the
    harmonic field in the exterior Biot-Savart law.
    """

    alpha: float
    eps: float = 0.0
    gamma: float = 0.0
    m: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")

    @property
    def beta(self) -> float:
        return self.gamma + self.m

    @property
    def sqrt_alpha(self) -> float:
        return float(np.sqrt(self.alpha))


def perp(x):
    """Rotate vectors by +90 degrees: (x1, x2) -> (-x2, x1).  Last axis is xy."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    out[..., 0] = -x[..., 1]
    out[..., 1] = x[..., 0]
    return out


def _radial_eval(r, fn):
    """Apply fn to positive radii, elementwise, preserving scalar-ness."""
    r = np.asarray(r, dtype=float)
    flat = np.atleast_1d(r)
    out = fn(flat)
    return out.reshape(r.shape) if r.ndim else float(out[0])


def g_alpha(r, params: FilterParams):
    """Radial profile of the filter kernel, K0(r/sqrt(alpha))/(2*pi*alpha)."""
    if np.any(np.asarray(r) <= 0):
        raise ValueError("g_alpha requires r > 0")
    s, al = params.sqrt_alpha, params.alpha

    def fn(rr):
        return np.asarray(specfun.bessel_k(0, rr / s)) / (TWO_PI * al)

    return _radial_eval(r, fn)


def bessel_mass(r, params: FilterParams):
    """Cumulative kernel mass int_0^r s g_alpha(s) ds = (1 - z K1(z))/(2*pi)
    with z = r/sqrt(alpha).  Increases from 0 to 1/(2*pi)."""
    if np.any(np.asarray(r) < 0):
        raise ValueError("bessel_mass requires r >= 0")
    s = params.sqrt_alpha

    def fn(rr):
        z = rr / s
        out = np.zeros_like(z)
        pos = z > 0
        zp = z[pos]
        out[pos] = (1.0 - zp * np.asarray(specfun.bessel_k(1, zp))) / TWO_PI
        return out

    return _radial_eval(r, fn)


def k_alpha_profile(r, params: FilterParams):
    """Azimuthal profile k(r) = bessel_mass(r)/r; k(0) = 0 by continuity."""

    def fn(rr):
        mass = np.atleast_1d(np.asarray(bessel_mass(rr, params)))
        out = np.zeros_like(mass)
        pos = rr > 0
        out[pos] = mass[pos] / rr[pos]
        return out

    return _radial_eval(r, fn)


def harmonic_field(x):
    """H(x) = perp(x)/(2*pi*|x|^2); unit circulation around the origin."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    if np.any(r2 == 0):
        raise ValueError("harmonic_field is singular at the origin")
    return perp(x) / (TWO_PI * r2[..., None])


def _psi_bump(s):
    # exp(-1/s) for s > 0, else 0; smooth across 0
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def cutoff_eta(r):
    """Smooth radial cutoff: 0 for r <= 1, 1 for r >= 2, C-infinity between."""

    def fn(rr):
        w = _psi_bump(rr - 1.0)
        v = _psi_bump(2.0 - rr)
        return w / (w + v)

    return _radial_eval(r, fn)


def cutoff_eta_derivs(r):
    """(eta, eta', eta'') of the cutoff, for filtered right-hand sides."""
    r = np.atleast_1d(np.asarray(r, dtype=float))

    def d012(s, sign):
        p = _psi_bump(s)
        d1 = np.zeros_like(p)
        d2 = np.zeros_like(p)
        pos = s > 0
        sp = s[pos]
        d1[pos] = p[pos] / sp**2 * sign
        d2[pos] = p[pos] * (1.0 / sp**4 - 2.0 / sp**3)
        return p, d1, d2

    w, w1, w2 = d012(r - 1.0, 1.0)
    v, v1, v2 = d012(2.0 - r, -1.0)
    s0 = w + v
    s1 = w1 + v1
    s2 = w2 + v2
    eta = w / s0
    eta1 = (w1 * v - w * v1) / s0**2
    eta2 = (w2 * v - w * v2) / s0**2 - 2.0 * (w1 * v - w * v1) * s1 / s0**3
    return eta, eta1, eta2


def cutoff_field(x):
    """eta(|x|) * H(x): vanishes inside |x|<=1, equals H beyond |x|>=2.

    Divergence-free because the cutoff is radial.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    pts = np.atleast_2d(x)
    r = np.sqrt(np.sum(pts * pts, axis=-1))
    out = np.zeros_like(pts)
    act = r > 1.0
    if np.any(act):
        out[act] = np.asarray(cutoff_eta(r[act]))[:, None] * harmonic_field(pts[act])
    return out[0] if scalar else out.reshape(x.shape)


def k_alpha(x, params: FilterParams):
    """Filtered Biot-Savart kernel perp(x)/|x|^2 * bessel_mass(|x|).

    Velocity field of a unit point vortex under the filter; bounded,
    antisymmetric, k_alpha(0) = 0.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    pts = np.atleast_2d(x)
    r2 = np.sum(pts * pts, axis=-1)
    out = np.zeros_like(pts)
    pos = r2 > 0
    if np.any(pos):
        xp = pts[pos]
        r2p = r2[pos]
        mass = np.atleast_1d(np.asarray(bessel_mass(np.sqrt(r2p), params)))
        out[pos] = perp(xp) * (mass / r2p)[:, None]
    return out[0] if scalar else out.reshape(x.shape)


def grad_k_alpha(x, params: FilterParams):
    """Closed-form Jacobian of k_alpha, shape (..., 2, 2); singular at 0.

    With M(r) = bessel_mass(r) and M'(r) = r g_alpha(r):
        d1 K1 = -x1 x2 D         d2 K1 = -M/r^2 - x2^2 D
        d1 K2 =  M/r^2 + x1^2 D  d2 K2 =  x1 x2 D
    where D = (M' r - 2 M)/r^4.  The trace vanishes (divergence-free) and
    d1 K2 - d2 K1 = g_alpha(r), the curl.
    """
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    if np.any(r2 == 0):
        raise ValueError("grad_k_alpha is singular at the origin")
    r = np.sqrt(r2)
    mass = np.asarray(bessel_mass(r, params))
    mprime = r * np.asarray(g_alpha(r, params))
    d = (mprime * r - 2.0 * mass) / r2**2
    mr2 = mass / r2
    x1 = x[..., 0]
    x2 = x[..., 1]
    out = np.empty(x.shape[:-1] + (2, 2))
    out[..., 0, 0] = -x1 * x2 * d
    out[..., 0, 1] = -mr2 - x2 * x2 * d
    out[..., 1, 0] = mr2 + x1 * x1 * d
    out[..., 1, 1] = x1 * x2 * d
    return out


def image_kernel(x, y, eps):
    """Biot-Savart kernel of the exterior disk |x| > eps, by method of images.

    K_eps(x, y) = perp(x-y)/(2 pi |x-y|^2) - perp(x-y*)/(2 pi |x-y*|^2) with
    the reflected point y* = eps^2 y/|y|^2.  Tangent to the circle |x| = eps.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(np.sum(x * x, axis=-1) < eps**2 * (1.0 - 1e-12)):
        raise ValueError("image_kernel requires |x| >= eps")
    ynorm2 = np.sum(y * y, axis=-1)
    if np.any(ynorm2 <= eps**2):
        raise ValueError("image_kernel requires |y| > eps")

    def free(d):
        d2 = np.sum(d * d, axis=-1)
        if np.any(d2 == 0):
            raise ValueError("image_kernel requires x != y")
        return perp(d) / (TWO_PI * d2[..., None])

    ystar = (eps**2 / ynorm2)[..., None] * y
    return free(x - y) - free(x - ystar)
