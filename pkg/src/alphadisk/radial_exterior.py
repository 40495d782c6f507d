"""Radial solutions outside the disk: closed forms, boundary constants,
energies and their eps-rates.

Everything here concerns vector fields of the form u_theta(r) * theta_hat
(equivalently perp(x) times a radial function), for which the operator
(1 + alpha*Stokes)^{-1} coincides with the scalar Helmholtz solve

    u - alpha*(u'' + u'/r - u/r^2) = f(r),   u(eps) = 0,  decay at infinity.

The filtered harmonic field w3 solves this with f = 1/(2*pi*r); it has the
closed form  w3(r) = 1/(2*pi*r) - K1(r/s)/(2*pi*eps*K1(eps/s)), s=sqrt(alpha),
since 1/(2*pi*r) is a particular solution and the growing Bessel branch is
excluded by decay.  The velocity deficit w4 = w3 - k_alpha carries the
boundary constants a_eps (Neumann datum of its curl) and b_eps (boundary
trace of its curl), and satisfies the energy identity

    ||w4||_L2^2 + alpha*||grad w4||_L2^2
        = 2*pi*alpha^2*eps*a_eps*((alpha/eps)*a_eps - b_eps).

For azimuthal fields the squared gradient is |grad u|^2 = u'^2 + (u/r)^2,
which is what the quadrature mode integrates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _radial, kernels, specfun
from .kernels import TWO_PI, FilterParams


@dataclass(frozen=True)
class AzimuthalProfile:
    """Azimuthal velocity u_theta sampled on an increasing radial grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.shape != v.shape:
            raise ValueError("grid and values must have matching shapes")
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("profile values must be finite")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class BoundaryConstants:
    """Neumann datum a_eps, boundary trace b_eps and the H1-type energy."""

    a_eps: float
    b_eps: float
    h1_energy: float

    def __post_init__(self):
        if self.h1_energy < 0:
            raise ValueError("h1_energy must be nonnegative")


def _require_params(params: FilterParams):
    if not params.eps > 0:
        raise ValueError("exterior radial solutions require eps > 0")


def _k1_ratio(z, z0):
    """K1(z)/K1(z0) evaluated in scaled form, safe for large z."""
    num = specfun.bessel_k(1, z, scaled=True)
    den = specfun.bessel_k(1, z0, scaled=True)
    return num / den * np.exp(z0 - z)


def filtered_harmonic(r, params: FilterParams):
    """Azimuthal value of w3 = (1 - alpha*Laplacian)^{-1} H with no-slip at eps."""
    _require_params(params)
    r = np.asarray(r, dtype=float)
    if np.any(r < params.eps * (1.0 - 1e-12)):
        raise ValueError("filtered_harmonic requires r >= eps")
    s = params.sqrt_alpha
    z = r / s
    z0 = params.eps / s
    out = 1.0 / (TWO_PI * r) - _k1_ratio(z, z0) / (TWO_PI * params.eps)
    return out if out.ndim else float(out)


def filtered_harmonic_deriv(r, params: FilterParams):
    """Radial derivative of the w3 profile (closed form)."""
    _require_params(params)
    r = np.asarray(r, dtype=float)
    s = params.sqrt_alpha
    z = r / s
    z0 = params.eps / s
    # d/dr K1(r/s) = (K1'(z))/s with K1' = -K0 - K1/z
    k0e = specfun.bessel_k(0, z, scaled=True)
    k1e = specfun.bessel_k(1, z, scaled=True)
    den = specfun.bessel_k(1, z0, scaled=True)
    ratio = (k0e + k1e / z) / den * np.exp(z0 - z)
    out = -1.0 / (TWO_PI * r**2) + ratio / (TWO_PI * params.eps * s)
    return out if out.ndim else float(out)


def w4_profile(r, params: FilterParams):
    """Velocity deficit w4 = w3 - k_alpha as an azimuthal profile."""
    return filtered_harmonic(r, params) - kernels.k_alpha_profile(r, params)


def w4_profile_deriv(r, params: FilterParams):
    """Radial derivative of the w4 profile (closed form)."""
    r = np.asarray(r, dtype=float)
    kprime = np.asarray(kernels.g_alpha(r, params)) - np.asarray(
        kernels.bessel_mass(r, params)
    ) / r**2
    out = filtered_harmonic_deriv(r, params) - kprime
    return out if out.ndim else float(out)


def a_eps(params: FilterParams) -> float:
    """Neumann datum of curl w4 at the boundary: -k_alpha(eps)/alpha."""
    _require_params(params)
    return -kernels.k_alpha_profile(params.eps, params) / params.alpha


def b_eps(params: FilterParams) -> float:
    """Boundary trace of curl w4: -sqrt(alpha)*a_eps*K0(eps/s)/K1(eps/s)."""
    _require_params(params)
    z0 = params.eps / params.sqrt_alpha
    ratio = specfun.bessel_k(0, z0, scaled=True) / specfun.bessel_k(1, z0, scaled=True)
    return -params.sqrt_alpha * a_eps(params) * ratio


def boundary_constants(params: FilterParams) -> BoundaryConstants:
    return BoundaryConstants(
        a_eps(params), b_eps(params), w4_h1_energy(params, mode="identity")
    )


def w4_h1_energy(params: FilterParams, mode="identity",
                 spec: specfun.QuadratureSpec | None = None) -> float:
    """||w4||^2 + alpha*||grad w4||^2, via the boundary identity or quadrature."""
    _require_params(params)
    if mode == "identity":
        a = a_eps(params)
        b = b_eps(params)
        e = params.eps
        al = params.alpha
        return TWO_PI * al**2 * e * a * ((al / e) * a - b)
    if mode == "quadrature":
        if spec is None:
            spec = specfun.QuadratureSpec(abs_tol=0.0, rel_tol=1e-9,
                                          max_subdivisions=4000)

        def integrand(r):
            u = np.asarray(w4_profile(r, params))
            up = np.asarray(w4_profile_deriv(r, params))
            return TWO_PI * r * (u**2 + params.alpha * (up**2 + (u / r) ** 2))

        return specfun.integrate_radial(integrand, params.eps, np.inf, spec)
    raise ValueError(f"unknown energy mode {mode!r}")


def f_extension(r, params: FilterParams):
    """Curl of w4, extended by its boundary value into the disk.

    For r >= eps this is C_F*K0(r/s) with
    C_F = 1/(2*pi*eps*s*K1(eps/s)) - 1/(2*pi*alpha); it satisfies
    F - alpha*(F'' + F'/r) = 0 with Neumann datum a_eps at the boundary.
    Inside the disk the value is the constant b_eps.
    """
    _require_params(params)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("f_extension requires r >= 0")
    s = params.sqrt_alpha
    z0 = params.eps / s
    b = b_eps(params)
    out = np.full_like(r, b)
    ext = r >= params.eps
    if np.any(ext):
        z = r[ext] / s
        k0e = specfun.bessel_k(0, z, scaled=True)
        k0e0 = specfun.bessel_k(0, z0, scaled=True)
        # C_F * K0(z) written relative to K0(z0) so the tail never underflows
        out[ext] = b * (k0e / k0e0) * np.exp(z0 - z)
    return out if out.ndim else float(out)


def default_bvp_radii(params: FilterParams, n=4096, grading=2.0):
    """Graded grid out to the standard truncation radius 8*max(1, 30*sqrt(alpha))."""
    r_max = 8.0 * max(1.0, 30.0 * params.sqrt_alpha)
    return _radial.graded_radii(params.eps, r_max, n, grading)


def cutoff_correction(params: FilterParams, grid=None):
    """Solve the filtered correction of the cutoff harmonic field.

    w2 - alpha*(w2'' + w2'/r - w2/r^2) = alpha * L[eta*H] with L the azimuthal
    Laplacian; the right side is supported exactly in 1 <= r <= 2.  Dirichlet
    zero at both ends (the solution decays exponentially well before the
    truncation radius).  Returns (AzimuthalProfile, h1_norm).
    """
    _require_params(params)
    if params.eps >= 1.0:
        raise ValueError("cutoff_correction requires eps < 1")
    r = default_bvp_radii(params) if grid is None else np.asarray(grid, dtype=float)

    eta, eta1, eta2 = kernels.cutoff_eta_derivs(r)
    h = 1.0 / (TWO_PI * r)
    h1 = -1.0 / (TWO_PI * r**2)
    # L[eta*h] = eta''*h + 2*eta'*h' + eta'*h/r   (h itself is in the kernel of L)
    rhs = params.alpha * (eta2 * h + 2.0 * eta1 * h1 + eta1 * h / r)

    c = 1.0 + params.alpha / r**2
    w = _radial.solve_radial(r, params.alpha, c, rhs,
                             left_value=0.0, right=("dirichlet", 0.0))
    wd = _radial.deriv(r, w)
    wt = _radial.trapezoid_weights(r)
    h1_sq = TWO_PI * float(np.sum(wt * r * (w**2 + wd**2 + (w / r) ** 2)))
    return AzimuthalProfile(r, w), float(np.sqrt(h1_sq))


def cutoff_rhs_support(grid):
    """Radii where the cutoff right-hand side is nonzero (inside [1, 2])."""
    r = np.asarray(grid, dtype=float)
    _, eta1, eta2 = kernels.cutoff_eta_derivs(r)
    return r[(eta1 != 0) | (eta2 != 0)]
