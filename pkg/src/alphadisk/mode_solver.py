"""Modified Biot-Savart operator in the exterior disk via azimuthal modes.

The velocity induced by a vorticity field q with circulation budget
beta = gamma + m is assembled per azimuthal mode from banded radial solves:

  * the vorticity part comes from the streamfunction factorization
    (1 - alpha*Lap) Lap psi = q, split into a Helmholtz solve for
    chi = Lap psi (decaying Bessel branch at the far end) followed by a
    Poisson solve for psi, with the no-slip pair psi(eps) = psi'(eps) = 0
    fixing the two free amplitudes for modes n != 0; for n = 0 the free
    amplitude is fixed by zero far-field circulation (with the exponential
    tail beyond the truncation radius accounted for) and the azimuthal
    velocity is recovered by radial integration of chi;

  * the harmonic part solves (1 - alpha*Lap_1) w = 1/(2*pi*r) with no-slip,
    the same problem whose closed form lives in radial_exterior and serves
    as its test oracle.

Far-field closures are Robin rows matching the known decay: the scaled
K_n ratio for chi, r^{-n} for psi, and the K_1 deviation from 1/(2*pi*r)
for the harmonic part.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import _radial, specfun
from .kernels import TWO_PI, FilterParams


class AliasingWarning(UserWarning):
    """Angular resolution too coarse for the requested mode count."""


@dataclass(frozen=True)
class PolarGrid:
    """Graded polar grid on the annulus [eps, r_max] x [0, 2*pi)."""

    eps: float
    r_max: float
    n_r: int
    n_theta: int
    grading: float = 2.0

    def __post_init__(self):
        if not 0 < self.eps < self.r_max:
            raise ValueError("require 0 < eps < r_max")
        if self.n_r < 16:
            raise ValueError("n_r must be at least 16")
        if self.n_theta < 8 or (self.n_theta & (self.n_theta - 1)) != 0:
            raise ValueError("n_theta must be a power of two, at least 8")

    @property
    def r(self) -> np.ndarray:
        return _radial.graded_radii(self.eps, self.r_max, self.n_r, self.grading)

    @property
    def theta(self) -> np.ndarray:
        return np.linspace(0.0, TWO_PI, self.n_theta, endpoint=False)

    @property
    def radial_weights(self) -> np.ndarray:
        return _radial.trapezoid_weights(self.r)

    def points(self) -> np.ndarray:
        """Cartesian node coordinates, shape (n_r, n_theta, 2)."""
        r = self.r[:, None]
        th = self.theta[None, :]
        return np.stack(
            [r * np.cos(th) + 0.0 * th, r * np.sin(th) + 0.0 * r], axis=-1
        )


@dataclass
class PolarField:
    """Scalar field sampled on a PolarGrid, values indexed [radius, angle]."""

    grid: PolarGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_r, self.grid.n_theta):
            raise ValueError("values must have shape (n_r, n_theta)")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        self.values = v

    def mass(self) -> float:
        """Discrete integral: trapezoid in r (weighted by r), exact in theta."""
        dtheta = TWO_PI / self.grid.n_theta
        w = self.grid.radial_weights * self.grid.r
        return float(dtheta * np.sum(w @ self.values))

    @classmethod
    def zeros(cls, grid: PolarGrid):
        return cls(grid, np.zeros((grid.n_r, grid.n_theta)))

    @classmethod
    def from_function(cls, grid: PolarGrid, f):
        """Sample a Cartesian scalar function f(points) on the grid."""
        return cls(grid, np.asarray(f(grid.points()), dtype=float))


@dataclass
class ModeField:
    """Azimuthal-mode representation of a velocity field.

    u_r and u_theta hold complex radial profiles for modes 0..n_modes with
    the reality convention field = c_0 + 2*Re(sum_{n>=1} c_n e^{i n theta});
    mode -n is the conjugate of mode n.
    """

    grid: PolarGrid
    params: FilterParams
    n_modes: int
    u_r: np.ndarray
    u_theta: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    def velocity_on_grid(self):
        """Synthesize (u_r, u_theta) as real arrays of shape (n_r, n_theta)."""
        return (
            synthesize(self.u_r, self.grid.n_theta),
            synthesize(self.u_theta, self.grid.n_theta),
        )

    def noslip_residual(self) -> float:
        """Largest boundary speed relative to the field maximum."""
        ur, ut = self.velocity_on_grid()
        speed = np.hypot(ur, ut)
        peak = speed.max()
        return float(speed[0].max() / peak) if peak > 0 else 0.0


def analyze(q: PolarField, n_modes: int) -> np.ndarray:
    """Forward angular Fourier transform, returning modes 0..n_modes.

    Shape (n_modes+1, n_r), normalized so synthesize inverts exactly.  Warns
    with AliasingWarning when the discarded modes carry more than 1e-8 of the
    total angular energy.
    """
    nt = q.grid.n_theta
    if nt < 2 * n_modes + 2:
        raise ValueError("need n_theta >= 2*n_modes + 2")
    coef = np.fft.rfft(q.values, axis=1) / nt  # (n_r, nt//2+1)
    weights = np.full(coef.shape[1], 2.0)
    weights[0] = 1.0
    if nt % 2 == 0:
        weights[-1] = 1.0
    energy = weights * np.abs(coef) ** 2
    total = energy.sum()
    dropped = energy[:, n_modes + 1 :].sum()
    if total > 0 and dropped > 1e-8 * total:
        warnings.warn(
            "discarded angular modes exceed 1e-8 of the field energy",
            AliasingWarning,
            stacklevel=2,
        )
    return coef[:, : n_modes + 1].T.copy()


def synthesize(coefs: np.ndarray, n_theta: int) -> np.ndarray:
    """Inverse of analyze: modes (n_modes+1, n_r) to values (n_r, n_theta)."""
    n_modes = coefs.shape[0] - 1
    if n_theta < 2 * n_modes + 2:
        raise ValueError("need n_theta >= 2*n_modes + 2")
    full = np.zeros((coefs.shape[1], n_theta // 2 + 1), dtype=complex)
    full[:, : n_modes + 1] = coefs.T
    return np.fft.irfft(full * n_theta, n=n_theta, axis=1)


def _kn_log_derivative(n: int, z: float) -> float:
    """K_n'(z)/K_n(z) via the stable upward ratio recurrence on e^z K_n."""
    t = specfun.bessel_k(1, z, scaled=True) / specfun.bessel_k(0, z, scaled=True)
    if n == 0:
        return -t
    prev = t  # kappa_k / kappa_{k-1} at k = 1
    for k in range(1, n):
        prev = 1.0 / prev + 2.0 * k / z
    t_n = 1.0 / prev + 2.0 * n / z  # kappa_{n+1} / kappa_n
    return -0.5 * (1.0 / prev + t_n)


def _kn_tail_ratio(n: int, z, z_ref: float):
    """K_n(z)/K_n(z_ref) for z >= z_ref, evaluated in scaled form."""
    z = np.asarray(z, dtype=float)

    def scaled_kn(zz):
        k0 = np.asarray(specfun.bessel_k(0, zz, scaled=True))
        k1 = np.asarray(specfun.bessel_k(1, zz, scaled=True))
        if n == 0:
            return k0
        prev, cur = k0, k1
        for k in range(1, n):
            prev, cur = cur, prev + (2.0 * k / zz) * cur
        return cur

    return scaled_kn(z) / scaled_kn(np.asarray(z_ref)) * np.exp(z_ref - z)


def _psi_tail_coefficient(n: int, r_max: float, sqrt_alpha: float) -> float:
    """Streamfunction closure constant for the vorticity tail beyond r_max.

    Outside the vorticity support, chi is exactly a multiple of
    K_n(r/sqrt(alpha)); solving Lap_n psi = chi on (r_max, inf) with decay
    and matching at r_max turns the psi Robin row into
    psi' = -(n/r_max) psi + mu with mu = chi(r_max) * coefficient, where
    coefficient = -r_max^{n-1} * int_{r_max}^inf s^{1-n} tau(s) ds and tau is
    the K_n branch normalized to 1 at r_max.
    """

    def integrand(s):
        tau = _kn_tail_ratio(n, s / sqrt_alpha, r_max / sqrt_alpha)
        return (s / r_max) ** (1 - n) * tau

    spec = specfun.QuadratureSpec(abs_tol=1e-13, rel_tol=1e-11,
                                  max_subdivisions=2000)
    return -specfun.integrate_radial(integrand, r_max, np.inf, spec)


def _poisson_system(grid: PolarGrid, n: int) -> _radial.RadialSystem:
    # xi'' + xi'/r - n^2 xi/r^2 = rhs  <=>  -(xi''+xi'/r) + (n^2/r^2) xi = -rhs
    r = grid.r
    right = ("robin", -n / grid.r_max) if n else ("robin", 0.0)
    return _radial.RadialSystem(r, 1.0, n**2 / r**2, right)


def exterior_poisson(n: int, rhs: np.ndarray, grid: PolarGrid) -> np.ndarray:
    """Solve the mode-n Dirichlet Poisson problem on the annulus.

    xi'' + xi'/r - n^2 xi/r^2 = rhs with xi(eps) = 0 and the decaying
    admissible branch at r_max: xi' = -(|n|/r_max)*xi for n != 0, xi' = 0
    for n = 0 (the image structure of the exterior Green function cancels
    the far logarithm, leaving the constant branch).  Accepts complex rhs.
    """
    sys_ = _poisson_system(grid, abs(int(n)))
    rhs = np.asarray(rhs)
    if np.iscomplexobj(rhs):
        return sys_.solve(-rhs.real) + 1j * sys_.solve(-rhs.imag)
    return sys_.solve(-rhs)


class ModeSolver:
    """Caches the q-independent pieces of the modified Biot-Savart solve."""

    def __init__(self, grid: PolarGrid, params: FilterParams, n_modes: int):
        if grid.n_theta < 2 * n_modes + 2:
            raise ValueError("need n_theta >= 2*n_modes + 2")
        if abs(grid.eps - params.eps) > 1e-12 * max(1.0, params.eps):
            raise ValueError("grid.eps and params.eps disagree")
        self.grid = grid
        self.params = params
        self.n_modes = n_modes
        r = grid.r
        s = params.sqrt_alpha
        al = params.alpha
        zR = grid.r_max / s
        self._r = r

        # harmonic part: (1 - alpha*Lap_1) w = 1/(2*pi*r), no-slip, K1 far
        lam1 = _kn_log_derivative(1, zR) / s
        h_far = 1.0 / (TWO_PI * grid.r_max)
        hp_far = -1.0 / (TWO_PI * grid.r_max**2)
        sys_w3 = _radial.RadialSystem(r, al, 1.0 + al / r**2, ("robin", lam1))
        self.w3 = sys_w3.solve(1.0 / (TWO_PI * r), 0.0, hp_far - lam1 * h_far)

        self._helm = {}
        self._pois = {}
        self._chi_h = {}
        self._psi_hc = {}
        self._psi_hc_dl = {}
        self._tail_mu = {}
        for n in range(n_modes + 1):
            lam_n = _kn_log_derivative(n, zR) / s
            helm = _radial.RadialSystem(
                r, al, 1.0 + al * n**2 / r**2, ("robin", lam_n)
            )
            self._helm[n] = helm
            self._pois[n] = _poisson_system(grid, n)
            chi_h = helm.solve(np.zeros_like(r), left_value=1.0)
            self._chi_h[n] = chi_h
            if n > 0:
                self._tail_mu[n] = _psi_tail_coefficient(n, grid.r_max, s)
                psi_hc = self._solve_psi(n, chi_h)
                self._psi_hc[n] = psi_hc
                self._psi_hc_dl[n] = self._left_deriv(psi_hc)

        # far-circulation closure for mode 0 includes the K0 tail beyond r_max
        self._tail0 = s * grid.r_max * (
            specfun.bessel_k(1, zR, scaled=True)
            / specfun.bessel_k(0, zR, scaled=True)
        )
        self._wr = _radial.trapezoid_weights(r)
        self._circ_h = (
            float(np.sum(self._wr * r * self._chi_h[0]))
            + self._chi_h[0][-1] * self._tail0
        )

    def _left_deriv(self, u):
        w = _radial.oneside_d1(self._r[2], self._r[1], self._r[0])
        return w[0] * u[2] + w[1] * u[1] + w[2] * u[0]

    def _solve_psi(self, n, chi):
        """Poisson stage including the vorticity-tail closure beyond r_max."""
        return self._pois[n].solve(-chi, right_value=chi[-1] * self._tail_mu[n])

    def velocity(self, q: PolarField) -> ModeField:
        """Assemble T(q): the filtered exterior velocity of q with budget beta."""
        if q.grid != self.grid:
            raise ValueError("field grid does not match solver grid")
        r = self._r
        coefs = analyze(q, self.n_modes)
        u_r = np.zeros((self.n_modes + 1, r.size), dtype=complex)
        u_t = np.zeros((self.n_modes + 1, r.size), dtype=complex)

        # mode 0: chi solve, far-circulation closure, radial integration
        chi_p = self._helm[0].solve(coefs[0].real)
        circ_p = float(np.sum(self._wr * r * chi_p)) + chi_p[-1] * self._tail0
        chi = chi_p - (circ_p / self._circ_h) * self._chi_h[0]
        u_t[0] = _radial.cumulative_trapezoid(r, r * chi) / r

        for n in range(1, self.n_modes + 1):
            rhs = coefs[n]
            if not np.any(rhs):
                continue
            helm = self._helm[n]
            chi_re = helm.solve(rhs.real)
            chi_im = helm.solve(rhs.imag)
            psi = self._solve_psi(n, chi_re) + 1j * self._solve_psi(n, chi_im)
            c = -self._left_deriv(psi) / self._psi_hc_dl[n]
            psi = psi + c * self._psi_hc[n]
            dpsi = _radial.deriv(r, psi.real) + 1j * _radial.deriv(r, psi.imag)
            u_t[n] = dpsi
            u_r[n] = -1j * n * psi / r

        u_t[0] += self.params.beta * self.w3
        return ModeField(self.grid, self.params, self.n_modes, u_r, u_t)


_solver_cache: dict = {}


def get_solver(grid: PolarGrid, params: FilterParams, n_modes: int) -> ModeSolver:
    key = (grid, params, n_modes)
    if key not in _solver_cache:
        if len(_solver_cache) > 32:
            _solver_cache.clear()
        _solver_cache[key] = ModeSolver(grid, params, n_modes)
    return _solver_cache[key]


def filtered_velocity(q: PolarField, params: FilterParams, n_modes: int) -> ModeField:
    """Modified Biot-Savart law: velocity from vorticity and circulation budget.

    Realizes (1 + alpha*Stokes)^{-1}[K(q) + (gamma+m)*H] on the exterior disk;
    the assembled field satisfies no-slip at eps up to discretization error.
    """
    return get_solver(q.grid, params, n_modes).velocity(q)


def _splines_for(u: ModeField):
    if "splines" not in u._cache:
        r = u.grid.r
        u._cache["splines"] = [
            (CubicSpline(r, u.u_r[n]), CubicSpline(r, u.u_theta[n]))
            for n in range(u.n_modes + 1)
        ]
    return u._cache["splines"]


def eval_velocity(u: ModeField, points) -> np.ndarray:
    """Evaluate a ModeField at Cartesian points inside the annulus.

    Fourier synthesis in the angle, cubic interpolation in the radius;
    points outside [eps, r_max) are rejected.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.hypot(pts[:, 0], pts[:, 1])
    if np.any(r < u.grid.eps * (1 - 1e-12)) or np.any(r >= u.grid.r_max):
        raise ValueError("points must lie in [eps, r_max)")
    r = np.maximum(r, u.grid.eps)
    th = np.arctan2(pts[:, 1], pts[:, 0])
    splines = _splines_for(u)
    vr = np.asarray(splines[0][0](r)).real
    vt = np.asarray(splines[0][1](r)).real
    for n in range(1, u.n_modes + 1):
        phase = np.exp(1j * n * th)
        vr = vr + 2.0 * (splines[n][0](r) * phase).real
        vt = vt + 2.0 * (splines[n][1](r) * phase).real
    ct, st = np.cos(th), np.sin(th)
    out = np.empty_like(pts)
    out[:, 0] = vr * ct - vt * st
    out[:, 1] = vr * st + vt * ct
    return out
