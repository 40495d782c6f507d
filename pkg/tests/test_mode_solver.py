"""Mode solver: transform identities, Poisson/Biot-Savart oracles, no-slip."""

import numpy as np
import pytest

from alphadisk import _radial, initial_data, kernels, specfun
from alphadisk import radial_exterior as rx
from alphadisk.kernels import FilterParams
from alphadisk.mode_solver import (AliasingWarning, ModeSolver, PolarField,
                                   PolarGrid, analyze, eval_velocity,
                                   exterior_poisson, filtered_velocity,
                                   synthesize)


def small_grid(n_r=96, n_theta=64, eps=0.1, r_max=4.0):
    return PolarGrid(eps=eps, r_max=r_max, n_r=n_r, n_theta=n_theta)


def test_polar_grid_validation():
    with pytest.raises(ValueError):
        PolarGrid(eps=0.5, r_max=0.4, n_r=64, n_theta=64)
    with pytest.raises(ValueError):
        PolarGrid(eps=0.1, r_max=4.0, n_r=8, n_theta=64)
    with pytest.raises(ValueError):
        PolarGrid(eps=0.1, r_max=4.0, n_r=64, n_theta=48)
    g = small_grid()
    assert g.r[0] == g.eps and g.r[-1] == g.r_max
    assert np.all(np.diff(g.r) > 0)


def test_polar_field_validation_and_mass():
    g = small_grid()
    with pytest.raises(ValueError):
        PolarField(g, np.zeros((3, 3)))
    q = PolarField.from_function(g, initial_data.OffsetBump())
    # discrete mass approximates the exact bump integral
    exact = 2 * np.pi * 0.4**2 * (0.25 - 1 / np.pi**2)
    assert abs(q.mass() - exact) < 5e-3
    fine = PolarField.from_function(
        PolarGrid(eps=0.1, r_max=4.0, n_r=512, n_theta=256),
        initial_data.OffsetBump(),
    )
    assert abs(fine.mass() - exact) < 1e-4


def test_analyze_pure_modes():
    g = small_grid()
    const = PolarField(g, np.ones((g.n_r, g.n_theta)))
    coefs = analyze(const, 8)
    assert np.allclose(coefs[0], 1.0)
    assert np.abs(coefs[1:]).max() < 1e-15

    ring = PolarField(g, np.cos(g.theta)[None, :] * np.ones((g.n_r, 1)))
    coefs = analyze(ring, 8)
    assert np.allclose(coefs[1], 0.5)
    assert np.abs(coefs[0]).max() < 1e-15
    assert np.abs(coefs[2:]).max() < 1e-15


def test_analyze_synthesize_roundtrip_and_parseval():
    g = small_grid()
    rng = np.random.default_rng(2)
    # band-limited random field so no energy is discarded
    coef = rng.normal(size=(g.n_r, 9)) + 1j * rng.normal(size=(g.n_r, 9))
    coef[:, 0] = coef[:, 0].real
    vals = synthesize(coef.T.copy(), g.n_theta)
    q = PolarField(g, vals)
    back = analyze(q, 8)
    assert np.abs(back - coef.T).max() < 1e-12
    # Parseval: angular mean-square equals weighted coefficient energy
    w = np.full(9, 2.0)
    w[0] = 1.0
    lhs = np.mean(vals**2, axis=1)
    rhs = np.sum(w[None, :] * np.abs(coef) ** 2, axis=1)
    assert np.abs(lhs - rhs).max() < 1e-12 * max(1.0, rhs.max())


def test_analyze_aliasing_warning():
    g = small_grid()
    vals = np.cos(5 * g.theta)[None, :] * np.ones((g.n_r, 1))
    with pytest.warns(AliasingWarning):
        analyze(PolarField(g, vals), 3)


def test_analyze_requires_angular_resolution():
    g = small_grid(n_theta=8)
    with pytest.raises(ValueError):
        analyze(PolarField.zeros(g), 4)


def test_exterior_poisson_zero_rhs():
    g = small_grid()
    for n in (0, 1, 3):
        xi = exterior_poisson(n, np.zeros(g.n_r), g)
        assert np.abs(xi).max() < 1e-14


def test_exterior_poisson_circulation_structure():
    # radial bump: the boundary circulation of grad-perp xi equals minus the
    # enclosed mass, and the far-field circulation vanishes
    g = PolarGrid(eps=0.1, r_max=6.0, n_r=1024, n_theta=16)
    r = g.r
    rhs = np.where(np.abs(r - 1.0) < 0.3, np.cos(np.pi * (r - 1.0) / 0.6) ** 2, 0.0)
    xi = exterior_poisson(0, rhs, g)
    mass = 2 * np.pi * float(np.sum(g.radial_weights * r * rhs))
    dxi = _radial.deriv(r, xi)
    i_far = np.searchsorted(r, 3.0)
    circ_far = 2 * np.pi * r[i_far] * dxi[i_far]
    circ_bdy = 2 * np.pi * r[0] * dxi[0]
    assert abs(circ_far) < 1e-3 * abs(mass)
    assert abs(circ_bdy + mass) < 1e-3 * abs(mass)


def test_exterior_poisson_ring_matches_image_kernel():
    # a narrow ring source against the exact Green-function gradient
    eps = 0.1
    g = PolarGrid(eps=eps, r_max=8.0, n_r=4096, n_theta=16)
    r = g.r
    r0, width = 1.0, 0.02
    rhs = np.where(np.abs(r - r0) < width / 2,
                   np.cos(np.pi * (r - r0) / width) ** 2, 0.0)
    xi = exterior_poisson(0, rhs, g)
    dxi = _radial.deriv(r, xi)
    mass = 2 * np.pi * float(np.sum(g.radial_weights * r * rhs))

    # velocity at test radii from the image kernel, integrating over the ring
    th = np.linspace(0, 2 * np.pi, 512, endpoint=False)
    sel = np.abs(r - r0) < width / 2
    for rt in (0.5, 1.5, 3.0):
        x = np.array([rt, 0.0])
        total = np.zeros(2)
        for rr, wr, qq in zip(r[sel], g.radial_weights[sel], rhs[sel]):
            y = np.stack([rr * np.cos(th), rr * np.sin(th)], axis=-1)
            kv = kernels.image_kernel(x[None, :], y, eps)
            total += (kv.sum(axis=0)) * (2 * np.pi / th.size) * rr * wr * qq
        i = np.searchsorted(r, rt)
        u_theta_num = dxi[i]  # grad-perp of a radial xi is azimuthal
        assert abs(u_theta_num - total[1]) < 1e-3 * max(abs(mass), abs(total[1]))
        assert abs(total[0]) < 1e-12


def test_filtered_velocity_w3_oracle_and_convergence():
    p = FilterParams(alpha=1.0, eps=0.1, gamma=1.0, m=0.0)
    errs = []
    for n_r in (512, 1024, 2048):
        g = PolarGrid(eps=0.1, r_max=8.0, n_r=n_r, n_theta=16)
        u = filtered_velocity(PolarField.zeros(g), p, 4)
        exact = rx.filtered_harmonic(g.r, p)
        w = g.radial_weights * g.r
        err = np.sqrt(np.sum(w * (u.u_theta[0].real - exact) ** 2)
                      / np.sum(w * exact**2))
        errs.append(err)
    assert errs[-1] < 1e-5
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 3.5) & (ratios < 4.5))


def test_filtered_velocity_zero_everything():
    g = small_grid()
    p = FilterParams(alpha=1.0, eps=0.1, gamma=0.0, m=0.0)
    u = filtered_velocity(PolarField.zeros(g), p, 4)
    assert np.abs(u.u_r).max() == 0.0
    assert np.abs(u.u_theta).max() < 1e-16


def test_filtered_velocity_radial_field_is_azimuthal():
    g = PolarGrid(eps=0.1, r_max=4.0, n_r=256, n_theta=32)
    r = g.r
    vals = np.where(np.abs(r - 1.0) < 0.25,
                    np.cos(np.pi * (r - 1.0) / 0.5) ** 2, 0.0)
    q = PolarField(g, np.repeat(vals[:, None], g.n_theta, axis=1))
    p = FilterParams(alpha=1.0, eps=0.1, gamma=1.0, m=q.mass())
    u = filtered_velocity(q, p, 8)
    assert np.abs(u.u_r).max() < 1e-14
    assert np.abs(u.u_theta[1:]).max() < 1e-14


def test_mode0_against_direct_ode_route():
    # independent route: (1 - alpha*Lap_1) u = K_theta with the image-induced
    # circulation deficit, no-slip at eps and Bessel decay at the far end
    eps, alpha = 0.1, 1.0
    g = PolarGrid(eps=eps, r_max=8.0, n_r=4096, n_theta=16)
    r = g.r
    vals = np.where(np.abs(r - 1.0) < 0.3,
                    np.cos(np.pi * (r - 1.0) / 0.6) ** 2, 0.0)
    q = PolarField(g, np.repeat(vals[:, None], g.n_theta, axis=1))
    p = FilterParams(alpha=alpha, eps=eps, gamma=0.0, m=q.mass())
    u = filtered_velocity(q, p, 2)

    tail = _radial.cumulative_trapezoid(r, r * vals)
    ktheta = -(tail[-1] - tail) / r
    z = g.r_max / np.sqrt(alpha)
    k0e = specfun.bessel_k(0, z, scaled=True)
    k1e = specfun.bessel_k(1, z, scaled=True)
    lam = -(k0e / k1e + 1.0 / z) / np.sqrt(alpha)
    u_direct = _radial.solve_radial(
        r, alpha, 1.0 + alpha / r**2, ktheta,
        left_value=0.0, right=("robin", lam, 0.0),
    )
    # the assembled mode 0 includes the circulation budget beta = m times the
    # filtered harmonic field, known in closed form
    total = u_direct + p.beta * np.asarray(rx.filtered_harmonic(r, p))
    w = g.radial_weights * r
    rel = np.sqrt(np.sum(w * (u.u_theta[0].real - total) ** 2)
                  / np.sum(w * total**2))
    assert rel < 5e-6


def test_mode1_against_bvp_oracle():
    solve_bvp = pytest.importorskip("scipy.integrate").solve_bvp
    from scipy.interpolate import CubicSpline

    eps, alpha, n = 0.05, 1.0, 1
    g = PolarGrid(eps=eps, r_max=6.0, n_r=4096, n_theta=64)
    q0 = initial_data.OffsetBump()
    q = PolarField.from_function(g, q0)
    coefs = analyze(q, 8)
    qn = coefs[n].real
    qn_f = CubicSpline(g.r, qn)

    # oracle on a much larger domain, where the plain far conditions are
    # exponentially accurate
    R = 14.0

    def odes(r, Y):
        psi, dpsi, chi, dchi = Y
        q_r = np.where(r <= g.r_max, qn_f(np.minimum(r, g.r_max)), 0.0)
        return np.vstack([
            dpsi,
            chi - dpsi / r + n * n * psi / r**2,
            dchi,
            (chi - q_r) / alpha - dchi / r + n * n * chi / r**2,
        ])

    def bcs(Ya, Yb):
        return np.array([Ya[0], Ya[1], Yb[2], Yb[1] + n * Yb[0] / R])

    mesh = np.concatenate([np.linspace(eps, 0.2, 160),
                           np.linspace(0.21, R, 1200)])
    sol = solve_bvp(odes, bcs, mesh, np.zeros((4, mesh.size)),
                    tol=1e-11, max_nodes=300000)
    assert sol.status == 0

    vals = qn[:, None] * 2 * np.cos(n * g.theta)[None, :]
    qf = PolarField(g, vals)
    p = FilterParams(alpha=alpha, eps=eps, gamma=0.0, m=qf.mass())
    u = filtered_velocity(qf, p, 4)
    rr = np.linspace(0.1, 5.0, 60)
    ut_bvp = sol.sol(rr)[1]
    psi_bvp = sol.sol(rr)[0]
    ut_num = np.interp(rr, g.r, u.u_theta[n].real)
    psi_num = np.interp(rr, g.r, (1j * u.u_r[n]).real * g.r / n)
    scale = np.abs(ut_bvp).max()
    assert np.abs(ut_num - ut_bvp).max() < 5e-6
    assert np.abs(psi_num - psi_bvp).max() < 5e-6 * max(1.0, np.abs(psi_bvp).max() / scale)


def test_linearity_in_q():
    g = small_grid(n_r=128)
    rng = np.random.default_rng(4)
    band1 = np.zeros((g.n_r, 7), dtype=complex)
    band2 = np.zeros((g.n_r, 7), dtype=complex)
    ramp = np.exp(-((g.r - 1.2) ** 2) / 0.1)
    band1[:, :5] = rng.normal(size=(g.n_r, 5)) * ramp[:, None]
    band2[:, :5] = rng.normal(size=(g.n_r, 5)) * ramp[:, None]
    band1[:, 0] = band1[:, 0].real
    band2[:, 0] = band2[:, 0].real
    q1 = PolarField(g, synthesize(band1.T.copy(), g.n_theta))
    q2 = PolarField(g, synthesize(band2.T.copy(), g.n_theta))
    qs = PolarField(g, q1.values + q2.values)

    def vel(q):
        p = FilterParams(alpha=1.0, eps=0.1, gamma=0.0, m=q.mass())
        return filtered_velocity(q, p, 6)

    u1, u2, us = vel(q1), vel(q2), vel(qs)
    scale = max(np.abs(us.u_theta).max(), np.abs(us.u_r).max())
    assert np.abs(u1.u_theta + u2.u_theta - us.u_theta).max() < 1e-11 * scale
    assert np.abs(u1.u_r + u2.u_r - us.u_r).max() < 1e-11 * scale


def test_no_slip_and_divergence():
    g = PolarGrid(eps=0.1, r_max=4.0, n_r=384, n_theta=128)
    q = PolarField.from_function(g, initial_data.OffsetBump())
    p = FilterParams(alpha=1.0, eps=0.1, gamma=1.0, m=q.mass())
    u = filtered_velocity(q, p, 24)
    assert u.noslip_residual() < 1e-6

    # discrete divergence with the scheme's own operators:
    # (1/r) d_r(r u_r) + (1/r) d_theta u_theta
    ur, ut = u.velocity_on_grid()
    r = g.r
    d_r = np.empty_like(ur)
    for j in range(g.n_theta):
        d_r[:, j] = _radial.deriv(r, r * ur[:, j])
    ut_hat = np.fft.rfft(ut, axis=1)
    dt_hat = 1j * np.arange(ut_hat.shape[1])[None, :] * ut_hat
    d_t = np.fft.irfft(dt_hat, n=g.n_theta, axis=1)
    div = (d_r + d_t) / r[:, None]
    speed = np.hypot(ur, ut)
    assert np.abs(div[1:-1]).max() <= 1e-6 * speed.max()


def test_circulation_budget():
    # unfiltered circulation minus enclosed vorticity approaches gamma
    gamma = 2.0
    g = PolarGrid(eps=0.1, r_max=8.0, n_r=1024, n_theta=32)
    r = g.r
    vals = np.where(np.abs(r - 1.0) < 0.25,
                    np.cos(np.pi * (r - 1.0) / 0.5) ** 2, 0.0)
    q = PolarField(g, np.repeat(vals[:, None], g.n_theta, axis=1))
    m = q.mass()
    p = FilterParams(alpha=1.0, eps=0.1, gamma=gamma, m=m)
    u = filtered_velocity(q, p, 2)
    u0 = u.u_theta[0].real
    s1, m1, p1 = _radial.d1_weights(r)
    s2, m2, p2 = _radial.d2_weights(r)
    lap = (s2 * u0[:-2] + m2 * u0[1:-1] + p2 * u0[2:]
           + (s1 * u0[:-2] + m1 * u0[1:-1] + p1 * u0[2:]) / r[1:-1]
           - u0[1:-1] / r[1:-1] ** 2)
    v0 = u0[1:-1] - p.alpha * lap
    i = np.searchsorted(r[1:-1], 5.0)
    circ = 2 * np.pi * r[1:-1][i] * v0[i]
    assert abs(circ - (gamma + m)) < 1e-3 * abs(gamma)

    # gamma alone, without vorticity
    u_g = filtered_velocity(PolarField.zeros(g), FilterParams(
        alpha=1.0, eps=0.1, gamma=gamma, m=0.0), 2)
    ug0 = u_g.u_theta[0].real
    lap_g = (s2 * ug0[:-2] + m2 * ug0[1:-1] + p2 * ug0[2:]
             + (s1 * ug0[:-2] + m1 * ug0[1:-1] + p1 * ug0[2:]) / r[1:-1]
             - ug0[1:-1] / r[1:-1] ** 2)
    vg0 = ug0[1:-1] - p.alpha * lap_g
    circ_g = 2 * np.pi * r[1:-1][i] * vg0[i]
    assert abs(circ_g - gamma) < 1e-3 * abs(gamma)


def test_eval_velocity_matches_grid_synthesis():
    g = small_grid(n_r=128)
    q = PolarField.from_function(g, initial_data.OffsetBump())
    p = FilterParams(alpha=1.0, eps=0.1, gamma=1.0, m=q.mass())
    u = filtered_velocity(q, p, 16)
    ur, ut = u.velocity_on_grid()
    i, j = 40, 17
    r, th = g.r[i], g.theta[j]
    pt = np.array([[r * np.cos(th), r * np.sin(th)]])
    v = eval_velocity(u, pt)[0]
    v_ref = np.array([
        ur[i, j] * np.cos(th) - ut[i, j] * np.sin(th),
        ur[i, j] * np.sin(th) + ut[i, j] * np.cos(th),
    ])
    assert np.abs(v - v_ref).max() < 1e-13


def test_eval_velocity_no_slip_and_known_value():
    p = FilterParams(alpha=1.0, eps=0.1, gamma=1.0, m=0.0)
    g = PolarGrid(eps=0.1, r_max=8.0, n_r=2048, n_theta=16)
    u = filtered_velocity(PolarField.zeros(g), p, 4)
    vb = eval_velocity(u, np.array([[0.1, 0.0], [0.0, -0.1]]))
    peak = np.abs(u.u_theta[0]).max()
    assert np.abs(vb).max() < 1e-6 * peak
    v1 = eval_velocity(u, np.array([[1.0, 0.0]]))[0]
    assert abs(v1[1] - 0.0619375491721005) < 1e-6
    with pytest.raises(ValueError):
        eval_velocity(u, np.array([[0.05, 0.0]]))
    with pytest.raises(ValueError):
        eval_velocity(u, np.array([[9.0, 0.0]]))


def test_solver_grid_mismatch_rejected():
    g = small_grid()
    other = small_grid(n_r=128)
    p = FilterParams(alpha=1.0, eps=0.1)
    solver = ModeSolver(g, p, 4)
    with pytest.raises(ValueError):
        solver.velocity(PolarField.zeros(other))
    with pytest.raises(ValueError):
        ModeSolver(g, FilterParams(alpha=1.0, eps=0.2), 4)
    with pytest.raises(ValueError):
        ModeSolver(small_grid(n_theta=8), p, 4)
