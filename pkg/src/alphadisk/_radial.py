"""Banded finite-difference machinery for radial two-point boundary value
problems on graded grids.

All solvers in the package discretize operators of the form

    -helm * (u'' + u'/r) + c(r) * u = rhs(r)

with a Dirichlet row at the inner radius and either a Dirichlet or an affine
Robin row  u'(R) = lam*u(R) + mu  at the outer radius.  Interior rows use
3-point stencils on the (smoothly) nonuniform grid, which stay second-order
accurate because consecutive spacings differ by O(h^2); the Robin row uses a
one-sided second-order derivative, giving bandwidth (2, 1).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded


def graded_radii(eps, r_max, n, grading=2.0):
    """Strictly increasing radii clustering near eps, first node exactly eps."""
    if not r_max > eps:
        raise ValueError("r_max must exceed eps")
    if n < 3:
        raise ValueError("need at least 3 radial nodes")
    s = np.linspace(0.0, 1.0, int(n))
    r = eps + (r_max - eps) * s ** float(grading)
    r[0] = eps
    r[-1] = r_max
    return r


def d1_weights(r):
    """Second-order first-derivative weights on nonuniform 3-point stencils.

    Returns (sub, diag, sup) arrays for interior nodes 1..n-2.
    """
    hm = r[1:-1] - r[:-2]
    hp = r[2:] - r[1:-1]
    den = hm * hp * (hm + hp)
    return -hp * hp / den, (hp * hp - hm * hm) / den, hm * hm / den


def d2_weights(r):
    """Second-derivative weights matching d1_weights."""
    hm = r[1:-1] - r[:-2]
    hp = r[2:] - r[1:-1]
    den = hm * hp * (hm + hp)
    return 2.0 * hp / den, -2.0 * (hm + hp) / den, 2.0 * hm / den


def oneside_d1(ra, rb, rc):
    """Weights of u'(rc) from values at (ra, rb, rc), second order."""
    h1 = rb - ra
    h2 = rc - rb
    return (
        h2 / (h1 * (h1 + h2)),
        -(h1 + h2) / (h1 * h2),
        (h1 + 2.0 * h2) / (h2 * (h1 + h2)),
    )


class RadialSystem:
    """Prebuilt banded system for -helm*(u'' + u'/r) + c*u = rhs.

    Boundary rows: Dirichlet at r[0]; at r[-1] either Dirichlet or Robin
    u'(R) = lam*u(R) + mu.  The matrix is assembled once; solve() only
    substitutes right-hand sides, so repeated solves with fresh data are
    cheap.
    """

    def __init__(self, r, helm, c, right=("dirichlet",)):
        r = np.asarray(r, dtype=float)
        n = r.size
        if n < 4:
            raise ValueError("need at least 4 radial nodes")
        c = np.broadcast_to(np.asarray(c, dtype=float), (n,))
        s1, m1, p1 = d1_weights(r)
        s2, m2, p2 = d2_weights(r)
        ri = r[1:-1]

        # banded storage for (l, u) = (2, 1): ab[1 + i - j, j] = A[i, j]
        ab = np.zeros((4, n))
        ab[2, 0:-2] = -helm * (s2 + s1 / ri)
        ab[1, 1:-1] = -helm * (m2 + m1 / ri) + c[1:-1]
        ab[0, 2:] = -helm * (p2 + p1 / ri)
        ab[1, 0] = 1.0

        self.right_kind = right[0]
        if right[0] == "dirichlet":
            ab[1, -1] = 1.0
        elif right[0] == "robin":
            lam = right[1]
            w0, w1, w2 = oneside_d1(r[-3], r[-2], r[-1])
            ab[3, -3] = w0
            ab[2, -2] = w1
            ab[1, -1] = w2 - lam
        else:
            raise ValueError(f"unknown right boundary condition {right[0]!r}")
        self.ab = ab
        self.n = n

    def solve(self, rhs, left_value=0.0, right_value=0.0):
        """Solve with interior right-hand side rhs and boundary data.

        right_value is the Dirichlet value or the Robin offset mu.
        """
        b = np.array(np.broadcast_to(np.asarray(rhs, dtype=float), (self.n,)))
        b[0] = left_value
        b[-1] = right_value
        try:
            return solve_banded((2, 1), self.ab, b)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(f"singular radial system on {self.n} nodes") from exc


def solve_radial(r, helm, c, rhs, left_value=0.0, right=("dirichlet", 0.0)):
    """One-shot convenience wrapper around RadialSystem.

    right is ('dirichlet', value) or ('robin', lam, mu).
    """
    if right[0] == "dirichlet":
        sys_ = RadialSystem(r, helm, c, ("dirichlet",))
        return sys_.solve(rhs, left_value, right[1])
    sys_ = RadialSystem(r, helm, c, ("robin", right[1]))
    return sys_.solve(rhs, left_value, right[2])


def deriv(r, u):
    """Second-order first derivative of nodal values on the nonuniform grid."""
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    s1, m1, p1 = d1_weights(r)
    out[1:-1] = s1 * u[:-2] + m1 * u[1:-1] + p1 * u[2:]
    wl = oneside_d1(r[2], r[1], r[0])
    out[0] = wl[0] * u[2] + wl[1] * u[1] + wl[2] * u[0]
    wr = oneside_d1(r[-3], r[-2], r[-1])
    out[-1] = wr[0] * u[-3] + wr[1] * u[-2] + wr[2] * u[-1]
    return out


def trapezoid_weights(r):
    """Composite trapezoid weights: sum(w*f) approximates int f dr."""
    r = np.asarray(r, dtype=float)
    w = np.zeros_like(r)
    dr = np.diff(r)
    w[:-1] += 0.5 * dr
    w[1:] += 0.5 * dr
    return w


def cumulative_trapezoid(r, f):
    """Running integral int_{r0}^{r_i} f dr, starting at 0."""
    dr = np.diff(r)
    out = np.empty_like(np.asarray(f, dtype=float))
    out[0] = 0.0
    np.cumsum(0.5 * dr * (f[1:] + f[:-1]), out=out[1:])
    return out
