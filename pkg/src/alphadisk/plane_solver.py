"""Vortex-blob solver for the plane limit system.

Vorticity q is carried by particles with fixed circulation weights; the
transport velocity is the filtered Biot-Savart sum

    u(x) = sum_j w_j k_alpha(x - x_j) + gamma * k_alpha(x),

the last term being the fixed point vortex at the origin.  k_alpha is
bounded with k_alpha(0) = 0, so no extra blob mollification is needed and a
particle never advects itself.  Time stepping is classical RK4 with fixed
dt.  Mass (the weight sum) is exactly conserved because weights are never
touched; the second moment sum w|x|^2 is conserved by the dynamics because
the kernel is perpendicular to its argument, which makes it a useful
integrator diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _fastkernel, initial_data, kernels
from .harness.records import RunRecord
from .kernels import FilterParams


@dataclass(frozen=True)
class ParticleEnsemble:
    """Blob positions with immutable circulation weights and carried values."""

    positions: np.ndarray  # (n, 2)
    weights: np.ndarray  # (n,), q0 value times cell area, constant in time
    q_values: np.ndarray  # (n,), constant along trajectories
    params: FilterParams

    def __post_init__(self):
        if self.params.eps != 0.0:
            raise ValueError("plane ensembles require eps = 0")
        for name in ("positions", "weights", "q_values"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
        if self.positions.ndim != 2 or self.positions.shape[1] != 2:
            raise ValueError("positions must have shape (n, 2)")

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    @property
    def n(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class PlaneSimConfig:
    """Plane-run configuration; dt=None derives a default from the initial speed."""

    alpha: float
    gamma: float
    q0: object  # initial_data profile
    h: float = 0.02
    dt: float | None = None
    t_end: float = 1.0
    snapshot_stride: int = 10

    def __post_init__(self):
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be >= 1")


def init_particles(q0, h: float, params: FilterParams) -> ParticleEnsemble:
    """Midpoint-rule discretization of q0 on a square lattice of spacing h.

    Particles sit at cell centers ((i+1/2)h, (j+1/2)h) where q0 is nonzero,
    with weight q0(x)*h^2, so the discrete mass is within O(h^2) of the
    integral of q0.
    """
    if h <= 0:
        raise ValueError("lattice spacing must be positive")
    x0, x1, y0, y1 = q0.support_bbox()
    if x1 <= x0 or y1 <= y0:
        raise ValueError("initial vorticity has empty support")
    ii = np.arange(np.floor(x0 / h) - 1, np.ceil(x1 / h) + 1)
    jj = np.arange(np.floor(y0 / h) - 1, np.ceil(y1 / h) + 1)
    gx, gy = np.meshgrid((ii + 0.5) * h, (jj + 0.5) * h, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=-1)
    vals = np.asarray(q0(pts))
    keep = vals != 0.0
    if not np.any(keep):
        raise ValueError("initial vorticity has empty support")
    pts = pts[keep]
    vals = vals[keep]
    return ParticleEnsemble(pts, vals * h * h, vals.copy(), params)


def velocity(ensemble: ParticleEnsemble, x) -> np.ndarray:
    """Filtered Biot-Savart velocity of the ensemble at point(s) x."""
    x = np.asarray(x, dtype=float)
    targets = np.atleast_2d(x)
    out = _fastkernel.target_velocity(
        np.ascontiguousarray(targets),
        ensemble.positions,
        ensemble.weights,
        1.0 / ensemble.params.sqrt_alpha,
        ensemble.params.gamma,
    )
    return out[0] if x.ndim == 1 else out


def _self_velocity(positions, ensemble: ParticleEnsemble) -> np.ndarray:
    return _fastkernel.self_velocity(
        np.ascontiguousarray(positions),
        ensemble.weights,
        1.0 / ensemble.params.sqrt_alpha,
        ensemble.params.gamma,
    )


def step(ensemble: ParticleEnsemble, dt: float) -> ParticleEnsemble:
    """Advance all particles one RK4 step of the coupled ODE system.

    Weights and carried values are untouched.  Negative dt steps backward.
    """
    if dt == 0:
        raise ValueError("dt must be nonzero")
    x = ensemble.positions
    k1 = _self_velocity(x, ensemble)
    k2 = _self_velocity(x + 0.5 * dt * k1, ensemble)
    k3 = _self_velocity(x + 0.5 * dt * k2, ensemble)
    k4 = _self_velocity(x + dt * k3, ensemble)
    new = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(new)):
        bad = int(np.flatnonzero(~np.isfinite(new).all(axis=1))[0])
        raise FloatingPointError(
            f"non-finite particle position at index {bad} after step"
        )
    return replace(ensemble, positions=new)


def default_dt(ensemble: ParticleEnsemble, q0) -> float:
    """5e-3 of the turnover time support_radius / max initial speed."""
    u = _self_velocity(ensemble.positions, ensemble)
    umax = float(np.sqrt((u**2).sum(axis=1)).max())
    radius = max(q0.support_radius(), 1e-9)
    if umax == 0.0:
        return 1e-2
    return 5e-3 * radius / umax


def run_plane(config: PlaneSimConfig) -> RunRecord:
    """Run the plane solver and collect diagnostics and snapshots."""
    params = FilterParams(alpha=config.alpha, eps=0.0, gamma=config.gamma, m=0.0)
    ens = init_particles(config.q0, config.h, params)
    params = replace(params, m=ens.mass)
    ens = replace(ens, params=params)
    dt = config.dt if config.dt is not None else default_dt(ens, config.q0)

    n_steps = int(round(config.t_end / dt)) if config.t_end > 0 else 0
    diag = {k: [] for k in
            ("t", "mass", "max_radius", "min_radius", "second_moment",
             "max_speed", "max_blob_speed")}
    snapshots = []

    def record(k, t):
        pos = ens.positions
        u = _self_velocity(pos, ens)
        ublob = u - config.gamma * kernels.k_alpha(pos, params)
        radii2 = (pos**2).sum(axis=1)
        diag["t"].append(t)
        diag["mass"].append(ens.mass)
        diag["max_radius"].append(float(np.sqrt(radii2.max())))
        # particles approaching the origin are monitored, never assumed away
        diag["min_radius"].append(float(np.sqrt(radii2.min())))
        diag["second_moment"].append(float((ens.weights * radii2).sum()))
        diag["max_speed"].append(float(np.sqrt((u**2).sum(axis=1)).max()))
        diag["max_blob_speed"].append(float(np.sqrt((ublob**2).sum(axis=1)).max()))
        if k % config.snapshot_stride == 0 or k == n_steps:
            snapshots.append((t, {"positions": pos.copy()}))

    record(0, 0.0)
    for k in range(1, n_steps + 1):
        ens = step(ens, dt)
        record(k, k * dt)

    cfg = {
        "kind": "plane",
        "alpha": config.alpha,
        "gamma": config.gamma,
        **initial_data.profile_config(config.q0),
        "h": config.h,
        "dt": dt,
        "t_end": config.t_end,
        "snapshot_stride": config.snapshot_stride,
        "n_particles": ens.n,
        "m": ens.mass,
    }
    return RunRecord(
        kind="plane",
        config=cfg,
        diagnostics={k: np.array(v) for k, v in diag.items()},
        snapshots=snapshots,
        static={"weights": ens.weights.copy(), "q_values": ens.q_values.copy()},
    )


def _deposit(pos, w, x0, y0, h, nx, ny):
    """Cloud-in-cell deposit with a tensor hat of width 2h; returns density."""
    rho = np.zeros((nx, ny))
    fx = (pos[:, 0] - x0) / h
    fy = (pos[:, 1] - y0) / h
    ix = np.floor(fx).astype(int)
    iy = np.floor(fy).astype(int)
    tx = fx - ix
    ty = fy - iy
    ok = (ix >= 0) & (ix < nx - 1) & (iy >= 0) & (iy < ny - 1)
    ix, iy, tx, ty, ww = ix[ok], iy[ok], tx[ok], ty[ok], w[ok]
    np.add.at(rho, (ix, iy), ww * (1 - tx) * (1 - ty))
    np.add.at(rho, (ix + 1, iy), ww * tx * (1 - ty))
    np.add.at(rho, (ix, iy + 1), ww * (1 - tx) * ty)
    np.add.at(rho, (ix + 1, iy + 1), ww * tx * ty)
    return rho / h**2


def _h1_dual_norm(delta, h):
    """L2 norm of grad(Laplacian^{-1} delta) on the periodic box, spectrally."""
    nx, ny = delta.shape
    F = np.fft.fft2(delta - delta.mean())
    kx = 2.0 * np.pi * np.fft.fftfreq(nx, d=h)
    ky = 2.0 * np.pi * np.fft.fftfreq(ny, d=h)
    k2 = kx[:, None] ** 2 + ky[None, :] ** 2
    k2[0, 0] = np.inf
    val = (h * h / (nx * ny)) * np.sum(np.abs(F) ** 2 / k2)
    return float(np.sqrt(val))


def stability_gap(run_a: RunRecord, run_b: RunRecord):
    """Time series of the L2 gap of H * (q_a - q_b) between two plane runs.

    Both ensembles are mollified onto a common Cartesian grid (tensor hat of
    width 2h), the zero-mean difference is inverted spectrally on the padded
    periodic box, and the gradient norm is returned per shared snapshot time.
    """
    for key in ("alpha", "gamma", "h"):
        if run_a.config.get(key) != run_b.config.get(key):
            raise ValueError(f"runs disagree on {key!r}")
    ta = run_a.snapshot_times()
    tb = run_b.snapshot_times()
    if ta.size != tb.size or np.any(np.abs(ta - tb) > 1e-12):
        raise ValueError("runs must share snapshot times")

    h = float(run_a.config["h"])
    allpos = np.concatenate(
        [p["positions"] for _, p in run_a.snapshots]
        + [p["positions"] for _, p in run_b.snapshots]
    )
    x0, x1 = allpos[:, 0].min(), allpos[:, 0].max()
    y0, y1 = allpos[:, 1].min(), allpos[:, 1].max()
    pad_x = 0.25 * max(x1 - x0, 4 * h)
    pad_y = 0.25 * max(y1 - y0, 4 * h)
    x0, x1 = x0 - pad_x, x1 + pad_x
    y0, y1 = y0 - pad_y, y1 + pad_y
    nx = int(np.ceil((x1 - x0) / h)) + 1
    ny = int(np.ceil((y1 - y0) / h)) + 1

    wa = run_a.static["weights"]
    wb = run_b.static["weights"]
    gaps = np.empty(ta.size)
    for i in range(ta.size):
        rho_a = _deposit(run_a.snapshots[i][1]["positions"], wa, x0, y0, h, nx, ny)
        rho_b = _deposit(run_b.snapshots[i][1]["positions"], wb, x0, y0, h, nx, ny)
        delta = rho_a - rho_b
        gaps[i] = 0.0 if not delta.any() else _h1_dual_norm(delta, h)
    return ta, gaps
