"""Command-line interface.

Subcommands: kernel-table, radial-verify, simulate, converge, picard.
Every command is deterministic given its configuration; output goes under
--out, the ALPHADISK_OUT environment variable, or ./runs.

Exit codes: 0 success, 2 configuration error, 3 acceptance failure,
4 numerical abort.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from .. import exterior_solver, kernels, plane_solver, radial_exterior
from ..kernels import FilterParams
from . import config as cfgmod
from . import records, svg
from .config import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ACCEPT = 3
EXIT_NUMERIC = 4


def _outdir(args) -> Path:
    root = args.out or os.environ.get("ALPHADISK_OUT") or "runs"
    p = Path(root)
    p.mkdir(parents=True, exist_ok=True)
    return p


def variation(values) -> float:
    """(max - min) / mean of a positive sample; the spread measure used in
    rate checks."""
    v = np.asarray(values, dtype=float)
    return float((v.max() - v.min()) / v.mean())


def kernel_bound_columns(r, params: FilterParams):
    """Kernel profile plus the boundedness ratios of the decay estimates.

    bound_a_ratio = |k|/(r*(1+|log r|)) stays finite on (0, inf) and is
    equivalent to the |x||log|x|| bound near zero; bound_b_ratio = |k|*(1+r)
    tracks the 1/(1+|x|) far-field bound; cross_deriv is the symmetric
    off-diagonal derivative evaluated at angle zero, where its angular
    factor is maximal.
    """
    r = np.asarray(r, dtype=float)
    g = np.asarray(kernels.g_alpha(r, params))
    k = np.asarray(kernels.k_alpha_profile(r, params))
    mass = np.asarray(kernels.bessel_mass(r, params))
    cross = r * g - 2.0 * mass / r  # (d2 K1 + d1 K2) at theta = 0, times r
    cross = cross / r
    return {
        "r": r,
        "g_alpha": g,
        "k_theta": k,
        "bound_a_ratio": np.abs(k) / (r * (1.0 + np.abs(np.log(r)))),
        "bound_b_ratio": np.abs(k) * (1.0 + r),
        "cross_deriv": cross,
    }


def cmd_kernel_table(args) -> int:
    if args.samples < 1:
        raise ConfigError("--samples must be >= 1")
    out = _outdir(args)
    params = FilterParams(alpha=args.alpha)
    if args.samples == 1:
        r = np.array([args.r_min])
    else:
        r = np.geomspace(args.r_min, args.r_max, args.samples)
    cols = kernel_bound_columns(r, params)
    records.write_csv(out / "kernel_table.csv", cols)
    if args.svg:
        svg.line_plot(out / "kernel_table.svg", r, np.abs(cols["k_theta"]),
                      title=f"|k_theta|, alpha={args.alpha}",
                      xlabel="r", ylabel="|k_theta|", logx=True, logy=True)
    print(f"wrote {out / 'kernel_table.csv'} ({r.size} rows)")
    return EXIT_OK


def cmd_radial_verify(args) -> int:
    out = _outdir(args)
    alphas = [float(a) for a in args.alpha.split(",")]
    epss = [float(e) for e in args.eps.split(",")]
    rows = {k: [] for k in ("alpha", "eps", "a_eps", "b_eps", "energy_identity",
                            "energy_quadrature", "rel_gap", "rate_ratio")}
    worst = 0.0
    for al in alphas:
        for ep in epss:
            p = FilterParams(alpha=al, eps=ep)
            a = radial_exterior.a_eps(p)
            b = radial_exterior.b_eps(p)
            ei = radial_exterior.w4_h1_energy(p, "identity")
            eq = radial_exterior.w4_h1_energy(p, "quadrature")
            gap = abs(ei - eq) / abs(ei)
            worst = max(worst, gap)
            rows["alpha"].append(al)
            rows["eps"].append(ep)
            rows["a_eps"].append(a)
            rows["b_eps"].append(b)
            rows["energy_identity"].append(ei)
            rows["energy_quadrature"].append(eq)
            rows["rel_gap"].append(gap)
            rows["rate_ratio"].append(np.sqrt(ei) / (ep * abs(np.log(ep))))
    records.write_csv(out / "radial_verify.csv", rows)
    print(f"wrote {out / 'radial_verify.csv'}; worst rel_gap {worst:.3e}")
    if worst > 1e-6:
        print("FAIL: energy identity and quadrature disagree beyond 1e-6",
              file=sys.stderr)
        return EXIT_ACCEPT
    return EXIT_OK


def cmd_simulate(args) -> int:
    sections = cfgmod.parse_config(args.config)
    out = _outdir(args)
    if args.system == "plane":
        cfg = cfgmod.plane_config(cfgmod.require_section(sections, "plane"))
        rec = plane_solver.run_plane(cfg)
    else:
        cfg = cfgmod.exterior_config(cfgmod.require_section(sections, "exterior"))
        rec = exterior_solver.run_exterior(cfg)
    rundir = records.write_run(rec, out / f"{args.system}_run")
    print(f"wrote {rundir}")
    if "aborted" in rec.provenance:
        print(f"numerical abort: {rec.provenance['aborted']} "
              "(partial outputs written)", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_converge(args) -> int:
    sections = cfgmod.parse_config(args.config)
    conv = cfgmod.require_section(sections, "converge")
    eps_list = conv.get_floats("eps_list")
    if len(eps_list) < 2:
        raise ConfigError("[converge] eps_list needs at least 2 values")
    mode = conv.get_str("mode", "zero_extend")
    plane_sec = cfgmod.require_section(sections, "plane")
    ext_sec = cfgmod.require_section(sections, "exterior")
    for key in ("alpha", "gamma", "t_end"):
        if plane_sec.get_float(key) != ext_sec.get_float(key):
            raise ConfigError(f"[plane] and [exterior] disagree on '{key}'")

    out = _outdir(args)
    t0 = time.perf_counter()
    plane_rec = plane_solver.run_plane(cfgmod.plane_config(plane_sec))
    records.write_run(plane_rec, out / "plane_run")
    print(f"plane run done in {time.perf_counter()-t0:.1f} s")

    rows = {k: [] for k in ("eps", "e_T", "e_floor", "runtime_s")}
    for ep in eps_list:
        t1 = time.perf_counter()
        rec = exterior_solver.run_exterior(
            cfgmod.exterior_config(ext_sec, eps=ep))
        records.write_run(rec, out / f"exterior_eps_{ep:g}")
        times, e = exterior_solver.compare_to_limit(rec, plane_rec, mode=mode)
        dt_run = time.perf_counter() - t1
        rows["eps"].append(ep)
        rows["e_T"].append(e[-1])
        rows["e_floor"].append(e[0])
        rows["runtime_s"].append(dt_run)
        print(f"eps={ep:g}: e_T={e[-1]:.4e} e_floor={e[0]:.4e} ({dt_run:.1f} s)")
    records.write_csv(out / "converge.csv", rows)
    order = np.argsort(rows["eps"])[::-1]
    svg.line_plot(out / "converge.svg",
                  np.asarray(rows["eps"])[order],
                  np.asarray(rows["e_T"])[order],
                  title="weak-proxy error vs eps", xlabel="eps", ylabel="e(T)",
                  logx=True, logy=True)
    print(f"wrote {out / 'converge.csv'}")
    return EXIT_OK


def cmd_picard(args) -> int:
    sections = cfgmod.parse_config(args.config)
    ext_sec = cfgmod.require_section(sections, "exterior")
    pic = cfgmod.picard_config(cfgmod.require_section(sections, "picard"))
    cfg = cfgmod.exterior_config(ext_sec, picard=pic)
    out = _outdir(args)
    res = exterior_solver.picard(cfg)
    d, ratios = res.d, res.ratios
    iters = np.arange(1, d.size + 1)
    ratio_col = ["n/a"] + [
        "n/a" if not np.isfinite(rho) else repr(float(rho)) for rho in ratios
    ]
    records.write_csv(out / "picard.csv",
                      {"iter": iters, "d_n": d, "ratio": np.array(ratio_col)})
    print(f"wrote {out / 'picard.csv'}")
    finite = ratios[np.isfinite(ratios)]
    if finite.size and float(finite.max()) > args.max_ratio:
        print(f"FAIL: contraction ratio {finite.max():.3f} exceeds "
              f"{args.max_ratio}", file=sys.stderr)
        return EXIT_ACCEPT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="alphadisk",
        description="Filtered vortex dynamics outside a small disk: "
                    "kernel tables, radial benchmarks, simulations and the "
                    "small-obstacle convergence experiment.",
    )
    p.add_argument("--out", help="output directory (default $ALPHADISK_OUT or ./runs)")
    sub = p.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kernel-table", help="tabulate kernel profiles and bound ratios")
    k.add_argument("--alpha", type=float, default=1.0)
    k.add_argument("--r-min", type=float, default=1e-4)
    k.add_argument("--r-max", type=float, default=30.0)
    k.add_argument("--samples", type=int, default=200)
    k.add_argument("--svg", action="store_true")
    k.set_defaults(func=cmd_kernel_table)

    r = sub.add_parser("radial-verify", help="boundary constants and energy identity table")
    r.add_argument("--alpha", default="0.5,1,2")
    r.add_argument("--eps", default="0.2,0.1,0.05,0.025")
    r.set_defaults(func=cmd_radial_verify)

    s = sub.add_parser("simulate", help="run one solver from a config file")
    s.add_argument("system", choices=("plane", "exterior"))
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("converge", help="small-obstacle convergence experiment")
    c.add_argument("--config", required=True)
    c.set_defaults(func=cmd_converge)

    q = sub.add_parser("picard", help="frozen-velocity contraction experiment")
    q.add_argument("--config", required=True)
    q.add_argument("--max-ratio", type=float, default=0.6)
    q.set_defaults(func=cmd_picard)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, FloatingPointError, ValueError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
