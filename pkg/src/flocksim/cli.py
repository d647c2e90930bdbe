"""Command line drivers.

Five subcommands, all sharing --config/--out/--seed/--set:

  particles  march an ensemble sampled from the cosine profiles
  macro      march the continuum fields from the same profiles
  compare    run both and report L1 distances at requested times
  bench      time the tridiagonal route against dense quadrature
  kernel     tabulate kernel values along a line of evaluation points

Each run writes CSV files plus a manifest.json echoing the full configuration
and per-phase wall-clock times.  Exit status: 0 on success, 1 for
configuration problems, 2 for runtime failures.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import elliptic, hyperbolic, kernels, macro, particles
from .config import ConfigError, SimConfig, load_config


def _fmt(x) -> str:
    """Shortest round-trip decimal form; keeps the CSVs bit-stable."""
    return repr(float(x))


class _Parser(argparse.ArgumentParser):
    # argparse exits on usage errors; route them through ConfigError instead
    # so the process-level exit code stays 1 for everything misconfigured
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="flocksim", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("particles", "run the microscopic alignment model"),
        ("macro", "run the continuum model"),
        ("compare", "run both models and measure their distance"),
        ("bench", "time the O(n) elliptic route against O(n^2) quadrature"),
        ("kernel", "tabulate kernel values"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", default=None, help="INI configuration file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the RNG seed")
        p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override one config value; repeatable")
        if name == "bench":
            p.add_argument("--parallel", action="store_true",
                           help="time the threaded quadrature instead of the serial one")
    return parser


def _config_echo(cfg: SimConfig) -> dict:
    k = cfg.kernel
    return {
        "kernel": {"variant": k.variant, "k": k.k, "lam": k.lam, "L": k.L,
                   "r": k.r, "d": k.d, "K": k.K, "gamma": k.gamma},
        "run": {"n_particles": cfg.n_particles, "n_cells": cfg.n_cells,
                "dt": cfg.dt, "t_end": cfg.t_end, "seed": cfg.seed,
                "c": cfg.c, "rho_floor": cfg.rho_floor,
                "record_every": cfg.record_every,
                "snapshot_every": cfg.snapshot_every, "method": cfg.method,
                "compare_times": list(cfg.compare_times),
                "bench_sizes": list(cfg.bench_sizes),
                "bench_reps": cfg.bench_reps,
                "x_point": list(cfg.x_point), "n_eval": cfg.n_eval,
                "overlay": cfg.overlay},
        "output": {"out_dir": cfg.out_dir},
    }


def _write_manifest(out: Path, command: str, cfg: SimConfig, timings: dict,
                    extra: dict | None = None):
    manifest = {"command": command, "out_dir": str(out),
                "config": _config_echo(cfg),
                "timings_s": {k: float(v) for k, v in timings.items()}}
    if extra:
        manifest.update(extra)
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _steps_for(t_end: float, dt: float) -> int:
    steps = round(t_end / dt)
    if abs(steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ConfigError(f"t_end={t_end} is not a whole number of dt={dt} steps")
    return steps


def _require_1d(cfg: SimConfig):
    if cfg.kernel.variant == kernels.BESSEL_BALL:
        raise ConfigError("this driver is one dimensional; the ball kernel is not")


def _cmd_particles(cfg: SimConfig, out: Path) -> int:
    _require_1d(cfg)
    t0 = time.perf_counter()
    rho0, u0 = macro.cosine_profiles(cfg.kernel.L, cfg.c)
    ens = particles.sample_from_profile(rho0, u0, cfg.n_particles,
                                        cfg.kernel.L, cfg.seed)
    t1 = time.perf_counter()
    steps = _steps_for(cfg.t_end, cfg.dt)
    # snapshot_every=0 means endpoints only, so the snapshot file always exists
    snap_every = cfg.snapshot_every if cfg.snapshot_every > 0 else max(steps, 1)
    result = particles.run_particles(ens, cfg.kernel, cfg.dt, steps,
                                     record_every=cfg.record_every,
                                     snapshot_every=snap_every,
                                     method=cfg.method)
    t2 = time.perf_counter()
    d = ens.dim
    header = (["t", "x_norm", "v_norm", "max_pair_dist", "lyapunov"]
              + [f"xc{j}" for j in range(d)] + [f"vc{j}" for j in range(d)])
    with open(out / "report.csv", "w") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(len(result.times)):
            row = [result.times[i], result.x_norm[i], result.v_norm[i],
                   result.max_pair_dist[i], result.lyapunov[i]]
            row += list(result.x_center[i]) + list(result.v_center[i])
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    if result.snapshots:
        cols = (["t", "particle_id"] + [f"x{j}" for j in range(d)]
                + [f"v{j}" for j in range(d)])
        with open(out / "snapshots.csv", "w") as fh:
            fh.write(",".join(cols) + "\n")
            for t, snap in result.snapshots:
                for pid in range(snap.n):
                    row = [_fmt(t), str(pid)]
                    row += [_fmt(v) for v in snap.x[pid]]
                    row += [_fmt(v) for v in snap.v[pid]]
                    fh.write(",".join(row) + "\n")
    t3 = time.perf_counter()
    _write_manifest(out, "particles", cfg,
                    {"init": t1 - t0, "simulate": t2 - t1, "io": t3 - t2})
    return 0


def _run_macro_default(cfg: SimConfig):
    if cfg.kernel.variant != kernels.BOUNDED1D:
        raise ConfigError("the continuum solver needs the bounded 1D kernel")
    grid = elliptic.Grid1D(cfg.kernel.L, cfg.n_cells)
    return grid, macro.init_fields(grid, cfg.c)


def _write_field_snapshot(path: Path, grid, spec, state, floor):
    u = hyperbolic.velocity(state.rho, state.m, floor)
    aux = elliptic.solve_aux(grid, state.rho, state.m, spec.k, spec.lam)
    with open(path, "w") as fh:
        fh.write("x,rho,m,u,y1,y2\n")
        for row in zip(grid.nodes, state.rho, state.m, u, aux.y1, aux.y2):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _cmd_macro(cfg: SimConfig, out: Path) -> int:
    t0 = time.perf_counter()
    grid, state = _run_macro_default(cfg)
    t1 = time.perf_counter()
    steps = _steps_for(cfg.t_end, cfg.dt)
    snap_every = cfg.snapshot_every if cfg.snapshot_every > 0 else max(steps, 1)
    result = macro.run_macro(grid, cfg.kernel, state, cfg.dt, steps,
                             record_every=cfg.record_every,
                             snapshot_every=snap_every,
                             rho_floor=cfg.rho_floor)
    t2 = time.perf_counter()
    snap_index = []
    for i, (t, snap) in enumerate(result.snapshots):
        name = f"snapshot_{i:04d}.csv"
        _write_field_snapshot(out / name, grid, cfg.kernel, snap, cfg.rho_floor)
        snap_index.append({"t": float(t), "file": name})
    with open(out / "series.csv", "w") as fh:
        fh.write("t,mass,momentum,kinetic,max_speed\n")
        for i in range(len(result.times)):
            fh.write(",".join(_fmt(v) for v in (
                result.times[i], result.mass[i], result.momentum[i],
                result.kinetic[i], result.max_speed[i])) + "\n")
    t3 = time.perf_counter()
    _write_manifest(out, "macro", cfg,
                    {"init": t1 - t0, "simulate": t2 - t1, "io": t3 - t2},
                    extra={"times": [float(t) for t in result.times],
                           "mass_series": [float(v) for v in result.mass],
                           "momentum_series": [float(v) for v in result.momentum],
                           "snapshots": snap_index})
    return 0


def _cmd_compare(cfg: SimConfig, out: Path) -> int:
    t0 = time.perf_counter()
    grid, state = _run_macro_default(cfg)
    rho0, u0 = macro.cosine_profiles(cfg.kernel.L, cfg.c)
    ens = particles.sample_from_profile(rho0, u0, cfg.n_particles,
                                        cfg.kernel.L, cfg.seed)
    t1 = time.perf_counter()
    times = sorted(cfg.compare_times)
    rows = []
    t_prev = 0.0
    for t_target in times:
        steps = _steps_for(t_target - t_prev, cfg.dt)
        mac = macro.run_macro(grid, cfg.kernel, state, cfg.dt, steps,
                              record_every=max(steps, 1),
                              rho_floor=cfg.rho_floor)
        state = mac.final
        for _ in range(steps):
            ens = particles.verlet_step(ens, cfg.kernel, cfg.dt, cfg.method)
        binned = macro.bin_particles(grid, ens)
        dist = macro.compare(grid, state, binned)
        rows.append((t_target, dist.l1_rho, dist.l1_m))
        t_prev = t_target
    t2 = time.perf_counter()
    with open(out / "compare.csv", "w") as fh:
        fh.write("t,l1_rho,l1_m\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    t3 = time.perf_counter()
    _write_manifest(out, "compare", cfg,
                    {"init": t1 - t0, "simulate": t2 - t1, "io": t3 - t2})
    return 0


def _median_nanos(fn, reps: int) -> int:
    fn()   # warm-up, untimed
    samples = []
    for _ in range(reps):
        start = time.perf_counter_ns()
        fn()
        samples.append(time.perf_counter_ns() - start)
    samples.sort()
    mid = len(samples) // 2
    if len(samples) % 2:
        return samples[mid]
    return (samples[mid - 1] + samples[mid]) // 2


def _cmd_bench(cfg: SimConfig, out: Path, parallel: bool = False) -> int:
    if cfg.kernel.variant != kernels.BOUNDED1D:
        raise ConfigError("the benchmark exercises the bounded 1D kernel")
    t0 = time.perf_counter()
    spec = cfg.kernel
    rows = []
    for n in cfg.bench_sizes:
        grid = elliptic.Grid1D(spec.L, n)
        rng = np.random.default_rng(cfg.seed + n)
        # random smooth field: a few low Fourier modes vanishing at the ends
        coeff = rng.normal(0.0, 1.0, 6)
        f = np.zeros(grid.size)
        for j, cj in enumerate(coeff, start=1):
            f += cj * np.sin(j * math.pi * (grid.nodes / spec.L + 0.5))

        def run_fd():
            return elliptic.thomas_solve(elliptic.assemble(grid, spec.k, spec.lam, f))

        if parallel:
            def run_riemann():
                return elliptic.riemann_oracle_parallel(grid, f, spec)
        else:
            def run_riemann():
                return elliptic.riemann_oracle(grid, f, spec)

        fd_ns = _median_nanos(run_fd, cfg.bench_reps)
        ri_ns = _median_nanos(run_riemann, cfg.bench_reps)
        rows.append((n, fd_ns, ri_ns, ri_ns / fd_ns))
    t1 = time.perf_counter()
    with open(out / "bench.csv", "w") as fh:
        fh.write("n,fd_nanos,riemann_nanos,ratio\n")
        for n, fd_ns, ri_ns, ratio in rows:
            fh.write(f"{n},{fd_ns},{ri_ns},{_fmt(ratio)}\n")
    t2 = time.perf_counter()
    _write_manifest(out, "bench", cfg, {"simulate": t1 - t0, "io": t2 - t1},
                    extra={"parallel_riemann": bool(parallel)})
    return 0


def _kernel_rows(cfg: SimConfig):
    """Rows (x, s, value[, free_value]) sweeping the source point s."""
    spec = cfg.kernel
    overlay = cfg.overlay == "free"
    if spec.variant == kernels.BESSEL_BALL:
        if len(cfg.x_point) != spec.d:
            raise ConfigError(
                f"run.x_point needs {spec.d} comma-separated components for d={spec.d}")
        x = np.array(cfg.x_point, dtype=float)
        nx = float(np.linalg.norm(x))
        if not 0.0 < nx <= spec.r:
            raise ConfigError(
                f"x_point must be inside the ball and off-center, got |x|={nx}")
        # sweep s along the diameter through x; boundary ends show the decay to 0
        direction = x / nx
        for t in np.linspace(-spec.r, spec.r, cfg.n_eval):
            s = t * direction + 0.0   # normalize -0.0 coordinates
            try:
                psi = kernels.eval_bessel_ball(spec, x, s)
            except kernels.SingularityError:
                continue
            row = [";".join(_fmt(v) for v in x),
                   ";".join(_fmt(v) for v in s), _fmt(psi)]
            if overlay:
                row.append(_fmt(kernels.free_space_profile(
                    spec, float(np.linalg.norm(x - s)))))
            yield tuple(row)
        return
    if len(cfg.x_point) != 1:
        raise ConfigError("run.x_point needs exactly one component for 1D kernels")
    x = cfg.x_point[0]
    if spec.variant == kernels.BOUNDED1D and abs(x) > 0.5 * spec.L:
        raise ConfigError(f"x_point {x} outside [{-0.5 * spec.L}, {0.5 * spec.L}]")
    ss = np.linspace(-0.5 * spec.L, 0.5 * spec.L, cfg.n_eval)
    if spec.variant == kernels.FREE1D:
        vals = kernels.eval_free_space_1d(spec, x, ss)
    elif spec.variant == kernels.BOUNDED1D:
        vals = kernels.eval_bounded_1d(spec, x, ss)
    else:
        vals = kernels.eval_cs_rational(spec, x, ss)
    free_vals = kernels.eval_free_space_1d(spec, x, ss) if overlay else None
    for j, (s, psi) in enumerate(zip(ss, np.atleast_1d(vals))):
        row = [_fmt(x), _fmt(s), _fmt(psi)]
        if overlay:
            row.append(_fmt(free_vals[j]))
        yield tuple(row)


def _cmd_kernel(cfg: SimConfig, out: Path) -> int:
    t0 = time.perf_counter()
    rows = list(_kernel_rows(cfg))
    t1 = time.perf_counter()
    header = "x,s,value,free_value" if cfg.overlay == "free" else "x,s,value"
    with open(out / "kernel.csv", "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    t2 = time.perf_counter()
    _write_manifest(out, "kernel", cfg, {"evaluate": t1 - t0, "io": t2 - t1})
    return 0


_COMMANDS = {
    "particles": _cmd_particles,
    "macro": _cmd_macro,
    "compare": _cmd_compare,
    "bench": _cmd_bench,
    "kernel": _cmd_kernel,
}


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        cfg = load_config(args.config, args.set)
        if args.seed is not None:
            from dataclasses import replace
            cfg = replace(cfg, seed=args.seed)
        out = Path(args.out or cfg.out_dir or "flocksim_out")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    try:
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "bench":
            return _cmd_bench(cfg, out, parallel=args.parallel)
        return _COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
