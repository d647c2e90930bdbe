"""INI-file configuration for the command line drivers.

Three sections: [kernel] selects and parameterizes the interaction kernel,
[run] sizes the simulation, [output] points at a directory.  Every key has a
default, so an empty (or absent) file is a valid configuration.  Unknown
sections, unknown keys, or malformed values raise ConfigError; so does an
inconsistent pair of interval lengths between [kernel] and [run].
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, replace

from .kernels import KernelSpec


class ConfigError(ValueError):
    """Bad or inconsistent configuration input."""


_KERNEL_TYPES = {
    "variant": str, "k": float, "lam": float, "L": float,
    "r": float, "d": int, "K": float, "gamma": float,
}
_RUN_TYPES = {
    "n_particles": int, "n_cells": int, "dt": float, "t_end": float,
    "seed": int, "c": float, "record_every": int, "snapshot_every": int,
    "L": float, "method": str, "compare_times": str,
    "bench_sizes": str, "bench_reps": int, "x_point": str, "n_eval": int,
    "overlay": str, "rho_floor": float,
}
_OUTPUT_TYPES = {"out_dir": str}
_SECTIONS = {"kernel": _KERNEL_TYPES, "run": _RUN_TYPES, "output": _OUTPUT_TYPES}


@dataclass(frozen=True)
class SimConfig:
    """Everything the drivers need, already typed and validated."""

    kernel: KernelSpec
    n_particles: int = 200
    n_cells: int = 600
    dt: float = 1e-3
    t_end: float = 1.0
    seed: int = 0
    c: float = 0.5
    rho_floor: float = 1e-12
    record_every: int = 10
    snapshot_every: int = 0
    method: str = "auto"
    compare_times: tuple = (0.5, 1.0, 2.0)
    bench_sizes: tuple = (1024, 2048, 4096, 8192)
    bench_reps: int = 5
    x_point: tuple = (0.0,)
    n_eval: int = 201
    overlay: str = "none"
    out_dir: str | None = None


def _default_kernel_fields():
    return {"variant": "bounded1d", "k": 4.0, "lam": 1.0, "L": 2.0 * math.pi,
            "r": 1.0, "d": 1, "K": 1.0, "gamma": 1.0}


def _coerce(section: str, key: str, raw: str):
    types = _SECTIONS[section]
    if key not in types:
        raise ConfigError(f"unknown key {key!r} in section [{section}]")
    typ = types[key]
    try:
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from exc


def _parse_floats(raw: str, what: str):
    try:
        vals = tuple(float(tok) for tok in raw.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"bad {what} list: {raw!r}") from exc
    if not vals:
        raise ConfigError(f"empty {what} list")
    return vals


def _parse_ints(raw: str, what: str):
    vals = _parse_floats(raw, what)
    out = tuple(int(v) for v in vals)
    if any(o != v for o, v in zip(out, vals)):
        raise ConfigError(f"{what} list must be integers: {raw!r}")
    return out


def load_config(path: str | None = None, overrides=()) -> SimConfig:
    """Read an INI file (optional) and apply section.key=value overrides."""
    values = {"kernel": _default_kernel_fields(), "run": {}, "output": {}}
    if path is not None:
        parser = configparser.ConfigParser()
        # keep keys case sensitive: the kernel section has both k and K
        parser.optionxform = str
        try:
            read = parser.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config file {path!r}: {exc}") from exc
        if not read:
            raise ConfigError(f"cannot read config file {path!r}")
        for section in parser.sections():
            if section not in _SECTIONS:
                raise ConfigError(f"unknown section [{section}]")
            for key, raw in parser.items(section):
                values[section][key] = _coerce(section, key, raw)
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        target, raw = item.split("=", 1)
        section, key = target.split(".", 1)
        section = section.strip()
        key = key.strip()
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section {section!r} in override {item!r}")
        values[section][key] = _coerce(section, key, raw)

    kf = values["kernel"]
    try:
        kernel = KernelSpec(variant=kf["variant"], k=kf["k"], lam=kf["lam"],
                            L=kf["L"], r=kf["r"], d=kf["d"], K=kf["K"],
                            gamma=kf["gamma"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    run = values["run"]
    if "L" in run and not math.isclose(run["L"], kernel.L, rel_tol=1e-12):
        raise ConfigError(
            f"[run] L={run['L']} disagrees with [kernel] L={kernel.L}")
    cfg = SimConfig(kernel=kernel)
    simple = {"n_particles", "n_cells", "dt", "t_end", "seed", "c",
              "rho_floor", "record_every", "snapshot_every", "method",
              "bench_reps", "n_eval", "overlay"}
    updates = {}
    for key, val in run.items():
        if key == "L":
            continue
        if key == "compare_times":
            updates["compare_times"] = _parse_floats(val, "compare_times")
        elif key == "bench_sizes":
            updates["bench_sizes"] = _parse_ints(val, "bench_sizes")
        elif key == "x_point":
            updates["x_point"] = _parse_floats(val, "x_point")
        elif key in simple:
            updates[key] = val
    if "out_dir" in values["output"]:
        updates["out_dir"] = values["output"]["out_dir"]
    cfg = replace(cfg, **updates)

    if cfg.n_particles < 2:
        raise ConfigError(f"n_particles must be >= 2, got {cfg.n_particles}")
    if cfg.n_cells < 8:
        raise ConfigError(f"n_cells must be >= 8, got {cfg.n_cells}")
    if cfg.dt <= 0:
        raise ConfigError(f"dt must be positive, got {cfg.dt}")
    if not 0.0 < cfg.rho_floor < 1e-3:
        raise ConfigError(
            f"rho_floor must lie in (0, 1e-3), got {cfg.rho_floor}")
    if cfg.t_end < 0:
        raise ConfigError(f"t_end must be >= 0, got {cfg.t_end}")
    if cfg.record_every < 1:
        raise ConfigError(f"record_every must be >= 1, got {cfg.record_every}")
    if cfg.snapshot_every < 0:
        raise ConfigError(f"snapshot_every must be >= 0, got {cfg.snapshot_every}")
    if cfg.method not in ("auto", "direct", "scan"):
        raise ConfigError(f"method must be auto, direct, or scan, got {cfg.method!r}")
    if cfg.bench_reps < 1:
        raise ConfigError(f"bench_reps must be >= 1, got {cfg.bench_reps}")
    if any(t <= 0 for t in cfg.compare_times):
        raise ConfigError(f"compare_times must be positive, got {cfg.compare_times}")
    if any(s < 4 for s in cfg.bench_sizes):
        raise ConfigError(f"bench sizes must be >= 4, got {cfg.bench_sizes}")
    if cfg.n_eval < 2:
        raise ConfigError(f"n_eval must be >= 2, got {cfg.n_eval}")
    if cfg.overlay not in ("none", "free"):
        raise ConfigError(f"overlay must be none or free, got {cfg.overlay!r}")
    return cfg
