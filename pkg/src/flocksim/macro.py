"""Macroscopic counterpart of the particle dynamics.

Mass and momentum densities on the interval obey

    rho_t + (rho u)_x = 0
    (rho u)_t + (rho u^2)_x = rho (G*(rho u)) - (rho u) (G*rho)

with the bounded-interval kernel G applied through the O(n) elliptic route.
The convective part is advanced with the second-order central scheme from
`hyperbolic`; this module wires the elliptic solve into the stepper and adds
initial profiles, conservation bookkeeping, particle binning, and field
comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .elliptic import Grid1D, solve_aux
from .hyperbolic import (
    VACUUM_RHO,
    FieldState,
    StepRejectedError,
    ssp_rk2_step,
    velocity,
)
from .kernels import BOUNDED1D, KernelSpec
from .particles import ParticleEnsemble


def cosine_profiles(L: float, c: float = 0.5):
    """Unit-mass cosine bump density and an odd sine velocity of amplitude c."""
    if not L > 0:
        raise ValueError(f"require L > 0, got L={L}")

    def rho0(x):
        return (math.pi / (2.0 * L)) * np.cos(math.pi * np.asarray(x) / L)

    def u0(x):
        return -c * np.sin(math.pi * np.asarray(x) / L)

    return rho0, u0


def init_fields(grid: Grid1D, c: float = 0.5) -> FieldState:
    """Cosine-bump density with an odd sine velocity sampled at the grid nodes.

    Total mass integrates to 1 analytically; total momentum vanishes because
    the momentum profile is odd, which is exactly the frame run_macro expects.
    """
    rho0, u0 = cosine_profiles(grid.L, c)
    x = grid.nodes
    rho = np.clip(np.asarray(rho0(x), dtype=float), 0.0, None)
    m = rho * np.asarray(u0(x), dtype=float)
    return FieldState(rho=rho, m=m)


def conserved_totals(grid: Grid1D, state: FieldState):
    """Total mass and momentum, sum of cell values times dx."""
    return float(state.rho.sum() * grid.dx), float(state.m.sum() * grid.dx)


def kinetic_energy(grid: Grid1D, state: FieldState,
                   floor: float = VACUUM_RHO) -> float:
    """sum rho u^2 dx; the alignment source can only dissipate it."""
    u = velocity(state.rho, state.m, floor)
    return float((state.m * u).sum() * grid.dx)


def galilean_shift(state: FieldState, c: float) -> FieldState:
    """Boost the velocity field by a constant c, leaving the density alone.

    Useful to bring a drifting state into the zero-net-momentum frame the
    solver wants: pick c = -momentum/mass.
    """
    return FieldState(rho=state.rho.copy(), m=state.m + c * state.rho, t=state.t)


@dataclass
class MacroRunResult:
    times: np.ndarray
    mass: np.ndarray
    momentum: np.ndarray
    kinetic: np.ndarray
    max_speed: np.ndarray
    snapshots: list = field(default_factory=list)   # (t, FieldState) pairs
    final: FieldState | None = None


def run_macro(grid: Grid1D, spec: KernelSpec, state: FieldState, dt: float,
              n_steps: int, record_every: int = 1, snapshot_every: int = 0,
              t0: float = 0.0, rho_floor: float = VACUUM_RHO) -> MacroRunResult:
    """March the fields n_steps RK2 steps, recording conservation diagnostics.

    The interval is fixed, so the run only makes sense for states with zero
    net momentum; drifting input is rejected with a pointer to galilean_shift.
    """
    if spec.variant != BOUNDED1D:
        raise ValueError("the continuum solver needs the bounded 1D kernel")
    if not math.isclose(spec.L, grid.L, rel_tol=1e-12):
        raise ValueError(
            f"kernel interval L={spec.L} does not match grid L={grid.L}")
    if dt <= 0 or n_steps < 0:
        raise ValueError(f"need dt > 0 and n_steps >= 0, got dt={dt}, n_steps={n_steps}")
    if record_every < 1:
        raise ValueError(f"record_every must be >= 1, got {record_every}")
    mass0, mom0 = conserved_totals(grid, state)
    drift_scale = max(float(np.abs(state.m).sum() * grid.dx), 1e-30)
    if abs(mom0) > 1e-8 * max(drift_scale, 1.0):
        raise ValueError(
            f"net momentum {mom0:.3g} is not zero; shift frames first "
            "(galilean_shift with c = -momentum/mass)")

    def aux_provider(st):
        return solve_aux(grid, st.rho, st.m, spec.k, spec.lam)

    rows = []
    snapshots = []
    cur = state.copy()
    cur.t = t0
    for step in range(n_steps + 1):
        t = t0 + step * dt
        if step % record_every == 0 or step == n_steps:
            mass, mom = conserved_totals(grid, cur)
            u = velocity(cur.rho, cur.m, rho_floor)
            rows.append((t, mass, mom, kinetic_energy(grid, cur, rho_floor),
                         float(np.abs(u).max())))
        if snapshot_every > 0 and (step % snapshot_every == 0 or step == n_steps):
            snapshots.append((t, cur.copy()))
        if step < n_steps:
            try:
                cur = ssp_rk2_step(grid, cur, dt, aux_provider, floor=rho_floor)
            except StepRejectedError as exc:
                raise StepRejectedError(exc.cfl, exc.dt, step=step) from None
    arr = np.array(rows)
    return MacroRunResult(
        times=arr[:, 0],
        mass=arr[:, 1],
        momentum=arr[:, 2],
        kinetic=arr[:, 3],
        max_speed=arr[:, 4],
        snapshots=snapshots,
        final=cur,
    )


def bin_particles(grid: Grid1D, ens: ParticleEnsemble) -> FieldState:
    """Histogram a 1D ensemble onto the grid as unit-mass density and momentum.

    Each node owns the cell of width dx centered on it; the two half cells
    hugging the boundary fold into the first and last node so no particle is
    dropped.  Totals then match the ensemble exactly: sum rho dx = 1 and
    sum m dx = mean velocity.
    """
    if ens.dim != 1:
        raise ValueError("binning implemented for 1D ensembles")
    x = ens.x[:, 0]
    half = 0.5 * grid.L
    if x.min() < -half - 1e-9 * grid.L or x.max() > half + 1e-9 * grid.L:
        raise ValueError("particles outside the grid interval")
    idx = np.clip(np.rint((x + half) / grid.dx).astype(int), 1, grid.n - 1) - 1
    scale = 1.0 / (ens.n * grid.dx)
    rho = np.bincount(idx, minlength=grid.size) * scale
    m = np.bincount(idx, weights=ens.v[:, 0], minlength=grid.size) * scale
    return FieldState(rho=rho, m=m)


@dataclass
class FieldDistance:
    l1_rho: float
    l1_m: float


def compare(grid: Grid1D, a: FieldState, b: FieldState) -> FieldDistance:
    """dx-weighted L1 distances between two states on the same grid."""
    if a.rho.shape != (grid.size,) or b.rho.shape != (grid.size,):
        raise ValueError("states do not live on this grid")
    return FieldDistance(
        l1_rho=float(np.abs(a.rho - b.rho).sum() * grid.dx),
        l1_m=float(np.abs(a.m - b.m).sum() * grid.dx),
    )
