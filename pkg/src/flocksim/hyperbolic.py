"""Second-order central scheme for the convective part of the field equations.

The pressureless flux F(rho, m) = (m, m u) is advanced with minmod-limited
reconstruction and the local-speed central flux, two-stage strong-stability
RK in time, vacuum-safe velocities throughout.  The nonlocal alignment source
enters through auxiliary fields that a caller-supplied provider computes per
stage, so this module never touches the elliptic machinery directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elliptic import AuxFields, Grid1D

# below this density a cell is treated as vacuum when forming velocities
VACUUM_RHO = 1e-12

# hard ceiling on a |u| dt / dx before a step is refused
CFL_LIMIT = 0.45


class StepRejectedError(RuntimeError):
    """Raised when a step would violate the CFL restriction.

    Carries the offending Courant number in .cfl so drivers can shrink dt;
    drivers that know their step counter re-raise with .step filled in.
    """

    def __init__(self, cfl: float, dt: float, step: int | None = None):
        where = "" if step is None else f" at step {step}"
        super().__init__(
            f"Courant number {cfl:.6g} exceeds {CFL_LIMIT}{where} "
            f"with dt={dt}; shrink the step")
        self.cfl = cfl
        self.dt = dt
        self.step = step


@dataclass
class FieldState:
    """Density rho and momentum m at the interior nodes of a Grid1D.

    Carries its own clock t so a snapshot is self-describing.
    """

    rho: np.ndarray
    m: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.m = np.asarray(self.m, dtype=float)
        if self.rho.ndim != 1 or self.rho.shape != self.m.shape:
            raise ValueError(
                f"rho and m must share a 1D shape, got {self.rho.shape} and {self.m.shape}")

    def copy(self) -> "FieldState":
        return FieldState(self.rho.copy(), self.m.copy(), self.t)


def velocity(rho: np.ndarray, m: np.ndarray, floor: float = VACUUM_RHO) -> np.ndarray:
    """m / rho where there is mass, zero in vacuum."""
    rho = np.asarray(rho, dtype=float)
    m = np.asarray(m, dtype=float)
    safe = np.where(rho > floor, rho, 1.0)
    return np.where(rho > floor, m / safe, 0.0)


def minmod(a, b):
    """Elementwise slope limiter: smaller magnitude when signs agree, else 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    same = np.sign(a) == np.sign(b)
    smaller = np.where(np.abs(a) < np.abs(b), a, b)
    out = np.where(same, smaller, 0.0)
    return out if out.ndim else float(out)


def reconstruct(field: np.ndarray):
    """Limited interface values of a cell field padded with two vacuum cells.

    Returns (left, right): the states just left and just right of each of the
    m+1 interfaces between the padded cells that touch the interior.
    """
    field = np.asarray(field, dtype=float)
    padded = np.concatenate([[0.0, 0.0], field, [0.0, 0.0]])
    diffs = np.diff(padded)
    slopes = minmod(diffs[1:], diffs[:-1])      # one slope per non-edge cell
    cells = padded[1:-1]
    left = cells[:-1] + 0.5 * slopes[:-1]
    right = cells[1:] - 0.5 * slopes[1:]
    return left, right


def kt_flux(rho_l, m_l, rho_r, m_r, floor: float = VACUUM_RHO):
    """Local-speed central flux for the pressureless system at one interface.

    The wave speed is the larger of the two cell speeds |u|; both flux
    components are the average of the one-sided fluxes minus the speed times
    the jump.
    """
    rho_l = np.asarray(rho_l, dtype=float)
    rho_r = np.asarray(rho_r, dtype=float)
    m_l = np.asarray(m_l, dtype=float)
    m_r = np.asarray(m_r, dtype=float)
    u_l = velocity(rho_l, m_l, floor)
    u_r = velocity(rho_r, m_r, floor)
    a = np.maximum(np.abs(u_l), np.abs(u_r))
    f_rho = 0.5 * (m_l + m_r - a * (rho_r - rho_l))
    f_m = 0.5 * (m_l * u_l + m_r * u_r - a * (m_r - m_l))
    if np.ndim(f_rho) == 0:
        return float(f_rho), float(f_m)
    return f_rho, f_m


def source(state: FieldState, aux: AuxFields):
    """Per-cell source pair: nothing for mass, rho (G*m) - m (G*rho) for momentum.

    Summing the momentum row over cells pairs (rho, G*m) against (m, G*rho);
    the discrete solve is symmetric, so the total vanishes to rounding and
    momentum is conserved.
    """
    return np.zeros_like(state.rho), state.rho * aux.y1 - state.m * aux.y2


def rhs(grid: Grid1D, state: FieldState, aux: AuxFields,
        floor: float = VACUUM_RHO):
    """Semi-discrete time derivative (drho/dt, dm/dt) including the source."""
    rho_l, rho_r = reconstruct(state.rho)
    m_l, m_r = reconstruct(state.m)
    f_rho, f_m = kt_flux(rho_l, m_l, rho_r, m_r, floor)
    s_rho, s_m = source(state, aux)
    drho = -(f_rho[1:] - f_rho[:-1]) / grid.dx + s_rho
    dm = -(f_m[1:] - f_m[:-1]) / grid.dx + s_m
    return drho, dm


def floor_state(state: FieldState) -> FieldState:
    """Clip negative densities to zero and wipe momentum from emptied cells."""
    rho = np.maximum(state.rho, 0.0)
    m = np.where(rho > 0.0, state.m, 0.0)
    return FieldState(rho=rho, m=m, t=state.t)


def max_speed(state: FieldState, floor: float = VACUUM_RHO) -> float:
    return float(np.abs(velocity(state.rho, state.m, floor)).max())


def ssp_rk2_step(grid: Grid1D, state: FieldState, dt: float, aux_provider,
                 floor: float = VACUUM_RHO) -> FieldState:
    """One Heun step: Euler predictor, then average, flooring after each stage.

    aux_provider maps a FieldState to the AuxFields entering the source; it
    runs once per stage so the nonlocal coupling stays second order.  Refuses
    the step up front when the current fields already break the CFL ceiling,
    reporting the offending Courant number.
    """
    if dt <= 0:
        raise ValueError(f"require dt > 0, got dt={dt}")
    cfl = max_speed(state, floor) * dt / grid.dx
    if cfl > CFL_LIMIT:
        raise StepRejectedError(cfl, dt)
    drho, dm = rhs(grid, state, aux_provider(state), floor)
    stage = floor_state(
        FieldState(state.rho + dt * drho, state.m + dt * dm, t=state.t + dt))
    drho2, dm2 = rhs(grid, stage, aux_provider(stage), floor)
    out = FieldState(
        0.5 * state.rho + 0.5 * (stage.rho + dt * drho2),
        0.5 * state.m + 0.5 * (stage.m + dt * dm2),
        t=state.t + dt,
    )
    return floor_state(out)
