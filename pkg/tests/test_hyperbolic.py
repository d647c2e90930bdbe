import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flocksim.elliptic import AuxFields, Grid1D, solve_aux
from flocksim.hyperbolic import (
    CFL_LIMIT,
    VACUUM_RHO,
    FieldState,
    StepRejectedError,
    floor_state,
    kt_flux,
    max_speed,
    minmod,
    reconstruct,
    rhs,
    source,
    ssp_rk2_step,
    velocity,
)

TWO_PI = 2.0 * math.pi

finite = st.floats(-1e6, 1e6, allow_nan=False)


def zero_aux(state):
    z = np.zeros_like(state.rho)
    return AuxFields(z.copy(), z.copy())


def bump_state(grid, speed=0.0):
    rho = np.exp(-4.0 * grid.nodes**2)
    rho[rho < 1e-10] = 0.0
    return FieldState(rho, speed * rho)


# ---------------------------------------------------------------------------
# state container and velocity recovery
# ---------------------------------------------------------------------------

def test_field_state_copy_is_independent_and_keeps_time():
    s = FieldState(np.ones(4), np.zeros(4), t=1.5)
    c = s.copy()
    c.rho[0] = 99.0
    assert s.rho[0] == 1.0
    assert c.t == 1.5


def test_velocity_vacuum_rule():
    rho = np.array([1.0, 2.0, 0.0, 1e-15])
    m = np.array([2.0, 1.0, 3.0, 1.0])
    u = velocity(rho, m)
    assert u[0] == pytest.approx(2.0)
    assert u[1] == pytest.approx(0.5)
    # cells at or below the floor report zero speed instead of dividing
    assert u[2] == 0.0
    assert u[3] == 0.0


def test_velocity_floor_is_adjustable():
    u = velocity(np.array([1e-6]), np.array([1e-6]), floor=1e-8)
    assert u[0] == pytest.approx(1.0)
    u = velocity(np.array([1e-6]), np.array([1e-6]), floor=1e-3)
    assert u[0] == 0.0


# ---------------------------------------------------------------------------
# limiter and reconstruction
# ---------------------------------------------------------------------------

def test_minmod_examples():
    assert minmod(1.0, 2.0) == 1.0
    assert minmod(-2.0, -0.5) == -0.5
    assert minmod(1.0, -1.0) == 0.0
    assert minmod(0.0, 5.0) == 0.0


@given(a=finite, b=finite)
def test_minmod_properties(a, b):
    r = minmod(a, b)
    assert abs(r) <= abs(a)
    assert abs(r) <= abs(b)
    if np.sign(a) == np.sign(b):
        assert r == (a if abs(a) < abs(b) else b)
    else:
        assert r == 0.0


def test_reconstruct_shapes():
    left, right = reconstruct(np.ones(10))
    assert left.shape == right.shape == (11,)


def test_reconstruct_constant_interior():
    left, right = reconstruct(np.full(8, 3.0))
    # interior interfaces see the constant from both sides
    assert np.all(left[1:-1] == 3.0)
    assert np.all(right[1:-1] == 3.0)
    # outermost interfaces border the vacuum padding
    assert right[0] <= 3.0
    assert left[-1] <= 3.0


def test_reconstruct_linear_is_exact_inside():
    vals = np.arange(1.0, 9.0)
    left, right = reconstruct(vals)
    # away from the vacuum edges a linear profile reconstructs exactly
    assert np.allclose(left[2:-2], vals[1:-2] + 0.5)
    assert np.allclose(right[2:-2], vals[2:-1] - 0.5)


def test_reconstruct_extremum_goes_flat():
    vals = np.array([0.0, 1.0, 0.0])
    left, right = reconstruct(vals)
    # the limiter kills the slope at the peak cell, so both of its interface
    # values equal the cell average
    assert left[2] == 1.0
    assert right[1] == 1.0


# ---------------------------------------------------------------------------
# interface flux
# ---------------------------------------------------------------------------

def test_kt_flux_continuous_state_is_exact():
    f_rho, f_m = kt_flux(1.0, 0.7, 1.0, 0.7)
    assert f_rho == pytest.approx(0.7)
    assert f_m == pytest.approx(0.49)


def test_kt_flux_symmetric_collision():
    # equal densities moving toward each other: mass fluxes cancel, the
    # momentum flux upwinds both streams
    f_rho, f_m = kt_flux(1.0, 1.0, 1.0, -1.0)
    assert f_rho == pytest.approx(0.0)
    assert f_m == pytest.approx(2.0)


def test_kt_flux_vacuum_interface_is_quiet():
    f_rho, f_m = kt_flux(0.0, 0.0, 0.0, 0.0)
    assert f_rho == 0.0
    assert f_m == 0.0


@settings(max_examples=60)
@given(rho=st.floats(1e-6, 10.0), u=st.floats(-5.0, 5.0))
def test_kt_flux_consistency(rho, u):
    # equal states above the vacuum floor reduce to the pointwise flux
    f_rho, f_m = kt_flux(rho, rho * u, rho, rho * u)
    assert f_rho == pytest.approx(rho * u, rel=1e-12, abs=1e-15)
    assert f_m == pytest.approx(rho * u * u, rel=1e-12, abs=1e-15)


# ---------------------------------------------------------------------------
# alignment source
# ---------------------------------------------------------------------------

def test_source_mass_row_is_zero():
    g = Grid1D(TWO_PI, 64)
    state = bump_state(g, speed=0.3)
    aux = solve_aux(g, state.rho, state.m, 4.0, 1.0)
    s_rho, s_m = source(state, aux)
    assert np.all(s_rho == 0.0)
    assert s_m.shape == state.m.shape


def test_source_vanishes_on_aligned_state():
    # when u is constant, m = c rho makes rho*(G*m) equal c*rho*(G*rho)
    # and m*(G*rho) the same thing, so the momentum source cancels pointwise
    g = Grid1D(TWO_PI, 64)
    rho = np.exp(-g.nodes**2)
    c = 0.8
    aux = solve_aux(g, rho, c * rho, 4.0, 1.0)
    _, s_m = source(FieldState(rho, c * rho), aux)
    assert np.abs(s_m).max() < 1e-12 * np.abs(rho * aux.y1).max()


def test_source_total_momentum_is_conserved():
    g = Grid1D(TWO_PI, 120)
    rng = np.random.default_rng(3)
    rho = np.abs(rng.normal(size=g.size))
    m = rng.normal(size=g.size)
    aux = solve_aux(g, rho, m, 4.0, 1.0)
    _, s_m = source(FieldState(rho, m), aux)
    scale = np.abs(s_m).sum() * g.dx
    assert abs(s_m.sum() * g.dx) <= 1e-12 * max(scale, 1e-30)


# ---------------------------------------------------------------------------
# semi-discrete rhs
# ---------------------------------------------------------------------------

def test_rhs_conserves_mass_exactly_for_compact_support():
    # fluxes telescope and the outermost interfaces touch vacuum, so the
    # total mass derivative is exactly zero when the state has a margin of
    # empty cells
    g = Grid1D(TWO_PI, 100)
    state = bump_state(g, speed=0.4)
    assert state.rho[0] == 0.0 and state.rho[-1] == 0.0
    drho, dm = rhs(g, state, zero_aux(state))
    assert abs(drho.sum() * g.dx) < 1e-15
    assert drho.shape == dm.shape == (g.size,)


def test_rhs_still_state_is_static():
    g = Grid1D(TWO_PI, 80)
    state = bump_state(g, speed=0.0)
    drho, dm = rhs(g, state, zero_aux(state))
    assert np.abs(drho).max() == 0.0
    assert np.abs(dm).max() == 0.0


# ---------------------------------------------------------------------------
# positivity repair and speed estimate
# ---------------------------------------------------------------------------

def test_floor_state_clips_and_zeroes():
    s = FieldState(np.array([1.0, -1e-14, 0.0]), np.array([0.5, 0.5, 0.5]),
                   t=2.0)
    f = floor_state(s)
    assert np.all(f.rho >= 0.0)
    # cells emptied of mass carry no momentum either
    assert f.m[1] == 0.0
    assert f.m[2] == 0.0
    assert f.m[0] == 0.5
    assert f.t == 2.0


def test_max_speed():
    s = FieldState(np.array([1.0, 2.0, 1e-15]), np.array([0.5, -3.0, 4.0]))
    assert max_speed(s, VACUUM_RHO) == pytest.approx(1.5)


# ---------------------------------------------------------------------------
# time stepper
# ---------------------------------------------------------------------------

def test_step_advances_clock_and_conserves_mass():
    g = Grid1D(TWO_PI, 100)
    state = bump_state(g, speed=0.4)
    mass0 = state.rho.sum() * g.dx
    out = ssp_rk2_step(g, state, 1e-3, zero_aux)
    assert out.t == pytest.approx(1e-3)
    assert out.rho.sum() * g.dx == pytest.approx(mass0, rel=1e-13)
    # the input state is untouched
    assert state.t == 0.0


def test_step_keeps_density_nonnegative():
    g = Grid1D(TWO_PI, 100)
    state = bump_state(g, speed=1.0)
    cur = state
    for _ in range(50):
        cur = ssp_rk2_step(g, cur, 1e-3, zero_aux)
    assert cur.rho.min() >= 0.0


def test_step_rejects_cfl_violation():
    g = Grid1D(TWO_PI, 100)
    state = bump_state(g, speed=10.0)
    dt = 0.5 * CFL_LIMIT * g.dx / 10.0
    ssp_rk2_step(g, state, dt, zero_aux)  # comfortably inside the limit
    with pytest.raises(StepRejectedError) as info:
        ssp_rk2_step(g, state, 3.0 * dt, zero_aux)
    assert info.value.cfl > CFL_LIMIT


def test_step_rejection_reports_numbers():
    g = Grid1D(TWO_PI, 50)
    state = bump_state(g, speed=5.0)
    with pytest.raises(StepRejectedError) as info:
        ssp_rk2_step(g, state, 1.0, zero_aux)
    msg = str(info.value)
    assert "courant" in msg.lower()
    assert info.value.dt == 1.0


def test_aux_provider_called_per_stage():
    g = Grid1D(TWO_PI, 60)
    state = bump_state(g, speed=0.2)
    calls = []

    def provider(st_):
        calls.append(st_.rho.copy())
        return zero_aux(st_)

    ssp_rk2_step(g, state, 1e-3, provider)
    assert len(calls) == 2
    # the second stage sees the predicted state, not the input
    assert not np.array_equal(calls[0], calls[1])


def test_advection_moves_mass_downstream():
    g = Grid1D(TWO_PI, 200)
    state = bump_state(g, speed=0.5)
    x_bar0 = (g.nodes * state.rho).sum() / state.rho.sum()
    cur = state
    for _ in range(200):
        cur = ssp_rk2_step(g, cur, 1e-3, zero_aux)
    x_bar = (g.nodes * cur.rho).sum() / cur.rho.sum()
    assert x_bar - x_bar0 == pytest.approx(0.5 * 0.2, rel=0.05)


def test_max_velocity_never_grows_without_source():
    # the pressureless flux cannot create speeds above the initial bound
    g = Grid1D(TWO_PI, 150)
    rho = np.exp(-2.0 * g.nodes**2)
    rho[rho < 1e-10] = 0.0
    state = FieldState(rho, -np.sin(g.nodes / 2.0) * rho)
    u0 = np.abs(velocity(state.rho, state.m)).max()
    cur = state
    for _ in range(300):
        cur = ssp_rk2_step(g, cur, 1e-3, zero_aux)
    u = np.abs(velocity(cur.rho, cur.m)).max()
    assert u <= u0 * (1.0 + 1e-8)
