"""Particle and continuum solvers for nonlocal velocity-alignment dynamics.

The interaction weights are Green's functions of a screened Poisson operator,
which lets the continuum solver evaluate its nonlocal force with an O(n)
tridiagonal solve instead of O(n^2) quadrature.
"""

from .config import ConfigError, SimConfig, load_config
from .elliptic import (
    AuxFields,
    Grid1D,
    TridiagonalSystem,
    assemble,
    riemann_oracle,
    riemann_oracle_parallel,
    solve_aux,
    thomas_solve,
)
from .hyperbolic import (
    CFL_LIMIT,
    VACUUM_RHO,
    FieldState,
    StepRejectedError,
    floor_state,
    kt_flux,
    minmod,
    reconstruct,
    rhs,
    source,
    ssp_rk2_step,
    velocity,
)
from .kernels import (
    BESSEL_BALL,
    BOUNDED1D,
    FREE1D,
    RATIONAL,
    ImagePointError,
    KernelDomainError,
    KernelSpec,
    SingularityError,
    bessel_k,
    eval_bessel_ball,
    eval_bounded_1d,
    eval_cs_rational,
    eval_free_space_1d,
    free_space_profile,
    verify_green_residual,
)
from .macro import (
    FieldDistance,
    MacroRunResult,
    bin_particles,
    compare,
    conserved_totals,
    cosine_profiles,
    galilean_shift,
    init_fields,
    kinetic_energy,
    run_macro,
)
from .particles import (
    CentroidState,
    FlockingDecision,
    FlockReport,
    ParticleEnsemble,
    ParticleRunResult,
    adaptive_simpson,
    centroid,
    check_flocking_condition,
    cs_acceleration,
    flock_metrics,
    lyapunov_value,
    run_particles,
    sample_from_profile,
    to_fluctuation_frame,
    verlet_step,
)

__version__ = "0.1.0"
