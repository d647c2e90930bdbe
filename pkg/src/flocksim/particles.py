"""Microscopic alignment dynamics.

N agents carry positions and velocities in R^d and relax their velocities
toward each other with pairwise communication weights,

    dx_i/dt = v_i
    dv_i/dt = (1/N) sum_j psi(x_j, x_i) (v_j - v_i)

Weights come from `kernels.KernelSpec` or from any callable psi(x_block, s).
The right hand side conserves total momentum exactly (psi symmetric) and
contracts velocity spread, which is what the flocking certificate below
quantifies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .kernels import (
    BESSEL_BALL,
    BOUNDED1D,
    FREE1D,
    RATIONAL,
    KernelSpec,
)


@dataclass
class ParticleEnsemble:
    """Positions x and velocities v, both shaped (N, d), plus a clock t."""

    x: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        self.v = np.atleast_2d(np.asarray(self.v, dtype=float))
        if self.x.ndim != 2 or self.x.shape != self.v.shape:
            raise ValueError(
                f"x and v must share a (N, d) shape, got {self.x.shape} and {self.v.shape}")
        if self.x.shape[0] < 1:
            raise ValueError("need at least one particle")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def copy(self) -> "ParticleEnsemble":
        return ParticleEnsemble(self.x.copy(), self.v.copy(), self.t)


@dataclass
class CentroidState:
    """Mean position and mean velocity, each shaped (d,)."""

    x_c: np.ndarray
    v_c: np.ndarray


def centroid(ens: ParticleEnsemble) -> CentroidState:
    """Arithmetic means of positions and velocities."""
    return CentroidState(x_c=ens.x.mean(axis=0), v_c=ens.v.mean(axis=0))


def to_fluctuation_frame(ens: ParticleEnsemble) -> ParticleEnsemble:
    """Subtract the centroid from both coordinates.

    The centroid moves in a straight line, so the dynamics of the fluctuation
    variables are autonomous whenever psi depends only on differences.
    """
    c = centroid(ens)
    return ParticleEnsemble(ens.x - c.x_c, ens.v - c.v_c, ens.t)


def _weights_from(kernel, x: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Communication weights psi(x_j, s) for every row x_j; s is one point."""
    if callable(kernel) and not isinstance(kernel, KernelSpec):
        return np.asarray(kernel(x, s), dtype=float).reshape(-1)
    spec = kernel
    if spec.variant == FREE1D:
        return np.asarray(kernels.eval_free_space_1d(spec, x[:, 0], s[0]))
    if spec.variant == BOUNDED1D:
        return np.asarray(kernels.eval_bounded_1d(spec, x[:, 0], s[0]))
    if spec.variant == RATIONAL:
        # depends on separation only, so feed distances through the 1D form
        r = np.linalg.norm(x - s, axis=1)
        return np.asarray(kernels.eval_cs_rational(spec, r, 0.0))
    if spec.variant == BESSEL_BALL:
        return np.array([kernels.eval_bessel_ball(spec, xj, s) for xj in x])
    raise ValueError(f"unsupported kernel {kernel!r}")


def _check_domain(ens: ParticleEnsemble, kernel):
    """Raise a domain error naming the first offending particle, if any."""
    if not isinstance(kernel, KernelSpec):
        return
    if kernel.variant == BOUNDED1D:
        half = 0.5 * kernel.L
        bad = np.nonzero(np.abs(ens.x[:, 0]) > half + 1e-12 * kernel.L)[0]
        if bad.size:
            i = int(bad[0])
            raise kernels.KernelDomainError(
                f"particle {i} at x={ens.x[i, 0]!r} outside [{-half}, {half}]")
    elif kernel.variant == BESSEL_BALL:
        norms = np.linalg.norm(ens.x, axis=1)
        bad = np.nonzero(norms > kernel.r * (1.0 + 1e-12))[0]
        if bad.size:
            i = int(bad[0])
            raise kernels.KernelDomainError(
                f"particle {i} at |x|={norms[i]!r} outside ball of radius {kernel.r}")


def _accel_direct(ens: ParticleEnsemble, kernel) -> np.ndarray:
    """Reference O(N^2) force: every pair evaluated, self term skipped."""
    x, v = ens.x, ens.v
    n = ens.n
    a = np.empty_like(v)
    for i in range(n):
        w = _weights_from(kernel, x, x[i])
        w[i] = 0.0
        a[i] = (w @ v - v[i] * w.sum()) / n
    return a


def _accel_scan(ens: ParticleEnsemble, spec: KernelSpec) -> np.ndarray:
    """O(N log N) force for the two separable 1D kernels.

    After sorting, both kernels factor as psi_ij = C p_(min j) q_(max j), so
    the pair sums collapse to prefix/suffix sums.  Including the j = i term in
    both sums is harmless: it cancels inside psi (v_j - v_i).
    """
    order = np.argsort(ens.x[:, 0], kind="stable")
    xs = ens.x[order, 0]
    vs = ens.v[order, :]
    n = ens.n
    if spec.variant == BOUNDED1D:
        half = 0.5 * spec.L
        if xs[0] < -half - 1e-12 * spec.L or xs[-1] > half + 1e-12 * spec.L:
            raise kernels.KernelDomainError(
                f"positions range [{xs[0]}, {xs[-1]}] outside [{-half}, {half}]")
        p = np.sinh(spec.lam * (xs + half))
        q = np.sinh(spec.lam * (half - xs))
        amp = 2.0 * spec.k / spec.lam / math.sinh(spec.lam * spec.L)
    else:
        span = spec.lam * (xs[-1] - xs[0])
        if span > 600.0:
            # exp factorization would overflow; pay the quadratic price
            return _accel_direct(ens, spec)
        z = spec.lam * (xs - xs[0])
        p = np.exp(z)
        q = np.exp(-z)
        amp = spec.k / spec.lam
    pv = np.cumsum(p[:, None] * vs, axis=0)                 # includes j = i
    qv_rev = np.cumsum((q[:, None] * vs)[::-1], axis=0)[::-1]
    qv = np.vstack([qv_rev[1:], np.zeros((1, ens.dim))])    # strictly j > i
    pw = np.cumsum(p)
    qw_rev = np.cumsum(q[::-1])[::-1]
    qw = np.concatenate([qw_rev[1:], [0.0]])
    sum_pv = amp * (q[:, None] * pv + p[:, None] * qv)      # sum_j psi_ij v_j
    sum_pw = amp * (q * pw + p * qw)                        # sum_j psi_ij
    a_sorted = (sum_pv - vs * sum_pw[:, None]) / n
    a = np.empty_like(a_sorted)
    a[order] = a_sorted
    return a


def cs_acceleration(ens: ParticleEnsemble, kernel, method: str = "auto") -> np.ndarray:
    """Alignment force (1/N) sum_j psi(x_j, x_i)(v_j - v_i) for every agent.

    method: "direct" for the all-pairs baseline, "scan" for the sorted
    prefix-sum route (free-space and bounded 1D kernels only), "auto" to pick
    scan whenever it applies.
    """
    if method not in ("auto", "direct", "scan"):
        raise ValueError(f"unknown method {method!r}")
    _check_domain(ens, kernel)
    separable = (isinstance(kernel, KernelSpec)
                 and kernel.variant in (FREE1D, BOUNDED1D)
                 and ens.dim == 1)
    if method == "scan" and not separable:
        raise ValueError("scan route needs a free-space or bounded 1D kernel and d = 1")
    if separable and method != "direct":
        return _accel_scan(ens, kernel)
    return _accel_direct(ens, kernel)


def verlet_step(ens: ParticleEnsemble, kernel, dt: float,
                method: str = "auto") -> ParticleEnsemble:
    """One step of velocity Verlet adapted to a velocity-dependent force.

    The closing average needs the force at the end of the step, and that force
    depends on the unknown end velocity, so we predict it with a full Euler
    kick before averaging.  This keeps the update explicit and second order in
    both coordinates.
    """
    if dt <= 0:
        raise ValueError(f"require dt > 0, got dt={dt}")
    a0 = cs_acceleration(ens, kernel, method)
    v_half = ens.v + 0.5 * dt * a0
    x1 = ens.x + dt * v_half
    v_pred = ens.v + dt * a0
    a1 = cs_acceleration(ParticleEnsemble(x1, v_pred), kernel, method)
    v1 = ens.v + 0.5 * dt * (a0 + a1)
    return ParticleEnsemble(x1, v1, ens.t + dt)


# ---------------------------------------------------------------------------
# diagnostics and the flocking certificate
# ---------------------------------------------------------------------------

@dataclass
class FlockReport:
    t: float
    x_norm: float          # sqrt(sum_i |x_i - xbar|^2)
    v_norm: float          # sqrt(sum_i |v_i - vbar|^2)
    max_pair_dist: float
    lyapunov: float = math.nan   # v_norm + int_0^{x_norm} phi, when phi given
    centroid: CentroidState | None = None


def flock_metrics(ens: ParticleEnsemble, phi=None) -> FlockReport:
    """Fluctuation norms, largest separation, and (with phi) the Lyapunov value.

    phi is a scalar confinement-rate function; the Lyapunov functional
    v_norm + int_0^{x_norm} phi(s) ds is nonincreasing along the dynamics
    whenever phi minorizes the pair weight at separation 2s.
    """
    c = centroid(ens)
    dx = ens.x - c.x_c
    dv = ens.v - c.v_c
    x_norm = float(np.sqrt((dx**2).sum()))
    v_norm = float(np.sqrt((dv**2).sum()))
    if ens.dim == 1:
        mx = float(ens.x.max() - ens.x.min())
    else:
        mx = 0.0
        for i in range(ens.n - 1):
            d = np.linalg.norm(ens.x[i + 1:] - ens.x[i], axis=1)
            mx = max(mx, float(d.max()))
    lyap = math.nan
    if phi is not None:
        lyap = v_norm + adaptive_simpson(phi, 0.0, x_norm)
    return FlockReport(t=ens.t, x_norm=x_norm, v_norm=v_norm,
                       max_pair_dist=mx, lyapunov=lyap, centroid=c)


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-9) -> float:
    """Adaptive Simpson quadrature with interval-halving error control."""
    if b <= a:
        return 0.0

    def simpson(lo, hi, flo, fmid, fhi):
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    def recurse(lo, hi, flo, fmid, fhi, whole, eps, depth):
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm = f(lm)
        frm = f(rm)
        left = simpson(lo, mid, flo, flm, fmid)
        right = simpson(mid, hi, fmid, frm, fhi)
        if depth > 48 or abs(left + right - whole) < 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return (recurse(lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1)
                + recurse(mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))

    mid = 0.5 * (a + b)
    fa, fm, fb = f(a), f(mid), f(b)
    whole = simpson(a, b, fa, fm, fb)
    return recurse(a, b, fa, fm, fb, whole, tol, 0)


def _phi_factory(kernel, n: int, x_max: float | None):
    """Radially-decreasing minorant phi(s) of the pair weight at separations 2s.

    Returns (phi, s_max, integral) where integral(a, b) evaluates
    int_a^b phi(s) ds (b=None meaning the end of support, possibly infinity)
    and s_max is the end of phi's support (None when phi lives on the whole
    half line).  Every pair weight between agents whose fluctuation norm is
    below s is at least phi(s), which is the hypothesis the flocking
    certificate runs on.  All integrals go through adaptive Simpson; the
    closed forms that exist for special cases serve as test oracles only.
    """
    if not isinstance(kernel, KernelSpec):
        raise ValueError("certificate needs a KernelSpec kernel")
    if kernel.variant == FREE1D:
        k, lam = kernel.k, kernel.lam

        def phi(s):
            return (2.0 / n) * (k / lam) * math.exp(-2.0 * lam * s)

        def integral(a, b):
            # the tail shrinks like e^(-2 lam s): 20/lam past a is below 1e-17
            hi = a + 20.0 / lam if b is None else b
            return adaptive_simpson(phi, a, hi, tol=1e-9)

        return phi, None, integral
    if kernel.variant == RATIONAL:
        K, gamma = kernel.K, kernel.gamma

        def phi(s):
            return (2.0 / n) * K / (1.0 + 4.0 * s * s) ** gamma

        def integral(a, b):
            if b is None:
                if gamma <= 0.5:
                    return math.inf   # divergent tail: unconditional flocking
                # truncate far out; the dropped tail only makes the
                # threshold smaller, which keeps the certificate sound
                hi = max(40.0 * max(a, 1.0), 1000.0)
            else:
                hi = b
            return adaptive_simpson(phi, a, hi, tol=1e-9)

        return phi, None, integral
    if kernel.variant == BOUNDED1D:
        if x_max is None:
            x_max = 0.475 * kernel.L
        if not 0.0 < x_max < 0.5 * kernel.L:
            raise ValueError(
                f"confinement half-width must sit inside (0, L/2), got {x_max}")
        s_max = 0.5 * x_max

        def phi(s):
            if s > s_max:
                return 0.0
            # worst placement of a pair at separation 2s inside [-x_max, x_max]
            return (2.0 / n) * kernels.eval_bounded_1d(kernel, -x_max, -x_max + 2.0 * s)

        def integral(a, b):
            hi = s_max if b is None else min(b, s_max)
            return adaptive_simpson(phi, min(a, hi), hi, tol=1e-9)

        return phi, s_max, integral
    raise ValueError(f"no minorant route for kernel variant {kernel.variant!r}")


@dataclass
class FlockingDecision:
    guaranteed: bool
    v0_norm: float
    x0_norm: float
    threshold: float       # int_{x0_norm}^inf phi(s) ds
    x_bar: float | None    # confinement radius for the fluctuation norm
    decay_rate: float | None

    def velocity_bound(self, t) -> float:
        """Guaranteed envelope for the velocity fluctuation norm at time t."""
        if not self.guaranteed:
            raise ValueError("bound only holds when the threshold test passes")
        return self.v0_norm * np.exp(-self.decay_rate * np.asarray(t))


def check_flocking_condition(ens: ParticleEnsemble, kernel,
                             x_max: float | None = None) -> FlockingDecision:
    """Decide whether initial data sits below the flocking threshold.

    If the initial velocity fluctuation is smaller than the integral of the
    minorant beyond the initial position fluctuation, the position fluctuation
    stays trapped below the root x_bar of

        v_norm0 = int_{x_norm0}^{x_bar} phi(s) ds

    and the velocity fluctuation decays at least as fast as e^(-phi(x_bar) t).
    """
    if ens.dim != 1:
        raise ValueError("certificate implemented for 1D ensembles")
    m = flock_metrics(ens)
    phi, s_max, integral = _phi_factory(kernel, ens.n, x_max)
    threshold = integral(m.x_norm, None)
    if not m.v_norm < threshold:
        return FlockingDecision(guaranteed=False, v0_norm=m.v_norm,
                                x0_norm=m.x_norm, threshold=threshold,
                                x_bar=None, decay_rate=None)
    lo = m.x_norm
    hi = lo + 1.0 if s_max is None else s_max
    if s_max is None:
        while integral(lo, hi) <= m.v_norm:
            hi = lo + 2.0 * (hi - lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if integral(m.x_norm, mid) < m.v_norm:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * max(1.0, hi):
            break
    x_bar = hi
    return FlockingDecision(guaranteed=True, v0_norm=m.v_norm,
                            x0_norm=m.x_norm, threshold=threshold,
                            x_bar=x_bar, decay_rate=phi(x_bar))


def lyapunov_value(ens: ParticleEnsemble, kernel, x_max: float | None = None) -> float:
    """v_norm + int_0^{x_norm} phi(s) ds, nonincreasing along the flow."""
    m = flock_metrics(ens)
    phi, s_max, integral = _phi_factory(kernel, ens.n, x_max)
    return m.v_norm + integral(0.0, m.x_norm)


# ---------------------------------------------------------------------------
# initial data and driver
# ---------------------------------------------------------------------------

def sample_from_profile(rho0, u0, n: int, L: float, seed: int = 0) -> ParticleEnsemble:
    """Stratified inverse-CDF positions for density rho0, velocities u0(x).

    The CDF is tabulated by trapezoid sums on 10^4 + 1 nodes across
    [-L/2, L/2] and inverted by linear interpolation at one uniform draw per
    stratum (i + xi_i)/n, which kills most of the i.i.d. sampling noise while
    staying unbiased.  Velocities are deterministic: v_i = u0(x_i).
    """
    if n < 1:
        raise ValueError(f"need n >= 1 particles, got {n}")
    xs = np.linspace(-0.5 * L, 0.5 * L, 10001)
    pdf = np.clip(np.asarray(rho0(xs), dtype=float), 0.0, None)
    if not pdf.max() > 0:
        raise ValueError("density profile vanishes on the whole interval")
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(xs))])
    cdf /= cdf[-1]
    rng = np.random.default_rng(seed)
    u = (np.arange(n) + rng.random(n)) / n
    x = np.interp(u, cdf, xs)
    v = np.asarray(u0(x), dtype=float)
    return ParticleEnsemble(x[:, None], v[:, None])


@dataclass
class ParticleRunResult:
    times: np.ndarray
    x_norm: np.ndarray
    v_norm: np.ndarray
    max_pair_dist: np.ndarray
    lyapunov: np.ndarray
    x_center: np.ndarray   # (records, d)
    v_center: np.ndarray   # (records, d)
    snapshots: list = field(default_factory=list)   # (t, ParticleEnsemble) pairs
    final: ParticleEnsemble | None = None


def run_particles(ens: ParticleEnsemble, kernel, dt: float, n_steps: int,
                  record_every: int = 1, snapshot_every: int = 0,
                  method: str = "auto") -> ParticleRunResult:
    """March the ensemble n_steps Verlet steps, recording spread diagnostics."""
    if dt <= 0 or n_steps < 0:
        raise ValueError(f"need dt > 0 and n_steps >= 0, got dt={dt}, n_steps={n_steps}")
    if record_every < 1:
        raise ValueError(f"record_every must be >= 1, got {record_every}")
    try:
        phi, _, _ = _phi_factory(kernel, ens.n, None)
    except ValueError:
        phi = None   # no minorant for this kernel; the lyapunov column is nan
    rows = []
    centers = []
    snapshots = []
    state = ens.copy()
    for step in range(n_steps + 1):
        t = ens.t + step * dt
        if step % record_every == 0 or step == n_steps:
            m = flock_metrics(state, phi)
            rows.append((t, m.x_norm, m.v_norm, m.max_pair_dist, m.lyapunov))
            centers.append(m.centroid)
        if snapshot_every > 0 and (step % snapshot_every == 0 or step == n_steps):
            snapshots.append((t, state.copy()))
        if step < n_steps:
            state = verlet_step(state, kernel, dt, method)
    arr = np.array(rows)
    return ParticleRunResult(
        times=arr[:, 0],
        x_norm=arr[:, 1],
        v_norm=arr[:, 2],
        max_pair_dist=arr[:, 3],
        lyapunov=arr[:, 4],
        x_center=np.array([c.x_c for c in centers]),
        v_center=np.array([c.v_c for c in centers]),
        snapshots=snapshots,
        final=state,
    )
