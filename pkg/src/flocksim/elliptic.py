"""Fast inversion of the screened operator on an interval.

The nonlocal alignment force needs y = integral G(x, s) f(s) ds where G is the
kernel of -(1/(2k)) (d^2/dx^2 - lambda^2) with zero boundary values.  Instead
of quadrature against G (O(n^2) per field), we solve the two-point boundary
value problem

    y'' - lambda^2 y = -2k f,    y(-L/2) = y(L/2) = 0

with second-order centered differences and a tridiagonal factorization, which
is O(n).  `riemann_oracle` keeps the dense quadrature route alive as a cross
check and benchmark baseline.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .kernels import BOUNDED1D, KernelDomainError, KernelSpec


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on [-L/2, L/2] with n cells of width dx = L/n.

    Unknowns live at the n-1 interior nodes x_i = -L/2 + i dx, i = 1..n-1;
    the two boundary nodes carry the (zero) boundary values and are never
    stored.
    """

    L: float
    n: int

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"require L > 0, got L={self.L}")
        if self.n < 3:
            raise ValueError(f"require n >= 3, got n={self.n}")

    @property
    def dx(self) -> float:
        return self.L / self.n

    @property
    def size(self) -> int:
        """Number of interior nodes."""
        return self.n - 1

    @property
    def nodes(self) -> np.ndarray:
        return -0.5 * self.L + self.dx * np.arange(1, self.n)


@dataclass
class TridiagonalSystem:
    """Three diagonals and a right hand side; lower/upper have length m-1."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        m = len(self.diag)
        if m < 1 or len(self.lower) != m - 1 or len(self.upper) != m - 1:
            raise ValueError(
                f"inconsistent band lengths {len(self.lower)}/{m}/{len(self.upper)}")
        if len(self.rhs) != m:
            raise ValueError(f"rhs length {len(self.rhs)} does not match size {m}")

    def dense(self) -> np.ndarray:
        m = len(self.diag)
        a = np.diag(np.asarray(self.diag, dtype=float))
        a[np.arange(m - 1) + 1, np.arange(m - 1)] = self.lower
        a[np.arange(m - 1), np.arange(m - 1) + 1] = self.upper
        return a


def assemble(grid: Grid1D, k: float, lam: float, u: np.ndarray,
             boundary=(0.0, 0.0)) -> TridiagonalSystem:
    """Centered-difference system for y'' - lam^2 y = -2k u at interior nodes.

    Known boundary values (y_left, y_right) move to the right hand side with
    the stencil weight 1/dx^2; the default is homogeneous Dirichlet.  The
    matrix is symmetric and strictly diagonally dominant with margin lam^2,
    so the Thomas factorization below never needs pivoting.
    """
    if not lam > 0:
        raise ValueError(f"require lam > 0, got lam={lam}")
    if not k > 0:
        raise ValueError(f"require k > 0, got k={k}")
    u = np.asarray(u, dtype=float)
    m = grid.size
    if u.shape != (m,):
        raise ValueError(f"field shape {u.shape} does not match grid size {m}")
    inv2 = 1.0 / grid.dx**2
    diag = np.full(m, -2.0 * inv2 - lam**2)
    off = np.full(m - 1, inv2)
    rhs = -2.0 * k * u
    rhs = rhs.copy()
    rhs[0] -= boundary[0] * inv2
    rhs[-1] -= boundary[1] * inv2
    return TridiagonalSystem(lower=off.copy(), diag=diag, upper=off.copy(), rhs=rhs)


def thomas_solve(system: TridiagonalSystem) -> np.ndarray:
    """Gaussian elimination for tridiagonal systems, no pivoting, O(m).

    Raises np.linalg.LinAlgError when a pivot magnitude falls below
    1e-14 times the row scale; the assembled screened-operator systems are
    strictly dominant, so that only fires on hand-built degenerate input.
    """
    a = system.lower
    b = system.diag
    c = system.upper
    rhs = np.asarray(system.rhs, dtype=float)
    m = len(b)
    cp = np.empty(m - 1) if m > 1 else np.empty(0)
    dp = np.empty(m)
    scale = abs(b[0]) + (abs(c[0]) if m > 1 else 0.0)
    if abs(b[0]) <= 1e-14 * max(scale, 1.0):
        raise np.linalg.LinAlgError("zero pivot in row 0")
    if m > 1:
        cp[0] = c[0] / b[0]
    dp[0] = rhs[0] / b[0]
    for i in range(1, m):
        mlt = b[i] - a[i - 1] * cp[i - 1]
        scale = abs(b[i]) + abs(a[i - 1])
        if abs(mlt) <= 1e-14 * max(scale, 1.0):
            raise np.linalg.LinAlgError(f"zero pivot in row {i}")
        if i < m - 1:
            cp[i] = c[i] / mlt
        dp[i] = (rhs[i] - a[i - 1] * dp[i - 1]) / mlt
    y = np.empty(m)
    y[-1] = dp[-1]
    for i in range(m - 2, -1, -1):
        y[i] = dp[i] - cp[i] * y[i + 1]
    return y


@dataclass
class AuxFields:
    """Nonlocal convolutions entering the momentum source.

    y1 = G * m   (kernel applied to the momentum field)
    y2 = G * rho (kernel applied to the density field)
    """

    y1: np.ndarray
    y2: np.ndarray


def solve_aux(grid: Grid1D, rho: np.ndarray, m_field: np.ndarray,
              k: float, lam: float) -> AuxFields:
    """Both convolutions in two O(n) tridiagonal solves, zero boundary data."""
    y1 = thomas_solve(assemble(grid, k, lam, np.asarray(m_field, dtype=float)))
    y2 = thomas_solve(assemble(grid, k, lam, np.asarray(rho, dtype=float)))
    return AuxFields(y1=y1, y2=y2)


def _check_grid_kernel(grid: Grid1D, spec: KernelSpec):
    if spec.variant != BOUNDED1D:
        raise ValueError("quadrature oracle needs the bounded 1D kernel")
    if not math.isclose(spec.L, grid.L, rel_tol=1e-12):
        raise KernelDomainError(
            f"kernel interval L={spec.L} does not match grid L={grid.L}")


def riemann_oracle(grid: Grid1D, f: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Dense midpoint quadrature y_i = sum_j G(x_i, x_j) f_j dx, O(n^2).

    Agrees with the tridiagonal route to the discretization error of whichever
    side is rougher; kept as an independent path for verification and to give
    the benchmark an honest evaluate-every-pair baseline.
    """
    _check_grid_kernel(grid, spec)
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.size,):
        raise ValueError(f"field shape {f.shape} does not match grid size {grid.size}")
    x = grid.nodes
    lam = spec.lam
    half = 0.5 * spec.L
    p = lam * (x + half)
    q = lam * (half - x)
    pref = (2.0 * spec.k / lam) / math.sinh(lam * spec.L) * grid.dx
    y = np.empty(grid.size)
    for i in range(grid.size):
        w = np.sinh(np.minimum(p[i], p))
        w *= np.sinh(np.minimum(q[i], q))
        y[i] = pref * float(w @ f)
    return y


def riemann_oracle_parallel(grid: Grid1D, f: np.ndarray, spec: KernelSpec,
                            workers: int = 4) -> np.ndarray:
    """Same quadrature as `riemann_oracle` with rows split across threads.

    The row kernels are numpy calls that release the interpreter lock, so a
    handful of threads buys a real speedup on multicore hosts.  Results are
    identical to the serial route.
    """
    _check_grid_kernel(grid, spec)
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.size,):
        raise ValueError(f"field shape {f.shape} does not match grid size {grid.size}")
    if workers < 1:
        raise ValueError(f"need workers >= 1, got {workers}")
    x = grid.nodes
    lam = spec.lam
    half = 0.5 * spec.L
    p = lam * (x + half)
    q = lam * (half - x)
    pref = (2.0 * spec.k / lam) / math.sinh(lam * spec.L) * grid.dx
    y = np.empty(grid.size)

    def fill(lo, hi):
        for i in range(lo, hi):
            w = np.sinh(np.minimum(p[i], p))
            w *= np.sinh(np.minimum(q[i], q))
            y[i] = pref * float(w @ f)

    bounds = np.linspace(0, grid.size, workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fill, bounds[w], bounds[w + 1]) for w in range(workers)]
        for fut in futures:
            fut.result()
    return y
