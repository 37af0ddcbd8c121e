"""Finite-difference solver for the radial wave equation on the hyperbolic plane.

Solves u_tt = u_rr + coth(r) u_r + u/4 (that is, u_tt = -Delta u + u/4
restricted to radial functions) with u_t = 0 initially, as an independent
check on spectral synthesis of 2 cos(t s) multipliers.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import io as _io
from . import kernels
from .errors import BoundaryContaminationError, DomainError, StabilityError
from .spherical import RadialKernel

__all__ = ["RadialWaveState", "initial_state", "evolve", "energy",
           "wave_propagate", "support_extent", "snapshot_csv"]

DEFAULT_DR = 1e-3
DEFAULT_COURANT = 0.4
MAX_COURANT = 0.5


@dataclass(frozen=True, eq=False)
class RadialWaveState:
    """Radial wave field (u, u_t) at a given time on a uniform grid over [0, r_max]."""
    grid: np.ndarray
    u: np.ndarray
    u_t: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1 or g.size < 3 or g[0] != 0.0:
            raise DomainError("wave grid must start at 0 and have >= 3 points")
        d = np.diff(g)
        if np.max(np.abs(d - d[0])) > 1e-9 * d[0]:
            raise DomainError("wave grid must be uniform")
        for name in ("u", "u_t"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != g.shape:
                raise DomainError(f"{name} must match the grid")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "grid", g)

    @property
    def dr(self):
        return float(self.grid[1] - self.grid[0])


def _coth_grid(grid):
    c = np.zeros(grid.size)
    c[1:] = 1.0 / np.tanh(grid[1:])
    return c


def _operator(u, dr, coth):
    return kernels._radial_operator_numpy(u, dr, coth)


def initial_state(kernel, dr, r_max):
    """State with u = kernel profile and u_t = 0 on [0, r_max]."""
    n = int(round(r_max / dr))
    grid = np.arange(n + 1) * dr
    u = np.asarray(kernel(grid), dtype=float)
    return RadialWaveState(grid, u, np.zeros_like(u), 0.0)


def evolve(state, t, dt):
    """Advance ``state`` by ``t`` (negative runs backwards) with leapfrog steps.

    The step is adjusted down so that an integer number of steps lands on t.
    """
    dr = state.dr
    if dt <= 0:
        raise DomainError("dt must be positive; use a negative t to run backwards")
    if dt / dr > MAX_COURANT + 1e-12:
        raise StabilityError(f"dt/dr = {dt / dr:.3f} exceeds {MAX_COURANT}")
    if t == 0:
        return state
    nsteps = max(1, int(math.ceil(abs(t) / dt)))
    h = t / nsteps
    coth = _coth_grid(state.grid)
    u0 = state.u
    lu = _operator(u0, dr, coth)
    u_back = u0 - h * state.u_t + 0.5 * h * h * lu
    u_back[-1] = 0.0
    a, b = kernels.leapfrog(u_back, u0, dr, abs(h), nsteps - 1, coth) if nsteps > 1 else (u_back, u0)
    # one more step to get u_{n} and a centred velocity at step n
    b_prev, b_curr = a, b
    a2, b2 = kernels.leapfrog(b_prev, b_curr, dr, abs(h), 1, coth)
    _, c2 = kernels.leapfrog(a2, b2, dr, abs(h), 1, coth)
    u_t = (c2 - a2) / (2.0 * h)
    return RadialWaveState(state.grid, b2, u_t, state.time + t)


def energy(state):
    """int (u_t^2 + u_r^2 - u^2/4) sinh r dr by the trapezoid rule."""
    g, u = state.grid, state.u
    ur = np.gradient(u, g)
    dens = (state.u_t ** 2 + ur ** 2 - 0.25 * u ** 2) * np.sinh(g)
    return float(np.trapezoid(dens, g))


def support_extent(grid, values, rel_tol=1e-4):
    """Largest radius where |values| exceeds rel_tol times its sup."""
    v = np.abs(np.asarray(values))
    peak = v.max()
    if peak == 0:
        return 0.0
    idx = np.flatnonzero(v > rel_tol * peak)
    return float(np.asarray(grid)[idx[-1]])


def _run(kernel, t, dr, dt, r_max):
    st = initial_state(kernel, dr, r_max)
    out = evolve(st, t, dt)
    return out


def wave_propagate(initial, t, dt=None, dr=None, r_max=None, margin=1.0, richardson=True):
    """Return 2 u(., t) for u_t(0) = 0, u(0) = ``initial``.

    Parameters
    ----------
    initial : RadialKernel
    t : float
        Propagation time (> 0).
    dt, dr : float, optional
        Time and radial steps; ``dt / dr`` must not exceed 0.5.
    r_max : float, optional
        Outer radius, at least support + t + margin. Defaults to exactly that.
    richardson : bool
        Also run at half steps and report ``meta['error_estimate']`` as two
        thirds of the sup difference between the runs (twice the asymptotic
        second-order value). The returned values are those of the finer run.
    """
    if t <= 0:
        raise DomainError("propagation time must be positive")
    dr = DEFAULT_DR if dr is None else float(dr)
    dt = DEFAULT_COURANT * dr if dt is None else float(dt)
    if dt / dr > MAX_COURANT + 1e-12:
        raise StabilityError(f"dt/dr = {dt / dr:.3f} exceeds {MAX_COURANT}")
    a = initial.support_radius
    need = a + t + margin
    r_max = need if r_max is None else float(r_max)
    r_max = dr * math.ceil(r_max / dr - 1e-9)
    if r_max < a + t + 10 * dr:
        raise BoundaryContaminationError(
            f"r_max = {r_max:g} is within reach of the support (needs > {a + t:g})")
    coarse = _run(initial, t, dr, dt, r_max)
    result, fine_dr, est = coarse, dr, None
    if richardson:
        fine = _run(initial, t, 0.5 * dr, 0.5 * dt, r_max)
        diff = np.max(np.abs(fine.u[::2] - coarse.u))
        est = 2.0 * diff / 3.0
        result, fine_dr = fine, 0.5 * dr
    values = 2.0 * result.u
    edge = result.grid > r_max - 0.5 * (r_max - a - t)
    if np.any(edge) and np.max(np.abs(values[edge])) > 1e-8 * max(np.max(np.abs(values)), 1e-300):
        raise BoundaryContaminationError("solution reached the outer boundary")
    support = support_extent(result.grid, values, 1e-12)
    support = min(max(support, result.grid[1]), result.grid[-1])
    values = np.where(result.grid > support, 0.0, values)
    meta = dict(t=t, dr=fine_dr, dt=dt * fine_dr / dr, r_max=r_max, error_estimate=est,
                initial_support=a, method="leapfrog")
    return RadialKernel(result.grid, values, support, meta=meta)


def snapshot_csv(path, grid, values):
    """Write an (r, u) snapshot."""
    return _io.write_csv(path, ["r", "u"], zip(grid, values))
