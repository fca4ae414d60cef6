"""Implicit-midpoint time stepping of the semi-discrete wave system.

Used only as an independent check of the spectral propagators: it integrates
``M_I y'' + K_II y = F(t)`` on all interior nodes, with no eigen-decomposition.
The scheme is the midpoint rule for ``(y, v)``; it is second order and
conserves the discrete energy for ``F = 0``.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .discretization import AssembledSystem
from .elliptic import dirichlet_map
from .errors import ParameterError


def _n_steps(T: float, dt: float) -> int:
    n = int(round(T / dt))
    if n < 1 or abs(n * dt - T) > 1e-9 * max(1.0, T):
        raise ParameterError(f"T={T} is not a whole number of steps of {dt}")
    return n


class MidpointStepper:
    """Factorized implicit-midpoint update for a fixed step ``dt``.

    ``(M + dt^2 K / 4) v+ = (M - dt^2 K / 4) v - dt K y + dt F_mid``
    ``y+ = y + dt (v + v+) / 2``
    """

    def __init__(self, system: AssembledSystem, dt: float):
        self.system = system
        self.dt = float(dt)
        K = system.K_II
        M = sp.diags(system.M_I)
        q = 0.25 * self.dt**2
        self._solve = spla.splu((M + q * K).tocsc()).solve
        self._rhs = (M - q * K).tocsr()
        self._K = K

    def step(self, y, v, F_mid):
        dt = self.dt
        rhs = self._rhs @ v - dt * (self._K @ y)
        if F_mid is not None:
            rhs = rhs + dt * F_mid
        v_new = self._solve(rhs)
        y_new = y + 0.5 * dt * (v + v_new)
        return y_new, v_new


def midpoint_solve(system: AssembledSystem, y0, v0, T: float, dt: float,
                   load: Callable[[float], np.ndarray] | None = None):
    """Interior position and velocity at ``T`` for ``M y'' + K y = load(t)``.

    ``load`` returns the interior load vector (already multiplied by ``M``
    where appropriate); it is sampled at panel midpoints.
    """
    stepper = MidpointStepper(system, dt)
    y = np.array(y0, dtype=float)
    v = np.array(v0, dtype=float)
    for k in range(_n_steps(T, dt)):
        F = None if load is None else load((k + 0.5) * dt)
        y, v = stepper.step(y, v, F)
    return y, v


def pl_interpolator(times, values):
    """Piecewise-linear interpolant of ``values[k]`` (rows) at uniform ``times``."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    dt = times[1] - times[0]

    def at(t):
        s = np.clip(t / dt, 0.0, times.size - 1)
        k = min(int(np.floor(s)), times.size - 2)
        r = s - k
        return (1.0 - r) * values[k] + r * values[k + 1]

    return at


def midpoint_source(system: AssembledSystem, y0, v0, times, f_values, T: float, dt: float):
    """Interior-source problem ``y'' + A y = f`` with ``f`` linear between samples."""
    f_at = pl_interpolator(times, f_values)
    M = system.M_I
    return midpoint_solve(system, y0, v0, T, dt, lambda t: M * f_at(t))


def midpoint_boundary_direct(system: AssembledSystem, times, u_values, T: float, dt: float):
    """Zero initial data, boundary input ``u``: load ``-K_IB u(t)``.

    ``u_values`` is (|B|, K+1).  Returns interior (y, v) at ``T``.
    """
    u_at = pl_interpolator(times, np.asarray(u_values, dtype=float).T)
    K_IB = system.K_IB
    n = system.n_interior
    return midpoint_solve(system, np.zeros(n), np.zeros(n), T, dt, lambda t: -(K_IB @ u_at(t)))


def midpoint_boundary_lifted(system: AssembledSystem, times, u_values, T: float, dt: float):
    """Same problem through ``y_hat = y - D u``.

    For ``u`` linear between samples, ``D u`` is linear in time too, so its
    second derivative is a train of impulses at the sample times; each one is
    applied as a jump of ``v_hat``.  The step must divide the sample spacing.
    Returns interior (y, v) at ``T``.
    """
    times = np.asarray(times, dtype=float)
    U = np.asarray(u_values, dtype=float)
    du = times[1] - times[0]
    sub = int(round(du / dt))
    if sub < 1 or abs(sub * dt - du) > 1e-9 * du:
        raise ParameterError("time step must divide the signal sample spacing")
    n_panels = _n_steps(T, du)
    if n_panels > times.size - 1:
        raise ParameterError("T exceeds the signal time range")
    I = system.grid.interior
    lift = lambda psi: dirichlet_map(system, psi)[I]
    stepper = MidpointStepper(system, dt)
    y = np.zeros(system.n_interior)
    v = np.zeros(system.n_interior)
    slope_prev = np.zeros(U.shape[0])
    for k in range(n_panels):
        slope = (U[:, k + 1] - U[:, k]) / du
        v = v - lift(slope - slope_prev)
        slope_prev = slope
        for _ in range(sub):
            y, v = stepper.step(y, v, None)
    return y + lift(U[:, n_panels]), v + lift(slope_prev)
