"""Exact-in-time spectral wave propagation.

States are coefficient pairs ``(y_n, v_n)`` on an :class:`EigenBasis`.  The
cosine and sine families act mode-wise; sources sampled on a uniform time grid
are treated as piecewise linear and convolved in closed form panel by panel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .errors import ParameterError
from .kernels import oscillator_sweep, partial_panel
from .spectral import EigenBasis, fractional_norm, to_coeffs


@dataclass(frozen=True, eq=False)
class EnergyState:
    """Position and velocity coefficients in ``H_0^1(w) x L^2``."""

    y: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if y.shape != v.shape or y.ndim != 1:
            raise ParameterError(f"position {y.shape} and velocity {v.shape} must be matching vectors")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "v", v)

    @classmethod
    def zero(cls, m: int) -> "EnergyState":
        return cls(np.zeros(m), np.zeros(m))

    def __add__(self, other: "EnergyState") -> "EnergyState":
        return EnergyState(self.y + other.y, self.v + other.v)

    def __sub__(self, other: "EnergyState") -> "EnergyState":
        return EnergyState(self.y - other.y, self.v - other.v)

    def scaled(self, a: float) -> "EnergyState":
        return EnergyState(a * self.y, a * self.v)


def _check_state(basis: EigenBasis, s: EnergyState) -> EnergyState:
    basis.check(s.y)
    return s


def cosine_apply(basis: EigenBasis, c, t: float) -> np.ndarray:
    """``C(t) c``: multiply mode ``n`` by ``cos(sqrt(lam_n) t)``."""
    return np.cos(basis.omega * t) * basis.check(c)


def sine_apply(basis: EigenBasis, c, t: float) -> np.ndarray:
    """``S(t) c``: multiply mode ``n`` by ``sin(sqrt(lam_n) t) / sqrt(lam_n)``."""
    w = basis.omega
    return np.sin(w * t) / w * basis.check(c)


def homogeneous_solve(basis: EigenBasis, state0: EnergyState, t: float) -> EnergyState:
    """Free evolution: ``y = C(t)y0 + S(t)y1`` and ``v = -A S(t) y0 + C(t) y1``."""
    _check_state(basis, state0)
    w = basis.omega
    c, s = np.cos(w * t), np.sin(w * t)
    y = c * state0.y + s / w * state0.v
    v = -w * s * state0.y + c * state0.v
    return EnergyState(y, v)


def energy(basis: EigenBasis, state: EnergyState) -> float:
    """``E = 1/2 sum(lam_n y_n^2 + v_n^2)``."""
    _check_state(basis, state)
    return 0.5 * float(np.sum(basis.eigenvalues * state.y**2) + np.sum(state.v**2))


# ---------------------------------------------------------------------------
# sources
# ---------------------------------------------------------------------------

def _uniform_step(times: np.ndarray) -> float:
    if times.ndim != 1 or times.size < 2:
        raise ParameterError("need at least two time samples")
    dt = (times[-1] - times[0]) / (times.size - 1)
    if not dt > 0 or np.max(np.abs(np.diff(times) - dt)) > 1e-9 * max(1.0, abs(times[-1])):
        raise ParameterError("time samples must be uniformly spaced and increasing")
    return float(dt)


@dataclass(frozen=True, eq=False)
class SourceFunction:
    """Interior fields ``values[k]`` at uniform times, linear in between."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        _uniform_step(t)
        if abs(t[0]) > 0:
            raise ParameterError("source time grid must start at t=0")
        if vals.ndim != 2 or vals.shape[0] != t.size:
            raise ParameterError(f"values must be ({t.size}, n_interior), got {vals.shape}")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", vals)

    @property
    def dt(self) -> float:
        return _uniform_step(self.times)

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @classmethod
    def modal(cls, basis: EigenBasis, times, coeffs) -> "SourceFunction":
        """Source whose samples are ``sum_n coeffs[k, n] phi_n``."""
        coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
        return cls(times, coeffs @ basis.vectors.T)

    @classmethod
    def zero(cls, basis: EigenBasis, T: float) -> "SourceFunction":
        return cls(np.array([0.0, T]), np.zeros((2, basis.system.n_interior)))

    def coeffs(self, basis: EigenBasis) -> np.ndarray:
        """Modal samples, shape (K+1, m)."""
        return to_coeffs(basis, self.values.T).T

    def l1_l2_norm(self, basis: EigenBasis) -> float:
        """Trapezoid approximation of ``int_0^T |f(t)|_{L2} dt``."""
        M = basis.system.M_I
        nrm = np.sqrt(np.einsum("ki,i,ki->k", self.values, M, self.values))
        return float(trapezoid(nrm, self.times))


def forced_response(basis: EigenBasis, g, dt: float, t_out, *, use_numba: bool | None = None):
    """Zero-state response of ``y_n'' + lam_n y_n = g_n(t)`` at times ``t_out``.

    ``g`` holds (K+1, m) samples on ``k * dt``, linear between samples.  A time
    that falls on a grid node only touches samples up to that node.
    Returns position and velocity arrays of shape (len(t_out), m).
    """
    g = np.asarray(g, dtype=float)
    t_out = np.atleast_1d(np.asarray(t_out, dtype=float))
    K = g.shape[0] - 1
    T = K * dt
    tol = 1e-12 * max(1.0, T)
    if np.any(t_out < -tol) or np.any(t_out > T + tol):
        raise ParameterError(f"requested times outside [0, {T}]")
    pos = t_out / dt
    k = np.floor(pos + 1e-9).astype(int)
    k = np.clip(k, 0, K)
    tau = t_out - k * dt
    on_node = np.abs(tau) <= 1e-9 * dt
    kmax = int(np.max(np.where(on_node, k, np.minimum(k + 1, K))))
    w = basis.omega
    m = w.size
    Y, V = oscillator_sweep(w, np.zeros(m), np.zeros(m), g[: kmax + 1], dt, use_numba=use_numba)
    Yo = np.empty((t_out.size, m))
    Vo = np.empty((t_out.size, m))
    for j in range(t_out.size):
        kj = k[j]
        if on_node[j] or kj == K:
            Yo[j], Vo[j] = Y[kj], V[kj]
            continue
        a = g[kj]
        b = (g[kj + 1] - g[kj]) / dt
        Yo[j], Vo[j] = partial_panel(w, Y[kj], V[kj], a, b, tau[j])
    return Yo, Vo


def duhamel_solve(basis: EigenBasis, state0: EnergyState, f: SourceFunction | None, t: float,
                  *, use_numba: bool | None = None) -> EnergyState:
    """Homogeneous solution plus ``int_0^t S(t-s) f(s) ds`` (and its velocity)."""
    hom = homogeneous_solve(basis, state0, t)
    if f is None:
        return hom
    if not -1e-12 <= t <= f.T * (1 + 1e-12):
        raise ParameterError(f"t={t} outside the source range [0, {f.T}]")
    Y, V = forced_response(basis, f.coeffs(basis), f.dt, [t], use_numba=use_numba)
    return EnergyState(hom.y + Y[0], hom.v + V[0])


def duhamel_trajectory(basis: EigenBasis, state0: EnergyState, f: SourceFunction | None,
                       times, *, use_numba: bool | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Positions and velocities (len(times), m) from one sweep over the source."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    w = basis.omega
    c, s = np.cos(np.outer(times, w)), np.sin(np.outer(times, w))
    Y = c * state0.y + s / w * state0.v
    V = -w * s * state0.y + c * state0.v
    if f is not None:
        Yf, Vf = forced_response(basis, f.coeffs(basis), f.dt, times, use_numba=use_numba)
        Y += Yf
        V += Vf
    return Y, V


# ---------------------------------------------------------------------------
# boundary traces
# ---------------------------------------------------------------------------

def sigma_l2_norm(grid, times, values) -> float:
    """``L^2(Sigma)`` norm of a (K+1, |B|) boundary time series (trapezoid in time)."""
    values = np.asarray(values, dtype=float)
    per_t = values**2 @ grid.boundary_measure
    return float(np.sqrt(trapezoid(per_t, times)))


@dataclass(frozen=True, eq=False)
class FluxRecord:
    times: np.ndarray
    flux: np.ndarray        # (len(times), |B|)
    l2_sigma: float
    data_norm: float
    ratio: float


def boundary_flux_record(basis: EigenBasis, state0: EnergyState, f: SourceFunction | None,
                         T: float, time_samples) -> FluxRecord:
    """Conormal trace ``sum_n y_n(t) flux_n`` on ``time_samples`` (uniform on [0, T])."""
    times = np.atleast_1d(np.asarray(time_samples, dtype=float))
    if times.size == 1:
        times = np.linspace(0.0, T, int(times[0]))
    if times[0] < 0 or times[-1] > T * (1 + 1e-12):
        raise ParameterError("time samples must lie in [0, T]")
    Y, _ = duhamel_trajectory(basis, state0, f, times)
    flux = Y @ basis.boundary_flux
    l2 = sigma_l2_norm(basis.system.grid, times, flux)
    data = (fractional_norm(basis, state0.y, 0.5) + fractional_norm(basis, state0.v, 0.0)
            + (f.l1_l2_norm(basis) if f is not None else 0.0))
    return FluxRecord(times, flux, l2, data, l2 / data if data > 0 else 0.0)
