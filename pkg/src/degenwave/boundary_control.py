"""Boundary inputs: the lift operators, mild solutions and transposition checks.

A boundary input ``u`` enters mode ``n`` through ``g_n(t) = sum_b u_b(t) flux_b(phi_n)``
and the state coefficients obey ``y_n'' + lam_n y_n = -g_n``.  Fields with the
correct trace are recovered as ``D u + sum_n (y_n - (D u, phi_n)) phi_n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .discretization import AssembledSystem, Grid, norms
from .elliptic import dirichlet_map
from .errors import ParameterError
from .evolution import (EnergyState, SourceFunction, _uniform_step, duhamel_trajectory,
                        forced_response, homogeneous_solve, sigma_l2_norm)
from .spectral import EigenBasis, fractional_norm, to_coeffs


@dataclass(frozen=True, eq=False)
class BoundarySignal:
    """Boundary input ``values[b, k]`` on a uniform grid ``0 = t_0 < ... < t_K = T``."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        u = np.asarray(self.values, dtype=float)
        _uniform_step(t)
        if t[0] != 0.0:
            raise ParameterError("signal time grid must start at t=0")
        if u.ndim != 2 or u.shape[1] != t.size:
            raise ParameterError(f"values must be (n_boundary, {t.size}), got {u.shape}")
        if np.any(u[:, 0] != 0.0):
            raise ParameterError("boundary input must vanish at t=0 (zero initial trace)")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", u)

    @classmethod
    def zero(cls, n_boundary: int, T: float, samples: int = 2) -> "BoundarySignal":
        return cls(np.linspace(0.0, T, samples), np.zeros((n_boundary, samples)))

    @classmethod
    def from_function(cls, grid: Grid, times, fn: Callable) -> "BoundarySignal":
        """Sample ``fn(points, t)`` (returns one value per boundary point) on ``times``."""
        times = np.asarray(times, dtype=float)
        pts = grid.nodes[grid.boundary]
        vals = np.stack([np.asarray(fn(pts, t), dtype=float).reshape(-1) for t in times], axis=1)
        return cls(times, vals)

    @property
    def dt(self) -> float:
        return _uniform_step(self.times)

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def n_boundary(self) -> int:
        return self.values.shape[0]

    @property
    def slopes(self) -> np.ndarray:
        """Per-panel time derivative, shape (n_boundary, K)."""
        return np.diff(self.values, axis=1) / self.dt

    def at(self, t: float) -> np.ndarray:
        s = np.clip(t / self.dt, 0.0, self.times.size - 1)
        k = min(int(np.floor(s)), self.times.size - 2)
        r = s - k
        return (1.0 - r) * self.values[:, k] + r * self.values[:, k + 1]

    def truncated_after(self, t: float) -> "BoundarySignal":
        """Copy with every sample strictly after ``t`` set to zero."""
        vals = self.values.copy()
        vals[:, self.times > t + 1e-12 * max(1.0, self.T)] = 0.0
        return BoundarySignal(self.times, vals)

    def __add__(self, other: "BoundarySignal") -> "BoundarySignal":
        return BoundarySignal(self.times, self.values + other.values)

    def scaled(self, a: float) -> "BoundarySignal":
        return BoundarySignal(self.times, a * self.values)

    def l2_norm(self, grid: Grid) -> float:
        """``L^2(Sigma)``: time trapezoid of the boundary-measure weighted square."""
        return sigma_l2_norm(grid, self.times, self.values.T)

    def h1_norm(self, grid: Grid) -> float:
        """``H^1(Sigma)``: adds the exact time-derivative term (and tangential quotients in 2D)."""
        sq = self.l2_norm(grid) ** 2
        sq += float(np.sum((self.slopes**2).T @ grid.boundary_measure) * self.dt)
        if grid.dimension == 2:
            pairs, lens = grid.boundary_edges
            dq = (self.values[pairs[:, 1]] - self.values[pairs[:, 0]]) / lens[:, None]
            sq += float(trapezoid(lens @ dq**2, self.times))
        return float(np.sqrt(sq))

    def modal_forcing(self, basis: EigenBasis) -> np.ndarray:
        """``g[k, n] = sum_b u_b(t_k) flux_b(phi_n)``."""
        if self.n_boundary != basis.boundary_flux.shape[1]:
            raise ParameterError("signal and basis boundary sizes differ")
        return self.values.T @ basis.boundary_flux.T


def _check_time(u: BoundarySignal, t) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0) or np.any(t > u.T * (1 + 1e-12)):
        raise ParameterError(f"t outside [0, {u.T}]")
    return t


def lift_trajectory(basis: EigenBasis, u: BoundarySignal, times, *, use_numba=None):
    """``(L u)(t)`` and ``(L_t u)(t)`` at every requested time, each (len(times), m)."""
    times = _check_time(u, times)
    return forced_response(basis, -u.modal_forcing(basis), u.dt, times, use_numba=use_numba)


def lift_L(basis: EigenBasis, u: BoundarySignal, t: float) -> np.ndarray:
    """``(L u)_n(t) = -lam_n^{-1/2} int_0^t sin(sqrt(lam_n)(t - s)) g_n(s) ds``."""
    Y, _ = lift_trajectory(basis, u, [t])
    return Y[0]


def lift_Lt(basis: EigenBasis, u: BoundarySignal, t: float) -> np.ndarray:
    """``(L_t u)_n(t) = -int_0^t cos(sqrt(lam_n)(t - s)) g_n(s) ds``."""
    _, V = lift_trajectory(basis, u, [t])
    return V[0]


def lift_L_via_dirichlet(basis: EigenBasis, u: BoundarySignal, t: float) -> np.ndarray:
    """``A int_0^t S(t - s) D u(s) ds`` with ``D u`` computed by elliptic solves."""
    times = _check_time(u, [t])
    sysm = basis.system
    I = sysm.grid.interior
    lifts = np.stack([dirichlet_map(sysm, u.values[:, k])[I] for k in range(u.times.size)])
    proj = lifts @ (sysm.M_I[:, None] * basis.vectors)       # (D u(t_k), phi_n)
    Y, _ = forced_response(basis, basis.eigenvalues * proj, u.dt, times)
    return Y[0]


def full_solution(basis: EigenBasis, y0, y1, u: BoundarySignal | None, t: float) -> EnergyState:
    """``y = C(t) y0 + S(t) y1 + (L u)(t)`` with velocity ``-A S(t) y0 + C(t) y1 + (L_t u)(t)``."""
    hom = homogeneous_solve(basis, EnergyState(y0, y1), t)
    if u is None:
        return hom
    Y, V = lift_trajectory(basis, u, [t])
    return EnergyState(hom.y + Y[0], hom.v + V[0])


def full_trajectory(basis: EigenBasis, y0, y1, u: BoundarySignal | None,
                    f: SourceFunction | None, times):
    """Position and velocity coefficients with source and boundary input."""
    Y, V = duhamel_trajectory(basis, EnergyState(y0, y1), f, times)
    if u is not None:
        Yu, Vu = lift_trajectory(basis, u, times)
        Y, V = Y + Yu, V + Vu
    return Y, V


# ---------------------------------------------------------------------------
# fields and fluxes with nonzero trace
# ---------------------------------------------------------------------------

class TraceReconstructor:
    """Nodal fields and conormal fluxes from coefficients plus the boundary trace."""

    def __init__(self, basis: EigenBasis):
        self.basis = basis
        self.system: AssembledSystem = basis.system

    @cached_property
    def lift_matrix(self) -> np.ndarray:
        """Interior Dirichlet lift of each boundary unit vector, (|I|, |B|)."""
        nb = self.system.n_boundary
        I = self.system.grid.interior
        return np.stack([dirichlet_map(self.system, e)[I] for e in np.eye(nb)], axis=1)

    @cached_property
    def dtn(self) -> np.ndarray:
        """Discrete Dirichlet-to-Neumann matrix ``K_BB + K_BI D_I``."""
        return self.system.K_BB.toarray() + np.asarray(self.system.K_BI @ self.lift_matrix)

    def field(self, coeffs, psi) -> np.ndarray:
        b = self.basis
        lift = self.lift_matrix @ psi
        interior = lift + b.vectors @ (coeffs - to_coeffs(b, lift))
        return self.system.extend(interior, psi)

    def flux(self, coeffs, psi) -> np.ndarray:
        """Boundary flux for (T, m) coefficients and (T, |B|) traces, batched."""
        b = self.basis
        coeffs = np.atleast_2d(coeffs)
        psi = np.atleast_2d(psi)
        g = psi @ b.boundary_flux.T
        return psi @ self.dtn.T + (coeffs + g / b.eigenvalues) @ b.boundary_flux


def flux_density(grid: Grid, flux) -> np.ndarray:
    """Nodal flux residuals divided by the boundary measure (identity in 1D)."""
    return np.asarray(flux) / grid.boundary_measure


# ---------------------------------------------------------------------------
# transposition identity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TranspositionReport:
    lhs: float
    rhs: float
    residual: float


def transposition_check(basis: EigenBasis, u: BoundarySignal, z0, z1, t: float) -> TranspositionReport:
    """Both sides of ``int_0^t sum_b u_b dz/dnu = (y(t), z_t(t)) - (y_t(t), z(t))``.

    ``y`` is driven by ``u`` from rest, ``z`` is the free solution with data
    ``(z0, z1)`` at time 0.  The left side is a time trapezoid over the
    signal samples up to ``t``; the right side is exact.
    """
    _check_time(u, [t])
    z0 = basis.check(z0)
    z1 = basis.check(z1)
    k = int(np.floor(t / u.dt + 1e-9))
    ts = u.times[: k + 1]
    if ts[-1] < t - 1e-12:
        ts = np.r_[ts, t]
    w = basis.omega
    Z = np.cos(np.outer(ts, w)) * z0 + np.sin(np.outer(ts, w)) / w * z1
    dz_dnu = Z @ basis.boundary_flux
    U = np.stack([u.at(s) for s in ts])
    lhs = float(trapezoid(np.sum(U * dz_dnu, axis=1), ts))
    y = full_solution(basis, np.zeros(basis.m), np.zeros(basis.m), u, t)
    z_t = homogeneous_solve(basis, EnergyState(z0, z1), t)
    rhs = float(y.y @ z_t.v - y.v @ z_t.y)
    res = abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1e-300)
    return TranspositionReport(lhs, rhs, res)


def transposition_residual(basis: EigenBasis, u: BoundarySignal, z0, z1, t: float) -> float:
    """Relative mismatch of the transposition identity (0 when both sides vanish)."""
    rep = transposition_check(basis, u, z0, z1, t)
    return 0.0 if rep.lhs == 0 and rep.rhs == 0 else rep.residual


# ---------------------------------------------------------------------------
# continuity and estimate audits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContinuityProbe:
    sup_energy: float
    modulus: float
    spacing: float


def lift_continuity_probe(basis: EigenBasis, u: BoundarySignal, samples: int) -> ContinuityProbe:
    """Sup and largest jump of ``|L u(t)|_{D(A^{1/2})}`` over ``samples`` uniform times."""
    times = np.linspace(0.0, u.T, samples)
    Y, _ = lift_trajectory(basis, u, times)
    e = np.sqrt(Y**2 @ basis.eigenvalues)
    jumps = np.sqrt(np.diff(Y, axis=0) ** 2 @ basis.eigenvalues)
    return ContinuityProbe(float(e.max()), float(jumps.max(initial=0.0)), float(times[1] - times[0]))


@dataclass(frozen=True, eq=False)
class AuditItem:
    """Continuum data, sampled on whatever grid the audit runs on.

    ``y0(x)``, ``y1(x)`` take (N, d) points; ``f(x, t)`` and ``u(xb, t)`` also
    take a time.  Any entry may be ``None``.
    """

    y0: Callable | None = None
    y1: Callable | None = None
    f: Callable | None = None
    u: Callable | None = None


@dataclass(frozen=True)
class AuditReport:
    energy_ratios: tuple[float, ...]
    flux_ratios: tuple[float, ...]
    observed_C_energy: float
    observed_C_flux: float
    skipped: int


def _interior_coeffs(basis: EigenBasis, fn) -> np.ndarray:
    if fn is None:
        return np.zeros(basis.m)
    pts = basis.system.grid.nodes[basis.system.grid.interior]
    return to_coeffs(basis, np.asarray(fn(pts), dtype=float).reshape(-1))


def estimate_audit(basis: EigenBasis, battery: Sequence[AuditItem], T: float,
                   n_time: int = 201) -> AuditReport:
    """Empirical constants of the energy and hidden-regularity estimates.

    For each item the data norm is ``|y0|_{H^1(w)} + |y1|_{L2} + |f|_{L1(L2)}
    + |u|_{H1(Sigma)}``; the solution is measured by its sup over the sample
    times of ``|y|_{H^1(w)} + |y_t|_{L2}`` (with its nonzero trace) and by the
    ``L^2(Sigma)`` norm of its conormal flux.  Zero-data items are skipped.
    """
    sysm = basis.system
    grid = sysm.grid
    times = np.linspace(0.0, T, n_time)
    rec = TraceReconstructor(basis)
    e_ratios, f_ratios = [], []
    skipped = 0
    for item in battery:
        y0 = _interior_coeffs(basis, item.y0)
        y1 = _interior_coeffs(basis, item.y1)
        src = None
        if item.f is not None:
            pts = grid.nodes[grid.interior]
            src = SourceFunction(times, np.stack([item.f(pts, t) for t in times]))
        sig = BoundarySignal.from_function(grid, times, item.u) if item.u is not None else None
        data = (fractional_norm(basis, y0, 0.5) + fractional_norm(basis, y1, 0.0)
                + (src.l1_l2_norm(basis) if src is not None else 0.0)
                + (sig.h1_norm(grid) if sig is not None else 0.0))
        if data == 0.0:
            skipped += 1
            continue
        Y, V = full_trajectory(basis, y0, y1, sig, src, times)
        U = sig.values.T if sig is not None else np.zeros((times.size, sysm.n_boundary))
        dU = np.vstack([sig.slopes.T[:1], sig.slopes.T]) if sig is not None else U
        sup = 0.0
        for k in range(times.size):
            yk = norms(sysm, rec.field(Y[k], U[k]))
            vk = norms(sysm, rec.field(V[k], dU[k]))
            sup = max(sup, float(np.hypot(yk.h1w, yk.l2)) + vk.l2)
        flux = flux_density(grid, rec.flux(Y, U))
        e_ratios.append(sup / data)
        f_ratios.append(sigma_l2_norm(grid, times, flux) / data)
    return AuditReport(tuple(e_ratios), tuple(f_ratios), max(e_ratios, default=0.0),
                       max(f_ratios, default=0.0), skipped)


def random_battery(dimension: int, n: int, seed: int, T: float, *,
                   bounds=((0.0, 1.0),), modes: int = 4) -> list[AuditItem]:
    """Seeded smooth data on a box: sine-series states, separable source and input."""
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in bounds])
    L = np.array([b[1] - b[0] for b in bounds])
    items = []

    def series(coef):
        def fn(x):
            s = (np.asarray(x, dtype=float).reshape(-1, dimension) - lo) / L
            out = np.zeros(s.shape[0])
            for idx, c in np.ndenumerate(coef):
                term = np.ones(s.shape[0])
                for d, j in enumerate(idx):
                    term *= np.sin((j + 1) * np.pi * s[:, d])
                out += c * term
            return out
        return fn

    for _ in range(n):
        shape = (modes,) * dimension
        decay = np.ones(shape)
        for idx in np.ndindex(shape):
            decay[idx] = 1.0 / (1.0 + sum(j * j for j in idx))
        c0 = rng.standard_normal(shape) * decay
        c1 = rng.standard_normal(shape) * decay
        cf = rng.standard_normal(shape) * decay
        tf = rng.standard_normal(3)
        tu = rng.standard_normal(3)
        pu = rng.standard_normal(dimension + 1)
        sp0, sp1, spf = series(c0), series(c1), series(cf)
        f = lambda x, t, spf=spf, tf=tf: spf(x) * (tf[0] + tf[1] * np.cos(np.pi * t / T) + tf[2] * t / T)

        def u(xb, t, tu=tu, pu=pu):
            xb = np.asarray(xb, dtype=float).reshape(-1, dimension)
            space = pu[0] + ((xb - lo) / L) @ pu[1:]
            time = sum(a * np.sin((j + 1) * np.pi * t / T) for j, a in enumerate(tu))
            return space * time

        items.append(AuditItem(sp0, sp1, f, u))
    return items
