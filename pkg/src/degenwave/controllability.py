"""Adjoint observation, the HUM Gramian and penalized control synthesis.

Adjoint data ``e = (z0, z1)`` generate the kernel
``k_b(s) = sum_n [C(T-s) z0 + S(T-s) z1]_n flux_b(phi_n)``; the observation is
``-k`` (as a boundary density).  Feeding the observation back as a control
from rest gives a terminal state ``(y(T), y_t(T))`` whose pairing with ``e``
puts ``z0`` against the velocity and ``z1`` against the position, so the
Gramian is ``Lambda e = (y_t(T), y(T))`` and ``<Lambda e, e> = |obs(e)|^2``.

Controls live in the span of time hat functions on a uniform grid.  The
control attached to ``e`` is the hat projection of its observation, which
makes the discrete Gramian exactly symmetric and positive semidefinite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from scipy.integrate import trapezoid

from .boundary_control import BoundarySignal, lift_trajectory
from .errors import ParameterError
from .evolution import EnergyState, sigma_l2_norm
from .spectral import EigenBasis, energy_norm_sq


def adjoint_solve(basis: EigenBasis, z0, z1, T: float, t: float) -> EnergyState:
    """Backward free solution with ``z(T) = z0`` and ``z_t(T) = z1``.

    ``z(t) = C(T-t) z0 - S(T-t) z1`` and ``z_t(t) = A S(T-t) z0 + C(T-t) z1``.
    """
    if not 0.0 <= t <= T * (1 + 1e-12):
        raise ParameterError(f"t={t} outside [0, {T}]")
    z0 = basis.check(z0)
    z1 = basis.check(z1)
    w = basis.omega
    r = T - t
    c, s = np.cos(w * r), np.sin(w * r)
    return EnergyState(c * z0 - s / w * z1, w * s * z0 + c * z1)


@dataclass(frozen=True, eq=False)
class ObservationTrace:
    times: np.ndarray
    values: np.ndarray      # (|B|, K+1) boundary density

    def l2_norm(self, grid) -> float:
        return sigma_l2_norm(grid, self.times, self.values.T)


def _kernel_amplitudes(basis: EigenBasis, z0, z1, T: float, times) -> np.ndarray:
    """``[C(T-s) z0 + S(T-s) z1]_n`` at each time, shape (len(times), m)."""
    w = basis.omega
    r = np.outer(T - np.asarray(times, dtype=float), w)
    return np.cos(r) * z0 + np.sin(r) / w * z1


def observe(basis: EigenBasis, z0, z1, T: float, times) -> ObservationTrace:
    """Boundary observation ``-sum_n [C(T-s) z0 + S(T-s) z1]_n flux(phi_n)`` per unit boundary measure."""
    z0 = basis.check(z0)
    z1 = basis.check(z1)
    times = np.asarray(times, dtype=float)
    amp = _kernel_amplitudes(basis, z0, z1, T, times)
    dens = -(amp @ basis.boundary_flux) / basis.system.grid.boundary_measure
    return ObservationTrace(times, dens.T)


class HUMOperator:
    """Discrete HUM Gramian on a uniform control grid ``k T / K``.

    ``support`` selects the controlled boundary nodes (positions into the
    boundary index set; default all).
    """

    def __init__(self, basis: EigenBasis, T: float, n_steps: int, support=None):
        if not T > 0:
            raise ParameterError("T must be positive")
        if n_steps < 2:
            raise ParameterError("need at least two control panels")
        self.basis = basis
        self.T = float(T)
        self.K = int(n_steps)
        self.dt = self.T / self.K
        self.times = np.linspace(0.0, self.T, self.K + 1)
        nb = basis.system.n_boundary
        mask = np.zeros(nb, dtype=bool)
        mask[np.arange(nb) if support is None else np.asarray(support, dtype=int)] = True
        self.support = mask
        self._factors()

    def _factors(self):
        w = self.basis.omega
        d = self.dt
        x = w * d
        half = np.sinc(x / (2 * np.pi))         # sin(x/2)/(x/2)
        interior = half * half
        # last half hat, r = T - s in [0, dt], node weight dt/2
        one_minus_c = 2.0 * np.sin(0.5 * x) ** 2
        x_minus_s = np.where(x < 1e-3, x**3 / 6 - x**5 / 120, x - np.sin(x))
        end_c = one_minus_c / (w * w * d) / (0.5 * d)
        end_s = x_minus_s / (w * x) / w / (0.5 * d)
        self._interior = interior
        self._end_c = end_c
        self._end_s = end_s
        self.weights = np.full(self.K + 1, d)
        self.weights[[0, -1]] = 0.5 * d

    def control(self, z0, z1) -> BoundarySignal:
        """Hat projection of ``observe(z0, z1)``; zero at ``t = 0`` and off the support."""
        b = self.basis
        z0 = b.check(z0)
        z1 = b.check(z1)
        amp = _kernel_amplitudes(b, z0, z1, self.T, self.times)
        amp[1:-1] *= self._interior
        amp[-1] = self._end_c * z0 + self._end_s * z1
        amp[0] = 0.0
        dens = -(amp @ b.boundary_flux) / b.system.grid.boundary_measure
        dens[:, ~self.support] = 0.0
        return BoundarySignal(self.times, dens.T)

    def terminal_state(self, u: BoundarySignal) -> EnergyState:
        Y, V = lift_trajectory(self.basis, u, [self.T])
        return EnergyState(Y[0], V[0])

    def apply(self, z0, z1) -> tuple[np.ndarray, np.ndarray]:
        """``Lambda (z0, z1) = (y_t(T), y(T))`` for the control attached to ``(z0, z1)``."""
        st = self.terminal_state(self.control(z0, z1))
        return st.v, st.y

    def quadratic(self, z0, z1) -> float:
        """``|control(z0, z1)|^2`` in the discrete ``L^2(Sigma)`` norm (equals ``<Lambda e, e>``)."""
        u = self.control(z0, z1).values
        meas = self.basis.system.grid.boundary_measure
        return float(self.weights @ (u**2).T @ meas)

    # energy-scaled coordinates: z0 = x0, z1 = sqrt(lam) x1
    def apply_scaled(self, x: np.ndarray) -> np.ndarray:
        m = self.basis.m
        s = self.basis.omega
        a, b = self.apply(x[:m], s * x[m:])
        return np.r_[a, s * b]

    def scaled_trace(self) -> float:
        """Trace of the energy-scaled Gramian from the diagonal quadratic forms."""
        m = self.basis.m
        s = self.basis.omega
        tr = 0.0
        for n in range(m):
            e = np.zeros(m)
            e[n] = 1.0
            tr += self.quadratic(e, np.zeros(m))
            e[n] = s[n]
            tr += self.quadratic(np.zeros(m), e)
        return tr

    def dense(self, m_obs: int | None = None, scaled: bool = True) -> np.ndarray:
        """Gramian restricted to the first ``m_obs`` modes of each slot, (2 m_obs)^2."""
        m = self.basis.m
        m_obs = m if m_obs is None else int(m_obs)
        if not 1 <= m_obs <= m:
            raise ParameterError(f"m_obs={m_obs} must lie in [1, {m}]")
        s = self.basis.omega if scaled else np.ones(m)
        keep = np.r_[np.arange(m_obs), m + np.arange(m_obs)]
        G = np.empty((keep.size, keep.size))
        for j, col in enumerate(keep):
            x = np.zeros(2 * m)
            x[col] = 1.0
            z0, z1 = x[:m], s * x[m:]
            a, b = self.apply(z0, z1)
            G[:, j] = np.r_[a, s * b][keep]
        return G


def gramian_apply(basis: EigenBasis, e, T: float, n_steps: int, support=None):
    """``Lambda e`` for ``e = (z0, z1)``; returns ``(w0, w1) = (y_t(T), y(T))``."""
    z0, z1 = e
    return HUMOperator(basis, T, n_steps, support).apply(z0, z1)


@dataclass(frozen=True, eq=False)
class ControlResult:
    control: BoundarySignal
    achieved: EnergyState
    target: EnergyState
    residual_energy_norm: float
    cg_iterations: int
    regularization_eps: float
    gramian_min_eig_estimate: float
    converged: bool = True
    residual_history: tuple[float, ...] = ()
    adjoint_data: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)
    eps_absolute: float = 0.0


def conjugate_residual(apply, b, *, tol: float, maxiter: int, shift: float = 0.0):
    """Conjugate residual iteration for symmetric PSD ``apply + shift I``.

    The Euclidean residual norm is nonincreasing.  Returns the solution, the
    residual history, the iteration count and the Krylov pairs ``(r_i, A r_i)``
    (``A`` without the shift) for Rayleigh-Ritz estimates.
    """
    A = lambda v: apply(v) + shift * v
    x = np.zeros_like(b)
    r = b.copy()
    bnorm = float(np.linalg.norm(b))
    hist = [bnorm]
    if bnorm == 0.0:
        return x, hist, 0, [], True
    Ar = A(r)
    p, Ap = r.copy(), Ar.copy()
    rAr = float(r @ Ar)
    krylov = [(r.copy(), Ar - shift * r)]
    it = 0
    converged = False
    while it < maxiter:
        denom = float(Ap @ Ap)
        if denom == 0.0 or rAr <= 0.0:
            break
        alpha = rAr / denom
        x += alpha * p
        r -= alpha * Ap
        it += 1
        hist.append(float(np.linalg.norm(r)))
        if hist[-1] <= tol * bnorm:
            converged = True
            break
        Ar = A(r)
        krylov.append((r.copy(), Ar - shift * r))
        rAr_new = float(r @ Ar)
        beta = rAr_new / rAr
        rAr = rAr_new
        p = r + beta * p
        Ap = Ar + beta * Ap
    return x, hist, it, krylov, converged


def _ritz_min(krylov) -> float:
    if not krylov:
        return float("nan")
    R = np.stack([k[0] for k in krylov], axis=1)
    AR = np.stack([k[1] for k in krylov], axis=1)
    U, S, Vt = la.svd(R, full_matrices=False)
    keep = S > 1e-10 * S[0]
    Q = U[:, keep]
    AQ = AR @ Vt[keep].T / S[keep]
    H = Q.T @ AQ
    return float(la.eigvalsh(0.5 * (H + H.T))[0])


def hum_control(basis: EigenBasis, target: EnergyState, T: float, eps: float = 1e-8,
                cg_tol: float = 1e-10, cg_max: int = 200, *, n_steps: int | None = None,
                support=None) -> ControlResult:
    """Penalized HUM: solve ``(Lambda + eps_abs G) e = (v_T, y_T)`` by conjugate residuals.

    ``G`` makes the problem the identity-shifted Gramian in energy-scaled
    coordinates, where residual norms are energy norms of the terminal miss.
    ``eps_abs = eps * trace`` of the scaled Gramian.
    """
    if not eps > 0:
        raise ParameterError("eps must be positive")
    m = basis.m
    basis.check(target.y)
    if n_steps is None:
        n_steps = max(200, int(np.ceil(1000 * T)))
    op = HUMOperator(basis, T, n_steps, support)
    s = basis.omega
    b = np.r_[target.v, s * target.y]
    eps_abs = eps * op.scaled_trace()
    x, hist, it, krylov, converged = conjugate_residual(
        op.apply_scaled, b, tol=cg_tol, maxiter=cg_max, shift=eps_abs)
    z0, z1 = x[:m], s * x[m:]
    u = op.control(z0, z1)
    achieved = op.terminal_state(u)
    miss = EnergyState(target.y - achieved.y, target.v - achieved.v)
    resid = float(np.sqrt(energy_norm_sq(basis, miss.y, miss.v)))
    if not np.any(b):
        converged = True
    return ControlResult(u, achieved, target, resid, it, float(eps), _ritz_min(krylov),
                         bool(converged), tuple(hist), (z0, z1), float(eps_abs))


@dataclass(frozen=True)
class ContinuationProbe:
    sigma_min: float
    spectrum: np.ndarray
    gramian: np.ndarray


def unique_continuation_probe(basis: EigenBasis, T: float, m_obs: int, dt: float,
                              support=None) -> ContinuationProbe:
    """Dense truncated Gramian on ``2 m_obs`` adjoint directions and its spectrum.

    ``dt`` is the control-grid spacing; ``T`` must be a whole number of steps so
    that longer horizons only add observation nodes.
    """
    K = int(round(T / dt))
    if K < 2 or abs(K * dt - T) > 1e-9 * T:
        raise ParameterError(f"T={T} is not a whole number of steps {dt}")
    G = HUMOperator(basis, T, K, support).dense(m_obs)
    G = 0.5 * (G + G.T)
    ev = la.eigvalsh(G)
    return ContinuationProbe(float(ev[0]), ev, G)


def duality_check(basis: EigenBasis, z0_star, z1_star, u: BoundarySignal) -> tuple[float, float]:
    """Both sides of ``(z0*, y(T)) + (z1*, y_t(T)) = int <obs, u>`` after the slot swap.

    With ``z0 = z1*`` and ``z1 = z0*`` the right side is the time integral of
    the control against ``observe(z0, z1)``, evaluated by the trapezoid rule.
    """
    T = u.T
    Y, V = lift_trajectory(basis, u, [T])
    lhs = float(basis.check(z0_star) @ Y[0] + basis.check(z1_star) @ V[0])
    obs = observe(basis, z1_star, z0_star, T, u.times)
    meas = basis.system.grid.boundary_measure
    integrand = (obs.values * u.values).T @ meas
    return lhs, float(trapezoid(integrand, u.times))
