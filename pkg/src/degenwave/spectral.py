"""Discrete spectral calculus for the weighted operator.

The eigenpairs of ``K_II phi = lam M_II phi`` are computed densely from the
symmetric matrix ``M^{-1/2} K_II M^{-1/2}``.  Everything downstream (fractional
norms, resolvents, propagators, boundary lifts) works on the coefficient
vectors ``c_n = phi_n^T M y``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .discretization import AssembledSystem
from .errors import AssemblyDefectError, ParameterError

DEFAULT_MODES = {1: 64, 2: 100}

_ids = itertools.count(1)


@dataclass(frozen=True, eq=False)
class EigenBasis:
    """First ``m`` M-orthonormal eigenpairs with their boundary fluxes.

    ``vectors[:, n]`` is the interior part of the n-th eigenvector and
    ``boundary_flux[n, b] = (K_BI phi_n)_b`` its conormal flux at boundary
    node ``b``.
    """

    system: AssembledSystem
    eigenvalues: np.ndarray
    vectors: np.ndarray
    boundary_flux: np.ndarray
    tag: int = field(default_factory=lambda: next(_ids))

    @property
    def m(self) -> int:
        return self.eigenvalues.size

    @property
    def omega(self) -> np.ndarray:
        return np.sqrt(self.eigenvalues)

    def check(self, c) -> np.ndarray:
        c = np.asarray(c, dtype=float)
        if c.shape[-1] != self.m:
            raise ParameterError(f"coefficient length {c.shape[-1]} does not match m={self.m}")
        return c

    def full_vectors(self) -> np.ndarray:
        """Eigenvectors extended by zero to all nodes, shape (N, m)."""
        out = np.zeros((self.system.grid.n_nodes, self.m))
        out[self.system.grid.interior] = self.vectors
        return out

    def truncate(self, m: int) -> "EigenBasis":
        if not 1 <= m <= self.m:
            raise ParameterError(f"cannot truncate {self.m} modes to {m}")
        return EigenBasis(self.system, self.eigenvalues[:m], self.vectors[:, :m],
                          self.boundary_flux[:m])


def solve_eigen(system: AssembledSystem, m: int | None = None) -> EigenBasis:
    """Smallest ``m`` eigenpairs of the interior stiffness-mass pencil."""
    n_i = system.n_interior
    if m is None:
        m = min(DEFAULT_MODES[system.grid.dimension], n_i)
    if not 1 <= m <= n_i:
        raise ParameterError(f"m={m} must lie in [1, {n_i}]")
    r = 1.0 / np.sqrt(system.M_I)
    A = system.K_II.toarray()
    A *= r[:, None]
    A *= r[None, :]
    A = 0.5 * (A + A.T)
    lam, V = la.eigh(A, subset_by_index=[0, m - 1], driver="evr")
    if not lam[0] > 0:
        raise AssemblyDefectError(f"non-positive first eigenvalue {lam[0]:.3e}")
    phi = V * r[:, None]
    # orientation: first significant entry positive
    for n in range(m):
        col = phi[:, n]
        k = np.flatnonzero(np.abs(col) > 1e-8 * np.abs(col).max())[0]
        if col[k] < 0:
            phi[:, n] = -col
    flux = np.asarray(system.K_BI @ phi).T
    return EigenBasis(system, lam, phi, flux)


def to_coeffs(basis: EigenBasis, y) -> np.ndarray:
    """``c_n = phi_n^T M y`` for an interior (or zero-trace full-node) field."""
    y = np.asarray(y, dtype=float)
    sysm = basis.system
    if y.shape == (sysm.grid.n_nodes,):
        y = y[sysm.grid.interior]
    if y.shape[0] != sysm.n_interior:
        raise ParameterError(f"field of length {y.shape[0]} does not match {sysm.n_interior} interior nodes")
    return basis.vectors.T @ (sysm.M_I * y) if y.ndim == 1 else basis.vectors.T @ (sysm.M_I[:, None] * y)


def from_coeffs(basis: EigenBasis, c) -> np.ndarray:
    """Interior field ``sum_n c_n phi_n``."""
    return basis.vectors @ basis.check(c)


def fractional_norm(basis: EigenBasis, c, theta: float) -> float:
    """``(sum_n lam_n**(2 theta) c_n**2)**(1/2)`` for ``theta >= -1/2``."""
    if theta < -0.5:
        raise ParameterError(f"theta={theta} below -1/2 is not supported")
    c = basis.check(c)
    return float(np.sqrt(np.sum(basis.eigenvalues ** (2.0 * theta) * c * c)))


def apply_A(basis: EigenBasis, c, power: int = 1) -> np.ndarray:
    """Multiply each coefficient by ``lam_n**power`` (``power`` is 1 or -1)."""
    if power not in (1, -1):
        raise ParameterError("power must be 1 or -1")
    c = basis.check(c)
    return c * basis.eigenvalues if power == 1 else c / basis.eigenvalues


def resolvent_solve(basis: EigenBasis, f, lam: float) -> np.ndarray:
    """Solve ``z + lam**2 A z = f`` mode by mode."""
    if lam == 0:
        raise ParameterError("lambda must be nonzero")
    f = basis.check(f)
    return f / (1.0 + lam * lam * basis.eigenvalues)


def poincare_constant(basis: EigenBasis) -> float:
    """Optimal discrete constant ``1 / lam_1``."""
    return float(1.0 / basis.eigenvalues[0])


def energy_norm_sq(basis: EigenBasis, c0, c1) -> float:
    """Squared norm in ``H_0^1(w) x L^2``: ``sum lam_n c0_n**2 + c1_n**2``."""
    c0 = basis.check(c0)
    c1 = basis.check(c1)
    return float(np.sum(basis.eigenvalues * c0 * c0) + np.sum(c1 * c1))


@dataclass(frozen=True)
class GroupBoundReport:
    lhs: float          # |f|_E^2
    rhs: float          # |u|_E^2
    ok: bool
    gap: float          # lam^2 |Au|_E^2, the exact surplus lhs - rhs
    weak_rhs: float     # (1 - |lam|)^2 |u|_E^2
    u: tuple[np.ndarray, np.ndarray]


def group_bound_check(basis: EigenBasis, f_pair, lam: float) -> GroupBoundReport:
    """Solve ``u - lam G u = f`` for the wave generator ``G`` and compare energies.

    With ``w_i + lam^2 A w_i = f_i`` the solution is ``u_1 = w_1 + lam w_2`` and
    ``u_2 = w_2 - lam A w_1``.
    """
    if not 0 < abs(lam) < 1:
        raise ParameterError(f"|lambda| must lie in (0, 1), got {lam}")
    f1, f2 = (basis.check(f) for f in f_pair)
    w1 = resolvent_solve(basis, f1, lam)
    w2 = resolvent_solve(basis, f2, lam)
    u1 = w1 + lam * w2
    u2 = w2 - lam * apply_A(basis, w1, 1)
    lhs = energy_norm_sq(basis, f1, f2)
    rhs = energy_norm_sq(basis, u1, u2)
    # G u = (u_2, -A u_1)
    gap = lam * lam * energy_norm_sq(basis, u2, -apply_A(basis, u1, 1))
    ok = lhs - rhs >= -64 * np.finfo(float).eps * max(lhs, rhs)
    return GroupBoundReport(lhs, rhs, bool(ok), gap, (1 - abs(lam)) ** 2 * rhs, (u1, u2))
