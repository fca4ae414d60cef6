"""Elliptic solves for the weighted operator: zero-trace problems and the Dirichlet map."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .discretization import AssembledSystem, Grid, _GL_W, _GL_X, norms
from .errors import AssemblyDefectError, ParameterError
from .spectral import EigenBasis


# ---------------------------------------------------------------------------
# boundary data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceNorms:
    h_half: float
    h1_gamma: float


def _check_psi(grid: Grid, psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (grid.boundary.size,):
        raise ParameterError(f"boundary data has shape {psi.shape}, expected ({grid.boundary.size},)")
    return psi


def trace_norms(grid: Grid, psi) -> TraceNorms:
    """Computable surrogates for the boundary norms.

    1D: both are the Euclidean norm of the two endpoint values.  2D: ``h_half``
    is the boundary L2 norm (edge trapezoid) and ``h1_gamma`` adds the squared
    tangential difference quotient along every boundary edge.
    """
    psi = _check_psi(grid, psi)
    if grid.dimension == 1:
        e = float(np.linalg.norm(psi))
        return TraceNorms(e, e)
    l2sq = float(np.sum(grid.boundary_measure * psi**2))
    pairs, lens = grid.boundary_edges
    dq = (psi[pairs[:, 1]] - psi[pairs[:, 0]]) / lens
    return TraceNorms(np.sqrt(l2sq), float(np.sqrt(l2sq + np.sum(lens * dq**2))))


# ---------------------------------------------------------------------------
# zero-trace solve
# ---------------------------------------------------------------------------

def _gradient_matrices(grid: Grid) -> list[sp.csr_matrix]:
    """``G_k[i, j] = int d(phi_i)/dx_k phi_j`` for each direction ``k``."""
    n = grid.n_nodes
    el = grid.elements
    if grid.dimension == 1:
        local = np.array([[-0.5, -0.5], [0.5, 0.5]])  # h cancels
        blocks = np.broadcast_to(local, (el.shape[0], 2, 2))
        rows = np.repeat(el, 2, axis=1).ravel()
        cols = np.tile(el, (1, 2)).ravel()
        return [sp.coo_matrix((blocks.ravel(), (rows, cols)), shape=(n, n)).tocsr()]
    hx, hy = grid.spacing
    t = 0.5 * (_GL_X + 1.0)
    wt = 0.5 * _GL_W
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    xi, eta = T1.ravel(), T2.ravel()
    W = np.outer(wt, wt).ravel() * hx * hy
    phi = np.stack([(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta], axis=1)
    dxi = np.stack([-(1 - eta), (1 - eta), eta, -eta], axis=1) / hx
    deta = np.stack([-(1 - xi), -xi, xi, (1 - xi)], axis=1) / hy
    rows = np.repeat(el, 4, axis=1).ravel()
    cols = np.tile(el, (1, 4)).ravel()
    out = []
    for d in (dxi, deta):
        local = np.einsum("q,qi,qj->ij", W, d, phi)
        blocks = np.broadcast_to(local, (el.shape[0], 4, 4))
        out.append(sp.coo_matrix((blocks.ravel(), (rows, cols)), shape=(n, n)).tocsr())
    return out


def solve_dirichlet_zero(system: AssembledSystem, f=None, fvec=None, V=None) -> np.ndarray:
    """Interior solution of ``A u + V u = f + div(fvec)`` with zero trace.

    The load is ``M f - sum_k int fvec_k d(phi)/dx_k`` with nodal ``f`` and a
    nodal vector field ``fvec`` of shape (N,) in 1D or (N, 2) in 2D; after
    integration by parts against zero-trace tests this is ``f + div(fvec)``.
    """
    grid = system.grid
    I = grid.interior
    rhs = np.zeros(system.n_interior)
    if f is not None:
        rhs += (system.mass * system.as_full(f))[I]
    if fvec is not None:
        F = np.asarray(fvec, dtype=float).reshape(grid.n_nodes, -1)
        if F.shape[1] != grid.dimension:
            raise ParameterError(f"fvec needs {grid.dimension} components per node")
        for k, Gk in enumerate(_gradient_matrices(grid)):
            rhs -= (Gk @ F[:, k])[I]
    if V is None:
        return system.K_II_solver(rhs)
    Vf = system.as_full(V) if np.ndim(V) else np.full(grid.n_nodes, float(V))
    if np.any(Vf < 0):
        raise ParameterError("potential V must be nonnegative")
    A = (system.K_II + sp.diags(system.M_I * Vf[I])).tocsc()
    return spla.spsolve(A, rhs)


# ---------------------------------------------------------------------------
# Dirichlet map
# ---------------------------------------------------------------------------

def dirichlet_map(system: AssembledSystem, psi) -> np.ndarray:
    """Discrete harmonic lift: ``y_B = psi`` and ``K_II y_I = -K_IB psi``."""
    psi = _check_psi(system.grid, psi)
    y = np.zeros(system.grid.n_nodes)
    y[system.grid.boundary] = psi
    if not np.any(psi):
        return y
    y[system.grid.interior] = system.K_II_solver(-(system.K_IB @ psi))
    res = np.linalg.norm((system.K_full @ y)[system.grid.interior])
    scale = spla.norm(system.K_full, 1) * np.linalg.norm(y)
    if not res <= 1e-10 * scale:
        raise AssemblyDefectError(f"Dirichlet lift residual {res:.3e} exceeds tolerance")
    return y


@dataclass(frozen=True)
class LiftBound:
    lift_norm: float
    trace_norm: float
    ratio: float


def dirichlet_map_bound(system: AssembledSystem, psi, *, trace: str = "h_half") -> LiftBound:
    """``|D psi|_{H^1(w)}`` (energy plus L2) against a surrogate trace norm."""
    psi = _check_psi(system.grid, psi)
    y = dirichlet_map(system, psi)
    nr = norms(system, y)
    lift = float(np.hypot(nr.h1w, nr.l2))
    tn = getattr(trace_norms(system.grid, psi), trace)
    return LiftBound(lift, tn, lift / tn if tn > 0 else 0.0)


def dirichlet_constant(system: AssembledSystem, battery) -> float:
    """Largest lift/trace ratio over a battery of boundary data."""
    return max(dirichlet_map_bound(system, psi).ratio for psi in battery)


def solve_lifted_bvp(system: AssembledSystem, f, psi) -> np.ndarray:
    """Full-node solution of ``A v = f`` with trace ``psi``: zero-trace part plus lift."""
    v = dirichlet_map(system, psi)
    if f is not None:
        v[system.grid.interior] += solve_dirichlet_zero(system, f)
    return v


# ---------------------------------------------------------------------------
# duality identities
# ---------------------------------------------------------------------------

def _relative(a: float, b: float) -> float:
    scale = abs(a) + abs(b)
    return 0.0 if scale == 0 else abs(a + b) / scale


def dstar_identity_check(system: AssembledSystem, psi, z) -> float:
    """Relative defect of ``(D psi, A z)_{L2} = -sum_b psi_b flux_b(z)`` for interior ``z``."""
    psi = _check_psi(system.grid, psi)
    z = np.asarray(z, dtype=float)
    if z.shape != (system.n_interior,):
        raise ParameterError("z must be an interior field")
    y = dirichlet_map(system, psi)
    Az = system.K_II @ z / system.M_I
    lhs = float(y[system.grid.interior] @ (system.M_I * Az))
    flux = np.asarray(system.K_BI @ z)
    return _relative(lhs, float(psi @ flux))


def flux_projection_residual(basis: EigenBasis, psi) -> np.ndarray:
    """Per-mode defect of ``(D psi, phi_n) = -lam_n^{-1} sum_b psi_b flux_b(phi_n)``."""
    system = basis.system
    psi = _check_psi(system.grid, psi)
    y = dirichlet_map(system, psi)
    proj = basis.vectors.T @ (system.M_I * y[system.grid.interior])
    via_flux = -(basis.boundary_flux @ psi) / basis.eigenvalues
    # modes that psi barely excites are measured against 1e-3 of the largest one
    scale = np.abs(proj) + np.abs(via_flux)
    scale = np.maximum(scale, 1e-3 * scale.max(initial=0.0))
    out = np.abs(proj - via_flux)
    return np.divide(out, scale, out=np.zeros_like(out), where=scale > 0)
