"""Tensor grids and weighted P1/Q1 finite-element assembly.

The stiffness matrix carries the weight, ``K[i, j] = int w grad(phi_i).grad(phi_j)``;
the mass matrix is lumped, ``M[i, i] = int phi_i``.  Boundary fluxes are read
off the variational residual ``K y - M r`` at boundary nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .domain import Domain
from .errors import AssemblyDefectError, ParameterError
from .kernels import q1_element_stiffness
from .weights import WeightKind, WeightSpec

_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform tensor grid.  Nodes are ordered with x varying fastest."""

    domain: Domain
    shape: tuple[int, ...]
    nodes: np.ndarray          # (N, d)
    elements: np.ndarray       # (E, 2) in 1D, (E, 4) counter-clockwise in 2D
    interior: np.ndarray
    boundary: np.ndarray
    spacing: tuple[float, ...]

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def h(self) -> float:
        """Largest element diameter."""
        return float(np.sqrt(np.sum(np.square(self.spacing))))

    @cached_property
    def boundary_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Boundary edges as pairs of positions into ``boundary`` with their lengths.

        Empty in 1D (the boundary is two points).
        """
        if self.dimension == 1:
            return np.zeros((0, 2), dtype=int), np.zeros(0)
        nx, ny = self.shape
        hx, hy = self.spacing
        pos = -np.ones(self.n_nodes, dtype=int)
        pos[self.boundary] = np.arange(self.boundary.size)
        idx = lambda i, j: j * nx + i
        pairs, lens = [], []
        for i in range(nx - 1):
            for j in (0, ny - 1):
                pairs.append((pos[idx(i, j)], pos[idx(i + 1, j)]))
                lens.append(hx)
        for j in range(ny - 1):
            for i in (0, nx - 1):
                pairs.append((pos[idx(i, j)], pos[idx(i, j + 1)]))
                lens.append(hy)
        return np.array(pairs, dtype=int), np.array(lens)

    @cached_property
    def boundary_measure(self) -> np.ndarray:
        """Quadrature weights on the boundary: counting measure in 1D, edge trapezoid in 2D."""
        if self.dimension == 1:
            return np.ones(self.boundary.size)
        pairs, lens = self.boundary_edges
        out = np.zeros(self.boundary.size)
        np.add.at(out, pairs[:, 0], 0.5 * lens)
        np.add.at(out, pairs[:, 1], 0.5 * lens)
        return out


def build_grid(domain: Domain, resolution) -> Grid:
    """Uniform grid with ``resolution`` nodes per direction (int or per-axis tuple)."""
    res = tuple(int(r) for r in np.atleast_1d(resolution))
    if len(res) == 1:
        res = res * domain.dimension
    if len(res) != domain.dimension:
        raise ParameterError(f"resolution {resolution} does not match a {domain.dimension}D domain")
    if min(res) < 3:
        raise ParameterError("need at least 3 nodes per direction")
    axes = [np.linspace(lo, hi, n) for (lo, hi), n in zip(domain.bounds, res)]
    spacing = tuple(float((hi - lo) / (n - 1)) for (lo, hi), n in zip(domain.bounds, res))
    if domain.dimension == 1:
        (n,) = res
        nodes = axes[0][:, None]
        elements = np.stack([np.arange(n - 1), np.arange(1, n)], axis=1)
        boundary = np.array([0, n - 1])
        interior = np.arange(1, n - 1)
    else:
        nx, ny = res
        X, Y = np.meshgrid(axes[0], axes[1], indexing="xy")
        nodes = np.stack([X.ravel(), Y.ravel()], axis=1)
        I, J = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1), indexing="xy")
        I, J = I.ravel(), J.ravel()
        n0 = J * nx + I
        elements = np.stack([n0, n0 + 1, n0 + nx + 1, n0 + nx], axis=1)
        ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
        on_b = ((ii == 0) | (ii == nx - 1) | (jj == 0) | (jj == ny - 1)).ravel()
        boundary = np.flatnonzero(on_b)
        interior = np.flatnonzero(~on_b)
    return Grid(domain, res, nodes, elements, interior, boundary, spacing)


# ---------------------------------------------------------------------------
# element integrals
# ---------------------------------------------------------------------------

def power_antiderivative(s, alpha: float) -> np.ndarray:
    """``F(s) = sign(s) |s|**(alpha+1) / (alpha+1)`` so that ``F' = |s|**alpha``."""
    s = np.asarray(s, dtype=float)
    return np.sign(s) * np.abs(s) ** (alpha + 1.0) / (alpha + 1.0)


def _pl_antiderivative(x, tx, tw):
    """Antiderivative of the piecewise-linear interpolant (constant extension outside)."""
    x = np.asarray(x, dtype=float)
    cum = np.r_[0.0, np.cumsum(0.5 * (tw[1:] + tw[:-1]) * np.diff(tx))]
    k = np.clip(np.searchsorted(tx, x, side="right") - 1, 0, tx.size - 1)
    xk = tx[k]
    inside = (x >= tx[0]) & (x <= tx[-1])
    mid = cum[k] + 0.5 * (x - xk) * (tw[k] + np.interp(x, tx, tw))
    below = (x - tx[0]) * tw[0]
    above = cum[-1] + (x - tx[-1]) * tw[-1]
    return np.where(inside, mid, np.where(x < tx[0], below, above))


def weight_integral_1d(spec: WeightSpec, a, b) -> np.ndarray:
    """Exact ``int_a^b w`` for every interval (constant, power or tabulated)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if spec.kind is WeightKind.CONSTANT:
        return spec.scale * (b - a)
    if spec.kind is WeightKind.INTERIOR_POWER:
        c = spec.center[0]
        return spec.scale * (power_antiderivative(b - c, spec.alpha)
                             - power_antiderivative(a - c, spec.alpha))
    tx = np.asarray(spec.table_x)
    tw = np.asarray(spec.table_w)
    return spec.scale * (_pl_antiderivative(b, tx, tw) - _pl_antiderivative(a, tx, tw))


def _q1_reference(hx: float, hy: float):
    """Quadrature points on [0,1]^2 and per-point gradient outer products for a rectangle."""
    t = 0.5 * (_GL_X + 1.0)
    wt = 0.5 * _GL_W
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    W = np.outer(wt, wt).ravel()
    xi, eta = T1.ravel(), T2.ravel()
    # local nodes (0,0), (1,0), (1,1), (0,1)
    dxi = np.stack([-(1 - eta), (1 - eta), eta, -eta], axis=1) / hx
    deta = np.stack([-(1 - xi), -xi, xi, (1 - xi)], axis=1) / hy
    G = (dxi[:, :, None] * dxi[:, None, :] + deta[:, :, None] * deta[:, None, :])
    G *= (W * hx * hy)[:, None, None]
    return np.stack([xi, eta], axis=1), G


# ---------------------------------------------------------------------------
# assembled system
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AssembledSystem:
    """Weighted stiffness ``K_full`` and lumped mass over all nodes of ``grid``."""

    grid: Grid
    weight: WeightSpec
    K_full: sp.csr_matrix
    mass: np.ndarray           # lumped diagonal of M_full

    @property
    def M_full(self) -> sp.dia_matrix:
        return sp.diags(self.mass)

    def _block(self, rows, cols) -> sp.csr_matrix:
        return self.K_full[rows][:, cols].tocsr()

    @cached_property
    def K_II(self) -> sp.csr_matrix:
        return self._block(self.grid.interior, self.grid.interior)

    @cached_property
    def K_IB(self) -> sp.csr_matrix:
        return self._block(self.grid.interior, self.grid.boundary)

    @cached_property
    def K_BI(self) -> sp.csr_matrix:
        return self._block(self.grid.boundary, self.grid.interior)

    @cached_property
    def K_BB(self) -> sp.csr_matrix:
        return self._block(self.grid.boundary, self.grid.boundary)

    @cached_property
    def K_II_solver(self):
        """Sparse LU solve with ``K_II`` (factored once per system)."""
        try:
            lu = spla.splu(self.K_II.tocsc())
        except RuntimeError as exc:
            raise AssemblyDefectError(f"interior stiffness is singular: {exc}") from exc
        return lu.solve

    @property
    def M_I(self) -> np.ndarray:
        return self.mass[self.grid.interior]

    @property
    def n_interior(self) -> int:
        return self.grid.interior.size

    @property
    def n_boundary(self) -> int:
        return self.grid.boundary.size

    def extend(self, y_interior, y_boundary=None) -> np.ndarray:
        """Full-node vector from interior values (boundary values default to zero)."""
        y = np.zeros(self.grid.n_nodes)
        y[self.grid.interior] = y_interior
        if y_boundary is not None:
            y[self.grid.boundary] = y_boundary
        return y

    def as_full(self, y) -> np.ndarray:
        """Accept a full-node or interior-only vector and return the full-node form."""
        y = np.asarray(y, dtype=float)
        if y.shape == (self.grid.n_nodes,):
            return y
        if y.shape == (self.n_interior,):
            return self.extend(y)
        raise ParameterError(
            f"vector of length {y.shape} matches neither {self.grid.n_nodes} nodes "
            f"nor {self.n_interior} interior nodes")

    def dump_triplets(self, directory) -> list[Path]:
        """Write ``K_full`` and ``M_full`` as ``row col value`` text files."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        out = []
        for name, mat in (("K_full", self.K_full), ("M_full", self.M_full)):
            coo = sp.coo_matrix(mat)
            order = np.lexsort((coo.col, coo.row))
            path = directory / f"{name}.txt"
            np.savetxt(path, np.column_stack([coo.row[order], coo.col[order], coo.data[order]]),
                       fmt=["%d", "%d", "%.17g"], header="row col value")
            out.append(path)
        coords = directory / "nodes.txt"
        np.savetxt(coords, self.grid.nodes, fmt="%.17g", header="node coordinates")
        out.append(coords)
        return out


def assemble(spec: WeightSpec, grid: Grid, *, use_numba: bool | None = None) -> AssembledSystem:
    """Assemble the weighted stiffness and lumped mass for ``-div(w grad .)``."""
    if spec.dimension != grid.dimension:
        raise ParameterError("weight and grid dimensions differ")
    n = grid.n_nodes
    el = grid.elements
    if grid.dimension == 1:
        x = grid.nodes[:, 0]
        a, b = x[el[:, 0]], x[el[:, 1]]
        h = b - a
        kappa = weight_integral_1d(spec, a, b) / h**2
        local = np.array([[1.0, -1.0], [-1.0, 1.0]])
        blocks = kappa[:, None, None] * local[None]
        mass = np.zeros(n)
        np.add.at(mass, el[:, 0], 0.5 * h)
        np.add.at(mass, el[:, 1], 0.5 * h)
        nloc = 2
    else:
        hx, hy = grid.spacing
        ref, G = _q1_reference(hx, hy)
        origin = grid.nodes[el[:, 0]]
        qpts = origin[:, None, :] + ref[None, :, :] * np.array([hx, hy])
        wq = spec(qpts.reshape(-1, 2)).reshape(el.shape[0], -1)
        blocks = q1_element_stiffness(wq, G, use_numba=use_numba)
        mass = np.zeros(n)
        for k in range(4):
            np.add.at(mass, el[:, k], 0.25 * hx * hy)
        nloc = 4
    rows = np.repeat(el, nloc, axis=1).ravel()
    cols = np.tile(el, (1, nloc)).ravel()
    K = sp.coo_matrix((blocks.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    K.sum_duplicates()
    # exact symmetry independent of the duplicate-summation order
    K = ((K + K.T) * 0.5).tocsr()
    K.sort_indices()
    return AssembledSystem(grid, spec, K, mass)


# ---------------------------------------------------------------------------
# traces and norms
# ---------------------------------------------------------------------------

def conormal_trace(system: AssembledSystem, y, residual_source=None) -> np.ndarray:
    """Discrete conormal flux ``(K_full y - M r)`` at the boundary nodes.

    ``residual_source`` is the full-node field ``r`` the operator equals in the
    interior (for time-dependent states ``r = f - y_tt``); ``None`` means zero.
    """
    y = system.as_full(y)
    flux = system.K_full @ y
    if residual_source is not None:
        flux = flux - system.mass * system.as_full(residual_source)
    return flux[system.grid.boundary]


@dataclass(frozen=True)
class Norms:
    l2: float
    h1w: float


def norms(system: AssembledSystem, y) -> Norms:
    """Lumped L2 norm and weighted energy seminorm of a nodal field."""
    y = system.as_full(y)
    l2 = float(np.sqrt(y @ (system.mass * y)))
    e = float(y @ (system.K_full @ y))
    return Norms(l2, float(np.sqrt(max(e, 0.0))))


def green_identity_residual(system: AssembledSystem, y, z) -> float:
    """Relative defect of ``z.K y = z_I.(K y)_I + sum_b z_b flux_b(y)``."""
    y = system.as_full(y)
    z = system.as_full(z)
    I, B = system.grid.interior, system.grid.boundary
    Ky = system.K_full @ y
    lhs = z @ Ky
    rhs = z[I] @ Ky[I] + z[B] @ conormal_trace(system, y)
    scale = np.abs(z) @ np.abs(Ky) + 1e-300
    return float(abs(lhs - rhs) / scale)
