"""Degenerate weight functions and their certification.

A weight is constant, an interior power ``scale * |x - center|**alpha`` or a
tabulated 1D profile interpolated piecewise-linearly.  Besides evaluation this
module estimates A_p constants over dyadic cube families and checks that the
weight stays away from zero in a collar of the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping

import numpy as np

from .domain import Domain
from .errors import DomainError, ParameterError


class WeightKind(str, Enum):
    CONSTANT = "constant"
    INTERIOR_POWER = "interior_power"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class WeightSpec:
    """Descriptor of the coefficient ``w`` in ``-div(w grad y)``.

    ``alpha`` and ``center`` are used by ``interior_power`` only, ``table_x``
    and ``table_w`` by ``tabulated`` only.  ``scale`` multiplies every kind
    (for ``constant`` it is the value of the weight).
    """

    kind: WeightKind
    dimension: int = 1
    alpha: float = 0.0
    center: tuple[float, ...] | None = None
    scale: float = 1.0
    table_x: tuple[float, ...] | None = None
    table_w: tuple[float, ...] | None = None
    source: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", WeightKind(self.kind))
        if self.dimension not in (1, 2):
            raise ParameterError(f"dimension must be 1 or 2, got {self.dimension}")
        if not self.scale > 0:
            raise ParameterError("scale must be positive")
        if self.kind is WeightKind.INTERIOR_POWER:
            if not self.alpha > 0:
                raise ParameterError(f"interior_power needs alpha > 0, got {self.alpha}")
            center = self.center if self.center is not None else (0.0,) * self.dimension
            center = tuple(float(c) for c in np.atleast_1d(center))
            if len(center) != self.dimension:
                raise ParameterError("center must have one coordinate per dimension")
            object.__setattr__(self, "center", center)
        elif self.kind is WeightKind.TABULATED:
            if self.dimension != 1:
                raise ParameterError("tabulated weights are one-dimensional")
            if self.table_x is None or self.table_w is None:
                raise ParameterError("tabulated weight needs table_x and table_w")
            x = np.asarray(self.table_x, dtype=float)
            w = np.asarray(self.table_w, dtype=float)
            if x.ndim != 1 or x.shape != w.shape or x.size < 2:
                raise ParameterError("table must be two matching columns with >= 2 rows")
            if np.any(np.diff(x) <= 0):
                raise ParameterError("table abscissae must be strictly increasing")
            if np.any(w < 0):
                raise ParameterError("tabulated weight must be nonnegative")
            object.__setattr__(self, "table_x", tuple(x.tolist()))
            object.__setattr__(self, "table_w", tuple(w.tolist()))

    # construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, value: float = 1.0, dimension: int = 1) -> "WeightSpec":
        return cls(WeightKind.CONSTANT, dimension=dimension, scale=value)

    @classmethod
    def power(cls, alpha: float, center=None, dimension: int = 1, scale: float = 1.0) -> "WeightSpec":
        return cls(WeightKind.INTERIOR_POWER, dimension=dimension, alpha=alpha,
                   center=center, scale=scale)

    @classmethod
    def tabulated(cls, x, w, scale: float = 1.0, source: str | None = None) -> "WeightSpec":
        return cls(WeightKind.TABULATED, dimension=1, table_x=tuple(np.asarray(x, float)),
                   table_w=tuple(np.asarray(w, float)), scale=scale, source=source)

    @classmethod
    def from_table_file(cls, path, scale: float = 1.0) -> "WeightSpec":
        """Two columns ``x, w`` separated by commas or whitespace; one header row allowed."""
        rows = []
        for i, line in enumerate(Path(path).read_text().splitlines()):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                rows.append([float(v) for v in line.replace(",", " ").split()])
            except ValueError:
                if rows:
                    raise ParameterError(f"{path}:{i + 1}: non-numeric row {line!r}") from None
        if not rows or len({len(r) for r in rows}) != 1:
            raise ParameterError(f"{path}: expected a rectangular numeric table")
        data = np.array(rows)
        if data.shape[1] != 2:
            raise ParameterError(f"{path}: expected two columns (x, w), got {data.shape[1]}")
        return cls.tabulated(data[:, 0], data[:, 1], scale=scale, source=str(path))

    @classmethod
    def from_mapping(cls, cfg: Mapping[str, str], base_dir: Path | None = None) -> "WeightSpec":
        """Build from a config section with keys kind, alpha, center, dimension, scale, table."""
        kind = WeightKind(str(cfg.get("kind", "constant")).strip())
        dim = int(cfg.get("dimension", 1))
        scale = float(cfg.get("scale", 1.0))
        if kind is WeightKind.CONSTANT:
            return cls.constant(scale, dim)
        if kind is WeightKind.INTERIOR_POWER:
            center = cfg.get("center")
            if center is not None:
                center = tuple(float(c) for c in str(center).replace(",", " ").split())
            return cls.power(float(cfg["alpha"]), center, dim, scale)
        path = Path(str(cfg["table"]))
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return cls.from_table_file(path, scale)

    def to_mapping(self) -> dict[str, str]:
        out = {"kind": self.kind.value, "dimension": str(self.dimension), "scale": repr(self.scale)}
        if self.kind is WeightKind.INTERIOR_POWER:
            out["alpha"] = repr(self.alpha)
            out["center"] = " ".join(repr(c) for c in self.center)
        if self.kind is WeightKind.TABULATED and self.source:
            out["table"] = self.source
        return out

    def scaled(self, factor: float) -> "WeightSpec":
        from dataclasses import replace
        return replace(self, scale=self.scale * factor)

    # evaluation -----------------------------------------------------------
    def distance(self, points) -> np.ndarray:
        """Euclidean distance to the degeneracy center (interior_power only)."""
        pts = _points(points, self.dimension)
        return np.hypot.reduce(pts - np.asarray(self.center), axis=1)

    def __call__(self, points) -> np.ndarray:
        pts = _points(points, self.dimension)
        if self.kind is WeightKind.CONSTANT:
            return np.full(pts.shape[0], self.scale)
        if self.kind is WeightKind.INTERIOR_POWER:
            return self.scale * self.distance(pts) ** self.alpha
        return self.scale * np.interp(pts[:, 0], self.table_x, self.table_w)

    def admissible_alpha(self) -> bool:
        """True when the exponent lies in the range the well-posedness theory covers."""
        if self.kind is not WeightKind.INTERIOR_POWER:
            return True
        hi = 1.0 if self.dimension == 1 else 2.0
        return 0.0 < self.alpha < hi


def _points(points, dimension: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if dimension == 1:
        return pts.reshape(-1, 1)
    pts = np.atleast_2d(pts)
    if pts.shape[-1] != dimension:
        raise ParameterError(f"expected {dimension}D points, got shape {pts.shape}")
    return pts


def eval_weight(spec: WeightSpec, point, domain: Domain | None = None):
    """Evaluate ``w`` at one point (returns float) or an array of points."""
    if domain is not None:
        if domain.dimension != spec.dimension:
            raise DomainError("weight and domain dimensions differ")
        domain.require(point)
    values = spec(point)
    scalar = np.ndim(point) == 0 or (spec.dimension > 1 and np.ndim(point) == 1)
    return float(values[0]) if scalar else values


def validate_for_domain(spec: WeightSpec, domain: Domain, *, allow_boundary_degeneracy: bool = False) -> None:
    """Check the structural hypotheses that tie a weight to a domain.

    The degeneracy center of an interior power must lie strictly inside the
    domain unless ``allow_boundary_degeneracy``; the exponent must be in the
    admissible range.
    """
    if spec.dimension != domain.dimension:
        raise DomainError("weight and domain dimensions differ")
    if spec.kind is WeightKind.INTERIOR_POWER:
        if not spec.admissible_alpha():
            raise ParameterError(
                f"alpha={spec.alpha} outside the admissible range for {spec.dimension}D")
        if not domain.contains(spec.center)[0]:
            raise DomainError(f"degeneracy center {spec.center} outside {domain.bounds}")
        if not allow_boundary_degeneracy and not domain.interior_contains(spec.center):
            raise DomainError(f"degeneracy center {spec.center} lies on the boundary")


# ---------------------------------------------------------------------------
# A_p constants over dyadic cubes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class A2Report:
    """Dyadic A_p bracket estimate.

    ``per_level_constant[l-1]`` is the running supremum of the bracket over all
    dyadic cubes of levels ``1..l``; ``resolution[l-1]`` is the distance below
    which a power weight is frozen at level ``l``.
    """

    p: float
    per_level_constant: tuple[float, ...]
    stabilized: bool
    estimate: float
    resolution: tuple[float, ...] = ()

    @property
    def levels(self) -> tuple[int, ...]:
        return tuple(range(1, len(self.per_level_constant) + 1))

    def growth(self, lo: int, hi: int) -> float:
        """Ratio of the level-``hi`` constant to the level-``lo`` constant."""
        return self.per_level_constant[hi - 1] / self.per_level_constant[lo - 1]


_GL4_X, _GL4_W = np.polynomial.legendre.leggauss(4)


def _floored_power_integral(a, b, beta: float, rho: float):
    """Exact integral of ``max(|s|, rho)**beta`` over ``[a, b]`` (vectorized)."""

    def F(s):
        s = np.asarray(s, dtype=float)
        r = np.abs(s)
        inner = rho ** beta * np.minimum(r, rho)
        outer = np.zeros_like(r)
        far = r > rho
        if np.isclose(beta, -1.0):
            outer[far] = np.log(r[far] / rho)
        else:
            outer[far] = (r[far] ** (beta + 1) - rho ** (beta + 1)) / (beta + 1)
        return np.sign(s) * (inner + outer)

    return F(b) - F(a)


def _simpson_average(fn, a, b, panels: int = 64):
    """Composite Simpson average of ``fn`` over each interval ``[a_i, b_i]``."""
    t = np.linspace(0.0, 1.0, 2 * panels + 1)
    coef = np.ones_like(t)
    coef[1:-1:2] = 4.0
    coef[2:-1:2] = 2.0
    coef /= coef.sum()
    x = a[:, None] + (b - a)[:, None] * t[None, :]
    return (fn(x) * coef).sum(axis=1)


def _cube_brackets_1d(spec: WeightSpec, a, b, p: float, rho: float):
    L = b - a
    if spec.kind is WeightKind.INTERIOR_POWER:
        c = spec.center[0]
        s = spec.scale
        avg_w = s * _floored_power_integral(a - c, b - c, spec.alpha, rho) / L
        if p == 1.0:
            d = np.where((a <= c) & (c <= b), 0.0, np.minimum(np.abs(a - c), np.abs(b - c)))
            return avg_w / (s * np.maximum(d, rho) ** spec.alpha)
        gamma = 1.0 / (p - 1.0)
        avg_r = s ** -gamma * _floored_power_integral(a - c, b - c, -spec.alpha * gamma, rho) / L
        return avg_w * avg_r ** (p - 1.0)
    # tabulated
    tx = np.asarray(spec.table_x)
    tw = spec.scale * np.asarray(spec.table_w)
    interp = lambda x: np.interp(x, tx, tw)
    avg_w = _simpson_average(interp, a, b)
    if p == 1.0:
        lo = np.minimum(interp(a), interp(b))
        for xi, wi in zip(tx, tw):
            inside = (a <= xi) & (xi <= b)
            lo = np.where(inside, np.minimum(lo, wi), lo)
        with np.errstate(divide="ignore"):
            return np.where(lo > 0, avg_w / np.where(lo > 0, lo, 1.0), np.inf)
    gamma = 1.0 / (p - 1.0)
    with np.errstate(divide="ignore"):
        avg_r = _simpson_average(lambda x: interp(x) ** -gamma, a, b)
    return avg_w * avg_r ** (p - 1.0)


def _cube_brackets_2d(spec: WeightSpec, lo, hi, p: float, rho: float, panels: int = 4):
    """Tensor Gauss-Legendre brackets for rectangles ``[lo_i, hi_i]``."""
    t = (np.arange(panels)[:, None] + 0.5 * (_GL4_X[None, :] + 1.0)).ravel() / panels
    wt = np.tile(_GL4_W / 2.0, panels) / panels
    xs = lo[:, 0, None] + (hi[:, 0] - lo[:, 0])[:, None] * t[None, :]
    ys = lo[:, 1, None] + (hi[:, 1] - lo[:, 1])[:, None] * t[None, :]
    W = np.outer(wt, wt)
    cx, cy = spec.center
    r = np.sqrt((xs[:, :, None] - cx) ** 2 + (ys[:, None, :] - cy) ** 2)
    r = np.maximum(r, rho)
    base = spec.scale * r ** spec.alpha
    avg_w = np.einsum("kij,ij->k", base, W)
    if p == 1.0:
        dx = np.maximum(np.maximum(lo[:, 0] - cx, cx - hi[:, 0]), 0.0)
        dy = np.maximum(np.maximum(lo[:, 1] - cy, cy - hi[:, 1]), 0.0)
        d = np.maximum(np.hypot(dx, dy), rho)
        return avg_w / (spec.scale * d ** spec.alpha)
    gamma = 1.0 / (p - 1.0)
    avg_r = np.einsum("kij,ij->k", base ** -gamma, W)
    return avg_w * avg_r ** (p - 1.0)


def _dyadic_cubes(domain: Domain, level: int):
    n = 2 ** level
    edges = [np.linspace(lo, hi, n + 1) for lo, hi in domain.bounds]
    if domain.dimension == 1:
        return edges[0][:-1], edges[0][1:]
    ex, ey = edges
    X0, Y0 = np.meshgrid(ex[:-1], ey[:-1], indexing="ij")
    X1, Y1 = np.meshgrid(ex[1:], ey[1:], indexing="ij")
    lo = np.stack([X0.ravel(), Y0.ravel()], axis=1)
    hi = np.stack([X1.ravel(), Y1.ravel()], axis=1)
    return lo, hi


def estimate_ap_constant(spec: WeightSpec, domain: Domain, p: float = 2.0,
                         max_level: int = 12, *, tol: float = 0.01) -> A2Report:
    """Estimate the A_p constant of ``spec`` on dyadic subcubes of ``domain``.

    Level ``l`` takes the supremum of the A_p bracket over every dyadic cube of
    side at least ``L / 2**l``.  Power weights are integrated exactly with the
    degeneracy frozen below half the level-``l`` side, so a weight whose
    reciprocal power is not integrable shows up as unbounded growth across
    levels instead of an immediate infinity.
    """
    if not p >= 1.0:
        raise ParameterError(f"p must be >= 1, got {p}")
    if max_level < 1:
        raise ParameterError("max_level must be at least 1")
    if spec.dimension != domain.dimension:
        raise DomainError("weight and domain dimensions differ")

    if spec.kind is WeightKind.CONSTANT:
        values = (1.0,) * max_level
        return A2Report(float(p), values, True, 1.0, (0.0,) * max_level)

    running = 0.0
    per_level, resolution = [], []
    for level in range(1, max_level + 1):
        rho = float(np.min(domain.lengths)) / 2 ** (level + 1)
        sup = 0.0
        for coarse in range(1, level + 1):
            lo, hi = _dyadic_cubes(domain, coarse)
            if domain.dimension == 1:
                br = _cube_brackets_1d(spec, lo, hi, float(p), rho)
            else:
                if spec.kind is not WeightKind.INTERIOR_POWER:
                    raise ParameterError("2D A_p estimates support power weights only")
                br = _cube_brackets_2d(spec, lo, hi, float(p), rho)
            sup = max(sup, float(np.max(br)))
        running = max(running, sup)
        per_level.append(running)
        resolution.append(rho)

    finite = np.isfinite(per_level[-1])
    if len(per_level) >= 2 and finite:
        prev, last = per_level[-2], per_level[-1]
        stabilized = abs(last - prev) < tol * abs(last)
    else:
        stabilized = False
    return A2Report(float(p), tuple(per_level), bool(stabilized), float(per_level[-1]),
                    tuple(resolution))


# ---------------------------------------------------------------------------
# boundary collar
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NondegeneracyReport:
    lambda_floor: float
    ok: bool


def check_boundary_nondegeneracy(spec: WeightSpec, domain: Domain, beta: float,
                                 samples: int = 2001) -> NondegeneracyReport:
    """Minimum of ``w`` over the closed collar ``{dist(x, boundary) <= 2 beta}``."""
    if not beta > 0:
        raise ParameterError("beta must be positive")
    if spec.dimension != domain.dimension:
        raise DomainError("weight and domain dimensions differ")
    width = 2.0 * beta
    if spec.kind is WeightKind.INTERIOR_POWER:
        if domain.distance_to_boundary(spec.center)[0] <= width:
            return NondegeneracyReport(0.0, False)
    if domain.dimension == 1:
        (a, b), = domain.bounds
        w_ = min(width, b - a)
        pts = np.r_[np.linspace(a, a + w_, samples), np.linspace(b - w_, b, samples)]
    else:
        axes = []
        for lo, hi in domain.bounds:
            n = max(samples // 4, 101)
            extra = [lo + width, hi - width]
            axes.append(np.unique(np.r_[np.linspace(lo, hi, n), [e for e in extra if lo <= e <= hi]]))
        X, Y = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([X.ravel(), Y.ravel()], axis=1)
        pts = pts[domain.distance_to_boundary(pts) <= width * (1 + 1e-12)]
    floor = float(np.min(spec(pts)))
    return NondegeneracyReport(floor, floor > 0)


def catalog() -> dict[str, tuple[WeightSpec, Domain]]:
    """Reference weights: the string, the weakly degenerate interval, the radial square."""
    return {
        "string": (WeightSpec.constant(1.0), Domain.interval(0.0, 1.0)),
        "interior_power_1d": (WeightSpec.power(0.5, (0.0,)), Domain.interval(-1.0, 1.0)),
        "endpoint_power_1d": (WeightSpec.power(0.5, (0.0,)), Domain.interval(0.0, 1.0)),
        "radial_2d": (WeightSpec.power(1.0, (0.0, 0.0), dimension=2),
                      Domain.rectangle(-1.0, 1.0, -1.0, 1.0)),
    }
