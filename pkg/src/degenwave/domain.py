"""Axis-aligned intervals and rectangles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError


@dataclass(frozen=True)
class Domain:
    """Product of closed intervals, one ``(lo, hi)`` pair per dimension."""

    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(b) not in (1, 2):
            raise ParameterError(f"only 1D and 2D domains are supported, got {len(b)}D")
        for lo, hi in b:
            if not hi > lo:
                raise ParameterError(f"degenerate extent ({lo}, {hi})")
        object.__setattr__(self, "bounds", b)

    @classmethod
    def interval(cls, a: float, b: float) -> "Domain":
        return cls(((a, b),))

    @classmethod
    def rectangle(cls, ax: float, bx: float, ay: float, by: float) -> "Domain":
        return cls(((ax, bx), (ay, by)))

    @property
    def dimension(self) -> int:
        return len(self.bounds)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([hi - lo for lo, hi in self.bounds])

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds])

    def _as_points(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if self.dimension == 1 and pts.ndim <= 1:
            return pts.reshape(-1, 1)
        return np.atleast_2d(pts)

    def contains(self, points, *, tol: float = 1e-12) -> np.ndarray:
        pts = self._as_points(points)
        scale = tol * max(1.0, float(np.max(np.abs(np.r_[self.lower, self.upper]))))
        return np.all((pts >= self.lower - scale) & (pts <= self.upper + scale), axis=1)

    def interior_contains(self, point) -> bool:
        pts = self._as_points(point)
        return bool(np.all((pts > self.lower) & (pts < self.upper)))

    def require(self, points) -> None:
        ok = self.contains(points)
        if not np.all(ok):
            bad = self._as_points(points)[~ok][0]
            raise DomainError(f"point {bad.tolist()} lies outside {self.bounds}")

    def distance_to_boundary(self, points) -> np.ndarray:
        pts = self._as_points(points)
        return np.min(np.minimum(pts - self.lower, self.upper - pts), axis=1)
