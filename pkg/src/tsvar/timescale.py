"""Bounded time scales as finite point sets, with the delta calculus.

Genuinely discrete scales (integer grids, q-grids, explicit point sets) are
represented exactly.  Dense intervals enter as uniform samplings whose points
carry a ``dense_mask`` flag; on such samplings every operator converges at
first order in the mesh width.  All points of a finite representation are
right-scattered, so the delta derivative is always a forward difference
quotient and the delta integral a graininess-weighted sum.

Boundary conventions: the forward jump fixes the maximum and the backward
jump fixes the minimum, hence ``mu`` vanishes at the last point and the delta
derivative is undefined there (the scale minus its last point is the domain
of differentiation, reachable through :meth:`TimeScale.kappa_last`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ScaleMismatchError

__all__ = ["DEDUP_RTOL", "TimeScale", "GridFunction"]

#: Constructor points closer than this (relative) tolerance collapse into one,
#: so point identity is by index and never by floating-point comparison.
DEDUP_RTOL = 1e-12


def _dedupe(points: np.ndarray) -> np.ndarray:
    kept = [float(points[0])]
    for p in points[1:]:
        p = float(p)
        if p - kept[-1] > DEDUP_RTOL * max(1.0, abs(p), abs(kept[-1])):
            kept.append(p)
    return np.asarray(kept, dtype=float)


@dataclass(frozen=True, eq=False)
class TimeScale:
    """Strictly increasing points of a bounded time scale.

    ``dense_mask[i]`` is True when point ``i`` samples a dense sub-interval.
    The flag affects reporting and the admissibility of the classical-limit
    evaluators, never the arithmetic of the operators.
    """

    points: np.ndarray
    dense_mask: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        mask = np.asarray(self.dense_mask, dtype=bool)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("a time scale needs at least two points")
        if not np.all(np.diff(pts) > 0.0):
            raise ValueError("time scale points must be strictly increasing")
        if mask.shape != pts.shape:
            raise ValueError("dense_mask must have one flag per point")
        pts.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "dense_mask", mask)

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_points(cls, points: Iterable[float], dense: bool = False) -> "TimeScale":
        """Explicit point set; input is sorted and near-duplicates are merged."""
        pts = np.sort(np.asarray(list(points), dtype=float))
        if pts.size == 0:
            raise ValueError("empty point list")
        pts = _dedupe(pts)
        mask = np.full(pts.shape, bool(dense))
        return cls(pts, mask)

    @classmethod
    def integer_range(cls, a: int, b: int) -> "TimeScale":
        """Integer grid ``a, a+1, ..., b``."""
        a, b = int(a), int(b)
        if b <= a:
            raise ValueError("integer grid needs a < b")
        pts = np.arange(a, b + 1, dtype=float)
        return cls(pts, np.zeros(pts.shape, dtype=bool))

    @classmethod
    def uniform(cls, a: float, b: float, n: int) -> "TimeScale":
        """Uniform ``n``-point sampling of the dense interval ``[a, b]``."""
        if n < 2:
            raise ValueError("uniform sampling needs at least two points")
        if not b > a:
            raise ValueError("uniform sampling needs a < b")
        pts = np.linspace(float(a), float(b), int(n))
        return cls(pts, np.ones(pts.shape, dtype=bool))

    @classmethod
    def q_grid(cls, q: float, k_min: int, k_max: int, include_zero: bool = False) -> "TimeScale":
        """Geometric grid ``q**k`` for ``k_min <= k <= k_max``, optionally with 0.

        With ``include_zero`` the graininess of the 0-point is the smallest
        positive point, by the forward-jump definition.
        """
        q = float(q)
        if q <= 1.0:
            raise ValueError("q-grid needs q > 1")
        if k_max < k_min:
            raise ValueError("q-grid needs k_min <= k_max")
        pts = [q**k for k in range(int(k_min), int(k_max) + 1)]
        if include_zero:
            pts = [0.0] + pts
        if len(pts) < 2:
            raise ValueError("q-grid needs at least two points")
        arr = np.asarray(pts, dtype=float)
        return cls(arr, np.zeros(arr.shape, dtype=bool))

    # -- basic queries -----------------------------------------------------

    @property
    def n(self) -> int:
        return int(self.points.size)

    def __len__(self) -> int:
        return self.n

    @property
    def a(self) -> float:
        return float(self.points[0])

    @property
    def b(self) -> float:
        return float(self.points[-1])

    def matches(self, other: "TimeScale") -> bool:
        """Same point set (exact equality; points are index-identified)."""
        return self is other or np.array_equal(self.points, other.points)

    def index_of(self, t: float, rtol: float = 1e-9) -> int:
        """Index of the point equal to ``t`` up to ``rtol``; raises otherwise."""
        i = int(np.argmin(np.abs(self.points - t)))
        if abs(self.points[i] - t) <= rtol * max(1.0, abs(t)):
            return i
        raise ValueError(f"{t!r} is not a point of this time scale")

    # -- jump operators ----------------------------------------------------

    def _check_index(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self.n:
            raise IndexError(f"point index {i} out of range [0, {self.n})")
        return i

    def sigma(self, i: int) -> int:
        """Forward jump: next point's index; the last index maps to itself."""
        i = self._check_index(i)
        return min(i + 1, self.n - 1)

    def rho(self, i: int) -> int:
        """Backward jump: previous point's index; the first maps to itself."""
        i = self._check_index(i)
        return max(i - 1, 0)

    def mu(self, i: int) -> float:
        """Graininess ``points[sigma(i)] - points[i]``; zero at the last point."""
        i = self._check_index(i)
        return float(self.points[self.sigma(i)] - self.points[i])

    @cached_property
    def mu_values(self) -> np.ndarray:
        out = np.empty(self.n)
        out[:-1] = np.diff(self.points)
        out[-1] = 0.0
        out.setflags(write=False)
        return out

    def kappa_last(self) -> int:
        """Index of the last point where the delta derivative is defined."""
        return self.n - 2

    def is_regular(self) -> bool:
        """Both jump compositions are the identity, up to the boundary conventions.

        At the minimum the backward jump is fixed and at the maximum the
        forward jump is fixed, so those two forced compositions are exempt.
        """
        ok_sigma_rho = all(self.sigma(self.rho(i)) == i for i in range(1, self.n))
        ok_rho_sigma = all(self.rho(self.sigma(i)) == i for i in range(0, self.n - 1))
        return ok_sigma_rho and ok_rho_sigma

    def is_uniform_sampling(self, rtol: float = 1e-12) -> bool:
        """All points flagged dense and equally spaced: a usable real-line surrogate."""
        if not bool(self.dense_mask.all()):
            return False
        gaps = np.diff(self.points)
        span = self.b - self.a
        return bool(np.max(np.abs(gaps - gaps[0])) <= rtol * max(1.0, span))

    def is_integer_grid(self, rtol: float = 1e-9) -> bool:
        rounded = np.round(self.points)
        if np.max(np.abs(self.points - rounded)) > rtol:
            return False
        return bool(np.all(np.diff(rounded) == 1.0))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """One real value per point of a :class:`TimeScale`."""

    scale: TimeScale
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.scale.points.shape:
            raise ValueError("grid function needs exactly one value per scale point")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, scale: TimeScale, fn: Callable[[float], float]) -> "GridFunction":
        return cls(scale, np.asarray([fn(float(t)) for t in scale.points]))

    @classmethod
    def from_values(cls, scale: TimeScale, values: Sequence[float]) -> "GridFunction":
        return cls(scale, np.asarray(values, dtype=float))

    def __call__(self, i: int) -> float:
        return float(self.values[self.scale._check_index(i)])

    def delta_derivative(self, i: int) -> float:
        """Forward difference quotient ``(f(sigma(t)) - f(t)) / mu(t)``.

        Undefined past :meth:`TimeScale.kappa_last`: the maximal point has no
        forward step to difference against.
        """
        i = self.scale._check_index(i)
        if i > self.scale.kappa_last():
            raise ValueError(
                f"delta derivative undefined at index {i}: beyond the "
                f"differentiation domain (last admissible index "
                f"{self.scale.kappa_last()})"
            )
        return float((self.values[i + 1] - self.values[i]) / self.scale.mu_values[i])

    @cached_property
    def delta_values(self) -> np.ndarray:
        """Delta derivative at every admissible index (length ``n - 1``)."""
        out = np.diff(self.values) / np.diff(self.scale.points)
        out.setflags(write=False)
        return out

    def delta_integral(self, i: int, j: int) -> float:
        """Graininess-weighted sum of values over point indices ``[i, j)``.

        Orientation is the caller's business: ``i <= j`` is required.
        """
        i = self.scale._check_index(i)
        j = self.scale._check_index(j)
        if j < i:
            raise ValueError(f"reversed integration bounds ({i} > {j})")
        mu = self.scale.mu_values
        return math.fsum(mu[k] * self.values[k] for k in range(i, j))


def require_same_scale(a: GridFunction, b: GridFunction, what: str = "grid functions") -> None:
    if not a.scale.matches(b.scale):
        raise ScaleMismatchError(f"{what} live on different time scales")
