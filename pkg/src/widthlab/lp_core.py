"""l^p norms, distances, radial projection and set diameters.

The exponent ``p = inf`` is carried as a tagged value (``Exponent.is_inf``)
and every norm routine branches on it instead of plugging in a large float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import TooFewPointsError, WidthLabError, ZeroVectorError

PREDICATE_TOL = 1e-9
NORMALIZE_TOL = 1e-12

__all__ = [
    "Exponent",
    "ExponentLike",
    "LpVector",
    "PointConfiguration",
    "as_exponent",
    "dual_exponent",
    "lp_norm",
    "lp_norms",
    "lp_distance",
    "radial_project",
    "set_diameter",
    "pairwise_distances",
    "format_exponent",
]


@dataclass(frozen=True)
class Exponent:
    """An l^p exponent in [1, inf]."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if math.isnan(v) or v < 1.0:
            raise WidthLabError(f"exponent must lie in [1, inf], got {self.value!r}")
        object.__setattr__(self, "value", v)

    @classmethod
    def parse(cls, text: str | float | int) -> "Exponent":
        if isinstance(text, str):
            t = text.strip().lower()
            if t in ("inf", "infinity", "oo", "∞"):
                return cls(math.inf)
            return cls(float(Fraction(t)) if "/" in t else float(t))
        return cls(float(text))

    @property
    def is_inf(self) -> bool:
        return math.isinf(self.value)

    @property
    def inv(self) -> float:
        """1/p, with 1/inf = 0."""
        return 0.0 if self.is_inf else 1.0 / self.value

    def dual(self) -> "Exponent":
        return dual_exponent(self)

    def __float__(self) -> float:
        return self.value

    def __str__(self) -> str:
        return format_exponent(self)


ExponentLike = Union[Exponent, float, int, str]


def as_exponent(p: ExponentLike) -> Exponent:
    return p if isinstance(p, Exponent) else Exponent.parse(p)


def format_exponent(p: ExponentLike) -> str:
    p = as_exponent(p)
    if p.is_inf:
        return "inf"
    return f"{p.value:g}"


def dual_exponent(p: ExponentLike) -> Exponent:
    """Conjugate exponent p' with 1/p + 1/p' = 1."""
    p = as_exponent(p)
    if p.is_inf:
        return Exponent(1.0)
    if p.value == 1.0:
        return Exponent(math.inf)
    return Exponent(p.value / (p.value - 1.0))


def lp_norms(x: np.ndarray, p: ExponentLike, axis: int = -1) -> np.ndarray:
    """Vectorised l^p norm along ``axis``."""
    p = as_exponent(p)
    a = np.abs(np.asarray(x, dtype=float))
    if p.is_inf:
        return a.max(axis=axis)
    if p.value == 1.0:
        return a.sum(axis=axis)
    # rescale by the max coordinate so powers neither overflow nor underflow
    m = a.max(axis=axis, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    b = a / safe
    if p.value == 2.0:
        return np.squeeze(safe, axis=axis) * np.sqrt((b * b).sum(axis=axis))
    s = (b**p.value).sum(axis=axis)
    return np.squeeze(safe, axis=axis) * s ** (1.0 / p.value)


@dataclass(frozen=True)
class LpVector:
    """A point of R^n tagged with the exponent of the ambient l^p space."""

    coords: np.ndarray
    p: Exponent = field(default_factory=lambda: Exponent(2.0))

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        if c.size == 0:
            raise WidthLabError("LpVector needs at least one coordinate")
        if not np.all(np.isfinite(c)):
            raise WidthLabError("LpVector coordinates must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "p", as_exponent(self.p))

    @property
    def n(self) -> int:
        return self.coords.size

    def norm(self) -> float:
        return lp_norm(self)

    def __len__(self) -> int:
        return self.n

    def __iter__(self):
        return iter(self.coords.tolist())


def _coords(x) -> np.ndarray:
    return x.coords if isinstance(x, LpVector) else np.asarray(x, dtype=float)


def lp_norm(x: LpVector | Sequence[float], p: ExponentLike | None = None) -> float:
    """l^p norm; ``p`` defaults to the vector's own exponent."""
    if p is None:
        p = x.p if isinstance(x, LpVector) else 2.0
    return float(lp_norms(_coords(x), p))


def lp_distance(x, y, p: ExponentLike | None = None) -> float:
    if p is None:
        p = x.p if isinstance(x, LpVector) else 2.0
    return float(lp_norms(_coords(x) - _coords(y), p))


def radial_project(x: LpVector, tol: float = NORMALIZE_TOL) -> LpVector:
    """Push a nonzero vector onto the unit l^p sphere."""
    r = lp_norm(x)
    if r < tol:
        raise ZeroVectorError("cannot radially project the zero vector")
    return LpVector(x.coords / r, x.p)


class PointConfiguration:
    """m points of the unit l^p sphere in R^n, optionally with hull weights.

    ``weights`` (when given) is a certificate that the origin is in the convex
    hull: nonnegative, summing to one, with ``sum_i w_i f_i`` close to zero.
    """

    def __init__(
        self,
        points: Iterable,
        p: ExponentLike,
        weights: Sequence[float] | None = None,
        *,
        tol: float = PREDICATE_TOL,
        check_unit: bool = True,
    ):
        pts = np.array([_coords(q) for q in points] if not isinstance(points, np.ndarray) else points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise WidthLabError(f"points must form a nonempty (m, n) array, got shape {pts.shape}")
        self.p = as_exponent(p)
        pts.setflags(write=False)
        self.points = pts
        self.tol = tol
        if check_unit:
            bad = np.abs(lp_norms(pts, self.p) - 1.0) > tol
            if bad.any():
                raise WidthLabError(f"points {np.flatnonzero(bad).tolist()} are not on the unit sphere")
        self.weights = None
        if weights is not None:
            w = np.array(weights, dtype=float).reshape(-1)
            if w.shape != (self.m,):
                raise WidthLabError("need one weight per point")
            if (w < -tol).any() or abs(w.sum() - 1.0) > tol:
                raise WidthLabError("weights must be nonnegative and sum to 1")
            resid = lp_norms(w @ pts, self.p)
            if resid > tol:
                raise WidthLabError(f"weights do not certify 0 in the hull (residual {resid:.3g})")
            w.setflags(write=False)
            self.weights = w

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def vectors(self) -> list[LpVector]:
        return [LpVector(row, self.p) for row in self.points]

    def diameter(self) -> float:
        return set_diameter(self)

    def with_weights(self, weights) -> "PointConfiguration":
        return PointConfiguration(self.points, self.p, weights, tol=self.tol, check_unit=False)

    def __len__(self) -> int:
        return self.m

    def __repr__(self) -> str:
        return f"PointConfiguration(m={self.m}, n={self.n}, p={self.p})"


def pairwise_distances(points: np.ndarray, p: ExponentLike) -> np.ndarray:
    """Dense (m, m) matrix of l^p distances."""
    pts = np.asarray(points, dtype=float)
    return lp_norms(pts[:, None, :] - pts[None, :, :], p)


def set_diameter(points: PointConfiguration | np.ndarray, p: ExponentLike | None = None, chunk: int = 512) -> float:
    """Exact diameter by enumerating every pair, in row blocks to bound memory."""
    if isinstance(points, PointConfiguration):
        pts, p = points.points, points.p if p is None else p
    else:
        pts = np.asarray(points, dtype=float)
        if p is None:
            raise WidthLabError("exponent required for a bare array")
    m = pts.shape[0]
    if m < 2:
        raise TooFewPointsError("diameter needs at least two points")
    best = 0.0
    for start in range(0, m, chunk):
        block = pts[start : start + chunk]
        d = lp_norms(block[:, None, :] - pts[None, start:, :], p)
        best = max(best, float(d.max()))
    return best


def ray_exit(start: np.ndarray, direction: np.ndarray, p: ExponentLike, iters: int = 80) -> np.ndarray:
    """Largest r >= 0 with ||start + r * direction||_p <= 1, row by row.

    ``start`` must lie in the unit ball. Bisection is safe because the norm
    along a ray is convex, so the feasible set of r is an interval [0, r_max].
    """
    y = np.atleast_2d(np.asarray(start, dtype=float))
    d = np.atleast_2d(np.asarray(direction, dtype=float))
    y, d = np.broadcast_arrays(y, d)
    dn = lp_norms(d, p)
    live = dn > 0
    lo = np.zeros(dn.shape)
    hi = np.where(live, (1.0 + lp_norms(y, p)) / np.where(live, dn, 1.0), 0.0)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        inside = lp_norms(y + mid[:, None] * d, p) <= 1.0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return np.where(live, lo, np.inf)
