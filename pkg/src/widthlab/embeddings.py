"""Explicit eps-embeddings of l^p balls and samplers for their fibers.

Three maps are implemented:

* ``collapse_projection`` (pi_j): coordinate soft-threshold at the j-th
  smallest absolute coordinate; used with the sup metric.
* ``skeleton_projection`` (s): projection of the ball onto the cone over the
  (n-2)-skeleton of a simplex spanned by n+1 generators, along the generator
  opposite to the current cone.
* ``cascade_projection`` (sigma_j): j successive stages of the same idea,
  landing on the cone over the (n-1-j)-skeleton.

For the cone maps a point is tracked by a nonnegative coefficient vector
``c`` of length n+1 with ``x = c @ P``; the generators satisfy one linear
relation ``mu @ P = 0`` with ``mu > 0``, which is what lets each stage slide a
point to a lower face by subtracting a multiple of ``mu``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.spatial import ConvexHull, QhullError

from ._parallel import block_rng, blocks, pmap
from .errors import (
    EmptyFiberError,
    HypothesisViolatedError,
    IndexOutOfRangeError,
    OutsideBallError,
    RegimeViolationError,
    SingularSystemError,
    WidthLabError,
)
from .lp_core import (
    Exponent,
    ExponentLike,
    LpVector,
    PointConfiguration,
    as_exponent,
    lp_norms,
    ray_exit,
    set_diameter,
)

BALL_TOL = 1e-9
COORD_TOL = 1e-10
COND_MAX = 1e12


class MapKind(str, enum.Enum):
    COLLAPSE = "collapse"
    SKELETON = "skeleton"
    CASCADE = "cascade"


# ---------------------------------------------------------------------------
# generator sets


def hemisphere_certificate(points: np.ndarray) -> np.ndarray:
    """The relation ``mu @ points = 0`` normalised to sum 1 (n+1 points in R^n).

    Returns the kernel vector of ``points.T``; it is strictly positive exactly
    when the points are not contained in a closed hemisphere.
    """
    pts = np.asarray(points, dtype=float)
    m, n = pts.shape
    if m != n + 1:
        raise WidthLabError(f"need n+1 points in R^n, got {m} points in R^{n}")
    _, s, vt = np.linalg.svd(pts.T)
    if s[-1] < 1e-12 * s[0]:
        raise SingularSystemError("generators do not span R^n")
    mu = vt[-1]
    mu = mu / mu.sum() if abs(mu.sum()) > 1e-14 else mu
    return mu


def regular_simplex_vertices(n: int) -> np.ndarray:
    """Unit Euclidean vertices of a regular simplex centred at 0, first vertex e_1."""
    if n < 1:
        raise WidthLabError("n must be >= 1")
    if n == 1:
        return np.array([[1.0], [-1.0]])
    rest = regular_simplex_vertices(n - 1) * math.sqrt(1.0 - 1.0 / n**2)
    out = np.zeros((n + 1, n))
    out[0, 0] = 1.0
    out[1:, 0] = -1.0 / n
    out[1:, 1:] = rest
    return out


def regular_simplex(n: int, p: ExponentLike = 2.0) -> PointConfiguration:
    """Regular simplex vertices rescaled onto the unit l^p sphere, with their relation."""
    if n < 2:
        raise WidthLabError("regular_simplex needs n >= 2")
    p = as_exponent(p)
    v = regular_simplex_vertices(n)
    pts = v / lp_norms(v, p)[:, None]
    mu = hemisphere_certificate(pts)
    return PointConfiguration(pts, p, mu)


def dim3_set(p: ExponentLike) -> PointConfiguration:
    """3^{-1/p} (1,1,1), (1,-1,-1), (-1,1,-1), (-1,-1,1)."""
    p = as_exponent(p)
    if p.is_inf:
        raise WidthLabError("dim3_set is defined for finite p")
    signs = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    return PointConfiguration(signs * 3.0 ** (-p.inv), p, np.full(4, 0.25))


@dataclass(frozen=True, eq=False)
class EmbeddingSpec:
    kind: MapKind
    j: int = 1
    generators: PointConfiguration | None = None
    mu: np.ndarray | None = None

    def __post_init__(self):
        kind = MapKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.j < 1:
            raise IndexOutOfRangeError("j must be >= 1")
        if kind is MapKind.COLLAPSE:
            return
        gens = self.generators
        if gens is None:
            raise WidthLabError(f"{kind.value} map needs generators")
        if gens.m != gens.n + 1:
            raise WidthLabError("need exactly n+1 generators")
        if np.any(np.abs(lp_norms(gens.points, gens.p) - 1.0) > BALL_TOL):
            raise WidthLabError("generators must have unit norm")
        mu = hemisphere_certificate(gens.points) if self.mu is None else np.asarray(self.mu, dtype=float)
        mu = mu / mu.sum()
        if np.any(mu <= 0):
            raise HypothesisViolatedError("generators lie in a closed hemisphere (relation not strictly positive)")
        if np.linalg.norm(mu @ gens.points) > BALL_TOL:
            raise HypothesisViolatedError("mu is not a relation of the generators")
        mu = mu.copy()
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        if kind is MapKind.SKELETON and self.j != 1:
            raise WidthLabError("skeleton map has j = 1")

    @classmethod
    def collapse(cls, j: int) -> "EmbeddingSpec":
        return cls(MapKind.COLLAPSE, j)

    @classmethod
    def skeleton(cls, generators: PointConfiguration) -> "EmbeddingSpec":
        return cls(MapKind.SKELETON, 1, generators, generators.weights)

    @classmethod
    def cascade(cls, generators: PointConfiguration, j: int) -> "EmbeddingSpec":
        return cls(MapKind.CASCADE, j, generators, generators.weights)

    @property
    def n(self) -> int:
        return self.generators.n

    @property
    def p(self) -> Exponent:
        return self.generators.p

    @property
    def P(self) -> np.ndarray:
        return self.generators.points


# ---------------------------------------------------------------------------
# coordinate collapse (sup metric)


def collapse_projection(x: LpVector | np.ndarray, j: int) -> LpVector | np.ndarray:
    """Soft-threshold at the j-th smallest |x_i|; the output has at least j zeros.

    Accepts a single vector or an (m, n) array of rows.
    """
    arr = x.coords if isinstance(x, LpVector) else np.asarray(x, dtype=float)
    n = arr.shape[-1]
    if not 1 <= j <= n:
        raise IndexOutOfRangeError(f"j={j} outside 1..{n}")
    a = np.abs(arr)
    m = np.partition(a, j - 1, axis=-1)[..., j - 1 : j]
    out = np.sign(arr) * np.maximum(a - m, 0.0)
    return LpVector(out, x.p) if isinstance(x, LpVector) else out


def collapse_fiber_diameter(n: int, p: ExponentLike, j: int) -> tuple[float, LpVector]:
    """Sup-metric diameter 2 (n-j+1)^{-1/p} of the largest fiber, and the point s0.

    s0 and -s0 both collapse to 0 and realise the diameter.
    """
    p = as_exponent(p)
    if not 1 <= j <= n:
        raise IndexOutOfRangeError(f"j={j} outside 1..{n}")
    if p.is_inf:
        raise WidthLabError("defined for finite p")
    r = n - j + 1
    s0 = np.zeros(n)
    s0[:r] = r ** (-p.inv)
    return 2.0 * r ** (-p.inv), LpVector(s0, p)


# ---------------------------------------------------------------------------
# cone coordinates


@dataclass(frozen=True)
class ConicCoordinates:
    """``x = sum_{k not in excluded} lam[k] p_k``; ``lam`` is zero on ``excluded``."""

    excluded: frozenset
    lam: np.ndarray
    residual: float = 0.0

    @property
    def inside(self) -> bool:
        return bool(np.all(self.lam >= -COORD_TOL))

    def support(self, tol: float = COORD_TOL) -> list[int]:
        return [k for k in range(self.lam.size) if k not in self.excluded and self.lam[k] > tol]


def conic_coordinates(x: LpVector | np.ndarray, spec: EmbeddingSpec, excluded) -> ConicCoordinates:
    """Solve x = sum_{k not in excluded} lam_k p_k. Negative entries are reported, not clamped."""
    xv = x.coords if isinstance(x, LpVector) else np.asarray(x, dtype=float)
    excl = frozenset(int(e) for e in excluded)
    keep = [k for k in range(spec.n + 1) if k not in excl]
    basis = spec.P[keep].T
    lam = np.zeros(spec.n + 1)
    if basis.shape[0] == basis.shape[1]:
        if np.linalg.cond(basis) > COND_MAX:
            raise SingularSystemError("cone generators are (numerically) dependent")
        sol = np.linalg.solve(basis, xv)
        resid = 0.0
    else:
        sol, *_ = np.linalg.lstsq(basis, xv, rcond=None)
        resid = float(np.linalg.norm(basis @ sol - xv))
    lam[keep] = sol
    return ConicCoordinates(excl, lam, resid)


def _check_in_ball(xv: np.ndarray, p: Exponent) -> None:
    if lp_norms(xv, p) > 1.0 + BALL_TOL:
        raise OutsideBallError("maps are defined on the unit ball only")


def _need_cone(spec: EmbeddingSpec, *kinds: MapKind) -> None:
    if spec.kind not in kinds:
        raise WidthLabError(f"spec of kind {spec.kind.value} not accepted here")


def skeleton_projection(x: LpVector | np.ndarray, spec: EmbeddingSpec) -> LpVector:
    """Slide x along p_i (i = its cone) onto the nearest lower face."""
    _need_cone(spec, MapKind.SKELETON, MapKind.CASCADE)
    xv = x.coords if isinstance(x, LpVector) else np.asarray(x, dtype=float)
    _check_in_ball(xv, spec.p)
    mu = spec.mu
    for i in range(spec.n + 1):
        cc = conic_coordinates(xv, spec, {i})
        if cc.inside:
            break
    else:  # pragma: no cover - the cones cover R^n when mu > 0
        raise HypothesisViolatedError("point not covered by any cone")
    lam = np.where(np.arange(spec.n + 1) == i, 0.0, np.maximum(cc.lam, 0.0))
    others = [k for k in range(spec.n + 1) if k != i]
    ratios = lam[others] / mu[others]
    lam_star = mu[i] * ratios.min()
    out = xv + lam_star * spec.P[i]
    if lp_norms(out, spec.p) > 1.0 + BALL_TOL:
        raise HypothesisViolatedError(f"projected point left the ball (norm {lp_norms(out, spec.p):.12g})")
    return LpVector(out, spec.p)


def _zero_tol(c: np.ndarray) -> float:
    return COORD_TOL * max(1.0, float(np.abs(c).max(initial=0.0)))


def cone_coefficients(x: np.ndarray, spec: EmbeddingSpec) -> np.ndarray:
    """Nonnegative coefficients c with x = c @ P and min(c) = 0 (rows of x at once).

    The smallest index among the minimisers is zeroed exactly, which selects
    the lowest-numbered cone containing x.
    """
    xs = np.atleast_2d(np.asarray(x, dtype=float))
    c0, *_ = np.linalg.lstsq(spec.P.T, xs.T, rcond=None)
    c0 = c0.T
    mu = spec.mu
    ratios = c0 / mu
    t = ratios.min(axis=1, keepdims=True)
    c = c0 - t * mu
    idx = np.argmin(ratios, axis=1)
    c[np.arange(c.shape[0]), idx] = 0.0
    c[c < _zero_tol(c)] = 0.0
    return c


def _check_regime(n: int, j: int) -> None:
    if j < 1 or 2 * j >= n + 1:
        raise RegimeViolationError(f"cascade needs 1 <= j < (n+1)/2; got j={j}, n={n}")


def cascade_coefficients(x: np.ndarray, spec: EmbeddingSpec, j: int | None = None) -> np.ndarray:
    """Coefficient vectors of sigma_j(x); each row has at least j+1 zeros."""
    _need_cone(spec, MapKind.SKELETON, MapKind.CASCADE)
    j = spec.j if j is None else j
    _check_regime(spec.n, j)
    xs = np.atleast_2d(np.asarray(x, dtype=float))
    if np.any(lp_norms(xs, spec.p) > 1.0 + BALL_TOL):
        raise OutsideBallError("maps are defined on the unit ball only")
    c = cone_coefficients(xs, spec)
    mu = spec.mu
    rows = np.arange(c.shape[0])
    for stage in range(1, j + 1):
        zero = c <= 0.0
        active = zero.sum(axis=1) < stage + 1
        if not active.any():
            continue
        ratios = np.where(zero, np.inf, c / mu)
        t = np.where(active, ratios.min(axis=1), 0.0)
        idx = np.argmin(ratios, axis=1)
        c = np.where(zero, 0.0, c - t[:, None] * mu)
        c[rows[active], idx[active]] = 0.0
        c[c < _zero_tol(c)] = 0.0
    return c


def cascade_projection(x: LpVector | np.ndarray, spec: EmbeddingSpec, j: int | None = None):
    """sigma_j: j projection stages, each along the weighted sum of the generators
    already eliminated. Returns an LpVector for vector input, else an array of rows."""
    c = cascade_coefficients(x.coords if isinstance(x, LpVector) else x, spec, j)
    out = c @ spec.P
    if isinstance(x, LpVector):
        return LpVector(out[0], spec.p)
    return out if np.ndim(x) == 2 else out[0]


# ---------------------------------------------------------------------------
# fibers


@dataclass
class FiberSample:
    """Points of one fiber plus the piece each came from.

    ``params`` holds per-point coordinates inside its piece (for cone maps:
    the coefficients subtracted along the chain). ``metric`` is the exponent
    the fiber diameter is measured in.
    """

    target: np.ndarray
    points: np.ndarray
    piece: np.ndarray
    params: np.ndarray
    metric: Exponent
    kind: MapKind
    pieces: list = field(default_factory=list)

    @property
    def count(self) -> int:
        return self.points.shape[0]

    def configuration(self) -> PointConfiguration:
        return PointConfiguration(self.points, self.metric, check_unit=False)


def _collapse_fiber(y: np.ndarray, j: int, p: Exponent, count: int, seed: int) -> FiberSample:
    n = y.size
    if not 1 <= j <= n:
        raise IndexOutOfRangeError(f"j={j} outside 1..{n}")
    zeros = np.flatnonzero(np.abs(y) <= COORD_TOL)
    if zeros.size < j or lp_norms(y, p) > 1.0 + BALL_TOL:
        raise EmptyFiberError("target is not in the image of the collapse map")
    nz = np.flatnonzero(np.abs(y) > COORD_TOL)
    tight = zeros.size - j + 1  # zero-coordinates forced to |x_i| = m

    def one_block(arg):
        b, size = arg
        rng = block_rng(seed, b, stream=1)
        u = np.zeros((size, n))
        pick = zeros[np.argsort(rng.random((size, zeros.size)), axis=1)]
        rows = np.arange(size)[:, None]
        u[rows, pick[:, :tight]] = rng.choice([-1.0, 1.0], size=(size, tight))
        u[rows, pick[:, tight:]] = rng.uniform(-1.0, 1.0, size=(size, zeros.size - tight))
        # x(m) = y + sign(y) m on nz, u m on zeros; norm increases with m
        d = np.zeros((size, n))
        d[:, nz] = np.sign(y[nz])
        d[:, zeros] = u[:, zeros]
        m_max = ray_exit(np.broadcast_to(y, (size, n)), d, p)
        m = np.where(rng.random(size) < 0.5, m_max, rng.uniform(0.0, 1.0, size) * m_max)
        return y + m[:, None] * d, m

    parts = pmap(one_block, blocks(count - 1))
    pts = np.vstack([y[None, :]] + [pp[0] for pp in parts]) if parts else y[None, :]
    ms = np.concatenate([[0.0]] + [pp[1] for pp in parts]) if parts else np.zeros(1)
    pts = pts[lp_norms(pts, p) <= 1.0 + BALL_TOL]
    return FiberSample(y, pts, np.zeros(pts.shape[0], dtype=int), ms[: pts.shape[0], None], Exponent(math.inf), MapKind.COLLAPSE)


def _chains(support: list[int], j: int) -> list[tuple[int, ...]]:
    return list(itertools.permutations(support, j))


def _cone_fiber(y: np.ndarray, spec: EmbeddingSpec, j: int, count: int, seed: int) -> FiberSample:
    _check_regime(spec.n, j)
    if lp_norms(y, spec.p) > 1.0 + BALL_TOL:
        raise EmptyFiberError("target outside the ball")
    c = cone_coefficients(y, spec)[0]
    if np.linalg.norm(c @ spec.P - y) > 1e-9:
        raise EmptyFiberError("target not representable")
    zero_set = [k for k in range(spec.n + 1) if c[k] <= _zero_tol(c)]
    if len(zero_set) < j + 1:
        raise EmptyFiberError(f"target lies on a face with {len(zero_set)} zero coefficients; need {j + 1}")
    chains = _chains(zero_set, j)
    mu, P, p = spec.mu, spec.P, spec.p

    def one_block(arg):
        b, size = arg
        rng = block_rng(seed, b, stream=2)
        which = rng.integers(len(chains), size=size)
        inc = rng.exponential(size=(size, j))
        # chain weights: first index carries lambda_1 + ... + lambda_j, last carries lambda_1
        weights = np.cumsum(inc, axis=1)[:, ::-1]
        idx = np.array(chains)[which]
        coef = weights * mu[idx]
        d = np.einsum("sl,sln->sn", coef, P[idx])
        r_max = ray_exit(np.broadcast_to(y, d.shape), -d, p)
        r = np.where(rng.random(size) < 0.5, r_max, rng.uniform(0.0, 1.0, size) * r_max)
        return y - r[:, None] * d, which, coef * r[:, None]

    parts = pmap(one_block, blocks(count - 1))
    pts = np.vstack([y[None, :]] + [pp[0] for pp in parts])
    which = np.concatenate([[-1]] + [pp[1] for pp in parts])
    params = np.vstack([np.zeros((1, j))] + [pp[2] for pp in parts])
    ok = lp_norms(pts, p) <= 1.0 + BALL_TOL
    return FiberSample(y, pts[ok], which[ok], params[ok], p, spec.kind, chains)


def sample_fiber(target, spec: EmbeddingSpec, j: int | None = None, count: int = 10_000, seed: int = 0) -> FiberSample:
    """Sample ``count`` points of the fiber over ``target`` (the target itself first).

    Deterministic in ``seed``; the sample stream is split into fixed blocks so the
    result does not depend on the worker count.
    """
    y = np.asarray(target.coords if isinstance(target, LpVector) else target, dtype=float).reshape(-1)
    j = spec.j if j is None else j
    if count < 1:
        raise WidthLabError("count must be >= 1")
    if spec.kind is MapKind.COLLAPSE:
        p = target.p if isinstance(target, LpVector) else Exponent(2.0)
        return _collapse_fiber(y, j, p, count, seed)
    if y.size != spec.n:
        raise WidthLabError("target dimension does not match generators")
    return _cone_fiber(y, spec, j, count, seed)


def fiber_diameter(sample: FiberSample) -> float:
    """Exact diameter of the sampled point set.

    Cone-map pieces are linear images of their parameter sets, so only the
    convex-hull vertices of each piece can realise a maximal distance; the
    remaining points are dropped before the pairwise scan.
    """
    if sample.count < 2:
        return 0.0
    if sample.kind is MapKind.COLLAPSE:
        return set_diameter(sample.points, sample.metric)
    keep = [np.flatnonzero(sample.piece == -1)]
    for k in np.unique(sample.piece[sample.piece >= 0]):
        rows = np.flatnonzero(sample.piece == k)
        par = sample.params[rows]
        if par.shape[1] == 1:
            keep.append(rows[[par[:, 0].argmin(), par[:, 0].argmax()]])
            continue
        try:
            keep.append(rows[ConvexHull(par).vertices])
        except (QhullError, ValueError):
            keep.append(rows)
    sel = np.unique(np.concatenate(keep))
    if sel.size < 2:
        return 0.0
    return set_diameter(sample.points[sel], sample.metric)


def random_ball_points(n: int, p: ExponentLike, count: int, rng: np.random.Generator) -> np.ndarray:
    """Random points of the unit l^p ball (l^p-normalised Gaussian direction, radius U^{1/n})."""
    p = as_exponent(p)
    g = rng.standard_normal((count, n))
    g /= lp_norms(g, p)[:, None]
    return g * rng.random(count)[:, None] ** (1.0 / n)


def empirical_c(
    k: int,
    n: int,
    p: ExponentLike,
    samples: int = 20_000,
    seed: int = 0,
    targets: int = 8,
    generators: PointConfiguration | None = None,
) -> float:
    """Monte Carlo lower estimate of c_{k,n;p}, the largest fiber of sigma_{n-k}.

    The apex 0 is always one of the image points; ``targets`` more are images of
    random ball points. Each image point gets ``samples // (targets + 1)`` fiber samples.
    """
    j = n - k
    _check_regime(n, j)
    gens = regular_simplex(n, p) if generators is None else generators
    spec = EmbeddingSpec.cascade(gens, j)
    rng = block_rng(seed, 0, stream=3)
    ys = np.vstack([np.zeros((1, n)), cascade_projection(random_ball_points(n, spec.p, targets, rng), spec, j)])
    per = max(2, samples // (targets + 1))
    best = 0.0
    for t, y in enumerate(ys):
        s = sample_fiber(y, spec, j, per, seed=seed * 1_000_003 + t)
        best = max(best, fiber_diameter(s))
    return best


# ---------------------------------------------------------------------------
# admissibility of generator sets


@dataclass
class HypothesisReport:
    hemisphere_ok: bool
    mu: np.ndarray | None
    delta: float
    worst_margin: float
    witness: dict | None
    tol: float
    samples: int

    @property
    def norm_ok(self) -> bool:
        return self.worst_margin <= self.tol

    @property
    def passed(self) -> bool:
        return self.hemisphere_ok and self.norm_ok


def strict_hull_certificate(points: np.ndarray, delta: float = 1e-6) -> np.ndarray | None:
    """LP for mu >= delta, sum mu = 1, mu @ points = 0; None if infeasible."""
    pts = np.asarray(points, dtype=float)
    m = pts.shape[0]
    a_eq = np.vstack([pts.T, np.ones((1, m))])
    b_eq = np.concatenate([np.zeros(pts.shape[1]), [1.0]])
    res = linprog(np.zeros(m), A_eq=a_eq, b_eq=b_eq, bounds=[(delta, None)] * m, method="highs")
    return res.x if res.status == 0 else None


def _subtract_margin(x: np.ndarray, pk: np.ndarray, p: Exponent) -> np.ndarray:
    """max lambda with ||x - lambda p_k|| <= 1, minus 1 (p_k has unit norm)."""
    return ray_exit(x, -pk, p) * lp_norms(pk, p) - 1.0


def hypothesis_check(
    points: PointConfiguration,
    *,
    delta: float = 1e-6,
    samples: int = 100_000,
    seed: int = 0,
    tol: float = 1e-7,
    local_starts: int = 4,
) -> HypothesisReport:
    """Test a generator set against the two conditions the cone projection needs.

    (a) not in a closed hemisphere: an LP finds mu >= delta with mu @ P = 0.
    (b) for A with 1 <= |A| <= n-2, positive lambda with ||sum_A lambda_i p_i|| <= 1
        and k not in A: ||x - lambda_k p_k|| <= 1 forces lambda_k <= 1. The worst
        violation (largest admissible lambda_k minus 1) is searched by random
        sampling followed by Nelder-Mead polishing of the best samples.
    """
    P, p = points.points, points.p
    m, n = P.shape
    mu = strict_hull_certificate(P, delta)
    worst, witness = -np.inf, None
    rng = block_rng(seed, 0, stream=4)
    for size in range(1, n - 1):
        subsets = np.argsort(rng.random((samples, m)), axis=1)[:, : size + 1]
        A, k = subsets[:, :size], subsets[:, size]
        lam = rng.exponential(size=(samples, size))
        x = np.einsum("sa,san->sn", lam, P[A])
        scale = 1.0 / np.maximum(lp_norms(x, p), 1e-300)
        rad = np.where(rng.random(samples) < 0.5, 1.0, rng.random(samples))
        x = x * (scale * rad)[:, None]
        margin = _subtract_margin(x, P[k], p)
        order = np.argsort(margin)[::-1][:local_starts]
        for s in order:
            a_idx, k_idx = A[s], k[s]
            theta0 = np.concatenate([np.log(lam[s] * scale[s] * rad[s])])

            def neg_margin(theta, a_idx=a_idx, k_idx=k_idx):
                xv = np.exp(theta) @ P[a_idx]
                nrm = lp_norms(xv, p)
                if nrm > 1.0:
                    xv = xv / nrm
                return -float(_subtract_margin(xv[None, :], P[k_idx][None, :], p)[0])

            res = minimize(neg_margin, theta0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 400 * size})
            val = -res.fun
            if val > worst:
                lam_best = np.exp(res.x)
                xv = lam_best @ P[a_idx]
                nrm = lp_norms(xv, p)
                if nrm > 1.0:
                    lam_best = lam_best / nrm
                worst = val
                witness = {"A": a_idx.tolist(), "k": int(k_idx), "lambda": lam_best.tolist()}
        if margin.max() > worst:
            s = int(margin.argmax())
            worst = float(margin[s])
            witness = {"A": A[s].tolist(), "k": int(k[s]), "lambda": (lam[s] * scale[s] * rad[s]).tolist()}
    if n - 1 <= 1:
        worst = 0.0  # only A = {} is allowed, where the condition is ||lambda p_k|| <= 1 itself
    return HypothesisReport(mu is not None, mu, delta, float(worst), witness, tol, samples)
