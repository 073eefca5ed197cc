"""Small-diameter configurations of n+1 unit l^p points with 0 in their hull.

The lower bound b_{n;p} on the diameter of such configurations is proven;
this module probes how sharp it is. Search results are "best found", never
claimed optimal.

The search minimises a log-sum-exp smoothing of the largest pairwise distance
plus a quadratic penalty ``w * |sum_i lambda_i x_i|^2`` (lambda = softmax of
free weights), over points kept on the sphere by radial normalisation. All
restarts run as one batch with per-restart backtracking step sizes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from ._parallel import block_rng
from .bounds import b_lower
from .errors import BoundViolationError, InfeasibleError, WidthLabError
from .lp_core import Exponent, ExponentLike, PointConfiguration, as_exponent, lp_norms, set_diameter

CERT_TOL = 1e-9
FALSIFY_TOL = 1e-6


# ---------------------------------------------------------------------------
# hull feasibility


def contains_origin_in_hull(points: PointConfiguration | np.ndarray) -> tuple[bool, np.ndarray | None]:
    """LP feasibility of sum lambda_i f_i = 0, lambda >= 0, sum lambda = 1.

    Returns ``(True, lambda)`` with a polished certificate
    (``|sum lambda_i f_i| <= 1e-9``, ``|sum lambda - 1| <= 1e-12``) or ``(False, None)``.
    """
    pts = points.points if isinstance(points, PointConfiguration) else np.asarray(points, dtype=float)
    m, n = pts.shape
    if m < 2:
        raise WidthLabError("need at least two points")
    a_eq = np.vstack([pts.T, np.ones((1, m))])
    b_eq = np.concatenate([np.zeros(n), [1.0]])
    res = linprog(
        np.zeros(m),
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=[(0, None)] * m,
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        return False, None
    lam = _polish_certificate(pts, np.clip(res.x, 0.0, None))
    resid = np.linalg.norm(lam @ pts)
    if resid > CERT_TOL or abs(lam.sum() - 1.0) > 1e-12 or (lam < 0).any():
        return False, None
    return True, lam


def _polish_certificate(pts: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Least-change correction of lambda on its support so the equalities hold to rounding."""
    best = lam / lam.sum()
    support = np.flatnonzero(lam > 1e-14)
    a = np.vstack([pts[support].T, np.ones((1, support.size))])
    b = np.concatenate([np.zeros(pts.shape[1]), [1.0]])
    for _ in range(3):
        cur = best[support]
        delta, *_ = np.linalg.lstsq(a, a @ cur - b, rcond=None)
        trial = best.copy()
        trial[support] = cur - delta
        if (trial < 0).any():
            break
        trial /= trial.sum()
        if np.linalg.norm(trial @ pts) <= np.linalg.norm(best @ pts):
            best = trial
    return best


# ---------------------------------------------------------------------------
# results


@dataclass
class SearchResult:
    config: PointConfiguration
    diameter: float
    bound: float
    gap: float
    iterations: int
    seed: int
    restarts: int = 1
    certificate: np.ndarray | None = None
    label: str = "best found"
    history: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "n": self.config.n,
            "p": str(self.config.p),
            "points": self.config.points.tolist(),
            "diameter": self.diameter,
            "bound": self.bound,
            "gap": self.gap,
            "certificate": None if self.certificate is None else self.certificate.tolist(),
            "iterations": self.iterations,
            "seed": self.seed,
            "restarts": self.restarts,
            "label": self.label,
        }


def diameter_bound(n: int, p: ExponentLike) -> float:
    """b_{n;p}; for p = inf this is the limit 1 + 1/n."""
    p = as_exponent(p)
    return b_lower(n, p)


def certify_against_bound(config: PointConfiguration, p: ExponentLike | None = None, *, label: str = "given") -> SearchResult:
    """Diameter, bound b_{n;p} and gap for a configuration with 0 in its hull."""
    p = config.p if p is None else as_exponent(p)
    ok, lam = contains_origin_in_hull(config)
    if not ok:
        raise InfeasibleError("configuration lies in an open hemisphere")
    diam = set_diameter(config.points, p)
    bound = diameter_bound(config.n, p)
    cfg = PointConfiguration(config.points, p, lam, check_unit=False)
    return SearchResult(cfg, diam, bound, diam - bound, 0, 0, 1, lam, label)


# ---------------------------------------------------------------------------
# l^inf families


class LinfVariant(str, enum.Enum):
    TWO_OVER = "two_over"
    ONE_OVER = "one_over"


def linf_family(n: int, variant: "LinfVariant | str" = LinfVariant.ONE_OVER) -> PointConfiguration:
    """(1,...,1) together with the n points carrying a single 1 and c elsewhere.

    c = -2/(n-1) for ``two_over`` and c = -1/(n-1) for ``one_over``; the
    latter has sup-metric diameter n/(n-1).
    """
    if n < 2:
        raise WidthLabError("n must be >= 2")
    variant = LinfVariant(variant)
    c = -2.0 / (n - 1) if variant is LinfVariant.TWO_OVER else -1.0 / (n - 1)
    rows = np.full((n, n), c)
    np.fill_diagonal(rows, 1.0)
    pts = np.vstack([np.ones((1, n)), rows])
    ok, lam = contains_origin_in_hull(pts)
    return PointConfiguration(pts, math.inf, lam if ok else None)


# ---------------------------------------------------------------------------
# smoothed objective


def _smooth_norm(v: np.ndarray, p: Exponent, eta: float, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Smoothed l^p norm over the last axis and its gradient."""
    a = np.sqrt(v * v + eta * eta)
    da = v / a
    if p.is_inf:
        z = a / tau
        zmax = z.max(axis=-1, keepdims=True)
        e = np.exp(z - zmax)
        s = e.sum(axis=-1, keepdims=True)
        val = tau * (np.log(s) + zmax)
        return val[..., 0], (e / s) * da
    q = p.value
    ap = a**q
    val = ap.sum(axis=-1, keepdims=True) ** (1.0 / q)
    grad = (a ** (q - 1.0)) * da * val ** (1.0 - q)
    return val[..., 0], grad


def _objective(y, theta, p, iu, ju, temp, eta, weight):
    """Loss and gradients for a batch: y (R, m, n), theta (R, m)."""
    r, gr = _smooth_norm(y, p, eta, temp)
    x = y / r[..., None]
    v = x[:, iu, :] - x[:, ju, :]
    d, gd = _smooth_norm(v, p, eta, temp)
    dmax = d.max(axis=1, keepdims=True)
    e = np.exp((d - dmax) / temp)
    esum = e.sum(axis=1, keepdims=True)
    f = temp * np.log(esum[:, 0]) + dmax[:, 0]
    sw = e / esum
    lam = np.exp(theta - theta.max(axis=1, keepdims=True))
    lam /= lam.sum(axis=1, keepdims=True)
    c = np.einsum("rm,rmn->rn", lam, x)
    h = (c * c).sum(axis=1)
    loss = f + weight * h

    gv = sw[..., None] * gd
    gx = np.zeros_like(x)
    np.add.at(gx, (slice(None), iu), gv)
    np.add.at(gx, (slice(None), ju), -gv)
    gx += weight * 2.0 * lam[..., None] * c[:, None, :]
    gl = weight * 2.0 * np.einsum("rn,rmn->rm", c, x)
    gtheta = lam * (gl - (lam * gl).sum(axis=1, keepdims=True))
    gy = gx / r[..., None] - ((gx * y).sum(axis=-1) / (r * r))[..., None] * gr
    return loss, gy, gtheta, f, h


def _descend(y, theta, p, iu, ju, temp, eta, weight, iters):
    step = np.full(y.shape[0], 0.05)
    loss, gy, gt, *_ = _objective(y, theta, p, iu, ju, temp, eta, weight)
    for _ in range(iters):
        gnorm2 = (gy * gy).sum(axis=(1, 2)) + (gt * gt).sum(axis=1)
        y_new = y - step[:, None, None] * gy
        t_new = theta - step[:, None] * gt
        # keep raw coordinates well scaled; the objective only sees directions
        y_new /= lp_norms(y_new, p)[..., None]
        l_new, gy_new, gt_new, *_ = _objective(y_new, t_new, p, iu, ju, temp, eta, weight)
        ok = l_new <= loss - 1e-4 * step * gnorm2
        y = np.where(ok[:, None, None], y_new, y)
        theta = np.where(ok[:, None], t_new, theta)
        loss = np.where(ok, l_new, loss)
        gy = np.where(ok[:, None, None], gy_new, gy)
        gt = np.where(ok[:, None], gt_new, gt)
        step = np.where(ok, step * 1.5, step * 0.5)
        step = np.clip(step, 1e-12, 1.0)
    return y, theta


def _project_feasible(x: np.ndarray, lam: np.ndarray, p: Exponent, rounds: int = 200) -> np.ndarray:
    """Translate by minus the weighted centre and renormalise, until 0 is the centre."""
    for _ in range(rounds):
        c = lam @ x
        if np.linalg.norm(c) < 1e-15:
            break
        x = x - c
        x = x / lp_norms(x, p)[:, None]
    return x


def min_diameter_search(
    n: int,
    p: ExponentLike,
    restarts: int = 16,
    seed: int = 0,
    *,
    rounds: int = 5,
    iters: int = 600,
) -> SearchResult:
    """Multi-start penalty search for a small-diameter spanning configuration.

    Penalty weight grows x10 per round over ``rounds`` rounds while the
    log-sum-exp temperature is annealed; for p < 2 the working exponent moves
    linearly from 2 to p across the rounds. Each restart is then pushed to exact
    feasibility, certified by LP, and measured with the exact max distance.
    Ties between restarts go to the lower restart index.
    """
    if n < 1:
        raise WidthLabError("n must be >= 1")
    if restarts < 1:
        raise WidthLabError("restarts must be >= 1")
    p = as_exponent(p)
    m = n + 1
    iu, ju = np.triu_indices(m, k=1)
    init = [block_rng(seed, r, stream=5).standard_normal((m, n)) for r in range(restarts)]
    y = np.stack(init)
    y /= lp_norms(y, p)[..., None]
    theta = np.zeros((restarts, m))
    temp, weight = 0.05, 1.0
    total = 0
    # below p = 2 the landscape is rough; sweep the exponent down from 2
    path = np.linspace(2.0, p.value, rounds) if p.value < 2.0 else [p.value] * rounds
    for r in range(rounds):
        eta = 0.1 * temp
        y, theta = _descend(y, theta, Exponent(path[r]), iu, ju, temp, eta, weight, iters)
        total += iters
        weight *= 10.0
        temp *= 0.3

    bound = diameter_bound(n, p)
    best, best_r = None, -1
    history = []
    for r in range(restarts):
        lam = np.exp(theta[r] - theta[r].max())
        lam /= lam.sum()
        x = y[r] / lp_norms(y[r], p)[:, None]
        x = _project_feasible(x, lam, p)
        ok, cert = contains_origin_in_hull(x)
        if not ok:
            history.append(math.inf)
            continue
        diam = set_diameter(x, p)
        history.append(diam)
        if diam < bound - FALSIFY_TOL:
            raise BoundViolationError(
                f"certified configuration with diameter {diam!r} below bound {bound!r} (n={n}, p={p})"
            )
        if best is None or diam < best[0]:
            best, best_r = (diam, x, cert), r
    if best is None:
        raise InfeasibleError("no restart reached a certified feasible configuration")
    diam, x, cert = best
    cfg = PointConfiguration(x, p, cert, check_unit=False)
    return SearchResult(cfg, diam, bound, diam - bound, total, seed, restarts, cert, "best found", history)
