"""Closed-form wdim thresholds and the certified interval aggregator.

Every bound is stored as a *rule*:

* lower rule ``(t, v)``: ``eps < t``  implies ``wdim_eps >= v``
* upper rule ``(t, v)``: ``eps >= t`` implies ``wdim_eps <= v``

``wdim_interval`` evaluates all rules at one eps, ``urysohn_widths`` inverts
them exactly (a_k is bracketed by the rule thresholds themselves).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import InconsistentBoundsError, InfiniteExponentError, InvalidDimensionError, WidthLabError
from .hadamard import DEFAULT_CAP, hadamard_order_available
from .lp_core import Exponent, ExponentLike, as_exponent, format_exponent


class Metric(str, enum.Enum):
    INTRINSIC = "intrinsic_lp"
    SUP = "sup_metric"

    @classmethod
    def parse(cls, text: "str | Metric") -> "Metric":
        if isinstance(text, Metric):
            return text
        t = str(text).strip().lower()
        if t in ("lp", "intrinsic", "intrinsic_lp", "natural"):
            return cls.INTRINSIC
        if t in ("sup", "sup_metric", "linf", "l_inf"):
            return cls.SUP
        raise WidthLabError(f"unknown metric {text!r}")


@dataclass(frozen=True)
class BoundRecord:
    kind: str  # "lower" | "upper" | "exact"
    value: int
    condition: str
    source: str
    threshold: float | None = None


@dataclass
class WdimInterval:
    n: int
    p: Exponent
    metric: Metric
    eps: float
    lo: int
    hi: int
    records: list[BoundRecord] = field(default_factory=list)
    empirical: list[BoundRecord] = field(default_factory=list)

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    @property
    def sources(self) -> list[str]:
        return list(dict.fromkeys(r.source for r in self.records))

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "p": format_exponent(self.p),
            "metric": self.metric.value,
            "eps": self.eps,
            "lo": self.lo,
            "hi": self.hi,
            "records": [r.__dict__ for r in self.records],
            "empirical": [r.__dict__ for r in self.empirical],
        }


@dataclass(frozen=True)
class Rule:
    kind: str
    threshold: float
    value: int
    condition: str
    source: str

    def applies(self, eps: float) -> bool:
        return eps < self.threshold if self.kind == "lower" else eps >= self.threshold

    def record(self) -> BoundRecord:
        return BoundRecord(self.kind, self.value, self.condition, self.source, self.threshold)


def _check_n(n: int) -> None:
    if int(n) != n or n < 1:
        raise InvalidDimensionError(f"dimension must be a positive integer, got {n!r}")


def _check_eps(eps: float) -> None:
    if not eps > 0 or math.isinf(eps):
        raise WidthLabError(f"eps must be a positive real, got {eps!r}")


def wdim_cube(n: int, eps: float) -> int:
    """Width dimension of [-1, 1]^n under the sup metric."""
    _check_n(n)
    _check_eps(eps)
    return 0 if eps >= 2.0 else n


def sup_threshold(k: int, p: ExponentLike) -> float:
    """2 k^{-1/p}: below it the sup-metric ball has wdim >= k."""
    return 2.0 * k ** (-as_exponent(p).inv)


def wdim_lp_ball_sup_metric(n: int, p: ExponentLike, eps: float) -> int:
    """Exact wdim of the unit l^p ball measured in the sup metric."""
    _check_n(n)
    _check_eps(eps)
    p = as_exponent(p)
    if p.is_inf:
        raise InfiniteExponentError("p = inf is the cube; use wdim_cube")
    if eps >= 2.0:
        return 0
    if eps < sup_threshold(n, p):
        return n
    # smallest k with 2 (k+1)^{-1/p} <= eps, i.e. k + 1 >= (2/eps)^p
    k = max(1, math.ceil((2.0 / eps) ** p.value) - 1)
    while k > 1 and sup_threshold(k, p) <= eps:
        k -= 1
    while sup_threshold(k + 1, p) > eps:
        k += 1
    return min(k, n)


def b_lower(k: int, p: ExponentLike) -> float:
    """Diameter lower bound for k+1 unit points of l^p(k) with 0 in their hull.

    2^{1/p'} (1 + 1/k)^{1/p} for p <= 2 and 2^{1/p} (1 + 1/k)^{1/p'} for p >= 2.
    Below this value wdim_eps of the n-ball is at least k.
    """
    if k < 1:
        raise InvalidDimensionError("k must be >= 1")
    p = as_exponent(p)
    if k == 1:
        return 2.0  # both branches collapse to 2^{1/p} 2^{1/p'}
    a = p.inv
    if p.value <= 2.0:
        return 2.0 ** (1.0 - a) * (1.0 + 1.0 / k) ** a
    return 2.0**a * (1.0 + 1.0 / k) ** (1.0 - a)


def b_lower_expr(k: int, p: ExponentLike) -> str:
    p = as_exponent(p)
    if p.value <= 2.0:
        return f"2^(1/p')(1+1/{k})^(1/p)"
    return f"2^(1/p)(1+1/{k})^(1/p')"


def dim3_threshold(p: ExponentLike) -> float:
    """2 (2/3)^{1/p}, diameter of the four-point set in R^3."""
    p = as_exponent(p)
    if p.is_inf:
        raise InfiniteExponentError("defined for finite p")
    if p.value <= 2.0:
        # same operation order as b_lower(3, p) so the two agree bit for bit
        return 2.0 ** (1.0 - p.inv) * (1.0 + 1.0 / 3) ** p.inv
    return 2.0 * (2.0 / 3.0) ** p.inv


def dim2_threshold(p: ExponentLike) -> float:
    """max(2^{1/p}, 2^{1/p'})."""
    p = as_exponent(p)
    return max(2.0**p.inv, 2.0 ** (1.0 - p.inv))


def borsuk_ulam_floor(n: int, eps: float, p: ExponentLike | None = None, l1_linf_extension: bool = False) -> int:
    """Lower bound on wdim from antipodal maps of the boundary sphere.

    For eps < 2 this is floor(n/2), improved to 2 when n = 3 (lifting a map
    of the 2-sphere to a graph into its universal-cover tree). The n = 3
    improvement is always on for 1 < p < inf (``p=None`` means such a p); for
    p in {1, inf} it needs ``l1_linf_extension``.
    """
    _check_n(n)
    _check_eps(eps)
    if eps >= 2.0:
        return 0
    if n == 3:
        interior = p is None or 1.0 < as_exponent(p).value < math.inf
        if interior or l1_linf_extension:
            return 2
    return n // 2


def _lower_rules(n: int, p: Exponent, wdm3_mode: bool) -> list[Rule]:
    if p.is_inf:
        return [Rule("lower", 2.0, n, "eps < 2", "cube law: the l^inf ball is a cube")]
    ps = format_exponent(p)
    rules = [Rule("lower", 2.0, 1, "eps < 2 = Diam B", "connected: wdim = 0 iff eps >= Diam")]
    for k in range(1, n + 1):
        rules.append(
            Rule("lower", b_lower(k, p), k, f"eps < b_{k};{ps} = {b_lower_expr(k, p)}", "hemisphere diameter bound b_k;p")
        )
    extension = wdm3_mode and p.value <= 2.0
    bu = borsuk_ulam_floor(n, 1.0, p, l1_linf_extension=extension)
    rules.append(Rule("lower", 2.0, bu, f"eps < 2 -> wdim >= {bu}", "Borsuk-Ulam floor" + (" (n=3 tree lift)" if n == 3 and bu == 2 else "")))
    rules.append(Rule("lower", sup_threshold(n, p), n, f"eps < 2 n^(-1/p) = 2*{n}^(-1/{ps})", "inscribed cube inclusion"))
    if n == 2:
        rules.append(
            Rule(
                "lower",
                dim2_threshold(p),
                2,
                f"eps < max(2^(1/p), 2^(1/p')) (strict '<'; the '>=' reading breaks monotonicity)",
                "dimension-2 square/diamond inclusion",
            )
        )
    return rules


def _upper_rules(n: int, p: Exponent, cap: int = DEFAULT_CAP) -> list[Rule]:
    ps = format_exponent(p)
    rules = [
        Rule("upper", 0.0, n, "always", "dimension of the ball"),
        Rule("upper", 2.0, 0, "eps >= 2 = Diam B", "collapse to a point"),
    ]
    if p.is_inf:
        return rules
    if p.value == 2.0 and n >= 2:
        rules.append(
            Rule("upper", b_lower(n, p), n - 1, f"eps >= sqrt(2(1+1/{n}))", "regular simplex cone projection")
        )
    if n == 3:
        rules.append(Rule("upper", dim3_threshold(p), 2, f"eps >= 2(2/3)^(1/{ps})", "four-point set cone projection"))
    if p.value == 1.0 and hadamard_order_available(n + 1, cap):
        rules.append(Rule("upper", 1.0 + 1.0 / n, n - 1, f"eps >= 1+1/{n}", f"Hadamard set of order {n + 1}"))
    return rules


def known_upper(k: int, n: int, p: ExponentLike, cap: int = DEFAULT_CAP) -> float | None:
    """Smallest certified t with eps >= t  =>  wdim_eps(B^{l^p(n)}) <= k, or None."""
    _check_n(n)
    if not 0 <= k < n:
        raise WidthLabError(f"need 0 <= k < n, got k={k}, n={n}")
    p = as_exponent(p)
    ts = [r.threshold for r in _upper_rules(n, p, cap) if r.value <= k and r.threshold > 0]
    return min(ts) if ts else None


def wdim_interval(
    n: int,
    p: ExponentLike,
    metric: "Metric | str",
    eps: float,
    *,
    wdm3_mode: bool = True,
    empirical_samples: int = 0,
    seed: int = 0,
    cap: int = DEFAULT_CAP,
) -> WdimInterval:
    """Certified integer bracket [lo, hi] for wdim_eps of the unit l^p ball.

    ``empirical_samples > 0`` attaches Monte Carlo estimates of the cascade
    fiber constants in ``.empirical``; they never move lo or hi.
    """
    _check_n(n)
    _check_eps(eps)
    p = as_exponent(p)
    metric = Metric.parse(metric)

    if metric is Metric.SUP:
        if p.is_inf:
            v = wdim_cube(n, eps)
            rec = BoundRecord("exact", v, "0 if eps >= 2 else n", "cube law")
        else:
            v = wdim_lp_ball_sup_metric(n, p, eps)
            rec = BoundRecord("exact", v, "2(k+1)^(-1/p) <= eps < 2k^(-1/p)", "sup-metric coordinate collapse law")
        return WdimInterval(n, p, metric, eps, v, v, [rec])

    lows = [r for r in _lower_rules(n, p, wdm3_mode) if r.applies(eps)]
    ups = [r for r in _upper_rules(n, p, cap) if r.applies(eps)]
    lo = max([0] + [r.value for r in lows])
    hi = min(r.value for r in ups)
    if lo > hi:
        raise InconsistentBoundsError(
            f"n={n} p={format_exponent(p)} eps={eps!r}: lo={lo} from {[r.source for r in lows if r.value == lo]} "
            f"exceeds hi={hi} from {[r.source for r in ups if r.value == hi]}"
        )
    records = [r.record() for r in lows if r.value > 0] + [r.record() for r in ups]
    out = WdimInterval(n, p, metric, eps, lo, hi, records)
    if empirical_samples > 0 and not p.is_inf:
        for k in range(n - 1, 0, -1):
            if k <= (n - 1) / 2:
                break
            out.empirical.append(empirical_upper(k, n, p, empirical_samples, seed))
    return out


def empirical_upper(k: int, n: int, p: ExponentLike, samples: int, seed: int = 0) -> BoundRecord:
    """Monte Carlo estimate of the cascade constant c_{k,n;p}, tagged as empirical."""
    from .embeddings import empirical_c

    c = empirical_c(k, n, p, samples=samples, seed=seed)
    return BoundRecord(
        "upper", k, f"eps >= c_{k},{n};{format_exponent(p)} ~ {c:.6f} (sampled lower estimate)", "empirical", c
    )


def urysohn_widths(n: int, p: ExponentLike, metric: "Metric | str", *, wdm3_mode: bool = True) -> list[tuple[int, tuple[float, float]]]:
    """Bracket a_k = inf{eps : wdim_eps <= k} for k = 0..n.

    The brackets come straight from the rule thresholds: a_k is at least the
    largest lower-rule threshold certifying wdim > k and at most the smallest
    upper-rule threshold certifying wdim <= k.
    """
    _check_n(n)
    p = as_exponent(p)
    metric = Metric.parse(metric)
    out = []
    if metric is Metric.SUP:
        for k in range(n + 1):
            if k == n:
                a = 0.0
            elif p.is_inf:
                a = 2.0
            else:
                a = sup_threshold(k + 1, p)
            out.append((k, (a, a)))
        return out
    lows = _lower_rules(n, p, wdm3_mode)
    ups = _upper_rules(n, p)
    for k in range(n + 1):
        lo = max([0.0] + [r.threshold for r in lows if r.value > k])
        hi = min(r.threshold for r in ups if r.value <= k)
        out.append((k, (lo, hi)))
    return out
