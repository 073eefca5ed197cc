"""Constructive Hadamard matrices (Sylvester, Paley I, Kronecker products).

Only orders that can actually be built here are reported as available; the
Hadamard conjecture is never assumed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidPrimeError, NotNormalizedError, OrderOverflowError, WidthLabError
from .lp_core import ExponentLike, PointConfiguration, as_exponent

DEFAULT_CAP = 2**12


@dataclass(frozen=True, eq=False)
class HadamardMatrix:
    entries: np.ndarray
    normalized: bool

    def __post_init__(self):
        h = np.array(self.entries, dtype=np.int64)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise WidthLabError("Hadamard matrix must be square")
        if not np.all(np.abs(h) == 1):
            raise WidthLabError("entries must be +1 or -1")
        n = h.shape[0]
        if not np.array_equal(h @ h.T, n * np.eye(n, dtype=np.int64)):
            raise WidthLabError(f"H H^T != {n} I")
        h.setflags(write=False)
        object.__setattr__(self, "entries", h)
        flag = bool(np.all(h[0] == 1) and np.all(h[:, 0] == 1))
        if self.normalized and not flag:
            raise NotNormalizedError("first row and column must be all +1")
        object.__setattr__(self, "normalized", flag)

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    def is_hadamard(self) -> bool:
        n = self.order
        return bool(np.array_equal(self.entries @ self.entries.T, n * np.eye(n, dtype=np.int64)))

    def to_text(self) -> str:
        """One row per line, ``+`` for +1 and ``-`` for -1."""
        return "\n".join("".join("+" if v > 0 else "-" for v in row) for row in self.entries) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "HadamardMatrix":
        rows = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        table = {"+": 1, "-": -1}
        try:
            entries = [[table[c] for c in row] for row in rows]
        except KeyError as exc:
            raise WidthLabError(f"unexpected character {exc.args[0]!r} in Hadamard grid") from None
        return cls(np.array(entries), normalized=False)

    def __eq__(self, other):
        return isinstance(other, HadamardMatrix) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())


def normalize(h: np.ndarray) -> np.ndarray:
    """Flip row and column signs so the first row and column are all +1."""
    h = np.array(h, dtype=np.int64)
    h = h * h[:, :1]
    h = h * h[:1, :]
    return h


def sylvester(m: int, cap: int = DEFAULT_CAP) -> HadamardMatrix:
    if m < 0:
        raise WidthLabError("m must be nonnegative")
    if 2**m > cap:
        raise OrderOverflowError(f"order 2^{m} exceeds cap {cap}")
    h = np.ones((1, 1), dtype=np.int64)
    for _ in range(m):
        h = np.block([[h, h], [h, -h]])
    return HadamardMatrix(h, normalized=True)


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


def paley(q: int, cap: int = DEFAULT_CAP) -> HadamardMatrix:
    """Paley type I matrix of order q + 1 for a prime q = 3 (mod 4)."""
    if not (is_prime(q) and q % 4 == 3):
        raise InvalidPrimeError(f"{q} is not a prime congruent to 3 mod 4")
    if q + 1 > cap:
        raise OrderOverflowError(f"order {q + 1} exceeds cap {cap}")
    residues = {(x * x) % q for x in range(1, q)}
    chi = np.array([0] + [1 if a in residues else -1 for a in range(1, q)], dtype=np.int64)
    idx = np.arange(q)
    jacobsthal = chi[(idx[None, :] - idx[:, None]) % q]
    s = np.zeros((q + 1, q + 1), dtype=np.int64)
    s[0, 1:] = 1
    s[1:, 0] = -1
    s[1:, 1:] = jacobsthal
    return HadamardMatrix(normalize(np.eye(q + 1, dtype=np.int64) + s), normalized=True)


@lru_cache(maxsize=None)
def _recipe(order: int, cap: int) -> tuple | None:
    """How to build ``order``: ('base', n) | ('sylvester', m) | ('paley', q) | ('kron', a, b)."""
    if order < 1 or order > cap:
        return None
    if order in (1, 2):
        return ("base", order)
    if order % 4:
        return None
    if order & (order - 1) == 0:
        return ("sylvester", order.bit_length() - 1)
    q = order - 1
    if is_prime(q) and q % 4 == 3:
        return ("paley", q)
    for a in range(2, int(order**0.5) + 1):
        if order % a == 0:
            b = order // a
            if _recipe(a, cap) is not None and _recipe(b, cap) is not None:
                return ("kron", a, b)
    return None


def hadamard_order_available(order: int, cap: int = DEFAULT_CAP) -> bool:
    return _recipe(int(order), cap) is not None


def construct(order: int, cap: int = DEFAULT_CAP) -> HadamardMatrix:
    """Build a normalized Hadamard matrix of the given order from the registry."""
    recipe = _recipe(int(order), cap)
    if recipe is None:
        if order > cap:
            raise OrderOverflowError(f"order {order} exceeds cap {cap}")
        raise WidthLabError(f"no registered construction for order {order}")
    kind = recipe[0]
    if kind == "base":
        return sylvester(recipe[1] - 1, cap)
    if kind == "sylvester":
        return sylvester(recipe[1], cap)
    if kind == "paley":
        return paley(recipe[1], cap)
    a, b = construct(recipe[1], cap), construct(recipe[2], cap)
    return HadamardMatrix(normalize(np.kron(a.entries, b.entries)), normalized=True)


def hadamard_set(h: HadamardMatrix, p: ExponentLike) -> PointConfiguration:
    """Rows of a normalized matrix minus their leading 1, scaled onto the unit l^p sphere."""
    p = as_exponent(p)
    if not h.normalized:
        raise NotNormalizedError("hadamard_set needs a normalized matrix")
    if h.order < 2:
        raise WidthLabError("order must be at least 2")
    if p.is_inf:
        raise WidthLabError("hadamard_set is defined for finite p")
    big_n = h.order
    pts = h.entries[:, 1:].astype(float) * (big_n - 1) ** (-p.inv)
    return PointConfiguration(pts, p, np.full(big_n, 1.0 / big_n))


def hadamard_set_diameter(order: int, p: ExponentLike) -> float:
    """Closed form 2^{1/p'} (1 + 1/(N-1))^{1/p} of the normalized Hadamard set diameter."""
    p = as_exponent(p)
    return 2.0 ** (1.0 - p.inv) * (1.0 + 1.0 / (order - 1)) ** p.inv


def row_agreement_counts(h: HadamardMatrix, truncated: bool = False) -> np.ndarray:
    """Number of positions where each pair of rows agree.

    With ``truncated`` the leading column is dropped first. Off-diagonal counts
    are N/2 for full rows and N/2 - 1 for truncated rows of a normalized matrix.
    """
    if not h.normalized:
        raise NotNormalizedError("row agreement counts are defined for normalized matrices")
    e = h.entries[:, 1:] if truncated else h.entries
    width = e.shape[1]
    # agreements a, disagreements d: a + d = width, a - d = <r_i, r_j>
    return (width + e @ e.T) // 2
