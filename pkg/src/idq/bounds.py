"""Closed-form bounds on the best M-level information as pure evaluators.

Logarithms are base 2 unless a formula explicitly calls for ``ln``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import binary_entropy as h
from .core import inv_binary_entropy

LOG2E = math.log2(math.e)
NU2_CAP = 1268.0


class BoundDomainError(ValueError):
    pass


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise BoundDomainError(msg)


@dataclass(frozen=True)
class BoundEntry:
    name: str
    kind: str  # "lower" or "upper"
    value: float
    source: str


@dataclass
class BoundReport:
    """Bounds on the worst-case best M-level information among inputs of size K
    with I(X;Y) = beta."""

    beta: float
    K: int
    M: int
    entries: list[BoundEntry] = field(default_factory=list)

    def add(self, name: str, kind: str, value: float, source: str) -> None:
        self.entries.append(BoundEntry(name, kind, float(value), source))

    def best(self, kind: str) -> float:
        vals = [e.value for e in self.entries if e.kind == kind]
        if not vals:
            raise LookupError(f"no {kind} bounds in report")
        return max(vals) if kind == "lower" else min(vals)

    def consistent(self, tol: float = 1e-9) -> bool:
        return self.best("lower") <= self.best("upper") + tol

    def as_dict(self) -> dict:
        return {
            "beta": self.beta,
            "K": self.K,
            "M": self.M,
            "entries": [vars(e) for e in self.entries],
        }


def f_lower(t: float) -> float:
    _check(t >= 0, "f_lower needs t >= 0")
    return t / 208.0 if t < 104.0 else 1.0 - 52.0 / t


def f_upper(t: float) -> float:
    _check(t >= 0, "f_upper needs t >= 0")
    return min(3.0 * t, 1.0)


def sandwich_argument(M: int, beta: float) -> float:
    """(M - 1) / max(log(1/beta), 1)."""
    return (M - 1) / max(math.log2(1.0 / beta), 1.0)


def map_lower_bound(beta: float) -> float:
    """Information the MAP quantizer keeps in the worst case at I(X;Y) = beta."""
    _check(0.0 < beta <= 1.0, "beta must lie in (0, 1]")
    if beta < 0.6:
        return beta + 0.4 - h(0.2)
    return 1.0 - h((1.0 - beta) / 2.0)


def high_snr_bounds(beta: float) -> tuple[float, float]:
    """Lower and upper bounds on the best 2-level information for beta in [3/5, 1]."""
    _check(0.6 <= beta <= 1.0, "high-SNR bounds need beta in [3/5, 1]")
    lower = 1.0 - h((1.0 - beta) / 2.0)
    upper = 1.0 - (2.0 - beta) / 2.0 * h((1.0 - beta) / (2.0 - beta))
    return lower, upper


def hard_family_upper(M: int, beta: float) -> float:
    """2 M beta / ln(e log(e) / (2 beta)): what the hard BMS family lets any M-level quantizer keep."""
    _check(M >= 1, "M must be at least 1")
    _check(0.0 < beta <= 1.0, "beta must lie in (0, 1]")
    return 2.0 * M * beta / math.log(math.e * LOG2E / (2.0 * beta))


def hard_family_shorthand(M: int, beta: float) -> float:
    """(3/2) M beta / log(1/beta).

    This is not an upper bound on ``hard_family_upper``: the exact form tends to
    (2/ln 2) M beta / log(1/beta) as beta -> 0, and the two cross near
    beta = 0.48. Reported for reference only.
    """
    _check(0.0 < beta < 0.5, "simplified form needs beta < 1/2")
    return 1.5 * M * beta / math.log2(1.0 / beta)


def id2_bounds(M: int, beta: float) -> BoundReport:
    _check(M >= 1, "M must be at least 1")
    _check(0.0 < beta <= 1.0, "beta must lie in (0, 1]")
    t = sandwich_argument(M, beta)
    rep = BoundReport(beta, 2, M)
    rep.add("sandwich_lower", "lower", beta * f_lower(t), "geometric binning + double quantization")
    rep.add("sandwich_upper", "upper", beta * f_upper(t), "stated upper sandwich")
    rep.add("trivial_upper", "upper", min(beta, math.log2(M)), "data processing and log M")
    rep.add("hard_family_upper", "upper", hard_family_upper(M, beta), "hard BMS family")
    if M >= 2:
        rep.add("map_lower", "lower", max(map_lower_bound(beta), 0.0), "MAP quantizer")
    if M == 2 and beta >= 0.6:
        lo, up = high_snr_bounds(beta)
        rep.add("high_snr_lower", "lower", lo, "MAP quantizer at high SNR")
        rep.add("erasure_upper", "upper", up, "binary erasure channel, Z quantizer")
    return rep


def idK_lower(M: int, K: int, beta: float) -> tuple[float, int]:
    """beta * max_k a_k with every a_k clamped to [0, 1]; returns (value, best k)."""
    _check(M >= 1, "M must be at least 1")
    _check(K >= 3, "needs |X| >= 3")
    _check(0.0 < beta <= math.log2(K), "beta must lie in (0, log K]")
    log_k2 = math.log2((K - 1) ** 2 / beta)
    a = [min((M - 1) / (208.0 * log_k2), 0.5) / (K - 1)]
    for k in range(1, K - 1):
        a.append(k / (K - 1) * (1.0 - 52.0 * log_k2 / M ** (1.0 / k)))
    x = 52.0 * math.log2(math.e * (K - 1) / beta) / M ** (1.0 / (K - 1))
    # (1 - x^(2/3))^2 comes from solving for a fraction; it is meaningless once x > 1
    a.append((1.0 - x ** (2.0 / 3.0)) ** 2 if x < 1.0 else 0.0)
    a = [min(max(v, 0.0), 1.0) for v in a]
    best = max(range(len(a)), key=lambda i: (a[i], -i))
    return beta * a[best], best


def idK_bounds(M: int, K: int, beta: float) -> BoundReport:
    if K == 2:
        return id2_bounds(M, beta)
    value, best_k = idK_lower(M, K, beta)
    rep = BoundReport(beta, K, M)
    rep.add(f"one_hot_lower_k{best_k}", "lower", value, "one-hot reduction")
    rep.add("trivial_upper", "upper", min(beta, math.log2(M)), "data processing and log M")
    if beta <= 1.0:
        rep.add("sandwich_upper", "upper", beta * f_upper(sandwich_argument(M, beta)),
                "monotone in |X|, binary upper bound")
    return rep


def _log_gamma_half(x: float) -> float:
    """ln Gamma(x) for x a positive integer or half-integer, by exact recursion."""
    twice = round(2 * x)
    _check(twice >= 1 and abs(2 * x - twice) < 1e-12, "argument must be a (half-)integer")
    if twice % 2 == 0:
        return sum(math.log(i) for i in range(1, twice // 2))
    # Gamma(n + 1/2) = sqrt(pi) * prod_{i=0}^{n-1} (i + 1/2)
    n = (twice - 1) // 2
    return 0.5 * math.log(math.pi) + sum(math.log(i + 0.5) for i in range(n))


def nu(K: int) -> float:
    """Constant of the additive-gap bound nu(K) * M^(-2/(K-1))."""
    _check(K >= 2, "nu needs |X| >= 2")
    d = K - 1
    front = math.pi * K * d / (2.0 * (math.sqrt(1.0 + 1.0 / (2.0 * d)) - 1.0) ** 2)
    log_back = (2.0 / d) * (math.log(2.0 * K) - _log_gamma_half(1.0 + d / 2.0))
    return front * math.exp(log_back)


def _integer_root(M: int, d: int) -> int | None:
    r = round(M ** (1.0 / d))
    for c in (r - 1, r, r + 1):
        if c >= 1 and c**d == M:
            return c
    return None


def degrading_cost_bounds(K: int, M: int) -> tuple[float, float | None]:
    """(nu(K) M^(-2/(K-1)), 1268 (K-1) M^(-2/(K-1))).

    The second value is ``None`` unless M^(1/(K-1)) is an integer >= 4.
    """
    _check(K >= 2 and M >= 1, "needs |X| >= 2 and M >= 1")
    d = K - 1
    scale = M ** (-2.0 / d)
    root = _integer_root(M, d)
    improved = NU2_CAP * d * scale if root is not None and root >= 4 else None
    return nu(K) * scale, improved


def sdpi_bound(n: int, M: int, beta: float) -> tuple[float, float]:
    """Upper bounds on the best M-level information of n BSC uses carrying beta bits.

    Returns ``(tight, relaxed)`` with tight = (1 - 2 h^-1(1 - beta/n))^2 log M
    and relaxed = 2 beta log M / (n log e), which follows from
    h(1/2 - e) <= 1 - 2 log(e) e^2.
    """
    _check(M >= 1, "M must be at least 1")
    _check(n > beta > 0, "needs 0 < beta < n")
    delta = inv_binary_entropy(1.0 - beta / n)
    tight = (1.0 - 2.0 * delta) ** 2 * math.log2(M)
    relaxed = 2.0 * beta * math.log2(M) / (n * LOG2E)
    return tight, relaxed


def c1(eta: float) -> float:
    _check(0.0 <= eta < 1.0, "c1 needs eta in [0, 1)")
    return 52.0 / (1.0 - eta)


@dataclass(frozen=True)
class LevelBudgets:
    Mbar2: int
    MbarK: int
    Mtilde: int | None


def level_budgets(eta: float, beta: float, K: int = 2, k: int | None = None) -> LevelBudgets:
    """Level counts that provably keep a fraction eta of beta bits."""
    _check(0.0 <= eta < 1.0, "eta must lie in [0, 1)")
    _check(K >= 2, "needs |X| >= 2")
    _check(0.0 < beta <= math.log2(K), "beta must lie in (0, log K]")
    mbar2 = math.floor(c1(eta) * max(math.log2(1.0 / beta), 1.0))
    se = math.sqrt(eta)
    mbark = math.floor((c1(se) * math.log2((K - 1) / ((1.0 - se) * beta))) ** (K - 1))
    mtilde = None
    if k is not None:
        _check(1 <= k <= K - 2, f"k must lie in 1..{K - 2}")
        _check(eta < k / (K - 1), "needs eta < k/(|X|-1)")
        mtilde = math.floor((c1(eta * (K - 1) / k) * math.log2((K - 1) ** 2 / beta)) ** k)
    return LevelBudgets(mbar2, mbark, mtilde)


def entropy_coding_bound(eta: float, beta: float) -> float:
    """Output entropy sufficient to keep a fraction eta of beta bits (binary input)."""
    _check(0.0 < eta < 1.0, "eta must lie in (0, 1)")
    _check(0.0 < beta and math.log2(1.0 / beta) > 2.0, "needs log(1/beta) > 2")
    lll = math.log2(math.log2(math.log2(1.0 / beta)))
    return lll - math.log2(1.0 - eta) + math.log2(-math.log2(1.0 - eta)) + 11.0
