"""Finite joint distributions, deterministic quantizers and information measures.

Everything is measured in bits. ``0 log 0`` is taken as 0; a positive mass
divided by a zero mass is always an error, never ``inf``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PMF_TOL = 1e-12
ROW_TOL = 1e-10


class AbsoluteContinuityError(ValueError):
    """Raised when p(i) > 0 but q(i) = 0 in a divergence."""


def _as_vector(probs) -> np.ndarray:
    arr = np.array(probs.probs if isinstance(probs, Pmf) else probs, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D probability vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class Pmf:
    probs: np.ndarray

    def __post_init__(self):
        arr = _as_vector(self.probs)
        if arr.size < 1:
            raise ValueError("a pmf needs at least one symbol")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("pmf entries must be finite and nonnegative")
        if abs(arr.sum() - 1.0) > PMF_TOL:
            raise ValueError(f"pmf sums to {arr.sum()!r}, not 1")
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    def __len__(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class JointDistribution:
    """P(x, y) = px[x] * channel[x, y] over a K x N alphabet."""

    px: np.ndarray
    channel: np.ndarray

    def __post_init__(self):
        px = Pmf(self.px).probs
        ch = np.array(self.channel, dtype=np.float64)
        if ch.ndim != 2 or ch.shape[0] != px.size:
            raise ValueError(f"channel shape {ch.shape} does not match |X| = {px.size}")
        if px.size < 2 or ch.shape[1] < 1:
            raise ValueError("need |X| >= 2 and |Y| >= 1")
        if not np.all(np.isfinite(ch)) or np.any(ch < 0):
            raise ValueError("channel entries must be finite and nonnegative")
        bad = np.flatnonzero(np.abs(ch.sum(axis=1) - 1.0) > ROW_TOL)
        if bad.size:
            raise ValueError(f"channel row {int(bad[0])} does not sum to 1")
        ch.setflags(write=False)
        object.__setattr__(self, "px", px)
        object.__setattr__(self, "channel", ch)

    @property
    def K(self) -> int:
        return self.px.size

    @property
    def N(self) -> int:
        return self.channel.shape[1]

    @property
    def joint(self) -> np.ndarray:
        return self.px[:, None] * self.channel

    @property
    def py(self) -> np.ndarray:
        return self.px @ self.channel

    @classmethod
    def from_joint(cls, pxy) -> "JointDistribution":
        """Build from a K x N joint pmf; rows with zero input mass get a uniform channel."""
        pxy = np.asarray(pxy, dtype=np.float64)
        px = pxy.sum(axis=1)
        ch = np.full_like(pxy, 1.0 / pxy.shape[1])
        live = px > 0
        ch[live] = pxy[live] / px[live, None]
        return cls(px / px.sum(), ch)


@dataclass(frozen=True)
class Quantizer:
    labels: np.ndarray
    num_levels: int

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int64)
        if labels.ndim != 1:
            raise ValueError("labels must be a 1-D array")
        if self.num_levels < 1:
            raise ValueError("a quantizer needs at least one level")
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_levels):
            raise ValueError(f"labels must lie in [0, {self.num_levels})")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "num_levels", int(self.num_levels))

    @classmethod
    def identity(cls, n: int) -> "Quantizer":
        return cls(np.arange(n), n)

    @classmethod
    def constant(cls, n: int) -> "Quantizer":
        return cls(np.zeros(n, dtype=np.int64), 1)

    def then(self, outer: "Quantizer") -> "Quantizer":
        """Composition ``outer o self``: apply ``self`` first, then ``outer``."""
        if outer.labels.size != self.num_levels:
            raise ValueError("outer quantizer must act on this quantizer's levels")
        return Quantizer(outer.labels[self.labels], outer.num_levels)

    def compact(self) -> "Quantizer":
        """Relabel occupied levels as 0..k-1 in order of first appearance."""
        _, first, inverse = np.unique(self.labels, return_index=True, return_inverse=True)
        order = np.argsort(np.argsort(first))
        return Quantizer(order[inverse.ravel()], max(len(first), 1))

    @property
    def occupied(self) -> int:
        return int(np.unique(self.labels).size)


@dataclass(frozen=True)
class Posterior:
    """Posteriors P(X | Y=y). Rows for zero-mass symbols hold px and are flagged off."""

    alpha: np.ndarray
    py: np.ndarray
    support: np.ndarray = field(repr=False)


def posterior(j: JointDistribution) -> Posterior:
    pxy = j.joint
    py = pxy.sum(axis=0)
    support = py > 0
    alpha = np.tile(j.px, (j.N, 1))
    alpha[support] = (pxy[:, support] / py[support]).T
    return Posterior(alpha, py, support)


def _xlogx_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """Elementwise num * log2(num / den) with 0 log 0 = 0 (den assumed > 0 where num > 0)."""
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    out = np.zeros(np.broadcast(num, den).shape)
    pos = np.broadcast_to(num > 0, out.shape)
    n = np.broadcast_to(num, out.shape)[pos]
    d = np.broadcast_to(den, out.shape)[pos]
    out[pos] = n * np.log2(n / d)
    return out


def entropy(p) -> float:
    """Shannon entropy in bits."""
    arr = _as_vector(p)
    nz = arr[arr > 0]
    return float(max(-(nz * np.log2(nz)).sum(), 0.0))


def binary_entropy(t: float) -> float:
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"binary entropy needs t in [0, 1], got {t!r}")
    if t == 0.0 or t == 1.0:
        return 0.0
    return float(-t * np.log2(t) - (1.0 - t) * np.log2(1.0 - t))


def inv_binary_entropy(t: float) -> float:
    """Inverse of the binary entropy restricted to [0, 1/2].

    Bisection is run until the bracket cannot shrink in floating point,
    which is finer than any fixed width for tiny outputs.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"inverse binary entropy needs t in [0, 1], got {t!r}")
    if t == 0.0:
        return 0.0
    if t == 1.0:
        return 0.5
    lo, hi = 0.0, 0.5
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if binary_entropy(mid) < t:
            lo = mid
        else:
            hi = mid
    return hi if abs(binary_entropy(hi) - t) <= abs(binary_entropy(lo) - t) else lo


def kl_divergence(p, q) -> float:
    """D(p || q) in bits."""
    p = _as_vector(p)
    q = _as_vector(q)
    if p.shape != q.shape:
        raise ValueError("divergence needs distributions on the same alphabet")
    if np.any((p > 0) & (q <= 0)):
        raise AbsoluteContinuityError("p is not absolutely continuous with respect to q")
    return float(max(_xlogx_ratio(p, q).sum(), 0.0))


def binary_kl(a: float, b: float) -> float:
    """d(a || b) for Bernoulli parameters, in bits."""
    return kl_divergence([1.0 - a, a], [1.0 - b, b])


def mutual_information(j: JointDistribution) -> float:
    pxy = j.joint
    prod = np.outer(j.px, pxy.sum(axis=0))
    return float(max(_xlogx_ratio(pxy, prod).sum(), 0.0))


def _check_length(j: JointDistribution, q: Quantizer) -> None:
    if q.labels.size != j.N:
        raise ValueError(f"quantizer has {q.labels.size} labels but |Y| = {j.N}")


def cell_joint(pxy: np.ndarray, labels: np.ndarray, num_levels: int) -> np.ndarray:
    """Sum the columns of a K x N joint (or channel) into ``num_levels`` cells."""
    out = np.zeros((pxy.shape[0], num_levels))
    np.add.at(out.T, labels, pxy.T)
    return out


def apply_quantizer(j: JointDistribution, q: Quantizer) -> JointDistribution:
    _check_length(j, q)
    return JointDistribution(j.px, cell_joint(j.channel, q.labels, q.num_levels))


def _mi_of_cells(pxy: np.ndarray, px: np.ndarray) -> float:
    prod = np.outer(px, pxy.sum(axis=0))
    return float(max(_xlogx_ratio(pxy, prod).sum(), 0.0))


def quantized_mi(j: JointDistribution, q: Quantizer) -> float:
    """I(X; f(Y)). Unoccupied levels are dropped before summing."""
    _check_length(j, q)
    c = q.compact()
    return _mi_of_cells(cell_joint(j.joint, c.labels, c.num_levels), j.px)


def log_loss_distortion(j: JointDistribution, q: Quantizer) -> float:
    """Minimal expected log-loss when reconstructing X from f(Y): H(X | f(Y))."""
    _check_length(j, q)
    c = q.compact()
    cells = cell_joint(j.joint, c.labels, c.num_levels)
    mass = cells.sum(axis=0)
    live = mass > 0
    return float(sum(m * entropy(col / m) for m, col in zip(mass[live], cells[:, live].T)))


def conditional_entropy(j: JointDistribution) -> float:
    """H(X | Y)."""
    return log_loss_distortion(j, Quantizer.identity(j.N))


def output_pmf(j: JointDistribution, q: Quantizer) -> np.ndarray:
    _check_length(j, q)
    return np.bincount(q.labels, weights=j.py, minlength=q.num_levels)
