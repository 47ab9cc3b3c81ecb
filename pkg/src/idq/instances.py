"""Generators for the distribution families used as examples and extremal cases.

``random_instance`` draws with ``numpy.random.Generator(PCG64(seed)).dirichlet``:
first the input pmf, then one channel row per input symbol, in order. Fixtures
pinned in the tests depend on exactly that call sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import JointDistribution, inv_binary_entropy, mutual_information

LOG2E = math.log2(math.e)


def bec_instance(beta: float) -> JointDistribution:
    """Binary erasure channel with uniform input; outputs are (0, 1, erasure)."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"erasure capacity must be in [0, 1], got {beta!r}")
    ch = [[beta, 0.0, 1.0 - beta], [0.0, beta, 1.0 - beta]]
    return JointDistribution([0.5, 0.5], ch)


def hard_beta(r: float) -> float:
    """Closed-form information value attached to the hard BMS family at parameter r."""
    return 0.5 * LOG2E * r * math.log(math.e / r)


def hard_r_for_beta(beta: float) -> float:
    """Invert ``hard_beta`` on (0, 1] by bisection (it is increasing there)."""
    if not 0.0 < beta <= hard_beta(1.0):
        raise ValueError(f"beta must lie in (0, {hard_beta(1.0):.6f}], got {beta!r}")
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hard_beta(mid) < beta:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BmsHardSpec:
    r: float
    n_bins: int = 4096

    def __post_init__(self):
        if not 0.0 < self.r <= 0.25:
            raise ValueError(f"r must lie in (0, 0.25], got {self.r!r}")
        if self.n_bins < 1:
            raise ValueError("n_bins must be positive")

    @property
    def beta_formula(self) -> float:
        return hard_beta(self.r)

    @classmethod
    def for_beta(cls, beta: float, n_bins: int = 4096) -> "BmsHardSpec":
        return cls(hard_r_for_beta(beta), n_bins)


def hard_t_cells(spec: BmsHardSpec) -> tuple[np.ndarray, np.ndarray]:
    """Crossover values and masses of the discretized noise level T.

    Index 0 is the atom at t = 0 (mass r). The continuous part, with
    Pr(0 <= T <= rho) = r / (1 - 2 rho)^2, is cut into equal-mass bins and
    each bin is represented by its conditional mean.
    """
    r, n = spec.r, spec.n_bins
    w = (1.0 - r) / n
    cum = r + w * np.arange(n + 1)
    cum[-1] = 1.0
    edges = 0.5 * (1.0 - np.sqrt(r / cum))
    # integral of t f_T(t) from 0 to rho
    first_moment = 2.0 * r * edges**2 / (1.0 - 2.0 * edges) ** 2
    means = np.diff(first_moment) / w
    means = np.clip(means, edges[:-1], edges[1:])
    t = np.concatenate([[0.0], means])
    mass = np.concatenate([[r], np.full(n, w)])
    return t, mass


def bms_hard_instance(spec: BmsHardSpec) -> JointDistribution:
    """Uniform X observed as (X xor Z, T) with Pr(Z = 1 | T = t) = t.

    Output symbol 2c + v stands for T in cell c and V = v.
    """
    t, mass = hard_t_cells(spec)
    ch = np.empty((2, 2 * t.size))
    for x in (0, 1):
        ch[x, 2 * np.arange(t.size) + x] = mass * (1.0 - t)
        ch[x, 2 * np.arange(t.size) + (1 - x)] = mass * t
    return JointDistribution([0.5, 0.5], ch)


def hard_exact_information(r: float) -> float:
    """1 - E h(T) for the undiscretized hard family, by adaptive quadrature in 1/2 - t."""
    from scipy.integrate import quad

    def integrand(x: float) -> float:
        t = 0.5 - x
        h = 0.0 if t <= 0 else -t * math.log2(t) - (1 - t) * math.log2(1 - t)
        return (1.0 - h) * r / (2.0 * x**3)

    val, _ = quad(integrand, math.sqrt(r) / 2.0, 0.5, limit=200, epsabs=1e-14, epsrel=1e-12)
    return r + val


def map_vs_z_instance(beta: float, delta: float) -> JointDistribution:
    """Binary input with outputs ((0,g), (1,g), (0,b), (1,b))."""
    if not 0.0 <= beta <= 1.0 or not 0.0 <= delta <= 0.5:
        raise ValueError("need beta in [0, 1] and delta in [0, 1/2]")
    good, near, far = beta, (1 - beta) * (0.5 + delta), (1 - beta) * (0.5 - delta)
    ch = [[good, 0.0, near, far], [0.0, good, far, near]]
    return JointDistribution([0.5, 0.5], ch)


def mod4_instance(delta: float) -> JointDistribution:
    """Uniform X on Z_4 with Y = X + Z mod 4, Pr(Z = 0) = delta, others (1 - delta)/3."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must be in [0, 1], got {delta!r}")
    pz = np.array([delta] + [(1.0 - delta) / 3.0] * 3)
    ch = np.array([np.roll(pz, x) for x in range(4)])
    return JointDistribution(np.full(4, 0.25), ch)


def mod4_information(delta: float) -> float:
    from .core import binary_entropy

    return 2.0 - binary_entropy(delta) - (1.0 - delta) * math.log2(3.0)


def mod4_two_level(delta: float) -> float:
    """Closed-form best 2-level information for ``mod4_instance``."""
    from .core import binary_entropy as h

    if delta <= 0.25:
        return h(0.25) - 0.25 * h(delta) - 0.75 * h((1.0 - delta) / 3.0)
    return 1.0 - h((1.0 + 2.0 * delta) / 3.0)


@dataclass(frozen=True)
class KlPairSpec:
    k: int
    T: int
    alpha: float

    def __post_init__(self):
        if not 1 <= self.k < self.T:
            raise ValueError("need 1 <= k < T")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")

    def g(self, m: int) -> float:
        return 2.0 ** (-self.alpha * 2.0**m / m)

    @property
    def closed_form(self) -> float:
        return self.alpha * (2.0 / self.T + sum(1.0 / m for m in range(self.k + 1, self.T)))

    @property
    def psi_bound_factor(self) -> float:
        """Per-level cap on the divergence any quantized pair can keep."""
        return 2.0 * 2.0 ** (-self.k) + 2.0 * self.alpha / self.k


def kl_pair_instance(spec: KlPairSpec) -> tuple[np.ndarray, np.ndarray, float]:
    """Pair (P, Q) on {1, ..., T+1} whose divergence is hard to keep under quantization."""
    T, k = spec.T, spec.k
    p = np.array([2.0 ** -m for m in range(1, T)] + [2.0 ** -(T - 1), 0.0])
    q = p.copy()
    for m in range(k + 1, T + 1):
        q[m - 1] = spec.g(m) * p[m - 1]
    if np.any(q[k:T] <= 0):
        raise ValueError("Q underflows to zero; choose smaller T or alpha")
    q[T] = 1.0 - q[:T].sum()
    if q[T] < 0:
        raise ValueError("invalid pair parameters: residual mass of Q is negative")
    return p, q, spec.closed_form


def bsc_product_instance(n: int, beta: float) -> JointDistribution:
    """n independent uses of a BSC with uniform input tuned so I(X^n; Y^n) = beta."""
    if not 1 <= n <= 12:
        raise ValueError("n must be in 1..12 (alphabet 2^n)")
    if not 0.0 <= beta <= n:
        raise ValueError("need 0 <= beta <= n")
    delta = inv_binary_entropy(1.0 - beta / n)
    words = np.arange(2**n)
    dist = np.array([bin(v).count("1") for v in range(2**n)])[np.bitwise_xor.outer(words, words)]
    ch = delta**dist * (1.0 - delta) ** (n - dist)
    ch /= ch.sum(axis=1, keepdims=True)
    return JointDistribution(np.full(2**n, 2.0**-n), ch)


def bsc_product_crossover(n: int, beta: float) -> float:
    return inv_binary_entropy(1.0 - beta / n)


def dilute_to_beta(j: JointDistribution, beta: float) -> JointDistribution:
    """Pass Y through an erasure channel so that exactly ``beta`` bits survive.

    The erasure symbol is appended as the last output.
    """
    info = mutual_information(j)
    if not 0.0 < beta <= info:
        raise ValueError(f"need 0 < beta <= I(X;Y) = {info!r}, got {beta!r}")
    keep = beta / info
    ch = np.hstack([j.channel * keep, np.full((j.K, 1), 1.0 - keep)])
    return JointDistribution(j.px, ch)


def random_instance(K: int, N: int, seed: int, dirichlet_alpha: float = 1.0) -> JointDistribution:
    if K < 2 or N < 1:
        raise ValueError("need K >= 2 and N >= 1")
    if dirichlet_alpha <= 0:
        raise ValueError("dirichlet concentration must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    px = rng.dirichlet(np.full(K, dirichlet_alpha))
    ch = rng.dirichlet(np.full(N, dirichlet_alpha), size=K)
    return JointDistribution(px / px.sum(), ch / ch.sum(axis=1, keepdims=True))
