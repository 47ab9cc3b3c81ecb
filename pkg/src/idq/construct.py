"""Constructive quantizers with checkable guarantees."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    JointDistribution,
    Quantizer,
    _xlogx_ratio,
    apply_quantizer,
    entropy,
    mutual_information,
    output_pmf,
    posterior,
    quantized_mi,
)
from .exact import brute_force_quantizer, optimal_binary_quantizer

TIE_TOL = 1e-12


def symbol_scores(j: JointDistribution) -> np.ndarray:
    """P_Y(y) * D(P_{X|Y=y} || P_X) for every output symbol; sums to I(X;Y)."""
    pxy = j.joint
    return _xlogx_ratio(pxy, np.outer(j.px, pxy.sum(axis=0))).sum(axis=0)


def greedy_top_quantizer(j: JointDistribution, M: int) -> Quantizer:
    """Keep the M-1 most informative symbols as singletons and lump the rest."""
    if M < 1:
        raise ValueError("M must be at least 1")
    if M >= j.N:
        return Quantizer.identity(j.N)
    order = np.argsort(-symbol_scores(j), kind="stable")
    labels = np.full(j.N, M - 1, dtype=np.int64)
    labels[order[: M - 1]] = np.arange(M - 1)
    return Quantizer(labels, M)


def _require_binary(j: JointDistribution) -> None:
    if j.K != 2:
        raise ValueError(f"this construction needs a binary input, got |X| = {j.K}")


def _map_split(j: JointDistribution):
    post = posterior(j)
    a = post.alpha[:, 1]
    tie = post.support & (np.abs(a - 0.5) <= TIE_TOL)
    above = post.support & (a > 0.5) & ~tie
    return above, tie


def map_quantizer(j: JointDistribution) -> Quantizer:
    """Guess X = 1 iff P(X=1 | y) > 1/2.

    Symbols sitting exactly at 1/2 are sent together to whichever side
    yields more information (label 0 on equality).
    """
    _require_binary(j)
    above, tie = _map_split(j)
    base = above.astype(np.int64)
    if not tie.any():
        return Quantizer(base, 2)
    alt = base.copy()
    alt[tie] = 1
    q0, q1 = Quantizer(base, 2), Quantizer(alt, 2)
    return q1 if quantized_mi(j, q1) > quantized_mi(j, q0) + 1e-15 else q0


def randomized_map_mi(j: JointDistribution) -> float:
    """I(X; f_MAP(Y, U)) when ties at posterior 1/2 are broken by a fair coin."""
    _require_binary(j)
    above, tie = _map_split(j)
    pxy = j.joint
    one = pxy[:, above].sum(axis=1) + 0.5 * pxy[:, tie].sum(axis=1)
    zero = pxy.sum(axis=1) - one
    cells = np.column_stack([zero, one])
    return float(max(_xlogx_ratio(cells, np.outer(j.px, cells.sum(axis=0))).sum(), 0.0))


@dataclass(frozen=True)
class GeometricPlan:
    """Parameters of the divergence-binning quantizer.

    ``gammas[0] = 0`` and ``gammas[l] = gammas[1] * theta**(l-1)`` for l = 1..L.
    """

    eta: float
    beta: float
    kappa: float
    epsilon: float
    L: int
    theta: float
    gammas: np.ndarray = field(repr=False)
    alpha_bar: float = 0.5

    @property
    def total_levels(self) -> int:
        return 2 * self.L + 1

    def as_dict(self) -> dict:
        return {
            "eta": self.eta,
            "beta": self.beta,
            "kappa": self.kappa,
            "epsilon": self.epsilon,
            "L": self.L,
            "theta": self.theta,
            "gammas": [float(g) for g in self.gammas],
            "alpha_bar": self.alpha_bar,
            "total_levels": self.total_levels,
        }


def geometric_plan(eta: float, beta: float, alpha_bar: float) -> GeometricPlan:
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0, 1), got {eta!r}")
    if not 0.0 < alpha_bar < 1.0:
        raise ValueError("the input must not be deterministic")
    kappa = max(-math.log2(alpha_bar), -math.log2(1.0 - alpha_bar))
    eps = (1.0 - eta) / 2.0
    L = math.ceil(2.0 * math.log2(2.0 * kappa / ((1.0 - eta) * beta)) / (1.0 - eta))
    gamma1 = eps * beta
    theta = (gamma1 / kappa) ** (-1.0 / L)
    gammas = np.concatenate([[0.0], gamma1 * theta ** np.arange(L)])
    return GeometricPlan(eta, beta, kappa, eps, L, theta, gammas, alpha_bar)


def geometric_quantizer(j: JointDistribution, eta: float) -> tuple[Quantizer, GeometricPlan]:
    """Bin symbols by d(alpha_y || alpha_bar) on a geometric grid, split by side.

    Levels run -L..L and are stored as label + L. Level 0 takes every symbol
    with divergence at most gamma_1; the top bin is open above.
    """
    _require_binary(j)
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0, 1), got {eta!r}")
    beta = mutual_information(j)
    alpha_bar = float(j.px[1])
    if beta <= 0.0:
        plan = GeometricPlan(eta, 0.0, 0.0, (1.0 - eta) / 2.0, 0, 1.0, np.zeros(1), alpha_bar)
        return Quantizer.constant(j.N), plan
    plan = geometric_plan(eta, beta, alpha_bar)
    post = posterior(j)
    a = post.alpha[:, 1]
    div = _xlogx_ratio(a, alpha_bar) + _xlogx_ratio(1.0 - a, 1.0 - alpha_bar)
    level = np.searchsorted(plan.gammas[1:], div, side="right")
    level[div <= plan.gammas[1]] = 0
    level[~post.support] = 0
    signed = np.where(a < alpha_bar, -level, level)
    return Quantizer(signed + plan.L, plan.total_levels), plan


def bit_joint(j: JointDistribution, i: int) -> tuple[JointDistribution | None, float]:
    """Law of (1{X=i}, Y) given X >= i, and Pr(X >= i).

    Returns ``(None, p)`` when the conditioning event has zero probability.
    """
    p = float(j.px[i:].sum())
    if p <= 0.0:
        return None, 0.0
    rest = j.px[i + 1 :]
    row1 = j.channel[i]
    if rest.sum() > 0:
        row0 = (rest @ j.channel[i + 1 :]) / rest.sum()
    else:
        row0 = row1
    a1 = float(j.px[i] / p)
    return JointDistribution([1.0 - a1, a1], np.vstack([row0, row1])), p


@dataclass(frozen=True)
class OneHotPlan:
    """Decomposition of I(X;Y) into indicator bits and the bits that get quantized."""

    p: np.ndarray
    info: np.ndarray
    v: np.ndarray
    perm: np.ndarray
    F: np.ndarray
    k_bar: int
    eta_bar: float
    eta_prime: float
    plans: tuple = ()
    levels: tuple = ()

    @property
    def total_levels(self) -> int:
        return int(np.prod(self.levels)) if self.levels else 1

    def as_dict(self) -> dict:
        return {
            "p": self.p.tolist(),
            "I": self.info.tolist(),
            "v": self.v.tolist(),
            "perm": self.perm.tolist(),
            "F": self.F.tolist(),
            "k_bar": self.k_bar,
            "eta_bar": self.eta_bar,
            "eta_prime": self.eta_prime,
            "levels": list(self.levels),
            "total_levels": self.total_levels,
            "bit_plans": [pl.as_dict() for pl in self.plans],
        }


def one_hot_quantizer(
    j: JointDistribution, eta: float, k: int | None = None
) -> tuple[Quantizer, OneHotPlan]:
    """Product of per-indicator geometric quantizers on the most informative bits."""
    K = j.K
    if K < 3:
        raise ValueError("the one-hot construction needs |X| >= 3")
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0, 1), got {eta!r}")
    beta = mutual_information(j)
    if beta <= 0.0:
        raise ValueError("I(X;Y) must be positive")
    if k is None:
        eta_bar = math.sqrt(eta)
    else:
        if not 1 <= k <= K - 2:
            raise ValueError(f"k must lie in 1..{K - 2}")
        if not eta < k / (K - 1):
            raise ValueError(f"need eta < k/(|X|-1) = {k / (K - 1):.6g}")
        eta_bar = k / (K - 1)

    joints, p, info = [], np.zeros(K - 1), np.zeros(K - 1)
    for i in range(K - 1):
        bj, p[i] = bit_joint(j, i)
        joints.append(bj)
        info[i] = mutual_information(bj) if bj is not None else 0.0
    v = info * p / beta
    perm = np.argsort(-v, kind="stable")
    F = np.concatenate([[0.0], np.cumsum(v[perm])])
    k_bar = int(np.flatnonzero(F >= eta_bar - 1e-12)[0])
    eta_prime = eta / eta_bar

    labels = np.zeros(j.N, dtype=np.int64)
    plans, levels = [], []
    for i in perm[:k_bar]:
        qi, plan = geometric_quantizer(joints[i], eta_prime)
        labels = labels * qi.num_levels + qi.labels
        plans.append(plan)
        levels.append(qi.num_levels)
    plan = OneHotPlan(p, info, v, perm, F, k_bar, eta_bar, eta_prime, tuple(plans), tuple(levels))
    return Quantizer(labels, plan.total_levels), plan


def double_quantize(j: JointDistribution, M: int, k_small: int) -> Quantizer:
    """Optimal M-level quantizer followed by the greedy reduction to ``k_small`` levels."""
    if not 1 <= k_small <= M:
        raise ValueError("need 1 <= k_small <= M")
    inner = optimal_binary_quantizer(j, M) if j.K == 2 else brute_force_quantizer(j, M)
    outer = greedy_top_quantizer(apply_quantizer(j, inner.quantizer), k_small)
    return inner.quantizer.then(outer)


def quantizer_entropy(j: JointDistribution, q: Quantizer) -> float:
    """H(f(Y))."""
    return entropy(output_pmf(j, q))
