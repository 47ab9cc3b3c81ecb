"""Exact optimal quantizers: contiguous DP for binary inputs, exhaustive search otherwise."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .core import (
    AbsoluteContinuityError,
    JointDistribution,
    Quantizer,
    _xlogx_ratio,
    posterior,
    quantized_mi,
)

POSTERIOR_TOL = 1e-10
# Bell(12): every partition of a 12-symbol alphabet.
MAX_PARTITIONS = 4_213_597


class Method(str, Enum):
    DP_CONTIGUOUS = "dp_contiguous"
    BRUTE_FORCE_PARTITIONS = "brute_force_partitions"
    BRUTE_FORCE_CONTIGUOUS = "brute_force_contiguous"


@dataclass(frozen=True)
class OptResult:
    quantizer: Quantizer
    value: float
    method: Method


class GuardError(ValueError):
    """The exhaustive search would enumerate too many partitions."""


def merge_equal_posteriors(j: JointDistribution) -> tuple[JointDistribution, np.ndarray]:
    """Collapse output symbols that share a posterior.

    Two posteriors match when every coordinate agrees to a relative
    tolerance of ``POSTERIOR_TOL``; an absolute tolerance would merge distinct
    posteriors whose coordinates are all tiny. Returns the merged joint and
    ``mapping`` with ``mapping[y]`` the merged symbol of original ``y``.
    Merged symbols are ordered by first occurrence; zero-mass symbols go to
    merged symbol 0.
    """
    post = posterior(j)
    live = np.flatnonzero(post.support)
    alpha = post.alpha
    # sweep in order of the first coordinate; only representatives within
    # tolerance on that coordinate can match
    group = np.full(j.N, -1, dtype=np.int64)
    window: list[int] = []
    reps: list[int] = []
    for y in live[np.argsort(alpha[live, 0], kind="stable")]:
        a = alpha[y]
        window = [g for g in window if alpha[reps[g], 0] >= a[0] * (1.0 - POSTERIOR_TOL)]
        for g in window:
            b = alpha[reps[g]]
            if np.all(np.abs(b - a) <= POSTERIOR_TOL * np.maximum(np.abs(a), np.abs(b))):
                group[y] = g
                break
        else:
            group[y] = len(reps)
            window.append(len(reps))
            reps.append(y)
    # renumber groups by first occurrence in the original order
    first = np.full(len(reps), j.N, dtype=np.int64)
    np.minimum.at(first, group[live], live)
    rank = np.empty(len(reps), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(reps))
    mapping = np.zeros(j.N, dtype=np.int64)
    mapping[live] = rank[group[live]]
    n = max(len(reps), 1)
    ch = np.zeros((j.K, n))
    np.add.at(ch.T, mapping, j.channel.T)
    return JointDistribution(j.px, ch), mapping


def _dp_tables(pxy: np.ndarray, px: np.ndarray, max_blocks: int):
    """Best value of splitting the ordered columns of ``pxy`` into m contiguous blocks.

    ``value[m, i]`` covers the first i columns with exactly m blocks; ``arg``
    holds the start of the last block. Block masses come from reverse cumulative
    sums so small blocks are not formed by cancellation.
    """
    n = pxy.shape[1]
    value = np.full((max_blocks + 1, n + 1), -np.inf)
    value[0, 0] = 0.0
    arg = np.zeros((max_blocks + 1, n + 1), dtype=np.int64)
    for i in range(1, n + 1):
        # masses[:, j] is the mass of block (j, i] for j = 0..i-1
        masses = np.cumsum(pxy[:, i - 1 :: -1], axis=1)[:, ::-1]
        cost = _xlogx_ratio(masses, np.outer(px, masses.sum(axis=0))).sum(axis=0)
        cand = value[:-1, :i] + cost[None, :]
        best = np.argmax(cand, axis=1)
        value[1:, i] = cand[np.arange(max_blocks), best]
        arg[1:, i] = best
    return value, arg


def _blocks_from_tables(value: np.ndarray, arg: np.ndarray, m: int) -> np.ndarray:
    n = value.shape[1] - 1
    labels = np.empty(n, dtype=np.int64)
    i = n
    while m > 0:
        j = arg[m, i]
        labels[j:i] = m - 1
        i, m = j, m - 1
    return labels


def _binary_sorted(j: JointDistribution):
    if j.K != 2:
        raise ValueError(f"the contiguous DP needs a binary input, got |X| = {j.K}")
    merged, mapping = merge_equal_posteriors(j)
    alpha = posterior(merged).alpha[:, 1]
    order = np.argsort(alpha, kind="stable")
    return merged, mapping, order


def binary_dp_values(j: JointDistribution, max_levels: int) -> np.ndarray:
    """Optimal I(X; [Y]_m) for every m = 1..max_levels in one DP pass (index m-1)."""
    merged, _, order = _binary_sorted(j)
    n = merged.N
    top = min(max_levels, n)
    value, _ = _dp_tables(merged.joint[:, order], merged.px, top)
    best = np.maximum.accumulate(value[1:, n])
    best[0] = 0.0  # a single cell carries no information; drop rounding residue
    out = np.concatenate([best, np.full(max_levels - top, best[-1])])
    return np.maximum(out, 0.0)


def optimal_binary_quantizer(j: JointDistribution, M: int) -> OptResult:
    """Optimal M-level quantizer for a binary input.

    Symbols are sorted by P(X=1 | Y=y) and cut into at most M contiguous
    blocks; optimal cells are intervals of the posterior, so this is global.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    merged, mapping, order = _binary_sorted(j)
    n = merged.N
    if M >= n:
        q = Quantizer(mapping, M)
        return OptResult(q, quantized_mi(j, q), Method.DP_CONTIGUOUS)
    value, arg = _dp_tables(merged.joint[:, order], merged.px, M)
    m = int(np.argmax(value[1:, n])) + 1
    sorted_labels = _blocks_from_tables(value, arg, m)
    merged_labels = np.empty(n, dtype=np.int64)
    merged_labels[order] = sorted_labels
    q = Quantizer(merged_labels[mapping], M)
    return OptResult(q, quantized_mi(j, q), Method.DP_CONTIGUOUS)


def stirling2(n: int, k: int) -> int:
    row = [1] + [0] * k
    for i in range(1, n + 1):
        new = [0] * (k + 1)
        for b in range(1, min(i, k) + 1):
            new[b] = b * row[b] + row[b - 1]
        row = new
    return row[k] if n else int(k == 0)


def partition_count(n: int, M: int) -> int:
    """Number of partitions of n symbols into at most M nonempty blocks."""
    return sum(stirling2(n, k) for k in range(1, min(M, n) + 1))


@lru_cache(maxsize=32)
def restricted_growth_strings(n: int, M: int) -> np.ndarray:
    """All restricted-growth strings of length n with values < M, in lexicographic order."""
    rows = np.zeros((1, 1), dtype=np.int8)
    top = np.zeros(1, dtype=np.int8)
    for _ in range(1, n):
        counts = np.minimum(top + 1, M - 1).astype(np.int64) + 1
        parent = np.repeat(np.arange(rows.shape[0]), counts)
        starts = np.cumsum(counts) - counts
        vals = (np.arange(parent.size) - np.repeat(starts, counts)).astype(np.int8)
        rows = np.hstack([rows[parent], vals[:, None]])
        top = np.maximum(top[parent], vals)
    rows.setflags(write=False)
    return rows


def _guard(n: int, M: int) -> None:
    count = partition_count(n, M)
    if count > MAX_PARTITIONS:
        raise GuardError(
            f"{count} partitions of {n} symbols into <= {M} blocks exceeds the "
            f"exhaustive-search limit of {MAX_PARTITIONS}"
        )


def _cell_masses(rgs: np.ndarray, rows: np.ndarray, levels: int) -> np.ndarray:
    """Mass of each cell: result[p, m, k] = sum over y in cell m of rows[k, y]."""
    out = np.empty((rgs.shape[0], levels, rows.shape[0]))
    for m in range(levels):
        out[:, m, :] = (rgs == m).astype(np.float64) @ rows.T
    return out


def _best_rgs(n: int, M: int, score, chunk: int = 200_000) -> tuple[np.ndarray, float]:
    """Maximize ``score`` over partitions; ties go to the lexicographically first string."""
    _guard(n, M)
    levels = min(M, n)
    rgs = restricted_growth_strings(n, levels)
    scores = np.concatenate(
        [score(rgs[s : s + chunk], levels) for s in range(0, rgs.shape[0], chunk)]
    )
    best = float(scores.max())
    idx = int(np.flatnonzero(scores >= best - 1e-12)[0])
    return rgs[idx].astype(np.int64), best


def brute_force_quantizer(j: JointDistribution, M: int) -> OptResult:
    """Exhaustive search over every partition of Y into at most M cells."""
    if M < 1:
        raise ValueError("M must be at least 1")
    pxy = j.joint

    def score(block, levels):
        cells = _cell_masses(block, pxy, levels)
        prod = j.px[None, None, :] * cells.sum(axis=2, keepdims=True)
        return _xlogx_ratio(cells, prod).sum(axis=(1, 2))

    labels, _ = _best_rgs(j.N, M, score)
    q = Quantizer(labels, M)
    return OptResult(q, quantized_mi(j, q), Method.BRUTE_FORCE_PARTITIONS)


def brute_force_contiguous(j: JointDistribution, M: int) -> OptResult:
    """Exhaustive search over contiguous cuts of the posterior-sorted binary alphabet."""
    from itertools import combinations

    merged, mapping, order = _binary_sorted(j)
    n = merged.N
    best, best_labels = -1.0, None
    for m in range(1, min(M, n) + 1):
        for cuts in combinations(range(1, n), m - 1):
            sorted_labels = np.searchsorted(np.array(cuts, dtype=np.int64), np.arange(n), side="right")
            merged_labels = np.empty(n, dtype=np.int64)
            merged_labels[order] = sorted_labels
            q = Quantizer(merged_labels[mapping], M)
            v = quantized_mi(j, q)
            if v > best + 1e-15:
                best, best_labels = v, q
    return OptResult(best_labels, best, Method.BRUTE_FORCE_CONTIGUOUS)


def brute_force_divergence_quantizer(p, q, M: int) -> tuple[Quantizer, float]:
    """Largest D(P^f || Q^f) over every f into at most M cells, by enumeration."""
    p = np.asarray(getattr(p, "probs", p), dtype=np.float64)
    q = np.asarray(getattr(q, "probs", q), dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError("P and Q must share an alphabet")
    if np.any((p > 0) & (q <= 0)):
        raise AbsoluteContinuityError("P is not absolutely continuous with respect to Q")
    if M < 1:
        raise ValueError("M must be at least 1")
    rows = np.vstack([p, q])

    def score(block, levels):
        cells = _cell_masses(block, rows, levels)
        return _xlogx_ratio(cells[:, :, 0], cells[:, :, 1]).sum(axis=1)

    labels, value = _best_rgs(p.size, M, score)
    return Quantizer(labels, M), max(value, 0.0)
