"""Verification suites over seeded instance corpora.

Each suite checks one family of guarantees and returns a ``SuiteResult``.
Work is split per instance index; results are collected in index order, so
the outcome does not depend on the worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import bounds
from .construct import (
    double_quantize,
    geometric_quantizer,
    map_quantizer,
    one_hot_quantizer,
    quantizer_entropy,
    randomized_map_mi,
)
from .core import (
    JointDistribution,
    kl_divergence,
    mutual_information,
    quantized_mi,
)
from .exact import (
    binary_dp_values,
    brute_force_divergence_quantizer,
    brute_force_quantizer,
    optimal_binary_quantizer,
)
from .fileio import digest
from .instances import (
    BmsHardSpec,
    KlPairSpec,
    bec_instance,
    bms_hard_instance,
    dilute_to_beta,
    kl_pair_instance,
    mod4_information,
    mod4_instance,
    mod4_two_level,
    random_instance,
)

TOL = 1e-9
HARD_BETAS = (1e-2, 1e-3, 1e-4)
BEC_BETAS = (1e-1, 1e-2, 1e-3, 1e-4)


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.checked > 0 and not self.failures

    def as_dict(self) -> dict:
        return {
            "suite": self.name,
            "ok": self.ok,
            "checked": self.checked,
            "failures": self.failures,
            "details": self.details,
        }


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("IDQ_WORKERS", "1")))
    except ValueError:
        return 1


def _map(fn, items, workers: int | None = None) -> list:
    workers = worker_count() if workers is None else workers
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _collect(name: str, parts: list) -> SuiteResult:
    res = SuiteResult(name)
    for checked, failures in parts:
        res.checked += checked
        res.failures.extend(failures)
    return res


def _fail(j: JointDistribution | None, **values) -> dict:
    out = {"digest": digest(j) if j is not None else None}
    out.update({k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in values.items()})
    return out


def instance_seed(seed: int, i: int) -> int:
    return int(np.random.SeedSequence([seed, i]).generate_state(1)[0])


# -- corpora -----------------------------------------------------------------


def small_binary(seed: int, i: int) -> JointDistribution:
    """Binary input, N in 2..9, alternating flat and peaked Dirichlet draws."""
    N = 2 + i % 8
    alpha = 1.0 if (i // 8) % 2 == 0 else 0.3
    return random_instance(2, N, instance_seed(seed, i), alpha)


def spread_binary(seed: int, i: int) -> JointDistribution:
    """Binary input with I(X;Y) spread log-uniformly over [1e-4, 1].

    Every tenth draw is an erasure channel (which reaches I = 1); the rest are
    Dirichlet channels with up to 80 outputs, diluted to the target when possible.
    The input pmf is drawn from Dirichlet(2, 2) so it stays away from the corners.
    """
    if i == 0:
        return bec_instance(1.0)
    rng = np.random.default_rng(instance_seed(seed, i))
    target = 10.0 ** rng.uniform(-4.0, 0.0)
    if i % 10 == 0:
        return bec_instance(target)
    N = int(rng.integers(2, 80))
    alpha = float(rng.choice([0.05, 0.3, 1.0]))
    ch = random_instance(2, N, instance_seed(seed, i) + 1, alpha).channel
    base = JointDistribution(rng.dirichlet([2.0, 2.0]), ch)
    info = mutual_information(base)
    if target < info:
        return dilute_to_beta(base, target)
    # a nearly independent draw would fall below 1e-4; use an erasure channel instead
    return base if info >= 1e-4 else bec_instance(target)


def small_kary(seed: int, i: int) -> JointDistribution:
    K = 3 + i % 3
    N = 2 + (i // 3) % 9
    return random_instance(K, N, instance_seed(seed, i))


def gap_binary(seed: int, i: int) -> JointDistribution:
    N = 8 + i % 25
    return random_instance(2, N, instance_seed(seed, i), 1.0 if i % 2 == 0 else 0.3)


# -- per-instance checks -------------------------------------------------------


def _oracle_one(seed: int, i: int):
    j = small_binary(seed, i)
    fails = []
    for M in (2, 3, 4):
        dp = optimal_binary_quantizer(j, M).value
        bf = brute_force_quantizer(j, M).value
        if abs(dp - bf) > TOL:
            fails.append(_fail(j, index=i, M=M, dp=dp, brute=bf))
    return 3, fails


def _sandwich_one(seed: int, i: int, max_m: int = 64):
    j = spread_binary(seed, i)
    beta = mutual_information(j)
    if beta <= 0:
        return 0, []
    values = binary_dp_values(j, max_m)
    fails = []
    for M in range(2, max_m + 1):
        lo = beta * bounds.f_lower(bounds.sandwich_argument(M, beta))
        if values[M - 1] < lo - TOL:
            fails.append(_fail(j, index=i, M=M, beta=beta, value=values[M - 1], lower=lo))
    return max_m - 1, fails


def _geometric_check(j: JointDistribution, label) -> tuple[int, list]:
    beta = mutual_information(j)
    fails = []
    for eta in (0.5, 0.9):
        q, _ = geometric_quantizer(j, eta)
        got = quantized_mi(j, q)
        if got < eta * beta - TOL:
            fails.append(_fail(j, instance=label, eta=eta, beta=beta, value=got))
    return 2, fails


def _thm3_one(seed: int, i: int):
    return _geometric_check(spread_binary(seed, i), i)


def _thm7_one(seed: int, i: int):
    j = small_kary(seed, i)
    beta = mutual_information(j)
    if beta <= 0:
        return 0, []
    fails, checked = [], 0
    for eta, k in ((0.2, 1), (0.3, None)):
        if k is not None and not eta < k / (j.K - 1):
            continue
        q, plan = one_hot_quantizer(j, eta, k)
        got = quantized_mi(j, q)
        checked += 1
        if got < eta * beta - TOL:
            fails.append(_fail(j, index=i, eta=eta, k=k, beta=beta, value=got))
    # per-instance lower bound from the K-ary sandwich, checked exactly when cheap
    if j.N <= 8:
        for M in (2, 3):
            lo, _ = bounds.idK_lower(M, j.K, beta)
            got = brute_force_quantizer(j, M).value
            checked += 1
            if got < lo - TOL:
                fails.append(_fail(j, index=i, M=M, beta=beta, value=got, lower=lo))
    return checked, fails


def _gap_one(seed: int, i: int):
    j = gap_binary(seed, i)
    beta = mutual_information(j)
    values = binary_dp_values(j, 8)
    fails = []
    for M in (4, 8):
        gap = beta - values[M - 1]
        cap = bounds.NU2_CAP * M**-2.0
        if gap > cap + TOL:
            fails.append(_fail(j, index=i, M=M, gap=gap, cap=cap))
    return 2, fails


def _ddpi_one(seed: int, i: int):
    """Structural properties of the optimum on one binary instance."""
    j = small_binary(seed, i)
    beta = mutual_information(j)
    fails, checked = [], 0
    top = j.N
    values = binary_dp_values(j, top)
    # monotone in M, saturates at N
    checked += 1
    if np.any(np.diff(values) < -1e-12) or abs(values[-1] - beta) > 1e-12:
        fails.append(_fail(j, index=i, check="monotone", values=values.tolist(), beta=beta))
    # simple bounds
    for M in range(1, top):
        lo = (M - 1) / j.N * beta
        hi = min(beta, math.log2(M))
        checked += 1
        if not lo - TOL <= values[M - 1] <= hi + TOL:
            fails.append(_fail(j, index=i, check="simple_bounds", M=M, value=values[M - 1]))
    # double quantization
    for M in range(3, top + 1):
        for k in range(2, M):
            q = double_quantize(j, M, k)
            got = quantized_mi(j, q)
            checked += 1
            if got < (k - 1) / M * values[M - 1] - TOL or values[k - 1] < got - TOL:
                fails.append(_fail(j, index=i, check="double", M=M, k=k, value=got))
    # data processing through a random channel on Y
    rng = np.random.default_rng(instance_seed(seed, i) + 2)
    w = rng.dirichlet(np.ones(int(rng.integers(2, 10))), size=j.N)
    v = JointDistribution(j.px, j.channel @ w)
    v_values = binary_dp_values(v, 4)
    for M in (2, 3, 4):
        checked += 1
        if v_values[M - 1] > values[min(M, top) - 1] + TOL:
            fails.append(_fail(j, index=i, check="processing", M=M))
    # dilution is exact
    if beta > 0:
        target = beta * float(rng.uniform(0.01, 1.0))
        got = mutual_information(dilute_to_beta(j, target))
        checked += 1
        if abs(got - target) > 1e-12:
            fails.append(_fail(j, index=i, check="dilute", target=target, got=got))
    return checked, fails


# -- suites --------------------------------------------------------------------


def _indexed(name: str, fn, seed: int, count: int, workers=None) -> SuiteResult:
    return _collect(name, _map(partial(fn, seed), range(count), workers))


def suite_oracle(seed: int = 0, count: int = 500, workers=None) -> SuiteResult:
    return _indexed("oracle", _oracle_one, seed, count, workers)


def suite_sandwich(seed: int = 0, count: int = 500, workers=None) -> SuiteResult:
    return _indexed("sandwich", _sandwich_one, seed, count, workers)


def suite_thm3(seed: int = 0, count: int = 500, workers=None) -> SuiteResult:
    res = _indexed("thm3", _thm3_one, seed, count, workers)
    for b in BEC_BETAS:
        c, f = _geometric_check(bec_instance(b), f"bec({b:g})")
        res.checked += c
        res.failures.extend(f)
    return res


def suite_thm7(seed: int = 0, count: int = 200, workers=None) -> SuiteResult:
    return _indexed("thm7", _thm7_one, seed, count, workers)


def suite_gap(seed: int = 0, count: int = 200, workers=None) -> SuiteResult:
    return _indexed("gap", _gap_one, seed, count, workers)


def suite_ddpi(seed: int = 0, count: int = 200, workers=None) -> SuiteResult:
    return _indexed("ddpi", _ddpi_one, seed, count, workers)


def _hard_values(beta: float):
    j = bms_hard_instance(BmsHardSpec.for_beta(beta))
    return j, binary_dp_values(j, 16)


def suite_thm4(seed: int = 0, count: int = 0, workers=None, betas=HARD_BETAS) -> SuiteResult:
    """Hard BMS family: no M-level quantizer beats the closed-form cap, and M = 2 comes close."""
    res = SuiteResult("thm4")
    computed = _map(_hard_values, betas, workers)
    for beta, (j, values) in zip(betas, computed):
        for M in (2, 4, 8, 16):
            cap = bounds.hard_family_upper(M, beta)
            res.checked += 1
            res.details[f"beta={beta:g},M={M}"] = [float(values[M - 1]), cap]
            if values[M - 1] > cap + TOL:
                res.failures.append(_fail(j, beta=beta, M=M, value=values[M - 1], cap=cap))
        if beta == min(betas):
            ratio = float(bounds.hard_family_upper(2, beta) / values[1])
            res.checked += 1
            res.details["ratio_M2"] = ratio
            if not ratio <= 4.0:
                res.failures.append(_fail(j, beta=beta, check="near_tight", ratio=ratio))
    return res


def suite_thm8(seed: int = 0, count: int = 0, workers=None, betas=(1e-3, 1e-4)) -> SuiteResult:
    res = SuiteResult("thm8")
    for beta in betas:
        j = bms_hard_instance(BmsHardSpec.for_beta(beta))
        q, _ = geometric_quantizer(j, 0.5)
        ent = quantizer_entropy(j, q)
        cap = bounds.entropy_coding_bound(0.5, beta)
        res.checked += 1
        res.details[f"beta={beta:g}"] = [ent, cap]
        if ent > cap + TOL:
            res.failures.append(_fail(j, beta=beta, entropy=ent, cap=cap))
    return res


def kl_specs(count: int = 20) -> list[KlPairSpec]:
    """A fixed grid of pair specs with T <= 12 so every pair is enumerable."""
    specs = []
    for T in (3, 5, 7, 9, 10, 11, 12):
        for k in (1, 2, 4):
            for alpha in (0.25, 1.0):
                if k < T:
                    specs.append(KlPairSpec(k, T, alpha))
    return specs[:count]


def suite_klpair(seed: int = 0, count: int = 20, workers=None) -> SuiteResult:
    res = SuiteResult("klpair")
    for spec in kl_specs(count):
        p, q, closed = kl_pair_instance(spec)
        numeric = kl_divergence(p, q)
        res.checked += 1
        if abs(numeric - closed) > TOL:
            res.failures.append(_fail(None, spec=vars(spec), numeric=numeric, closed=closed))
        for M in (2, 3):
            _, psi = brute_force_divergence_quantizer(p, q, M)
            cap = M * spec.psi_bound_factor
            res.checked += 1
            if psi > cap + TOL:
                res.failures.append(_fail(None, spec=vars(spec), M=M, psi=psi, cap=cap))
    return res


def suite_bec(seed: int = 0, count: int = 0, workers=None, beta: float = 1e-3) -> SuiteResult:
    """Erasure channel at small capacity: the best bit keeps half, the symmetric MAP bit almost nothing."""
    res = SuiteResult("bec")
    j = bec_instance(beta)
    opt = optimal_binary_quantizer(j, 2).value / beta
    rmap = randomized_map_mi(j) / beta
    dmap = quantized_mi(j, map_quantizer(j)) / beta
    res.details = {"optimal_fraction": opt, "map_fraction": rmap, "map_deterministic_fraction": dmap}
    res.checked = 2
    if not 0.4999 <= opt <= 0.5010:
        res.failures.append(_fail(j, check="optimal_fraction", value=opt))
    if not rmap <= 1e-3:
        res.failures.append(_fail(j, check="map_fraction", value=rmap))
    return res


def mod4_grid(points: int = 21) -> np.ndarray:
    return np.linspace(0.0, 1.0, points)


def suite_mod4(seed: int = 0, count: int = 21, workers=None) -> SuiteResult:
    res = SuiteResult("mod4")
    for delta in mod4_grid(count or 21):
        delta = float(delta)
        j = mod4_instance(delta)
        two = brute_force_quantizer(j, 2).value
        four = brute_force_quantizer(j, 4).value
        res.checked += 2
        if abs(two - mod4_two_level(delta)) > TOL:
            res.failures.append(_fail(j, delta=delta, check="closed_form", value=two))
        if abs(four - mod4_information(delta)) > TOL:
            res.failures.append(_fail(j, delta=delta, check="full", value=four))
        special = abs(delta - 0.25) < 1e-12 or abs(delta - 1.0) < 1e-12
        if not special:
            res.checked += 1
            if not 2.0 * two < four:
                res.failures.append(_fail(j, delta=delta, check="superadditive", two=two, four=four))
    return res


SUITES = {
    "oracle": suite_oracle,
    "sandwich": suite_sandwich,
    "thm3": suite_thm3,
    "thm4": suite_thm4,
    "thm7": suite_thm7,
    "thm8": suite_thm8,
    "klpair": suite_klpair,
    "ddpi": suite_ddpi,
    "bec": suite_bec,
    "mod4": suite_mod4,
    "gap": suite_gap,
}
