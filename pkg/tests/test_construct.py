import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idq.bounds import level_budgets
from idq.construct import (
    bit_joint,
    double_quantize,
    geometric_plan,
    geometric_quantizer,
    greedy_top_quantizer,
    map_quantizer,
    one_hot_quantizer,
    quantizer_entropy,
    randomized_map_mi,
    symbol_scores,
)
from idq.core import JointDistribution, binary_entropy as h, entropy, mutual_information, quantized_mi
from idq.exact import optimal_binary_quantizer
from idq.instances import bec_instance, map_vs_z_instance, random_instance


def test_symbol_scores_sum_to_information(pinned):
    assert symbol_scores(pinned).sum() == pytest.approx(mutual_information(pinned), abs=1e-12)


def test_greedy_simple_lower_bound():
    for seed in range(30):
        j = random_instance(2 + seed % 3, 8, seed)
        for M in (2, 3, 5):
            q = greedy_top_quantizer(j, M)
            assert q.num_levels == M
            assert quantized_mi(j, q) >= (M - 1) / j.N * mutual_information(j) - 1e-12


def test_greedy_identity_when_enough_levels(pinned):
    assert greedy_top_quantizer(pinned, 8).labels.tolist() == list(range(8))
    with pytest.raises(ValueError):
        greedy_top_quantizer(pinned, 0)


def test_map_on_bec():
    for beta in (0.1, 0.5, 0.9):
        j = bec_instance(beta)
        # fair-coin tie breaking gives the symmetric value
        assert randomized_map_mi(j) == pytest.approx(1 - h((1 - beta) / 2), abs=1e-12)
        # the deterministic rule sends the erasure to one side and is never worse
        assert quantized_mi(j, map_quantizer(j)) >= randomized_map_mi(j) - 1e-12


def test_map_small_beta_is_quadratic():
    beta = 0.01
    j = bec_instance(beta)
    assert randomized_map_mi(j) / beta < 0.01
    assert optimal_binary_quantizer(j, 2).value / beta == pytest.approx(0.5, abs=0.01)
    # second-order expansion (log e / 2) beta^2
    assert randomized_map_mi(j) == pytest.approx(math.log2(math.e) / 2 * beta**2, rel=0.01)


def test_map_without_ties_is_threshold():
    j = map_vs_z_instance(0.3, 0.2)
    assert map_quantizer(j).labels.tolist() == [0, 1, 0, 1]
    assert randomized_map_mi(j) == pytest.approx(quantized_mi(j, map_quantizer(j)), abs=1e-15)


def test_map_needs_binary():
    with pytest.raises(ValueError):
        map_quantizer(random_instance(3, 3, 0))


def test_geometric_plan_invariants():
    plan = geometric_plan(0.5, 1e-3, 0.3)
    kappa = max(-math.log2(0.3), -math.log2(0.7))
    assert plan.kappa == pytest.approx(kappa)
    assert plan.epsilon == 0.25
    assert plan.L == math.ceil(2 * math.log2(2 * kappa / (0.5 * 1e-3)) / 0.5)
    assert plan.gammas[0] == 0.0
    assert plan.gammas[1] == pytest.approx(0.25e-3)
    assert plan.theta == pytest.approx((plan.gammas[1] / kappa) ** (-1 / plan.L))
    assert plan.theta >= 1
    ratios = plan.gammas[2:] / plan.gammas[1:-1]
    np.testing.assert_allclose(ratios, plan.theta)
    # the last threshold sits one step below kappa
    assert plan.gammas[-1] * plan.theta == pytest.approx(kappa)
    assert plan.total_levels == 2 * plan.L + 1


def test_geometric_guarantee_bec():
    j = bec_instance(1e-3)
    q, plan = geometric_quantizer(j, 0.5)
    assert quantized_mi(j, q) >= 5e-4
    assert q.num_levels == plan.total_levels


def test_geometric_errors_and_degenerate():
    with pytest.raises(ValueError):
        geometric_quantizer(bec_instance(0.5), 1.0)
    j = JointDistribution([0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]])
    q, plan = geometric_quantizer(j, 0.5)
    assert q.num_levels == 1 and plan.L == 0


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000), st.integers(2, 12), st.sampled_from([0.1, 0.5, 0.9, 0.99]))
def test_geometric_guarantee_random(seed, N, eta):
    j = random_instance(2, N, seed, 0.5)
    beta = mutual_information(j)
    if beta <= 0 or not 0 < j.px[1] < 1:
        return
    q, plan = geometric_quantizer(j, eta)
    assert quantized_mi(j, q) >= eta * beta - 1e-12


def test_geometric_level_count_within_budget():
    # with a uniform input the construction stays inside the proven budget
    for beta in (0.5, 1e-1, 1e-2, 1e-4, 1e-8):
        for eta in (0.5, 0.9):
            _, plan = geometric_quantizer(bec_instance(beta), eta)
            assert plan.total_levels <= level_budgets(eta, beta).Mbar2


def test_bit_joint_decomposition():
    for seed in range(10):
        j = random_instance(4, 6, seed)
        total = 0.0
        for i in range(3):
            bj, p = bit_joint(j, i)
            assert p == pytest.approx(j.px[i:].sum())
            total += p * mutual_information(bj)
        assert total == pytest.approx(mutual_information(j), abs=1e-10)


def test_one_hot_plan_invariants():
    for seed in range(30):
        K = 3 + seed % 3
        j = random_instance(K, 7, seed)
        for eta, k in ((0.2, 1), (0.3, None)):
            q, plan = one_hot_quantizer(j, eta, k)
            assert plan.v.sum() == pytest.approx(1.0, abs=1e-10)
            t = np.arange(K)
            assert np.all(plan.F >= t / (K - 1) - 1e-12)
            assert plan.F[plan.k_bar] >= plan.eta_bar - 1e-12
            vk = plan.v[plan.perm[plan.k_bar - 1]]
            assert vk >= (1 - plan.eta_bar) / (K - 1) - 1e-12
            assert plan.eta_prime == pytest.approx(eta / plan.eta_bar)
            assert q.num_levels == plan.total_levels
            assert quantized_mi(j, q) >= eta * mutual_information(j) - 1e-12


def test_one_hot_errors():
    j = random_instance(3, 5, 0)
    with pytest.raises(ValueError):
        one_hot_quantizer(random_instance(2, 5, 0), 0.3)
    with pytest.raises(ValueError):
        one_hot_quantizer(j, 0.6, 1)
    with pytest.raises(ValueError):
        one_hot_quantizer(j, 0.2, 2)


def test_double_quantization_bound():
    for seed in range(20):
        j = random_instance(2, 9, seed)
        for M, k in ((6, 2), (6, 3), (8, 4)):
            q = double_quantize(j, M, k)
            assert q.num_levels == k
            got = quantized_mi(j, q)
            assert got >= (k - 1) / M * optimal_binary_quantizer(j, M).value - 1e-12
            assert got <= optimal_binary_quantizer(j, k).value + 1e-12
    with pytest.raises(ValueError):
        double_quantize(random_instance(2, 5, 0), 3, 4)


def test_quantizer_entropy(pinned):
    q = optimal_binary_quantizer(pinned, 4).quantizer
    ent = quantizer_entropy(pinned, q)
    assert quantized_mi(pinned, q) <= ent + 1e-12 <= 2 + 1e-12
    assert quantizer_entropy(pinned, greedy_top_quantizer(pinned, 8)) == pytest.approx(entropy(pinned.py))
