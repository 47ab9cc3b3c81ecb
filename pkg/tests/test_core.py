import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import rel_entr
from scipy.stats import entropy as sp_entropy

from conftest import brute_mi
from idq.core import (
    AbsoluteContinuityError,
    JointDistribution,
    Pmf,
    Quantizer,
    apply_quantizer,
    binary_entropy,
    conditional_entropy,
    entropy,
    inv_binary_entropy,
    kl_divergence,
    log_loss_distortion,
    mutual_information,
    output_pmf,
    posterior,
    quantized_mi,
)
from idq.instances import random_instance


def test_entropy_matches_scipy():
    rng = np.random.default_rng(1)
    for _ in range(20):
        p = rng.dirichlet(np.ones(7))
        assert entropy(p) == pytest.approx(sp_entropy(p, base=2), abs=1e-12)


def test_entropy_simple_values():
    assert entropy([1.0]) == 0.0
    assert entropy([0.5, 0.5]) == pytest.approx(1.0)
    assert entropy([0.25] * 4) == pytest.approx(2.0)
    assert entropy([0.5, 0.5, 0.0]) == pytest.approx(1.0)


def test_binary_entropy():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(1.0)
    assert binary_entropy(0.11) == pytest.approx(sp_entropy([0.11, 0.89], base=2))
    with pytest.raises(ValueError):
        binary_entropy(1.2)


@given(st.floats(0.0, 0.5))
def test_inverse_binary_entropy_round_trip(t):
    assert inv_binary_entropy(binary_entropy(t)) == pytest.approx(t, abs=1e-10)


def test_inverse_binary_entropy_endpoints():
    assert inv_binary_entropy(0.0) == 0.0
    assert inv_binary_entropy(1.0) == 0.5
    with pytest.raises(ValueError):
        inv_binary_entropy(-0.1)


def test_kl_matches_scipy():
    rng = np.random.default_rng(2)
    for _ in range(20):
        p, q = rng.dirichlet(np.ones(5), size=2)
        assert kl_divergence(p, q) == pytest.approx(rel_entr(p, q).sum() / math.log(2), abs=1e-12)


def test_kl_edge_cases():
    assert kl_divergence([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert kl_divergence([0.0, 1.0], [0.5, 0.5]) == pytest.approx(1.0)
    with pytest.raises(AbsoluteContinuityError):
        kl_divergence([0.5, 0.5], [1.0, 0.0])


def test_pmf_validation():
    with pytest.raises(ValueError):
        Pmf([0.5, 0.6])
    with pytest.raises(ValueError):
        Pmf([1.5, -0.5])
    with pytest.raises(ValueError):
        Pmf([])
    assert len(Pmf([0.2, 0.8])) == 2


def test_joint_validation():
    with pytest.raises(ValueError):
        JointDistribution([1.0], [[1.0]])
    with pytest.raises(ValueError):
        JointDistribution([0.5, 0.5], [[0.5, 0.6], [0.5, 0.5]])
    with pytest.raises(ValueError):
        JointDistribution([0.5, 0.5], [[1.0, 0.0]])


def test_mutual_information_against_entropy_identity():
    for seed in range(30):
        j = random_instance(2 + seed % 3, 2 + seed % 6, seed)
        assert mutual_information(j) == pytest.approx(brute_mi(j.joint), abs=1e-12)


def test_mutual_information_examples():
    # noiseless uniform bit
    assert mutual_information(JointDistribution([0.5, 0.5], np.eye(2))) == pytest.approx(1.0)
    # independent
    assert mutual_information(JointDistribution([0.3, 0.7], [[0.2, 0.8], [0.2, 0.8]])) == pytest.approx(0.0, abs=1e-15)


def test_from_joint_round_trip(pinned):
    back = JointDistribution.from_joint(pinned.joint)
    np.testing.assert_allclose(back.channel, pinned.channel, atol=1e-15)


def test_posterior_mixes_back_to_prior():
    for seed in range(10):
        j = random_instance(3, 6, seed)
        post = posterior(j)
        np.testing.assert_allclose(post.py @ post.alpha, j.px, atol=1e-10)


def test_zero_mass_output_symbol():
    j = JointDistribution([0.5, 0.5], [[0.5, 0.5, 0.0], [0.2, 0.8, 0.0]])
    post = posterior(j)
    assert not post.support[2]
    np.testing.assert_allclose(post.alpha[2], j.px)
    q = Quantizer([0, 1, 0], 2)
    assert quantized_mi(j, q) == pytest.approx(quantized_mi(j, Quantizer([0, 1, 1], 2)))


def test_quantizer_validation_and_compact():
    with pytest.raises(ValueError):
        Quantizer([0, 2], 2)
    q = Quantizer([3, 3, 1, 0], 5).compact()
    assert q.labels.tolist() == [0, 0, 1, 2]
    assert q.num_levels == 3
    assert Quantizer([0, 0, 4], 5).occupied == 2


def test_apply_and_quantized_mi_agree(pinned):
    q = Quantizer([0, 1, 2, 0, 1, 2, 0, 1], 4)
    assert mutual_information(apply_quantizer(pinned, q)) == pytest.approx(quantized_mi(pinned, q), abs=1e-12)


def test_composition_matches_applying_twice(pinned):
    inner = Quantizer([0, 1, 2, 3, 0, 1, 2, 3], 4)
    outer = Quantizer([1, 0, 0, 1], 2)
    direct = quantized_mi(pinned, inner.then(outer))
    twice = quantized_mi(apply_quantizer(pinned, inner), outer)
    assert direct == pytest.approx(twice, abs=1e-12)
    assert inner.then(outer).labels.tolist() == [1, 0, 0, 1, 1, 0, 0, 1]
    with pytest.raises(ValueError):
        inner.then(Quantizer([0, 1], 2))


def test_log_loss_identity():
    for seed in range(20):
        j = random_instance(2 + seed % 4, 6, seed)
        q = Quantizer(np.arange(6) % 3, 3)
        assert log_loss_distortion(j, q) + quantized_mi(j, q) == pytest.approx(entropy(j.px), abs=1e-12)
    j = random_instance(3, 5, 0)
    assert conditional_entropy(j) == pytest.approx(entropy(j.px) - mutual_information(j), abs=1e-12)


def test_output_pmf(pinned):
    q = Quantizer([0] * 4 + [1] * 4, 3)
    out = output_pmf(pinned, q)
    assert out.sum() == pytest.approx(1.0, abs=1e-12)
    assert out[2] == 0.0


def test_length_mismatch():
    j = random_instance(2, 4, 0)
    with pytest.raises(ValueError):
        quantized_mi(j, Quantizer([0, 1], 2))


joints = st.tuples(st.integers(2, 4), st.integers(1, 7), st.integers(0, 10_000)).map(
    lambda t: random_instance(t[0], t[1], t[2], 0.5)
)


@settings(max_examples=60, deadline=None)
@given(joints, st.data())
def test_data_processing(j, data):
    labels = data.draw(st.lists(st.integers(0, 3), min_size=j.N, max_size=j.N))
    q = Quantizer(labels, 4)
    assert quantized_mi(j, q) <= mutual_information(j) + 1e-12
    assert quantized_mi(j, q) <= math.log2(4) + 1e-12
    assert output_pmf(j, q).sum() == pytest.approx(1.0, abs=1e-10)
