import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import gamma

from idq import bounds as B
from idq.core import binary_entropy as h
from idq.core import inv_binary_entropy


def nu_oracle(K):
    d = K - 1
    return (math.pi * K * d / (2 * (math.sqrt(1 + 1 / (2 * d)) - 1) ** 2)
            * (2 * K / gamma(1 + d / 2)) ** (2 / d))


def test_f_lower_values():
    assert B.f_lower(0) == 0
    assert B.f_lower(104) == 0.5
    assert B.f_lower(208) == pytest.approx(0.75)
    assert B.f_lower(104 - 1e-9) == pytest.approx(0.5, abs=1e-10)
    with pytest.raises(ValueError):
        B.f_lower(-1)


@given(st.floats(0, 1e4), st.floats(0, 1e4))
def test_f_lower_nondecreasing(a, b):
    lo, hi = sorted((a, b))
    assert B.f_lower(lo) <= B.f_lower(hi) + 1e-15
    assert 0 <= B.f_lower(hi) < 1


def test_f_upper_values():
    assert B.f_upper(0) == 0
    assert B.f_upper(0.1) == pytest.approx(0.3)
    assert B.f_upper(1 / 3) == pytest.approx(1.0)
    assert B.f_upper(5) == 1


def test_id2_examples():
    rep = B.id2_bounds(105, 1.0)
    entries = {e.name: e.value for e in rep.entries}
    assert entries["sandwich_lower"] == 0.5
    assert entries["sandwich_upper"] == 1.0
    assert B.id2_bounds(1, 0.3).best("lower") == 0.0
    beta = 2.0**-10
    entries = {e.name: e.value for e in B.id2_bounds(11, beta).entries}
    assert entries["sandwich_lower"] == pytest.approx(beta / 208)
    assert entries["sandwich_upper"] == pytest.approx(beta)


@given(st.integers(1, 500), st.floats(1e-8, 1.0))
def test_id2_sandwich_consistent(M, beta):
    rep = B.id2_bounds(M, beta)
    assert rep.consistent()
    for e in rep.entries:
        if e.name.startswith("sandwich"):
            assert 0 <= e.value <= beta + 1e-15


def test_idk_example():
    beta = 1e-3
    value, k = B.idK_lower(10**4, 3, beta)
    a1 = 0.5 * (1 - 52 * math.log2(4 / beta) / 1e4)
    assert k == 1
    assert value == pytest.approx(beta * a1)


def test_idk_small_m_is_zero():
    assert B.idK_lower(1, 4, 0.5) == (0.0, 0)


@given(st.integers(1, 10**6), st.integers(3, 6), st.floats(1e-6, 1.0))
def test_idk_below_binary_upper(M, K, beta):
    value, k = B.idK_lower(M, K, beta)
    assert 0 <= value <= beta * B.f_upper(B.sandwich_argument(M, beta)) + 1e-15
    assert 0 <= k <= K - 1


def test_idk_last_index_clamped():
    # x >= 1 would make (1 - x^(2/3))^2 positive again; it must read as 0
    value, _ = B.idK_lower(2, 3, 1e-3)
    assert value == pytest.approx(1e-3 * min(1 / (208 * math.log2(4 / 1e-3)), 0.5) / 2)


def test_nu_against_gamma():
    for K in range(2, 40):
        assert B.nu(K) == pytest.approx(nu_oracle(K), rel=1e-12)
    assert 1000 < B.nu(2) <= 1268


def test_nu_large_k_order():
    ratio = B.nu(50) / (16 * math.pi * math.e * 50**3)
    assert 0.25 < ratio < 4


def test_degrading_cost():
    kt, improved = B.degrading_cost_bounds(2, 4)
    assert kt == pytest.approx(B.nu(2) / 16)
    assert improved == pytest.approx(1268 / 16)
    kt, improved = B.degrading_cost_bounds(3, 16)
    assert improved == pytest.approx(158.5)
    _, improved = B.degrading_cost_bounds(3, 10)
    assert improved is None
    _, improved = B.degrading_cost_bounds(2, 3)
    assert improved is None
    kt, improved = B.degrading_cost_bounds(2, 10)
    assert improved == pytest.approx(12.68)
    assert B.degrading_cost_bounds(2, 10**6)[0] < 1e-8


def test_map_lower_bound():
    assert B.map_lower_bound(1.0) == pytest.approx(1.0)
    assert B.map_lower_bound(0.8) == pytest.approx(1 - h(0.1))
    left = 0.6 + 0.4 - h(0.2)
    assert B.map_lower_bound(0.6) == pytest.approx(left)
    assert B.map_lower_bound(0.6 - 1e-12) == pytest.approx(left, abs=1e-9)


def test_high_snr():
    assert B.high_snr_bounds(1.0) == pytest.approx((1.0, 1.0))
    lo, up = B.high_snr_bounds(0.6)
    assert lo == pytest.approx(1 - h(0.2))
    assert up == pytest.approx(1 - 0.7 * h(2 / 7))
    for beta in np.linspace(0.6, 1.0, 41):
        lo, up = B.high_snr_bounds(float(beta))
        assert lo <= up + 1e-15
    with pytest.raises(ValueError):
        B.high_snr_bounds(0.5)


def test_sdpi():
    tight, relaxed = B.sdpi_bound(4, 2, 1.0)
    assert tight == pytest.approx((1 - 2 * inv_binary_entropy(0.75)) ** 2)
    assert B.sdpi_bound(4, 1, 1.0) == (0.0, 0.0)
    for n in (2, 5, 20, 200):
        for beta in (0.01, 0.5, 1.0):
            if beta < n:
                tight, relaxed = B.sdpi_bound(n, 8, beta)
                assert tight <= relaxed + 1e-12
    assert B.sdpi_bound(10**6, 4, 1.0)[1] < 1e-5
    with pytest.raises(ValueError):
        B.sdpi_bound(1, 2, 1.0)


def test_level_budgets():
    assert B.level_budgets(0.5, 2.0**-10).Mbar2 == 1040
    assert B.level_budgets(0.0, 2.0**-10).Mbar2 == 520
    assert B.level_budgets(0.5, 0.5).Mbar2 == 104
    lb = B.level_budgets(0.2, 0.01, K=4, k=2)
    assert lb.Mtilde == math.floor((52 / (1 - 0.2 * 3 / 2) * math.log2(9 / 0.01)) ** 2)
    with pytest.raises(ValueError):
        B.level_budgets(0.5, 0.01, K=3, k=1)


@given(st.floats(0.0, 0.95), st.floats(0.0, 0.95), st.floats(1e-6, 0.9))
def test_level_budgets_monotone_in_eta(e1, e2, beta):
    lo, hi = sorted((e1, e2))
    assert B.level_budgets(lo, beta).Mbar2 <= B.level_budgets(hi, beta).Mbar2
    assert B.level_budgets(lo, beta, K=3).MbarK <= B.level_budgets(hi, beta, K=3).MbarK


def test_hard_family_upper():
    b = math.log2(math.e) / 2  # makes ln(e log e / (2 b)) = 1
    assert B.hard_family_upper(3, b) == pytest.approx(6 * b)
    assert B.hard_family_upper(2, 1e-4) == pytest.approx(4e-4 / math.log(math.e * math.log2(math.e) / 2e-4))
    # the (3/2) M beta / log(1/beta) shorthand only dominates very close to 1/2
    assert B.hard_family_upper(5, 0.49) <= B.hard_family_shorthand(5, 0.49)
    for beta in (0.45, 1e-1, 1e-3, 1e-6):
        assert B.hard_family_upper(5, beta) > B.hard_family_shorthand(5, beta)
    ratio = B.hard_family_upper(5, 1e-12) / B.hard_family_shorthand(5, 1e-12)
    assert ratio == pytest.approx(2 / math.log(2) / 1.5, rel=0.05)


def test_entropy_coding_bound():
    beta = 2.0**-256
    assert B.entropy_coding_bound(0.5, beta) == pytest.approx(15.0)
    assert B.entropy_coding_bound(0.9, 1e-3) > B.entropy_coding_bound(0.5, 1e-3)
    with pytest.raises(ValueError):
        B.entropy_coding_bound(0.5, 0.3)


def test_report_sources_are_labels():
    rep = B.idK_bounds(50, 4, 0.1)
    assert rep.consistent()
    assert all(e.source for e in rep.entries)
    assert rep.as_dict()["K"] == 4
