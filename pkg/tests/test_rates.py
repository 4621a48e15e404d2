import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfrelay import (Allocation, ContractError, GainSet, IntegrityError, PairPowers, ParameterError, Scheme,
                     equivalent_gain, pair_rate, recompute_rate, relay_useful, split_pair_power)
from dfrelay.rates import allocation_rate, min_form_rates

from conftest import gain_sets


def one(sd, sr, rd):
    return GainSet.from_lists([sd], [sr], [rd])


@pytest.mark.parametrize("sd,sr,rd,expected", [(1, 2, 2, True), (1, 2, 0.5, False), (1, 1, 1, False)])
def test_relay_useful(sd, sr, rd, expected):
    assert relay_useful(one(sd, sr, rd), 0, 0) is expected


def test_equivalent_gain_examples():
    assert equivalent_gain(one(1, 2, 2), 0, 0, True) == pytest.approx(4 / 3)
    assert equivalent_gain(one(3, 0, 0), 0, 0, False) == 3.0
    assert equivalent_gain(one(0, 2, 3), 0, 0, True) == pytest.approx(6 / 5)


@pytest.mark.parametrize("sd,sr,rd", [(2, 1, 5), (1, 1, 1), (0, 0, 0)])
def test_equivalent_gain_contract(sd, sr, rd):
    with pytest.raises(ContractError):
        equivalent_gain(one(sd, sr, rd), 0, 0, True)


def test_split_pair_power_examples():
    g = one(1, 2, 2)
    ps, pr = split_pair_power(g, 0, 0, 3.0, True)
    assert (ps, pr) == pytest.approx((2.0, 1.0))
    assert 1 + ps * 2 == pytest.approx(1 + ps * 1 + pr * 2) == pytest.approx(5.0)
    assert split_pair_power(g, 0, 0, 0.0, True) == (0.0, 0.0)
    assert split_pair_power(g, 0, 0, 5.0, False) == (5.0, 0.0)
    with pytest.raises(ParameterError):
        split_pair_power(g, 0, 0, -1.0, False)


def test_pair_rate_examples():
    assert pair_rate(one(3, 0, 0), 0, 0, 1.0, 0, 0, False, Scheme.SELECTIVE_SUM) == pytest.approx(1.0)
    assert pair_rate(one(1, 2, 2), 0, 0, 0.0, 0.0, 0, True, Scheme.SELECTIVE_SUM) == 0.0
    g = GainSet.from_lists([1.0, 1.0], [0, 0], [0, 0])
    assert pair_rate(g, 0, 1, 1.0, 0.0, 1.0, False, Scheme.ENHANCED_SUM) == pytest.approx(1.0)
    # selective ignores any second-slot source power
    assert pair_rate(g, 0, 1, 1.0, 0.0, 1.0, False, Scheme.SELECTIVE_SUM) == pytest.approx(0.5)


def test_recompute_rate_hand_built():
    g = one(2.0, 0.0, 0.0)
    pw = PairPowers(np.array([3.0]), np.zeros(1), np.zeros(1))
    rate = 0.5 * math.log2(1 + 6.0)
    a = Allocation(Scheme.SELECTIVE_SUM, np.array([0]), np.array([False]), pw, rate, rate, 0.0, 0)
    assert recompute_rate(a, g) == pytest.approx(rate)
    z = Allocation(Scheme.SELECTIVE_SUM, np.array([0]), np.array([False]), PairPowers.zeros(1), 0.0, 0.0, 0.0, 0)
    assert recompute_rate(z, g) == 0.0


def test_recompute_rate_detects_tampering():
    g = one(2.0, 0.0, 0.0)
    pw = PairPowers(np.array([3.0]), np.zeros(1), np.zeros(1))
    a = Allocation(Scheme.SELECTIVE_SUM, np.array([0]), np.array([False]), pw, 1.0, 1.0, 0.0, 0)
    with pytest.raises(IntegrityError):
        recompute_rate(a, g)


def test_allocation_rate_rejects_non_permutation():
    g = GainSet.from_lists([1, 1], [1, 1], [1, 1])
    with pytest.raises(ParameterError):
        allocation_rate(g, Scheme.SELECTIVE_SUM, [0, 0], [False, False], PairPowers.zeros(2))


@settings(max_examples=100)
@given(g=gain_sets(), frac=st.floats(0.0, 50.0))
def test_balanced_split_min_form_equals_unified(g, frac):
    """At the balance point the min form and the equivalent-gain form agree."""
    n = g.n
    pairing = np.arange(n)
    modes = np.array([g.lam_sr[m] > g.lam_sd[m] and g.lam_sr[m] + g.lam_rd[m] - g.lam_sd[m] > 0 for m in range(n)])
    p_s1, p_r = np.zeros(n), np.zeros(n)
    for m in range(n):
        p_s1[m], p_r[m] = split_pair_power(g, m, m, frac, bool(modes[m]))
        if modes[m]:
            lhs = 1 + p_s1[m] * g.lam_sr[m]
            rhs = 1 + p_s1[m] * g.lam_sd[m] + p_r[m] * g.lam_rd[m]
            assert lhs == pytest.approx(rhs, rel=1e-9)
    pw = PairPowers(p_s1, p_r, np.zeros(n))
    mf = min_form_rates(g, Scheme.SELECTIVE_SUM, pairing, modes, pw)
    uni = [pair_rate(g, m, m, p_s1[m], p_r[m], 0.0, bool(modes[m]), Scheme.SELECTIVE_SUM) for m in range(n)]
    assert np.allclose(mf, uni, rtol=1e-9, atol=1e-12)
