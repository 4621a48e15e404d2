import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfrelay import GainSet, PowerBudget, recompute_rate, solve_selective_sum
from dfrelay.baselines import BASELINES, opa_no_sp, sorted_pairing, upa_no_sp, upa_sorted_sp

from conftest import rayleigh_gains


def test_sorted_pairing_swaps():
    g = GainSet.from_lists([0.1, 0.1], [3.0, 1.0], [1.0, 3.0])
    assert sorted_pairing(g).tolist() == [1, 0]


def test_sorted_pairing_ties_identity():
    g = GainSet.from_lists([1.0] * 4, [2.0] * 4, [2.0] * 4)
    assert sorted_pairing(g).tolist() == [0, 1, 2, 3]


def test_identical_gains_all_agree():
    g = GainSet.from_lists([1.0] * 3, [4.0] * 3, [4.0] * 3)
    b = PowerBudget(total=9.0)
    ref = solve_selective_sum(g, b).sum_rate
    for fn in (upa_no_sp, opa_no_sp, upa_sorted_sp):
        assert fn(g, b).sum_rate == pytest.approx(ref, rel=1e-12)


def test_single_subcarrier_is_waterfilling():
    g = GainSet.from_lists([1.0], [0.5], [2.0])
    assert upa_no_sp(g, PowerBudget(total=3.0)).sum_rate == pytest.approx(1.0)


def test_zero_equivalent_gain_gets_no_power():
    g = GainSet.from_lists([0.0, 1.0], [0.0, 0.5], [0.0, 2.0])
    a = opa_no_sp(g, PowerBudget(total=4.0))
    assert a.powers.p_s1[0] == 0 and a.powers.p_r[0] == 0
    assert a.powers.total() == pytest.approx(4.0)


@settings(max_examples=60)
@given(g=rayleigh_gains(n_max=8), snr=st.floats(-5, 25))
def test_ordering_chain(g, snr):
    b = PowerBudget(total=10 ** (snr / 10) * g.n)
    upa, opa = upa_no_sp(g, b), opa_no_sp(g, b)
    sel = solve_selective_sum(g, b).sum_rate
    assert upa.sum_rate <= opa.sum_rate + 1e-9
    assert opa.sum_rate <= sel + 1e-9
    assert upa_sorted_sp(g, b).sum_rate <= sel + 1e-9
    for fn in BASELINES.values():
        a = fn(g, b)
        recompute_rate(a, g)
        assert a.powers.total() <= b.total * (1 + 1e-9) + 1e-12
        assert sorted(a.pairing.tolist()) == list(range(g.n))
