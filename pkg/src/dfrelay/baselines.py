"""Comparison schemes: uniform or water-filled power, with or without sorted pairing."""
from __future__ import annotations

import numpy as np

from .channel import GainSet
from .model import Allocation, PairPowers, PowerBudget, Scheme
from .rates import allocation_rate, split_pair_power, useful_matrix
from .refit import refit_sum


def _modes(gains: GainSet, pairing: np.ndarray) -> np.ndarray:
    return useful_matrix(gains)[np.arange(gains.n), pairing]


def _uniform(gains: GainSet, budget: PowerBudget, pairing: np.ndarray) -> Allocation:
    n = gains.n
    modes = _modes(gains, pairing)
    share = budget.total / n
    p_s1 = np.zeros(n)
    p_r = np.zeros(n)
    for m in range(n):
        p_s1[m], p_r[m] = split_pair_power(gains, m, int(pairing[m]), share, bool(modes[m]))
    pw = PairPowers(p_s1, p_r, np.zeros(n))
    return _wrap(gains, pairing, modes, pw)


def _wrap(gains, pairing, modes, pw) -> Allocation:
    rate = allocation_rate(gains, Scheme.SELECTIVE_SUM, pairing, modes, pw)
    return Allocation(Scheme.SELECTIVE_SUM, pairing, modes, pw, rate, rate, 0.0, 0, True, {})


def upa_no_sp(gains: GainSet, budget: PowerBudget) -> Allocation:
    """Subcarrier m relays on subcarrier m; every pair gets P_t / N."""
    return _uniform(gains, budget, np.arange(gains.n))


def opa_no_sp(gains: GainSet, budget: PowerBudget) -> Allocation:
    """Subcarrier m relays on subcarrier m; water-filling over the pair equivalent gains."""
    pairing = np.arange(gains.n)
    modes = _modes(gains, pairing)
    pw = refit_sum(gains, Scheme.SELECTIVE_SUM, pairing, modes, budget.total)
    return _wrap(gains, pairing, modes, pw)


def sorted_pairing(gains: GainSet) -> np.ndarray:
    """Rank-match SR subcarriers (descending lam_SR) with RD subcarriers (descending lam_RD)."""
    sr_order = np.argsort(-gains.lam_sr, kind="stable")
    rd_order = np.argsort(-gains.lam_rd, kind="stable")
    pairing = np.empty(gains.n, dtype=np.int64)
    pairing[sr_order] = rd_order
    return pairing


def upa_sorted_sp(gains: GainSet, budget: PowerBudget) -> Allocation:
    return _uniform(gains, budget, sorted_pairing(gains))


BASELINES = {"upa_no_sp": upa_no_sp, "opa_no_sp": opa_no_sp, "upa_sp": upa_sorted_sp}
