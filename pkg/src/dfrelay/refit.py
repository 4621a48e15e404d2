"""Exact power refits once pairing and modes are fixed."""
from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from .channel import GainSet
from .model import PairPowers, PowerBudget, Scheme, check_permutation
from .rates import allocation_rate, equivalent_gain, split_fractions
from .waterfill import waterfill


def refit_sum(gains: GainSet, scheme: Scheme, pairing, modes, total: float) -> PairPowers:
    """Water-fill ``total`` over the channels a (pairing, modes) configuration exposes.

    A relaying pair is one channel with its equivalent gain; an idle pair is the SD channel of
    its listening subcarrier plus, for enhanced DF, the SD channel of its relaying subcarrier.
    """
    scheme = Scheme.parse(scheme)
    pairing = check_permutation(pairing)
    modes = np.asarray(modes, dtype=bool)
    n = gains.n
    lams = np.zeros(2 * n)
    for m in range(n):
        k = int(pairing[m])
        if modes[m]:
            lams[m] = equivalent_gain(gains, m, k, True)
        else:
            lams[m] = gains.lam_sd[m]
            if scheme.enhanced:
                lams[n + m] = gains.lam_sd[k]
    s = waterfill(lams, total)
    p_s1 = np.zeros(n)
    p_r = np.zeros(n)
    p_s2 = s[n:].copy()
    for m in range(n):
        if modes[m]:
            eta_s, eta_r = split_fractions(gains, m, int(pairing[m]))
            p_s1[m] = eta_s * s[m]
            p_r[m] = eta_r * s[m]
        else:
            p_s1[m] = s[m]
    return PairPowers(p_s1, p_r, p_s2)


def _level(lam, price):
    # [1/(2 price) - 1/lam]^+ with zero gain or infinite price giving zero
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 0.5 / price - 1.0 / lam
    return np.where((lam > 0) & np.isfinite(out), np.maximum(out, 0.0), 0.0)


def refit_individual(gains: GainSet, pairing, modes, budget: PowerBudget) -> PairPowers:
    """Best powers for fixed (pairing, modes) under separate source and relay budgets.

    Solves the two-multiplier dual by nested bracketing root finds: the inner one prices source
    power so the source budget is met for a given relay price; the outer one prices relay power.
    """
    pairing = check_permutation(pairing)
    modes = np.asarray(modes, dtype=bool)
    n = gains.n
    P_S, P_R = float(budget.source), float(budget.relay)

    rel = np.nonzero(modes)[0]
    lam_bar = np.array([equivalent_gain(gains, m, int(pairing[m]), True) for m in rel])
    etas = np.array([split_fractions(gains, m, int(pairing[m])) for m in rel]).reshape(-1, 2)
    eta_s, eta_r = etas[:, 0], etas[:, 1]
    idle = np.nonzero(~modes)[0]
    lam_idle = np.concatenate([gains.lam_sd[idle], gains.lam_sd[pairing[idle]]])

    use_rel = (lam_bar > 0) & (eta_s > 0)
    if P_R == 0:
        use_rel[:] = False
    use_idle = lam_idle > 0

    def powers(mu_s, mu_r):
        price = mu_s * eta_s + mu_r * eta_r
        p1 = np.where(use_rel, _level(lam_bar, np.where(use_rel, price, 1.0)), 0.0)
        pi = np.where(use_idle, _level(lam_idle, mu_s if mu_s > 0 else np.inf), 0.0)
        return p1, pi

    def src(mu_s, mu_r):
        p1, pi = powers(mu_s, mu_r)
        return float(np.dot(eta_s, p1) + pi.sum())

    def mu_s_for(mu_r):
        if P_S == 0 or not (use_idle.any() or use_rel.any()):
            return np.inf
        ratios = []
        if use_idle.any():
            ratios.append(lam_idle[use_idle] / 2.0)
        if use_rel.any():
            ratios.append(lam_bar[use_rel] / (2.0 * eta_s[use_rel]))
        hi = float(np.concatenate(ratios).max()) * 2.0
        if use_idle.any():
            lo = 0.5 * float(np.max(0.5 / (P_S + 1.0 / lam_idle[use_idle])))
        elif mu_r == 0:
            lo = 0.5 * float(np.max(0.5 / (P_S + eta_s[use_rel] / lam_bar[use_rel])))
        else:
            if src(0.0, mu_r) <= P_S:
                return 0.0
            lo = 0.0
        return brentq(lambda mu: src(mu, mu_r) - P_S, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)

    def relay_used(mu_r):
        mu_s = mu_s_for(mu_r)
        p1, _ = powers(mu_s, mu_r)
        return float(np.dot(eta_r, p1)), mu_s

    mu_r = 0.0
    if use_rel.any():
        used0, _ = relay_used(0.0)
        if used0 > P_R:
            hi_r = float((lam_bar[use_rel] / (2.0 * eta_r[use_rel])).max()) * 2.0
            mu_r = brentq(lambda mu: relay_used(mu)[0] - P_R, 0.0, hi_r, xtol=1e-300, rtol=1e-15, maxiter=500)
    mu_s = mu_s_for(mu_r)
    p1, pi = powers(mu_s, mu_r) if np.isfinite(mu_s) else (np.zeros(len(rel)), np.zeros(len(lam_idle)))

    # scale into the feasible region; keeps every relaying pair balanced
    s_used = float(np.dot(eta_s, p1) + pi.sum())
    r_used = float(np.dot(eta_r, p1))
    scale = 1.0
    if s_used > P_S:
        scale = min(scale, P_S / s_used)
    if r_used > P_R:
        scale = min(scale, P_R / r_used)
    p1 = p1 * scale
    pi = pi * scale

    p_s1 = np.zeros(n)
    p_r = np.zeros(n)
    p_s2 = np.zeros(n)
    p_s1[rel] = eta_s * p1
    p_r[rel] = eta_r * p1
    p_s1[idle] = pi[: len(idle)]
    p_s2[idle] = pi[len(idle):]
    return PairPowers(p_s1, p_r, p_s2)


def refit(gains: GainSet, scheme: Scheme, pairing, modes, budget: PowerBudget) -> tuple[PairPowers, float]:
    scheme = Scheme.parse(scheme)
    if scheme is Scheme.ENHANCED_INDIVIDUAL:
        pw = refit_individual(gains, pairing, modes, budget)
    else:
        pw = refit_sum(gains, scheme, pairing, modes, budget.total)
    return pw, allocation_rate(gains, scheme, pairing, modes, pw)
