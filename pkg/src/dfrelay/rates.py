"""Per-pair rate algebra: relay usefulness, equivalent gains, power splits and rates.

All rates are in bits/s/Hz and carry the half-duplex factor 1/2 in every mode.
"""
from __future__ import annotations

import numpy as np

from .channel import GainSet
from .errors import ContractError, IntegrityError, ParameterError
from .model import Allocation, PairPowers, Scheme, check_permutation

RATE_RTOL = 1e-12


def relay_useful(gains: GainSet, m: int, n: int) -> bool:
    """Selective-DF mode rule: relaying pays off iff min(lam_SR^m, lam_RD^n) > lam_SD^m."""
    return bool(min(gains.lam_sr[m], gains.lam_rd[n]) > gains.lam_sd[m])


def relay_realizable(gains: GainSet, m: int, n: int) -> bool:
    """The balanced split has nonnegative relay power only when lam_SR^m > lam_SD^m."""
    return bool(gains.lam_sr[m] > gains.lam_sd[m])


def useful_matrix(gains: GainSet) -> np.ndarray:
    return np.minimum(gains.lam_sr[:, None], gains.lam_rd[None, :]) > gains.lam_sd[:, None]


def realizable_matrix(gains: GainSet) -> np.ndarray:
    return np.broadcast_to((gains.lam_sr > gains.lam_sd)[:, None], (gains.n, gains.n)).copy()


def relay_gain_matrix(gains: GainSet) -> np.ndarray:
    """lam_SR lam_RD / (lam_SR + lam_RD - lam_SD) for every (m, n); 0 where not realizable."""
    sr = gains.lam_sr[:, None]
    rd = gains.lam_rd[None, :]
    den = sr + rd - gains.lam_sd[:, None]
    ok = realizable_matrix(gains) & (den > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam1 = np.where(ok, sr * rd / np.where(ok, den, 1.0), 0.0)
    return lam1


def split_fractions(gains: GainSet, m: int, n: int) -> tuple[float, float]:
    """(source share, relay share) of a relaying pair's total power (the eta factors)."""
    sr, rd, sd = gains.lam_sr[m], gains.lam_rd[n], gains.lam_sd[m]
    den = sr + rd - sd
    if not (sr > sd and den > 0):
        raise ContractError(f"pair ({m}, {n}) cannot relay: lam_SR={sr} <= lam_SD={sd}")
    return rd / den, (sr - sd) / den


def equivalent_gain(gains: GainSet, m: int, n: int, relaying: bool) -> float:
    if not relaying:
        return float(gains.lam_sd[m])
    sr, rd, sd = gains.lam_sr[m], gains.lam_rd[n], gains.lam_sd[m]
    den = sr + rd - sd
    if not (sr > sd and den > 0):
        raise ContractError(f"pair ({m}, {n}) cannot relay: lam_SR={sr} <= lam_SD={sd}")
    return float(sr * rd / den)


def split_pair_power(gains: GainSet, m: int, n: int, power: float, relaying: bool) -> tuple[float, float]:
    """Split a pair's total power into (source, relay) so both decoding constraints balance."""
    if power < 0:
        raise ParameterError(f"pair power must be >= 0, got {power}")
    if not relaying:
        return float(power), 0.0
    eta_s, eta_r = split_fractions(gains, m, n)
    return float(eta_s * power), float(eta_r * power)


def _half_log2(x):
    return 0.5 * np.log2(1.0 + x)


def pair_rate(gains: GainSet, m: int, n: int, p_s1: float, p_r: float, p_s2: float,
              relaying: bool, scheme: Scheme) -> float:
    """Rate of pair (m, n) for balanced powers; relaying uses the unified equivalent-gain form."""
    if relaying:
        lam = equivalent_gain(gains, m, n, True)
        return float(_half_log2((p_s1 + p_r) * lam))
    r = _half_log2(p_s1 * gains.lam_sd[m])
    if Scheme.parse(scheme).enhanced:
        r = 0.5 * (np.log2(1.0 + p_s1 * gains.lam_sd[m]) + np.log2(1.0 + p_s2 * gains.lam_sd[n]))
    return float(r)


def allocation_rate(gains: GainSet, scheme: Scheme, pairing, modes, powers: PairPowers) -> float:
    """Sum of pair_rate over listening subcarriers in index order."""
    pairing = check_permutation(pairing)
    if len(pairing) != gains.n:
        raise ParameterError("pairing length does not match the gain set")
    total = 0.0
    for m in range(gains.n):
        total += pair_rate(gains, m, int(pairing[m]), powers.p_s1[m], powers.p_r[m],
                           powers.p_s2[m], bool(modes[m]), scheme)
    return total


def recompute_rate(alloc: Allocation, gains: GainSet, rtol: float = RATE_RTOL) -> float:
    """Recompute an allocation's sum rate and fail loudly if it disagrees with the stored value."""
    r = allocation_rate(gains, alloc.scheme, alloc.pairing, alloc.modes, alloc.powers)
    if not np.isclose(r, alloc.sum_rate, rtol=rtol, atol=1e-12):
        raise IntegrityError(f"stored sum_rate {alloc.sum_rate!r} != recomputed {r!r}")
    return r


def min_form_rates(gains: GainSet, scheme: Scheme, pairing, modes, powers: PairPowers) -> np.ndarray:
    """Per-pair achievable rates with the decode constraint kept explicit (no balance assumed)."""
    pairing = np.asarray(pairing)
    modes = np.asarray(modes, dtype=bool)
    sd_m = gains.lam_sd
    sd_n = gains.lam_sd[pairing]
    relay_link = np.log2(1.0 + powers.p_s1 * gains.lam_sr)
    dest_link = np.log2(1.0 + powers.p_s1 * sd_m + powers.p_r * gains.lam_rd[pairing])
    relayed = 0.5 * np.minimum(relay_link, dest_link)
    idle = 0.5 * np.log2(1.0 + powers.p_s1 * sd_m)
    if Scheme.parse(scheme).enhanced:
        idle = idle + 0.5 * np.log2(1.0 + powers.p_s2 * sd_n)
    return np.where(modes, relayed, idle)
