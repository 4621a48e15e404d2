"""Exhaustive search over pairings (and mode patterns) for small N."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .channel import GainSet
from .errors import OracleLimitError
from .model import PowerBudget, Scheme
from .rates import relay_gain_matrix, useful_matrix
from .refit import refit
from .waterfill import waterfill_batch

_CHUNK = 1 << 16


@dataclass(frozen=True)
class OracleResult:
    best_rate: float
    best_pairing: np.ndarray
    best_modes: np.ndarray
    enumerated: int


def _batch_rates(lams: np.ndarray, total: float) -> np.ndarray:
    s = waterfill_batch(lams, total)
    return 0.5 * np.log2(1.0 + s * lams).sum(axis=1)


def exhaustive_solve(gains: GainSet, budget: PowerBudget, scheme, n_limit: int = 8) -> OracleResult:
    scheme = Scheme.parse(scheme)
    n = gains.n
    if n > n_limit:
        raise OracleLimitError(f"N={n} exceeds the exhaustive-search limit {n_limit}")
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    rows = np.arange(n)
    lam1 = relay_gain_matrix(gains)
    realizable = gains.lam_sr > gains.lam_sd

    if scheme is Scheme.SELECTIVE_SUM:
        useful = useful_matrix(gains)
        modes = useful[rows[None, :], perms]
        lams = np.where(modes, lam1[rows[None, :], perms], gains.lam_sd[None, :])
        rates = _batch_rates(lams, budget.total)
        k = int(np.argmax(rates))
        configs = [(perms[k], modes[k])]
        enumerated = len(perms)
    else:
        patterns = np.array(list(itertools.product([False, True], repeat=n)), dtype=bool)
        patterns = patterns[~np.any(patterns & ~realizable[None, :], axis=1)]
        enumerated = len(perms) * len(patterns)
        if scheme is Scheme.ENHANCED_SUM:
            best_rate, best_cfg = -np.inf, None
            for start in range(0, len(perms), max(1, _CHUNK // len(patterns))):
                pchunk = perms[start:start + max(1, _CHUNK // len(patterns))]
                P = np.repeat(pchunk, len(patterns), axis=0)
                R = np.tile(patterns, (len(pchunk), 1))
                lam_pair = lam1[rows[None, :], P]
                lams = np.concatenate([np.where(R, lam_pair, gains.lam_sd[None, :]),
                                       np.where(R, 0.0, gains.lam_sd[P])], axis=1)
                rates = _batch_rates(lams, budget.total)
                k = int(np.argmax(rates))
                if rates[k] > best_rate:
                    best_rate, best_cfg = rates[k], (P[k], R[k])
            configs = [best_cfg]
        else:
            best_rate, configs = -np.inf, []
            for perm in perms:
                for pat in patterns:
                    _, rate = refit(gains, scheme, perm, pat, budget)
                    if rate > best_rate:
                        best_rate, configs = rate, [(perm, pat)]
    perm, modes = configs[0]
    # report the rate through the same refit path the solvers use
    _, rate = refit(gains, scheme, perm, modes, budget)
    return OracleResult(float(rate), np.asarray(perm), np.asarray(modes, dtype=bool), int(enumerated))
