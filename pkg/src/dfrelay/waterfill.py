"""Water-filling power allocation over parallel Gaussian channels."""
from __future__ import annotations

import numpy as np

from .errors import ParameterError

# gains this small have an infinite inverse and are treated as zero
_TINY = 1.0 / np.finfo(float).max


def _active_set(lams: np.ndarray, budget: float):
    """(theta, indices of active channels, their inverse gains) for a nonnegative budget."""
    idx = np.nonzero(lams > _TINY)[0]
    if idx.size == 0:
        return 0.0, idx, np.empty(0)
    inv_all = 1.0 / lams[idx]
    order = np.argsort(inv_all, kind="stable")
    inv = inv_all[order]
    if budget == 0:
        return float(inv[0]), idx[order[:0]], inv[:0]
    csum = np.cumsum(inv)
    k = np.arange(1, inv.size + 1)
    # candidate level when the k best channels are active
    levels = (budget + csum) / k
    active = levels > inv
    active[0] = True  # a budget below one ulp of inv[0] still fills the best channel
    kstar = int(np.nonzero(active)[0][-1]) + 1
    return float(levels[kstar - 1]), idx[order[:kstar]], inv[:kstar]


def water_level(lams, budget: float) -> float:
    """Level theta with sum_i [theta - 1/lam_i]^+ = budget (zero gains never fill)."""
    lams = np.asarray(lams, dtype=float)
    if budget < 0:
        raise ParameterError(f"budget must be >= 0, got {budget}")
    return _active_set(lams, budget)[0]


def waterfill(lams, budget: float, return_level: bool = False):
    """Maximize sum log(1 + S_i lam_i) subject to sum S_i = budget, S >= 0.

    Channels with zero gain get zero power; if every gain is zero the budget is left unused.
    Active powers are formed from pairwise inverse-gain differences, which stays exact when
    the budget is tiny next to 1/lam.
    """
    lams = np.asarray(lams, dtype=float)
    if budget < 0:
        raise ParameterError(f"budget must be >= 0, got {budget}")
    if np.any(lams < 0) or not np.all(np.isfinite(lams)):
        raise ParameterError("gains must be finite and nonnegative")
    theta, act, inv = _active_set(lams, budget)
    powers = np.zeros_like(lams)
    if act.size:
        spread = (inv[:, None] - inv[None, :]).sum(axis=1)
        powers[act] = np.maximum((budget - spread) / act.size, 0.0)
    if return_level:
        return powers, theta
    return powers


def waterfill_batch(lams: np.ndarray, budget: float) -> np.ndarray:
    """Row-wise water-filling of a (K, L) gain array against the same budget.

    Uses theta - 1/lam directly, so it is meant for screening many configurations at once;
    reported powers should come from :func:`waterfill`.
    """
    lams = np.asarray(lams, dtype=float)
    if budget < 0:
        raise ParameterError(f"budget must be >= 0, got {budget}")
    k_rows, width = lams.shape
    with np.errstate(divide="ignore"):
        inv = np.where(lams > _TINY, 1.0 / np.where(lams > _TINY, lams, 1.0), np.inf)
    order = np.argsort(inv, axis=1, kind="stable")
    inv_sorted = np.take_along_axis(inv, order, axis=1)
    finite = np.isfinite(inv_sorted)
    csum = np.cumsum(np.where(finite, inv_sorted, 0.0), axis=1)
    k = np.arange(1, width + 1)
    levels = (budget + csum) / k
    active = (levels > inv_sorted) & finite
    active[:, 0] |= finite[:, 0]
    # active set is a prefix; its length is the number of True entries
    kstar = active.sum(axis=1)
    theta = np.where(kstar > 0, levels[np.arange(k_rows), np.maximum(kstar - 1, 0)], 0.0)
    powers = np.maximum(theta[:, None] - inv, 0.0)
    powers[~np.isfinite(inv)] = 0.0
    if budget == 0:
        powers[:] = 0.0
    return powers
