"""Maximum-weight perfect matching with a lexicographic tie-break."""
from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ParameterError


def assignment_value(weights: np.ndarray) -> tuple[float, np.ndarray]:
    """Optimal value and one maximizing permutation (perm[m] = n)."""
    rows, cols = linear_sum_assignment(weights, maximize=True)
    perm = np.empty(len(rows), dtype=np.int64)
    perm[rows] = cols
    return float(weights[rows, cols].sum()), perm


def finalize_pairing(T: np.ndarray) -> np.ndarray:
    """Max-weight perfect matching on T; among optimal matchings the lexicographically smallest.

    Row m is fixed in turn to the smallest column that still admits an optimal completion.
    """
    T = np.asarray(T, dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] < 1:
        raise ParameterError("T must be a non-empty square matrix")
    if not np.all(np.isfinite(T)):
        raise ParameterError("T must be finite")
    n = T.shape[0]
    best, perm = assignment_value(T)
    tol = 1e-11 * max(1.0, float(np.abs(T).max())) * n
    cur = perm.copy()
    fixed_value = 0.0
    free_cols = list(range(n))
    for m in range(n):
        rest_rows = np.arange(m + 1, n)
        chosen = int(cur[m])
        for c in free_cols:
            if c >= chosen:
                break
            cols_left = [x for x in free_cols if x != c]
            if rest_rows.size:
                sub = T[np.ix_(rest_rows, cols_left)]
                val, sub_perm = assignment_value(sub)
            else:
                val, sub_perm = 0.0, np.empty(0, dtype=np.int64)
            if fixed_value + T[m, c] + val >= best - tol:
                chosen = c
                cur[m] = c
                cur[rest_rows] = np.asarray(cols_left)[sub_perm]
                break
        fixed_value += T[m, chosen]
        free_cols.remove(chosen)
    return cur
