import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfrelay import ParameterError, finalize_pairing


def test_diagonal_dominant_identity():
    T = np.eye(4) * 10 + np.random.default_rng(0).random((4, 4))
    assert finalize_pairing(T).tolist() == [0, 1, 2, 3]


def test_all_zero_identity():
    assert finalize_pairing(np.zeros((5, 5))).tolist() == [0, 1, 2, 3, 4]


def test_antidiagonal_swap():
    assert finalize_pairing(np.array([[0.0, 3.0], [3.0, 0.0]])).tolist() == [1, 0]


def test_rejects_bad_input():
    with pytest.raises(ParameterError):
        finalize_pairing(np.zeros((2, 3)))
    with pytest.raises(ParameterError):
        finalize_pairing(np.array([[np.nan]]))


def _brute(T):
    n = len(T)
    best = max(sum(T[m, p[m]] for m in range(n)) for p in itertools.permutations(range(n)))
    tol = 1e-11 * max(1.0, np.abs(T).max()) * n
    for p in itertools.permutations(range(n)):  # lexicographic order
        if sum(T[m, p[m]] for m in range(n)) >= best - tol:
            return list(p), best


@settings(max_examples=150)
@given(n=st.integers(1, 5), seed=st.integers(0, 10_000), levels=st.integers(1, 4))
def test_matches_lexicographic_brute_force(n, seed, levels):
    # few distinct values force many ties
    T = np.random.default_rng(seed).integers(0, levels, size=(n, n)).astype(float)
    perm, best = _brute(T)
    got = finalize_pairing(T)
    assert sorted(got.tolist()) == list(range(n))
    assert T[np.arange(n), got].sum() == pytest.approx(best)
    assert got.tolist() == perm


@settings(max_examples=50)
@given(n=st.integers(2, 6), seed=st.integers(0, 10_000), shift=st.floats(-5, 5))
def test_uniform_row_shift_keeps_matching(n, seed, shift):
    """Adding one constant to every beta shifts every row equally and leaves the pairing unchanged."""
    T = np.random.default_rng(seed).random((n, n))
    assert finalize_pairing(T).tolist() == finalize_pairing(T - shift).tolist()
