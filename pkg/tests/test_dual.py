import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfrelay import GainSet, PowerBudget, Scheme, SolverOptions, finalize_pairing
from dfrelay.dual import LN2, DualProblem, _step
from dfrelay.solvers import solve

from conftest import rayleigh_gains


def test_fixed_point_with_zero_residuals():
    mult = np.array([0.3, 0.7])
    beta = np.array([0.1, -0.4, 2.0])
    budgets = np.array([5.0, 2.0])
    new_mult, new_beta = _step(mult, beta, budgets, budgets.copy(), np.ones(3), 0.05,
                               np.array([1e-9, 1e-9]), np.array([1e9, 1e9]))
    assert np.array_equal(new_mult, mult) and np.array_equal(new_beta, beta)


def test_step_projects_onto_box():
    new_mult, _ = _step(np.array([0.1]), np.zeros(1), np.array([10.0]), np.array([0.0]), np.ones(1),
                        1.0, np.array([0.05]), np.array([1.0]))
    assert new_mult[0] == 0.05


def test_step_moves_against_residuals():
    # overspent budget raises the price; an over-used row raises its beta-price penalty
    new_mult, new_beta = _step(np.array([1.0]), np.zeros(2), np.array([1.0]), np.array([3.0]),
                               np.array([2.0, 0.0]), 0.1, np.array([1e-9]), np.array([1e9]))
    assert new_mult[0] > 1.0
    assert new_beta[0] > 0 > new_beta[1]


@settings(max_examples=40)
@given(g=rayleigh_gains(n_min=2, n_max=5), shift=st.floats(-10, 10), scheme=st.sampled_from(list(Scheme)))
def test_common_beta_shift_keeps_matching(g, shift, scheme):
    budgets = [20.0] if scheme is not Scheme.ENHANCED_INDIVIDUAL else [15.0, 5.0]
    prob = DualProblem(g, scheme, budgets)
    W, _, _ = prob.weights(np.full(len(budgets), 0.05))
    beta = np.random.default_rng(0).normal(size=g.n)
    T1 = W - beta[:, None]
    T2 = W - (beta + shift)[:, None]
    assert np.array_equal(np.argmax(T1, axis=0), np.argmax(T2, axis=0))
    assert finalize_pairing(T1).tolist() == finalize_pairing(T2).tolist()


@settings(max_examples=30)
@given(g=rayleigh_gains(n_max=5), scheme=st.sampled_from(list(Scheme)), scale=st.floats(0.2, 5.0))
def test_dual_upper_bounds_solution(g, scheme, scale):
    """phi at any multiplier is an upper bound on every feasible rate."""
    budget = PowerBudget.split(20.0) if scheme is Scheme.ENHANCED_INDIVIDUAL else PowerBudget(total=20.0)
    budgets = [budget.source, budget.relay] if scheme is Scheme.ENHANCED_INDIVIDUAL else [budget.total]
    prob = DualProblem(g, scheme, budgets)
    a = solve(g, budget, scheme)
    mult = np.clip(np.sqrt(prob.lo * prob.hi) * scale, prob.lo, prob.hi)
    phi, _ = prob.dual(mult)
    assert phi / LN2 >= a.sum_rate - 1e-9


def test_polish_not_worse_than_subgradient():
    g = GainSet.from_lists([0.4, 1.2, 0.3, 0.9], [5.0, 2.0, 7.0, 0.5], [3.0, 6.0, 1.0, 2.0])
    prob = DualProblem(g, Scheme.SELECTIVE_SUM, [12.0])
    sg = prob.subgradient(SolverOptions())
    _, phi = prob.polish()
    assert phi <= sg.best_dual + 1e-9


def test_individual_exception_pair_goes_to_relaying():
    # with a price so high that nothing is worth powering, both mode rates are 0 and tie
    g = GainSet.from_lists([0.5, 0.5], [2.0, 2.0], [2.0, 2.0])
    prob = DualProblem(g, Scheme.ENHANCED_INDIVIDUAL, [1.0, 1.0])
    W, rho, _ = prob.weights(np.array([1e6, 1e6]))
    assert np.all(W == 0.0)
    assert rho.all()
    prob = DualProblem(g, Scheme.ENHANCED_SUM, [2.0])
    W, rho, _ = prob.weights(np.array([1e6]))
    assert not rho.any()
