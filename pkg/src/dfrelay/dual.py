"""Lagrange-dual machinery shared by the three allocation schemes.

Multipliers live in natural-log units: the Lagrangian weighs (1/2) ln(1 + lam S) against
alpha * S, which is what makes the water level 1/(2 alpha).  Dual values are converted to
bits by dividing by ln 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy.optimize import minimize_scalar

from .channel import GainSet
from .matching import assignment_value
from .model import Scheme
from .rates import realizable_matrix, relay_gain_matrix, useful_matrix

KIND = {Scheme.SELECTIVE_SUM: 0, Scheme.ENHANCED_SUM: 1, Scheme.ENHANCED_INDIVIDUAL: 2}
LN2 = math.log(2.0)


@numba.njit(cache=True)
def _fill(lam, mult):
    """Optimal power and Lagrangian value of one channel at price ``mult``."""
    if lam <= 0.0:
        return 0.0, 0.0
    s = 0.5 / mult - 1.0 / lam
    if s <= 0.0:
        return 0.0, 0.0
    return s, 0.5 * math.log1p(lam * s) - mult * s


@numba.njit(cache=True)
def _weights(kind, mult, lam_rel, allowed, lam_sd, eta_s, eta_r, W, rho, cost):
    n = lam_sd.shape[0]
    for m in range(n):
        for k in range(n):
            if kind == 0:
                lam = lam_rel[m, k] if allowed[m, k] else lam_sd[m]
                s, w = _fill(lam, mult[0])
                W[m, k] = w
                rho[m, k] = allowed[m, k]
                cost[0, m, k] = s
                cost[1, m, k] = 0.0
            elif kind == 1:
                s2, w2 = _fill(lam_sd[m], mult[0])
                s3, w3 = _fill(lam_sd[k], mult[0])
                ri = w2 + w3
                relay = False
                s1 = 0.0
                rr = -1.0
                if allowed[m, k]:
                    s1, rr = _fill(lam_rel[m, k], mult[0])
                    relay = rr > ri
                rho[m, k] = relay
                if relay:
                    W[m, k] = rr
                    cost[0, m, k] = s1
                else:
                    W[m, k] = ri
                    cost[0, m, k] = s2 + s3
                cost[1, m, k] = 0.0
            else:
                s2, w2 = _fill(lam_sd[m], mult[0])
                s3, w3 = _fill(lam_sd[k], mult[0])
                ri = w2 + w3
                relay = False
                p1 = 0.0
                rr = -1.0
                if allowed[m, k]:
                    price = mult[0] * eta_s[m, k] + mult[1] * eta_r[m, k]
                    p1, rr = _fill(lam_rel[m, k], price)
                    # ties go to relaying: both modes then contribute equally
                    relay = rr >= ri
                rho[m, k] = relay
                if relay:
                    W[m, k] = rr
                    cost[0, m, k] = eta_s[m, k] * p1
                    cost[1, m, k] = eta_r[m, k] * p1
                else:
                    W[m, k] = ri
                    cost[0, m, k] = s2 + s3
                    cost[1, m, k] = 0.0


@numba.njit(cache=True)
def _step(mult, beta, budgets, used, counts, step, lo, hi):
    """One projected subgradient step on the power multipliers and the row prices."""
    new_mult = np.empty(mult.shape[0])
    for b in range(mult.shape[0]):
        new_mult[b] = min(max(mult[b] - step * (budgets[b] - used[b]), lo[b]), hi[b])
    new_beta = np.empty(beta.shape[0])
    for m in range(beta.shape[0]):
        new_beta[m] = beta[m] - step * (1.0 - counts[m])
    return new_mult, new_beta


@numba.njit(cache=True)
def _subgradient(kind, lam_rel, allowed, lam_sd, eta_s, eta_r, budgets, mult0, beta0,
                 lo, hi, step_scale, eps, max_iter):
    n = lam_sd.shape[0]
    nb = budgets.shape[0]
    mult = mult0.copy()
    beta = beta0.copy()
    W = np.empty((n, n))
    rho = np.empty((n, n), dtype=np.bool_)
    cost = np.empty((2, n, n))
    T = np.empty((n, n))
    rows = np.empty(n, dtype=np.int64)
    best_g = np.inf
    best_mult = mult.copy()
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        _weights(kind, mult, lam_rel, allowed, lam_sd, eta_s, eta_r, W, rho, cost)
        for m in range(n):
            for k in range(n):
                T[m, k] = W[m, k] - beta[m]
        g = 0.0
        used = np.zeros(nb)
        counts = np.zeros(n)
        for k in range(n):
            r = 0
            for m in range(1, n):
                if T[m, k] > T[r, k]:
                    r = m
            rows[k] = r
            counts[r] += 1.0
            g += T[r, k]
            for b in range(nb):
                used[b] += cost[b, r, k]
        for b in range(nb):
            g += mult[b] * budgets[b]
        for m in range(n):
            g += beta[m]
        if g < best_g:
            best_g = g
            best_mult[:] = mult
        step = step_scale / math.sqrt(it)
        new_mult, new_beta = _step(mult, beta, budgets, used, counts, step, lo, hi)
        dm = 0.0
        for b in range(nb):
            rel = abs(new_mult[b] - mult[b]) / abs(new_mult[b])
            if rel > dm:
                dm = rel
        dnum = 0.0
        dden = 0.0
        for m in range(n):
            dnum += (new_beta[m] - beta[m]) ** 2
            dden += beta[m] ** 2
        if dden > 0.0:
            db = math.sqrt(dnum / dden)
        elif dnum == 0.0:
            db = 0.0
        else:
            db = np.inf
        mult = new_mult
        beta = new_beta
        if dm < eps and db < eps:
            converged = True
            break
    return mult, beta, T, it, converged, best_g, best_mult


@dataclass
class SubgradientResult:
    mult: np.ndarray
    beta: np.ndarray
    T: np.ndarray
    iterations: int
    converged: bool
    best_dual: float  # nats
    best_mult: np.ndarray


class DualProblem:
    """Per-pair weights W(mult) and the beta-free dual phi(mult) = mult.budgets + maxassign W."""

    def __init__(self, gains: GainSet, scheme: Scheme, budgets):
        self.gains = gains
        self.scheme = Scheme.parse(scheme)
        self.kind = KIND[self.scheme]
        self.n = gains.n
        self.budgets = np.asarray(budgets, dtype=float)
        self.lam_sd = np.ascontiguousarray(gains.lam_sd, dtype=float)
        self.lam_rel = relay_gain_matrix(gains)
        if self.scheme is Scheme.SELECTIVE_SUM:
            self.allowed = useful_matrix(gains)
        else:
            self.allowed = realizable_matrix(gains) & (self.lam_rel > 0)
        sr = gains.lam_sr[:, None]
        rd = gains.lam_rd[None, :]
        den = sr + rd - gains.lam_sd[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            self.eta_s = np.where(self.allowed, rd / np.where(self.allowed, den, 1.0), 1.0)
            self.eta_r = np.where(self.allowed, (sr - gains.lam_sd[:, None]) / np.where(self.allowed, den, 1.0), 0.0)
        self.lo, self.hi = self._bounds()
        self._W = np.empty((self.n, self.n))
        self._rho = np.empty((self.n, self.n), dtype=np.bool_)
        self._cost = np.empty((2, self.n, self.n))

    # multiplier box that is guaranteed to contain a dual minimizer
    def _bounds(self):
        gains_all = np.concatenate([self.lam_sd, self.lam_rel[self.allowed]])
        pos = gains_all[gains_all > 0]
        if pos.size == 0:
            one = np.ones(len(self.budgets))
            return one, one
        total = float(self.budgets.sum())
        lo_common = 0.5 / (total + 1.0 / pos.min()) / 4.0
        if self.kind == 2:
            ratios_s = [self.lam_sd.max()]
            ratios_r = [1.0]
            if np.any(self.allowed):
                ratios_s.append((self.lam_rel[self.allowed] / self.eta_s[self.allowed]).max())
                ratios_r.append((self.lam_rel[self.allowed] / self.eta_r[self.allowed]).max())
            hi = np.array([max(ratios_s), max(ratios_r)]) * 2.0
            lo = np.array([lo_common * 1e-3, lo_common * 1e-6])
            return lo, np.maximum(hi, lo * 10)
        hi = np.array([pos.max() * 2.0])
        return np.array([lo_common]), np.maximum(hi, lo_common * 10)

    def weights(self, mult):
        mult = np.asarray(mult, dtype=float)
        if mult.shape[0] == 1:
            mult = np.array([mult[0], 0.0])
        _weights(self.kind, mult, self.lam_rel, self.allowed, self.lam_sd, self.eta_s, self.eta_r,
                 self._W, self._rho, self._cost)
        return self._W.copy(), self._rho.copy(), self._cost.copy()

    def dual(self, mult) -> tuple[float, np.ndarray]:
        """phi(mult) in nats and a maximizing pairing."""
        W, _, _ = self.weights(mult)
        val, perm = assignment_value(W)
        return float(np.dot(mult, self.budgets[: len(mult)]) + val), perm

    def subgradient(self, opts) -> SubgradientResult:
        nb = len(self.budgets)
        mult0 = np.full(nb, opts.alpha_init if nb == 1 else opts.mu_init, dtype=float)
        mult0 = np.clip(mult0, self.lo, self.hi)
        beta0 = np.full(self.n, float(opts.beta_init))
        mult, beta, T, it, conv, best_g, best_mult = _subgradient(
            self.kind, self.lam_rel, self.allowed, self.lam_sd, self.eta_s, self.eta_r,
            self.budgets, mult0, beta0, self.lo, self.hi, float(opts.step_scale),
            float(opts.eps), int(opts.max_iter))
        return SubgradientResult(mult, beta, T, int(it), bool(conv), float(best_g), best_mult)

    def polish(self, xatol: float = 1e-9) -> tuple[np.ndarray, float]:
        """Minimize phi over the multiplier box (1-D Brent, or nested Brent for two budgets)."""
        lo, hi = np.log(self.lo), np.log(self.hi)
        if len(self.budgets) == 1:
            res = minimize_scalar(lambda x: self.dual([math.exp(x)])[0], bounds=(lo[0], hi[0]),
                                  method="bounded", options={"xatol": xatol})
            return np.array([math.exp(res.x)]), float(res.fun)

        inner_best = {}

        def inner(xr):
            r = minimize_scalar(lambda xs: self.dual([math.exp(xs), math.exp(xr)])[0],
                                bounds=(lo[0], hi[0]), method="bounded", options={"xatol": xatol * 100})
            inner_best[xr] = r.x
            return r.fun

        res = minimize_scalar(inner, bounds=(lo[1], hi[1]), method="bounded", options={"xatol": xatol * 100})
        xs = inner_best.get(res.x)
        if xs is None:
            inner(res.x)
            xs = inner_best[res.x]
        mult = np.array([math.exp(xs), math.exp(res.x)])
        return mult, self.dual(mult)[0]
