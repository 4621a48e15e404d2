"""Shared value types: schemes, budgets, per-pair powers and allocations."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError


class Scheme(str, enum.Enum):
    SELECTIVE_SUM = "selective"
    ENHANCED_SUM = "enhanced"
    ENHANCED_INDIVIDUAL = "individual"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {
            "selective": cls.SELECTIVE_SUM, "selective_sum": cls.SELECTIVE_SUM,
            "enhanced": cls.ENHANCED_SUM, "enhanced_sum": cls.ENHANCED_SUM,
            "individual": cls.ENHANCED_INDIVIDUAL, "enhanced_individual": cls.ENHANCED_INDIVIDUAL,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ParameterError(f"unknown scheme {value!r}") from None

    @property
    def enhanced(self) -> bool:
        return self is not Scheme.SELECTIVE_SUM


@dataclass(frozen=True)
class PowerBudget:
    total: float = 0.0
    source: float = 0.0
    relay: float = 0.0

    def __post_init__(self):
        for name in ("total", "source", "relay"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ParameterError(f"budget.{name} must be finite and >= 0, got {v}")

    @classmethod
    def split(cls, total: float, source_fraction: float = 0.75) -> "PowerBudget":
        """Individual budgets with P_S + P_R = total and P_S = source_fraction * total."""
        if not 0.0 < source_fraction < 1.0:
            raise ParameterError("source_fraction must lie in (0, 1)")
        return cls(total=total, source=source_fraction * total, relay=(1.0 - source_fraction) * total)


@dataclass(frozen=True)
class PairPowers:
    """Powers indexed by listening subcarrier m (pair m -> perm[m])."""

    p_s1: np.ndarray
    p_r: np.ndarray
    p_s2: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "PairPowers":
        return cls(np.zeros(n), np.zeros(n), np.zeros(n))

    def source_total(self) -> float:
        return float(np.sum(self.p_s1) + np.sum(self.p_s2))

    def relay_total(self) -> float:
        return float(np.sum(self.p_r))

    def total(self) -> float:
        return self.source_total() + self.relay_total()


@dataclass(frozen=True)
class SolverOptions:
    max_iter: int = 2000
    eps: float = 1e-4
    step_scale: float = 0.01
    alpha_init: float = 1.0
    beta_init: float = 0.0
    mu_init: float = 1.0

    def __post_init__(self):
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ParameterError("max_iter must be an integer >= 1")
        if not self.eps > 0:
            raise ParameterError("eps must be positive")
        if not self.step_scale > 0:
            raise ParameterError("step_scale must be positive")
        if not (self.alpha_init > 0 and self.mu_init > 0):
            raise ParameterError("initial power multipliers must be positive")


@dataclass(frozen=True)
class Allocation:
    scheme: Scheme
    pairing: np.ndarray
    modes: np.ndarray
    powers: PairPowers
    sum_rate: float
    dual_value: float
    gap_estimate: float
    iterations: int
    converged: bool = True
    multipliers: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.pairing)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme.value,
            "pairing": [int(x) for x in self.pairing],
            "modes": [bool(x) for x in self.modes],
            "p_s1": [float(x) for x in self.powers.p_s1],
            "p_r": [float(x) for x in self.powers.p_r],
            "p_s2": [float(x) for x in self.powers.p_s2],
            "sum_rate": self.sum_rate,
            "dual_value": self.dual_value,
            "gap_estimate": self.gap_estimate,
            "iterations": self.iterations,
            "converged": self.converged,
            "multipliers": {k: (list(map(float, v)) if np.ndim(v) else float(v)) for k, v in self.multipliers.items()},
        }


def check_permutation(perm) -> np.ndarray:
    perm = np.asarray(perm, dtype=np.int64)
    n = len(perm)
    if perm.ndim != 1 or n < 1 or not np.array_equal(np.sort(perm), np.arange(n)):
        raise ParameterError(f"pairing is not a permutation of 0..{n - 1}: {perm.tolist()}")
    return perm
