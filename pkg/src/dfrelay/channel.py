"""Rayleigh block-fading channel draws on a source-relay-destination line."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError



@dataclass(frozen=True)
class Geometry:
    """Relay at distance ``d`` from the source on a unit source-destination segment."""

    d: float = 0.5
    path_loss_exp: float = 2.5
    sigma_r_sq: float = 1.0
    sigma_d_sq: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.d < 1.0:
            raise ParameterError(f"relay position d must lie in (0, 1), got {self.d}")
        if not self.path_loss_exp > 0:
            raise ParameterError("path_loss_exp must be positive")
        if not (self.sigma_r_sq > 0 and self.sigma_d_sq > 0):
            raise ParameterError("noise variances must be positive")

    @property
    def dist_sd(self) -> float:
        return 1.0

    @property
    def dist_sr(self) -> float:
        return self.d

    @property
    def dist_rd(self) -> float:
        return 1.0 - self.d

    def link_variance(self, dist: float) -> float:
        return dist ** (-self.path_loss_exp)


@dataclass(frozen=True)
class ChannelRealization:
    h_sd: np.ndarray
    h_sr: np.ndarray
    h_rd: np.ndarray

    def __post_init__(self):
        n = len(self.h_sd)
        if n < 1 or len(self.h_sr) != n or len(self.h_rd) != n:
            raise ParameterError("channel sequences must share a length N >= 1")

    @property
    def n(self) -> int:
        return len(self.h_sd)


@dataclass(frozen=True)
class GainSet:
    """Normalized per-subcarrier gains |h|^2 / sigma^2 (linear scale)."""

    lam_sd: np.ndarray
    lam_sr: np.ndarray
    lam_rd: np.ndarray

    def __post_init__(self):
        arrs = []
        for name in ("lam_sd", "lam_sr", "lam_rd"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.ndim != 1:
                raise ParameterError(f"{name} must be one-dimensional")
            if not np.all(np.isfinite(a)):
                raise ParameterError(f"{name} contains non-finite entries")
            if np.any(a < 0):
                raise ParameterError(f"{name} contains negative entries")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
            arrs.append(a)
        n = len(arrs[0])
        if n < 1 or any(len(a) != n for a in arrs):
            raise ParameterError("gain sequences must share a length N >= 1")

    @property
    def n(self) -> int:
        return len(self.lam_sd)

    @classmethod
    def from_lists(cls, lam_sd, lam_sr, lam_rd) -> "GainSet":
        return cls(np.asarray(lam_sd, float), np.asarray(lam_sr, float), np.asarray(lam_rd, float))


def as_generator(seed) -> np.random.Generator:
    """PCG64 generator from an int, a SeedSequence, or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def _cn(rng: np.random.Generator, n: int, var: float) -> np.ndarray:
    scale = np.sqrt(var / 2.0)
    return scale * rng.standard_normal(n) + 1j * scale * rng.standard_normal(n)


def gen_channels(n: int, geom: Geometry, seed=None) -> ChannelRealization:
    """Draw i.i.d. CN(0, dist^-ple) coefficients for the SD, SR and RD links."""
    if int(n) != n or n < 1:
        raise ParameterError(f"subcarrier count must be a positive integer, got {n}")
    if not isinstance(geom, Geometry):
        raise ParameterError("geom must be a Geometry")
    rng = as_generator(seed)
    n = int(n)
    h_sd = _cn(rng, n, geom.link_variance(geom.dist_sd))
    h_sr = _cn(rng, n, geom.link_variance(geom.dist_sr))
    h_rd = _cn(rng, n, geom.link_variance(geom.dist_rd))
    return ChannelRealization(h_sd, h_sr, h_rd)


def normalize(ch: ChannelRealization, geom: Geometry) -> GainSet:
    return GainSet(
        lam_sd=np.abs(ch.h_sd) ** 2 / geom.sigma_d_sq,
        lam_sr=np.abs(ch.h_sr) ** 2 / geom.sigma_r_sq,
        lam_rd=np.abs(ch.h_rd) ** 2 / geom.sigma_d_sq,
    )


def draw_gains(n: int, geom: Geometry, seed=None) -> GainSet:
    return normalize(gen_channels(n, geom, seed), geom)


def snr_db_to_budget(snr_db: float, n: int, sigma_d_sq: float = 1.0) -> float:
    """Total transmit power for an SNR defined as P_t / (N * sigma_d^2)."""
    return 10.0 ** (snr_db / 10.0) * n * sigma_d_sq
