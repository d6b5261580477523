"""Laplace noise generation and privacy accounting.

Two regimes are supported. The pure regime splits the budget uniformly over
the iteration cap via basic composition, giving a per-release scale of
T * delta_k / epsilon with delta_k the infinity norm of the party's allotment
cap. The approximate regime uses advanced composition and draws at scale
(2 ||s_bar_k|| / epsilon) * sqrt(T * ln(e + epsilon/delta)) with the Euclidean
norm; it is valid for epsilon in (0, 0.9) and delta in (0, 1].

Noise streams are counter-based: every (master seed, party, iteration) triple
keys an independent Philox stream, so results do not depend on evaluation
order or concurrency. Sampling uses the inverse CDF of a uniform draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import PartyData, sensitivity


class Regime(Enum):
    PURE = "pure"
    APPROX = "approx"


class PrivacyBudgetExhausted(Exception):
    """Raised when a run would exceed its iteration budget."""


@dataclass(frozen=True)
class PrivacyConfig:
    regime: Regime
    epsilon: float
    delta: float
    iteration_cap: int  # T, hard upper bound on iterations

    def __post_init__(self):
        if self.iteration_cap < 1:
            raise ValueError("iteration_cap must be at least 1")
        if self.regime is Regime.PURE:
            if not self.epsilon > 0:
                raise ValueError("pure regime requires epsilon > 0")
            if self.delta != 0:
                raise ValueError("pure regime requires delta = 0")
        else:
            if not (0 < self.epsilon < 0.9):
                raise ValueError("approximate regime requires epsilon in (0, 0.9)")
            if not (0 < self.delta <= 1):
                raise ValueError("approximate regime requires delta in (0, 1]")


def pure_scale(delta_k: float, eps: float, iterations: int) -> float:
    """Per-release Laplace scale for the pure regime: T * delta_k / eps."""
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    if iterations < 1:
        raise ValueError("iteration cap must be at least 1")
    if delta_k < 0:
        raise ValueError("sensitivity must be nonnegative")
    return iterations * delta_k / eps


def approx_scale(s_bar_norm2: float, eps: float, delta: float, iterations: int) -> float:
    """Per-release Laplace scale for the approximate regime.

    (2 ||s_bar|| / eps) * sqrt(T * ln(e + eps/delta)), natural log.
    """
    if not (0 < eps < 0.9):
        raise ValueError("epsilon must lie in (0, 0.9) for the approximate regime")
    if not (0 < delta <= 1):
        raise ValueError("delta must lie in (0, 1] for the approximate regime")
    if iterations < 1:
        raise ValueError("iteration cap must be at least 1")
    if s_bar_norm2 < 0:
        raise ValueError("norm must be nonnegative")
    return (2.0 * s_bar_norm2 / eps) * math.sqrt(iterations * math.log(math.e + eps / delta))


def party_noise_scale(config: PrivacyConfig, party: PartyData) -> float:
    """Per-release scale for one party under the configured regime."""
    if config.regime is Regime.PURE:
        return pure_scale(sensitivity(party), config.epsilon, config.iteration_cap)
    norm2 = float(np.linalg.norm(party.allot_cap))
    return approx_scale(norm2, config.epsilon, config.delta, config.iteration_cap)


@dataclass(frozen=True)
class NoiseStream:
    """Keyed noise source: identical (seed, party, iteration, dim) -> identical draw."""

    master_seed: int
    party_index: int
    iteration: int
    scale: float

    def _generator(self) -> np.random.Generator:
        if not (0 <= self.party_index < 2**16):
            raise ValueError("party index out of keyable range")
        if not (0 <= self.iteration < 2**32):
            raise ValueError("iteration out of keyable range")
        key = ((self.master_seed & (2**64 - 1)) << 64) | (self.party_index << 32) | self.iteration
        return np.random.Generator(np.random.Philox(key=key))

    def sample(self, dim: int) -> np.ndarray:
        return sample_laplace(self, dim)


def sample_laplace(stream: NoiseStream, dim: int) -> np.ndarray:
    """Draw dim i.i.d. Laplace(0, scale) values; scale 0 returns exact zeros."""
    if stream.scale < 0:
        raise ValueError("scale must be nonnegative")
    if stream.scale == 0.0:
        return np.zeros(dim)
    gen = stream._generator()
    # open-interval uniforms, symmetric about 1/2, then inverse CDF
    u = (gen.integers(0, 2**53, size=dim).astype(np.float64) + 0.5) * 2.0**-53
    return np.where(u < 0.5, np.log(2.0 * u), -np.log(2.0 * (1.0 - u))) * stream.scale


def privacy_spent(config: PrivacyConfig, iterations_run: int) -> tuple[float, float]:
    """Budget consumed after iterations_run releases.

    Exceeding the iteration cap is a hard error. The pure regime accrues
    linearly. The approximate regime reports the advertised (eps, delta) at
    the full cap; before that, it reports the basic-composition partial sum
    of the per-iteration budgets implied by the configured scale.
    """
    if iterations_run < 0:
        raise ValueError("iterations_run must be nonnegative")
    if iterations_run > config.iteration_cap:
        raise PrivacyBudgetExhausted(
            f"privacy budget exhausted: {iterations_run} iterations exceed cap "
            f"{config.iteration_cap}"
        )
    if config.regime is Regime.PURE:
        return (iterations_run * config.epsilon / config.iteration_cap, 0.0)
    if iterations_run == config.iteration_cap:
        return (config.epsilon, config.delta)
    per_iter = config.epsilon / (
        2.0 * math.sqrt(config.iteration_cap * math.log(math.e + config.epsilon / config.delta))
    )
    return (iterations_run * per_iter, 0.0)


class BudgetLedger:
    """Single-owner iteration counter that refuses to pass the cap."""

    def __init__(self, config: PrivacyConfig):
        self.config = config
        self.iterations_run = 0

    def charge(self, iterations: int = 1) -> None:
        if self.iterations_run + iterations > self.config.iteration_cap:
            raise PrivacyBudgetExhausted(
                f"privacy budget exhausted: iteration "
                f"{self.iterations_run + iterations} exceeds cap {self.config.iteration_cap}"
            )
        self.iterations_run += iterations

    def spent(self) -> tuple[float, float]:
        return privacy_spent(self.config, self.iterations_run)
