"""Suboptimality bounds for the differentially private decomposition.

Both bounds cap the expected best-iterate Lagrangian gap of a T-iteration
run started within distance M of the optimal price. The pure-regime bound
grows with T (its noise scale grows linearly in T) while the approximate
one decreases in T toward a noise floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Instance


@dataclass(frozen=True)
class BoundInputs:
    M: float                # bound on ||lambda0 - lambda*||
    sigma: float            # sum over parties of ||s_bar_k||^2 (Euclidean)
    s_bar_total_norm: float  # ||sum_k s_bar_k||
    iterations: int         # T
    epsilon: float
    delta: float = 0.0

    def __post_init__(self):
        if min(self.M, self.sigma, self.s_bar_total_norm) < 0:
            raise ValueError("bound inputs must be nonnegative")
        if self.iterations < 1:
            raise ValueError("iteration count must be at least 1")


def _norm(v: np.ndarray, kind: str) -> float:
    if kind == "l2":
        return float(np.linalg.norm(v))
    if kind == "l1":
        return float(np.abs(v).sum())
    if kind == "linf":
        return float(np.max(np.abs(v))) if v.size else 0.0
    raise ValueError(f"unknown norm {kind!r}")


def bound_inputs_from_instance(
    inst: Instance, M: float, iterations: int, epsilon: float, delta: float = 0.0,
    norm: str = "l2",
) -> BoundInputs:
    """Assemble bound inputs from an instance's allotment caps.

    The plain norms default to Euclidean; the knob exists because the
    calibration uses the infinity norm only for per-party sensitivity.
    """
    sigma = sum(_norm(p.allot_cap, norm) ** 2 for p in inst.parties)
    total = np.sum([p.allot_cap for p in inst.parties], axis=0)
    return BoundInputs(
        M=M, sigma=sigma, s_bar_total_norm=_norm(total, norm),
        iterations=iterations, epsilon=epsilon, delta=delta,
    )


def pure_bound(b: BoundInputs) -> float:
    """M * sqrt(2 T sigma / eps^2 + ||s_bar_total||^2 / T)."""
    if not b.epsilon > 0:
        raise ValueError("epsilon must be positive")
    T = b.iterations
    return b.M * math.sqrt(2.0 * T * b.sigma / b.epsilon**2 + b.s_bar_total_norm**2 / T)


def approx_bound(b: BoundInputs) -> float:
    """M * sqrt(8 ln(e + eps/delta) sigma / eps^2 + ||s_bar_total||^2 / T)."""
    if not (0 < b.epsilon < 0.9):
        raise ValueError("epsilon must lie in (0, 0.9) for the approximate bound")
    if not (0 < b.delta <= 1):
        raise ValueError("delta must lie in (0, 1] for the approximate bound")
    T = b.iterations
    return b.M * math.sqrt(
        8.0 * math.log(math.e + b.epsilon / b.delta) * b.sigma / b.epsilon**2
        + b.s_bar_total_norm**2 / T
    )
