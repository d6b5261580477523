"""Centralized ground truth for measurement and verification.

The oracle sees all private data by design. It solves the pooled program in
allotment form (per-party claims summing exactly to the shared capacity,
with each party's box s_k <= s_bar_k), recovers the capacity prices from the
coupling equality, and cross-checks the optimum against an explicitly
constructed dual program. It never participates in the protocol.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lp import LpProblem, LpSolution, LpStatus, solve_lp
from .model import Instance


class InfeasibleInstanceError(Exception):
    def __init__(self, detail: str = ""):
        super().__init__(f"instance is infeasible{': ' + detail if detail else ''}")


class UnboundedInstanceError(Exception):
    def __init__(self, detail: str = ""):
        super().__init__(f"instance is unbounded{': ' + detail if detail else ''}")


@dataclass(frozen=True)
class CentralizedSolution:
    z_p: float
    x: tuple[np.ndarray, ...]       # per-party private optima
    s: tuple[np.ndarray, ...]       # per-party allotments, summing to capacity
    lam: np.ndarray                 # capacity prices (duals of the coupling equality)
    lp: LpSolution


@dataclass(frozen=True)
class DualLpSolution:
    z_d: float
    lam: np.ndarray
    alpha: tuple[np.ndarray, ...]
    beta: tuple[np.ndarray, ...]
    box_dual: tuple[np.ndarray, ...]
    lp: LpSolution


def _raise_for_status(sol: LpSolution, what: str):
    if sol.status is LpStatus.INFEASIBLE:
        raise InfeasibleInstanceError(what)
    if sol.status is LpStatus.UNBOUNDED:
        raise UnboundedInstanceError(what)


def solve_centralized(inst: Instance) -> CentralizedSolution:
    """Solve the pooled allotment-form program and recover capacity prices."""
    m, K = inst.m, inst.n_parties
    n_x = [p.n_vars for p in inst.parties]
    x_off = np.concatenate([[0], np.cumsum(n_x)])
    s_off = int(x_off[-1])
    n_total = s_off + K * m

    rows = []
    rhs = []
    for k, p in enumerate(inst.parties):
        blk = np.zeros((m, n_total))
        blk[:, x_off[k] : x_off[k + 1]] = p.shared_coeff
        blk[:, s_off + k * m : s_off + (k + 1) * m] = -np.eye(m)
        rows.append(blk)
        rhs.append(np.zeros(m))
        if p.n_private:
            blk = np.zeros((p.n_private, n_total))
            blk[:, x_off[k] : x_off[k + 1]] = p.private_coeff
            rows.append(blk)
            rhs.append(p.private_rhs)
        blk = np.zeros((m, n_total))
        blk[:, s_off + k * m : s_off + (k + 1) * m] = np.eye(m)
        rows.append(blk)
        rhs.append(p.allot_cap)
    G = np.vstack(rows)
    h = np.concatenate(rhs)

    eq = np.zeros((m, n_total))
    for k in range(K):
        eq[:, s_off + k * m : s_off + (k + 1) * m] = np.eye(m)

    obj = np.zeros(n_total)
    for k, p in enumerate(inst.parties):
        obj[x_off[k] : x_off[k + 1]] = p.utility
    lower = np.concatenate([np.full(s_off, -np.inf), np.zeros(K * m)])

    sol = solve_lp(LpProblem(sense="max", obj=obj, G=G, h=h, eq_G=eq, eq_h=inst.capacity,
                             lower=lower))
    _raise_for_status(sol, "pooled allotment program")
    x = tuple(sol.x[x_off[k] : x_off[k + 1]].copy() for k in range(K))
    s = tuple(sol.x[s_off + k * m : s_off + (k + 1) * m].copy() for k in range(K))
    return CentralizedSolution(
        z_p=float(sol.objective_value), x=x, s=s, lam=sol.dual_eq.copy(), lp=sol
    )


def solve_original(inst: Instance) -> tuple[float, tuple[np.ndarray, ...]]:
    """Solve the pooled program in its direct form (no allotment variables).

    Used to confirm the allotment reformulation is exact and to solve
    demand-free instances during generation.
    """
    K = inst.n_parties
    n_x = [p.n_vars for p in inst.parties]
    x_off = np.concatenate([[0], np.cumsum(n_x)])
    n_total = int(x_off[-1])

    shared = np.zeros((inst.m, n_total))
    for k, p in enumerate(inst.parties):
        shared[:, x_off[k] : x_off[k + 1]] = p.shared_coeff
    rows = [shared]
    rhs = [inst.capacity]
    for k, p in enumerate(inst.parties):
        if p.n_private:
            blk = np.zeros((p.n_private, n_total))
            blk[:, x_off[k] : x_off[k + 1]] = p.private_coeff
            rows.append(blk)
            rhs.append(p.private_rhs)
    obj = np.zeros(n_total)
    for k, p in enumerate(inst.parties):
        obj[x_off[k] : x_off[k + 1]] = p.utility

    sol = solve_lp(LpProblem(
        sense="max", obj=obj, G=np.vstack(rows), h=np.concatenate(rhs),
        lower=np.full(n_total, -np.inf),
    ))
    _raise_for_status(sol, "direct pooled program")
    x = tuple(sol.x[x_off[k] : x_off[k + 1]].copy() for k in range(K))
    return float(sol.objective_value), x


def solve_dual_lp(inst: Instance) -> DualLpSolution:
    """Solve the explicit dual of the pooled allotment-form program.

    Variables: per party, multipliers alpha_k (coupling rows), beta_k
    (private rows), w_k (allotment box rows), all nonnegative, plus the free
    capacity price lambda. Constraints: A_k' alpha_k + B_k' beta_k = u_k and
    lambda - alpha_k + w_k >= 0. By strong duality the optimal value equals
    the pooled optimum.
    """
    m, K = inst.m, inst.n_parties
    mks = [p.n_private for p in inst.parties]
    # layout: [alpha_1..alpha_K | beta_1..beta_K | w_1..w_K | lambda]
    a_off = [k * m for k in range(K)]
    b_base = K * m
    b_off = np.concatenate([[0], np.cumsum(mks)])
    w_base = b_base + int(b_off[-1])
    lam_base = w_base + K * m
    n_total = lam_base + m

    eq_rows = []
    eq_rhs = []
    ineq_rows = []
    ineq_rhs = []
    for k, p in enumerate(inst.parties):
        blk = np.zeros((p.n_vars, n_total))
        blk[:, a_off[k] : a_off[k] + m] = p.shared_coeff.T
        if p.n_private:
            blk[:, b_base + b_off[k] : b_base + b_off[k + 1]] = p.private_coeff.T
        eq_rows.append(blk)
        eq_rhs.append(p.utility)
        blk = np.zeros((m, n_total))
        blk[:, a_off[k] : a_off[k] + m] = np.eye(m)
        blk[:, w_base + k * m : w_base + (k + 1) * m] = -np.eye(m)
        blk[:, lam_base:] = -np.eye(m)
        ineq_rows.append(blk)
        ineq_rhs.append(np.zeros(m))

    obj = np.zeros(n_total)
    for k, p in enumerate(inst.parties):
        obj[b_base + b_off[k] : b_base + b_off[k + 1]] = p.private_rhs
        obj[w_base + k * m : w_base + (k + 1) * m] = p.allot_cap
    obj[lam_base:] = inst.capacity
    lower = np.concatenate([np.zeros(lam_base), np.full(m, -np.inf)])

    sol = solve_lp(LpProblem(
        sense="min", obj=obj, G=np.vstack(ineq_rows), h=np.concatenate(ineq_rhs),
        eq_G=np.vstack(eq_rows), eq_h=np.concatenate(eq_rhs), lower=lower,
    ))
    _raise_for_status(sol, "explicit dual program")
    alpha = tuple(sol.x[a_off[k] : a_off[k] + m].copy() for k in range(K))
    beta = tuple(sol.x[b_base + b_off[k] : b_base + b_off[k + 1]].copy() for k in range(K))
    w = tuple(sol.x[w_base + k * m : w_base + (k + 1) * m].copy() for k in range(K))
    return DualLpSolution(
        z_d=float(sol.objective_value), lam=sol.x[lam_base:].copy(),
        alpha=alpha, beta=beta, box_dual=w, lp=sol,
    )


def distance_M(inst: Instance, lambda0: np.ndarray,
               solution: CentralizedSolution | None = None) -> float:
    """Euclidean distance from the starting price to the oracle's optimal price."""
    if solution is None:
        solution = solve_centralized(inst)
    lambda0 = np.asarray(lambda0, dtype=float)
    if lambda0.shape != solution.lam.shape:
        raise ValueError(f"lambda0 shape {lambda0.shape} does not match {solution.lam.shape}")
    return float(np.linalg.norm(lambda0 - solution.lam))
