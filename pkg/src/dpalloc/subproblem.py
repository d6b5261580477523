"""Party-local agent: best response to a resource price vector.

Given a price vector on the shared resources, the party maximizes its
utility minus the priced cost of its claimed allotment, subject to its
private constraints and the allotment box 0 <= s <= s_bar. The box keeps
the problem bounded for every finite price, including negative components.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lp import LpProblem, LpStatus, PreparedLp, solve_lp
from .model import PartyData


class PartyInfeasibleError(Exception):
    """A party's private polytope is empty; the run cannot proceed."""

    def __init__(self, party_index: int | None):
        tag = "party" if party_index is None else f"party {party_index}"
        super().__init__(f"{tag}: private constraints are contradictory (no feasible response)")
        self.party_index = party_index


class PartyUnboundedError(Exception):
    """A party's response problem is unbounded despite the allotment box."""

    def __init__(self, party_index: int | None):
        tag = "party" if party_index is None else f"party {party_index}"
        super().__init__(f"{tag}: response problem is unbounded (check private constraints)")
        self.party_index = party_index


@dataclass(frozen=True)
class SubproblemResult:
    x: np.ndarray       # (n_k,) private solution
    s: np.ndarray       # (m,) claimed allotment
    g_value: float      # utility . x - price . s at the optimum


def build_subproblem(party: PartyData, price: np.ndarray) -> LpProblem:
    """Assemble the party LP for a given price vector.

    Variables are (x, s): maximize u.x - price.s subject to
    A x <= s, B x <= b, 0 <= s <= s_bar. x is free; nonnegativity, when a
    model wants it, arrives as explicit private rows.
    """
    m, n = party.n_shared, party.n_vars
    price = np.asarray(price, dtype=float)
    if price.size != m:
        raise ValueError(f"price has {price.size} components, expected {m}")
    mk = party.n_private
    G = np.zeros((m + mk + m, n + m))
    h = np.zeros(m + mk + m)
    G[:m, :n] = party.shared_coeff
    G[:m, n:] = -np.eye(m)
    if mk:
        G[m : m + mk, :n] = party.private_coeff
        h[m : m + mk] = party.private_rhs
    G[m + mk :, n:] = np.eye(m)
    h[m + mk :] = party.allot_cap
    lower = np.concatenate([np.full(n, -np.inf), np.zeros(m)])
    obj = np.concatenate([party.utility, -price])
    return LpProblem(sense="max", obj=obj, G=G, h=h, lower=lower)


class PartySolver:
    """Caches the party's constraint skeleton so per-price solves are cheap."""

    def __init__(self, party: PartyData, index: int | None = None):
        self.party = party
        self.index = index
        template = build_subproblem(party, np.zeros(party.n_shared))
        self._prepared = PreparedLp(template)
        if self._prepared.infeasible:
            raise PartyInfeasibleError(index)

    def solve(self, price: np.ndarray) -> SubproblemResult:
        party = self.party
        price = np.asarray(price, dtype=float)
        if not np.all(np.isfinite(price)):
            raise ValueError("price vector must be finite")
        obj = np.concatenate([party.utility, -price])
        sol = self._prepared.solve(obj)
        if sol.status is LpStatus.INFEASIBLE:
            raise PartyInfeasibleError(self.index)
        if sol.status is LpStatus.UNBOUNDED:
            raise PartyUnboundedError(self.index)
        n = party.n_vars
        return SubproblemResult(
            x=sol.x[:n].copy(), s=sol.x[n:].copy(), g_value=float(sol.objective_value)
        )


def solve_subproblem(party: PartyData, price: np.ndarray, index: int | None = None) -> SubproblemResult:
    """One-shot best response; equivalent to PartySolver(party).solve(price)."""
    price = np.asarray(price, dtype=float)
    if not np.all(np.isfinite(price)):
        raise ValueError("price vector must be finite")
    sol = solve_lp(build_subproblem(party, price))
    if sol.status is LpStatus.INFEASIBLE:
        raise PartyInfeasibleError(index)
    if sol.status is LpStatus.UNBOUNDED:
        raise PartyUnboundedError(index)
    n = party.n_vars
    return SubproblemResult(
        x=sol.x[:n].copy(), s=sol.x[n:].copy(), g_value=float(sol.objective_value)
    )


def perturb_allotment(s: np.ndarray, noise: np.ndarray) -> np.ndarray:
    """Release s + noise verbatim.

    No clamping: truncating the released value would change the noise
    distribution and void the privacy calibration.
    """
    s = np.asarray(s, dtype=float)
    noise = np.asarray(noise, dtype=float)
    if s.shape != noise.shape:
        raise ValueError(f"shape mismatch: {s.shape} vs {noise.shape}")
    return s + noise
