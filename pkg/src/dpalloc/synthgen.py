"""Seeded synthetic instance generator for the production-planning study.

Five parties share five capacities by default. Shared capacities and private
capacity limits are uniform on [10, 20]; each party has a uniform count of
private capacities in {5..10} and products in {10..20}; shared and private
technology coefficients are uniform on [0, 5] and [0, 1]; utilities are
uniform on [50, 150]. Product demands are attached in a second step: the
demand-free program is solved to optimality and each demand is drawn around
the demand-free optimum. Nonnegativity rows for the products are generated
explicitly as private rows and flagged as bookkeeping in the metadata.

Generation is a pure function of (seed, params): a fixed seed reproduces the
identical instance byte-for-byte.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .model import Instance, PartyData, validate_instance
from .oracle import solve_original


@dataclass(frozen=True)
class GenParams:
    n_parties: int = 5
    n_shared: int = 5
    shared_capacity_range: tuple[float, float] = (10.0, 20.0)
    private_capacity_count: tuple[int, int] = (5, 10)    # inclusive
    product_count: tuple[int, int] = (10, 20)            # inclusive
    private_capacity_range: tuple[float, float] = (10.0, 20.0)
    shared_coeff_range: tuple[float, float] = (0.0, 5.0)
    private_coeff_range: tuple[float, float] = (0.0, 1.0)
    utility_range: tuple[float, float] = (50.0, 150.0)
    demand_window: tuple[float, float] = (0.5, 1.5)
    demand_floor: float = 1.0

    def tiny(self) -> "GenParams":
        """Brute-force-friendly variant: 2 parties, 2 resources, 2 products."""
        return GenParams(
            n_parties=2, n_shared=2,
            private_capacity_count=(2, 2), product_count=(2, 2),
            shared_capacity_range=self.shared_capacity_range,
            private_capacity_range=self.private_capacity_range,
            shared_coeff_range=self.shared_coeff_range,
            private_coeff_range=self.private_coeff_range,
            utility_range=self.utility_range,
            demand_window=self.demand_window,
            demand_floor=self.demand_floor,
        )


def generate(seed: int, params: GenParams | None = None) -> Instance:
    """Draw a full instance (structure plus demands) for the given seed."""
    params = params or GenParams()
    struct_ss, demand_ss = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(struct_ss)
    m = params.n_shared
    capacity = rng.uniform(*params.shared_capacity_range, size=m)

    parties = []
    for _ in range(params.n_parties):
        c_k = int(rng.integers(params.private_capacity_count[0],
                               params.private_capacity_count[1] + 1))
        n_k = int(rng.integers(params.product_count[0], params.product_count[1] + 1))
        b_cap = rng.uniform(*params.private_capacity_range, size=c_k)
        a_mat = rng.uniform(*params.shared_coeff_range, size=(m, n_k))
        b_mat = rng.uniform(*params.private_coeff_range, size=(c_k, n_k))
        util = rng.uniform(*params.utility_range, size=n_k)
        parties.append(
            PartyData(
                shared_coeff=a_mat,
                private_coeff=np.vstack([b_mat, -np.eye(n_k)]),
                private_rhs=np.concatenate([b_cap, np.zeros(n_k)]),
                utility=util,
                allot_cap=capacity.copy(),
                row_kinds=("capacity",) * c_k + ("nonneg",) * n_k,
            )
        )
    inst = Instance(
        capacity=capacity,
        parties=tuple(parties),
        meta={"generator": {"seed": int(seed), "params": _params_dict(params)}},
    )
    report = validate_instance(inst)
    if not report.ok:
        raise AssertionError(f"generator produced an invalid instance: {report.violations}")
    return attach_demands(inst, demand_ss, window=params.demand_window,
                          floor=params.demand_floor)


def attach_demands(inst: Instance, seed, window: tuple[float, float] = (0.5, 1.5),
                   floor: float = 1.0) -> Instance:
    """Draw per-product demands around the demand-free optimum and append rows.

    A product whose demand-free optimum is below the floor gets a demand
    drawn around the floor instead, keeping demands bounded away from zero.
    The zero solution stays feasible, so attaching demands never breaks
    feasibility; it can only lower the optimum.
    """
    rng = np.random.default_rng(seed)
    _, x_hat = solve_original(inst)
    parties = []
    for k, p in enumerate(inst.parties):
        n_k = p.n_vars
        anchor = np.maximum(x_hat[k], floor)
        demand = rng.uniform(window[0] * anchor, window[1] * anchor)
        demand_block = np.eye(n_k)
        if p.row_kinds is not None:
            kinds = np.array(p.row_kinds)
            keep_head = kinds != "nonneg"
            head_rows = p.private_coeff[keep_head]
            head_rhs = p.private_rhs[keep_head]
            tail_rows = p.private_coeff[~keep_head]
            tail_rhs = p.private_rhs[~keep_head]
            new_B = np.vstack([head_rows, demand_block, tail_rows])
            new_b = np.concatenate([head_rhs, demand, tail_rhs])
            new_kinds = (
                tuple(kinds[keep_head]) + ("demand",) * n_k + tuple(kinds[~keep_head])
            )
        else:
            new_B = np.vstack([p.private_coeff, demand_block])
            new_b = np.concatenate([p.private_rhs, demand])
            new_kinds = None
        parties.append(
            PartyData(
                shared_coeff=p.shared_coeff, private_coeff=new_B, private_rhs=new_b,
                utility=p.utility, allot_cap=p.allot_cap, row_kinds=new_kinds,
            )
        )
    return Instance(capacity=inst.capacity, parties=tuple(parties), meta=inst.meta)


def scenario_bounds(inst: Instance, party1_share: float, market: float, seed) -> Instance:
    """Install scenario allotment caps.

    Party 1 claims exactly ``party1_share`` of every shared capacity. The
    remaining parties split the remaining (market - share) mass through a
    normalized-uniform draw per resource component, resampled until every
    cap stays below the capacity. A market factor equal to the party count
    means the aggressive scenario: every cap equals the full capacity.
    """
    K = inst.n_parties
    c = inst.capacity
    if not 0 < party1_share <= 1:
        raise ValueError("party1_share must lie in (0, 1]")
    if market < party1_share:
        raise ValueError("market factor must cover party 1's share")
    if market > K:
        raise ValueError("market factor cannot exceed the party count")

    if market == K:
        caps = [c.copy() for _ in range(K)]
    else:
        rng = np.random.default_rng(seed)
        caps = [party1_share * c]
        mass = market - party1_share
        if K == 1:
            if abs(mass) > 1e-12:
                raise ValueError("single-party instance cannot absorb a remaining market mass")
        else:
            weights = np.empty((K - 1, inst.m))
            for i in range(inst.m):
                for _ in range(1000):
                    g = rng.uniform(size=K - 1)
                    w = g / g.sum()
                    if np.all(w * mass <= 1.0):
                        break
                else:
                    raise RuntimeError("could not draw valid scenario caps")
                weights[:, i] = w
            for k in range(K - 1):
                caps.append(weights[k] * mass * c)

    parties = tuple(
        PartyData(
            shared_coeff=p.shared_coeff, private_coeff=p.private_coeff,
            private_rhs=p.private_rhs, utility=p.utility,
            allot_cap=caps[k], row_kinds=p.row_kinds,
        )
        for k, p in enumerate(inst.parties)
    )
    meta = dict(inst.meta or {})
    meta["scenario"] = {"party1_share": party1_share, "market": market}
    return Instance(capacity=c, parties=parties, meta=meta)


def _params_dict(params: GenParams) -> dict:
    doc = asdict(params)
    return {k: list(v) if isinstance(v, tuple) else v for k, v in doc.items()}
