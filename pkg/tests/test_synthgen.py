import numpy as np
import pytest

from dpalloc import (
    GenParams,
    Instance,
    attach_demands,
    generate,
    instance_to_json,
    scenario_bounds,
    solve_original,
    validate_instance,
)
from conftest import make_party


def test_fixed_seed_reproduces_identical_json():
    a = instance_to_json(generate(5))
    b = instance_to_json(generate(5))
    assert a == b
    assert instance_to_json(generate(6)) != a


def test_capacity_distribution():
    draws = np.concatenate([
        generate(seed, GenParams().tiny()).capacity for seed in range(1000)
    ])
    assert draws.min() >= 10.0
    assert draws.max() <= 20.0
    assert 14.5 <= draws.mean() <= 15.5


def test_generated_instances_validate():
    for seed in range(12):
        assert validate_instance(generate(seed)).ok


def test_dimensions_and_row_accounting():
    params = GenParams()
    for seed in range(6):
        inst = generate(seed, params)
        assert inst.n_parties == params.n_parties
        assert inst.m == params.n_shared
        for p in inst.parties:
            kinds = np.array(p.row_kinds)
            c_k = int(np.sum(kinds == "capacity"))
            n_dem = int(np.sum(kinds == "demand"))
            n_nn = int(np.sum(kinds == "nonneg"))
            assert params.private_capacity_count[0] <= c_k <= params.private_capacity_count[1]
            assert params.product_count[0] <= p.n_vars <= params.product_count[1]
            assert n_dem == p.n_vars
            assert n_nn == p.n_vars
            # the declared private-constraint count is demands plus capacities;
            # nonnegativity rows are bookkeeping extras
            assert p.n_private == c_k + 2 * p.n_vars
            assert tuple(kinds) == ("capacity",) * c_k + ("demand",) * n_dem + ("nonneg",) * n_nn
            assert np.all(p.shared_coeff >= 0) and np.all(p.shared_coeff <= 5)
            assert np.all(p.utility >= 50) and np.all(p.utility <= 150)
            assert np.array_equal(p.allot_cap, inst.capacity)


def test_default_cap_is_full_capacity():
    inst = generate(0)
    for p in inst.parties:
        assert np.array_equal(p.allot_cap, inst.capacity)


def test_demand_floor_for_idle_products():
    # a product with nonpositive utility is idle in the demand-free solve
    party = make_party(
        A=[[1.0]], B=np.vstack([np.ones((1, 1)), -np.eye(1)]), b=[5.0, 0.0],
        u=[-2.0], cap=[4.0], kinds=("capacity", "nonneg"),
    )
    inst = Instance(capacity=[4.0], parties=(party,))
    out = attach_demands(inst, np.random.SeedSequence(0))
    kinds = np.array(out.parties[0].row_kinds)
    d = out.parties[0].private_rhs[kinds == "demand"]
    assert 0.5 <= d[0] <= 1.5


def test_demands_keep_zero_feasible_and_lower_optimum():
    for seed in range(4):
        inst = generate(seed)
        assert np.all(np.concatenate([p.private_rhs for p in inst.parties]) >= 0)
        z_with, _ = solve_original(inst)
        no_demand = Instance(
            capacity=inst.capacity,
            parties=tuple(
                make_party(
                    A=p.shared_coeff,
                    B=p.private_coeff[np.array(p.row_kinds) != "demand"],
                    b=p.private_rhs[np.array(p.row_kinds) != "demand"],
                    u=p.utility, cap=p.allot_cap,
                )
                for p in inst.parties
            ),
        )
        z_without, _ = solve_original(no_demand)
        assert z_with <= z_without + 1e-9


def test_scenario_share_and_sum_exact():
    inst = generate(9)
    for share, market in ((0.5, 1.2), (0.3, 1.2), (0.15, 1.5)):
        scen = scenario_bounds(inst, share, market, np.random.SeedSequence([9, 1]))
        assert np.array_equal(scen.parties[0].allot_cap, share * inst.capacity)
        total = np.sum([p.allot_cap for p in scen.parties], axis=0)
        assert np.max(np.abs(total - market * inst.capacity)) <= 1e-12 * np.max(inst.capacity)
        for p in scen.parties:
            assert np.all(p.allot_cap >= 0)
            assert np.all(p.allot_cap <= inst.capacity + 1e-12)


def test_scenario_aggressive_market_gives_full_caps():
    inst = generate(9)
    scen = scenario_bounds(inst, 0.5, inst.n_parties, np.random.SeedSequence(0))
    for p in scen.parties:
        assert np.array_equal(p.allot_cap, inst.capacity)


def test_scenario_remaining_split_stays_interior():
    inst = generate(2)
    mass = 1.2 - 0.3
    for seed in range(100):
        scen = scenario_bounds(inst, 0.3, 1.2, np.random.SeedSequence([seed]))
        rest = np.array([p.allot_cap / inst.capacity for p in scen.parties[1:]])
        assert np.all(rest > 0)
        assert np.all(rest < mass + 1e-12)
        assert np.sum(rest, axis=0) == pytest.approx(np.full(inst.m, mass), abs=1e-12)


def test_scenario_validates_inputs():
    inst = generate(0)
    with pytest.raises(ValueError):
        scenario_bounds(inst, 0.0, 1.2, np.random.SeedSequence(0))
    with pytest.raises(ValueError):
        scenario_bounds(inst, 0.5, 0.4, np.random.SeedSequence(0))
    with pytest.raises(ValueError):
        scenario_bounds(inst, 0.5, 99.0, np.random.SeedSequence(0))


def test_tiny_params_shape():
    inst = generate(1, GenParams().tiny())
    assert inst.n_parties == 2
    assert inst.m == 2
    for p in inst.parties:
        assert p.n_vars == 2
        kinds = np.array(p.row_kinds)
        # declared count: demands + capacities <= 4 for brute-force tests
        assert int(np.sum(kinds != "nonneg")) <= 4
