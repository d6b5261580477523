import math

import numpy as np
import pytest

from dpalloc import BoundInputs, approx_bound, bound_inputs_from_instance, generate, pure_bound


def test_pure_bound_zero_distance():
    b = BoundInputs(M=0.0, sigma=1.0, s_bar_total_norm=1.0, iterations=10, epsilon=0.1)
    assert pure_bound(b) == 0.0


def test_pure_bound_unit_example():
    b = BoundInputs(M=1.0, sigma=1.0, s_bar_total_norm=0.0, iterations=2, epsilon=1.0)
    assert pure_bound(b) == pytest.approx(2.0)


def test_pure_bound_grows_with_iterations():
    inst = generate(5)
    base = bound_inputs_from_instance(inst, M=3.0, iterations=1, epsilon=0.1)
    # once 2 sigma / eps^2 > norm^2 / T^2 the bound is increasing in T
    t_grid = [t for t in (10, 20, 50, 100, 200, 500)
              if 2 * base.sigma / base.epsilon**2 > base.s_bar_total_norm**2 / t**2]
    vals = [
        pure_bound(BoundInputs(M=3.0, sigma=base.sigma,
                               s_bar_total_norm=base.s_bar_total_norm,
                               iterations=t, epsilon=0.1))
        for t in t_grid
    ]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_pure_bound_rejects_bad_epsilon():
    b = BoundInputs(M=1.0, sigma=1.0, s_bar_total_norm=1.0, iterations=10, epsilon=0.0)
    with pytest.raises(ValueError):
        pure_bound(b)


def test_approx_bound_reference_value():
    b = BoundInputs(M=1.0, sigma=1.0, s_bar_total_norm=1.0, iterations=100,
                    epsilon=0.1, delta=0.1)
    # independent arithmetic path: ln(e + 1) = 1 + log1p(1/e)
    expected = math.sqrt(800.0 * (1.0 + math.log1p(math.exp(-1.0))) + 0.01)
    assert approx_bound(b) == pytest.approx(expected, abs=1e-12 * expected)


def test_approx_bound_decreases_to_noise_floor():
    vals = []
    for t in (1, 5, 25, 125, 625, 10**5):
        vals.append(approx_bound(BoundInputs(M=2.0, sigma=3.0, s_bar_total_norm=4.0,
                                             iterations=t, epsilon=0.2, delta=0.1)))
    assert all(a > b for a, b in zip(vals, vals[1:]))
    floor = 2.0 * math.sqrt(8.0 * math.log(math.e + 2.0) * 3.0 / 0.04)
    assert vals[-1] == pytest.approx(floor, rel=1e-3)
    assert all(v > floor for v in vals)


def test_approx_bound_decreases_in_delta():
    a = approx_bound(BoundInputs(M=1.0, sigma=1.0, s_bar_total_norm=1.0,
                                 iterations=50, epsilon=0.2, delta=0.05))
    b = approx_bound(BoundInputs(M=1.0, sigma=1.0, s_bar_total_norm=1.0,
                                 iterations=50, epsilon=0.2, delta=0.2))
    assert b < a


def test_approx_bound_range_checks():
    with pytest.raises(ValueError):
        approx_bound(BoundInputs(M=1.0, sigma=1.0, s_bar_total_norm=1.0,
                                 iterations=10, epsilon=0.9, delta=0.1))
    with pytest.raises(ValueError):
        approx_bound(BoundInputs(M=1.0, sigma=1.0, s_bar_total_norm=1.0,
                                 iterations=10, epsilon=0.1, delta=0.0))


def test_pure_eventually_dominates_approx():
    kwargs = dict(M=1.0, sigma=2.0, s_bar_total_norm=3.0, epsilon=0.2, delta=0.1)
    crossed = False
    for t in (1, 10, 100, 1000):
        b = BoundInputs(iterations=t, **kwargs)
        if pure_bound(b) >= approx_bound(b):
            crossed = True
    assert crossed
    big = BoundInputs(iterations=10**5, **kwargs)
    assert pure_bound(big) > approx_bound(big)


def test_inputs_from_instance_norm_knob():
    inst = generate(1)
    l2 = bound_inputs_from_instance(inst, M=1.0, iterations=10, epsilon=0.1)
    l1 = bound_inputs_from_instance(inst, M=1.0, iterations=10, epsilon=0.1, norm="l1")
    linf = bound_inputs_from_instance(inst, M=1.0, iterations=10, epsilon=0.1, norm="linf")
    sigma_by_hand = sum(float(np.linalg.norm(p.allot_cap)) ** 2 for p in inst.parties)
    total = np.sum([p.allot_cap for p in inst.parties], axis=0)
    assert l2.sigma == pytest.approx(sigma_by_hand, rel=1e-12)
    assert l2.s_bar_total_norm == pytest.approx(float(np.linalg.norm(total)), rel=1e-12)
    assert l1.sigma > l2.sigma > linf.sigma


def test_inputs_validation():
    with pytest.raises(ValueError):
        BoundInputs(M=-1.0, sigma=1.0, s_bar_total_norm=1.0, iterations=10, epsilon=0.1)
    with pytest.raises(ValueError):
        BoundInputs(M=1.0, sigma=1.0, s_bar_total_norm=1.0, iterations=0, epsilon=0.1)
