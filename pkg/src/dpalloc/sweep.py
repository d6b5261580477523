"""Batch experiment machinery: seeded run grids and their aggregation.

A sweep evaluates a grid of privacy settings against scenario instances over
many seeded runs and reports mean/min/max optimality gaps plus received
fractions per party. Runs are pure functions of their seed, so seeds can be
farmed out to worker processes without affecting results.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .coordinator import Diminishing, Mode, run, summarize
from .model import Instance
from .oracle import solve_centralized
from .privacy import PrivacyConfig, Regime
from .synthgen import GenParams, generate, scenario_bounds

DEFAULT_EPSILONS = (0.05, 0.10, 0.15, 0.20, 0.25)
DEFAULT_DELTAS = (0.05, 0.10, 0.15, 0.20)
DEFAULT_SHARES = (0.50, 0.30, 0.15)

Cell = tuple[str, float, float]  # (regime, epsilon, delta)


def grid_cells(epsilons=DEFAULT_EPSILONS, deltas=DEFAULT_DELTAS,
               include_pure: bool = False) -> list[Cell]:
    cells: list[Cell] = []
    if include_pure:
        cells.extend(("pure", eps, 0.0) for eps in epsilons)
    cells.extend(("approx", eps, delta) for delta in deltas for eps in epsilons)
    return cells


@dataclass(frozen=True)
class CellAggregate:
    share: float
    market: float
    regime: str
    epsilon: float
    delta: float
    runs: int
    gap_mean_pct: float
    gap_min_pct: float
    gap_max_pct: float
    overflow_l1_mean: float
    frac_mean: tuple[float, ...]       # mean received fraction per party
    frac_min: tuple[float, ...]        # per-party minimum across runs
    frac_max: tuple[float, ...]        # per-party maximum across runs
    sbar_frac_mean: tuple[float, ...]  # mean claimed share of capacity per party


def _mode_config(cell: Cell, iteration_cap: int) -> tuple[Mode, PrivacyConfig]:
    regime, eps, delta = cell
    if regime == "pure":
        return Mode.PURE_DP, PrivacyConfig(Regime.PURE, eps, 0.0, iteration_cap)
    return Mode.APPROX_DP, PrivacyConfig(Regime.APPROX, eps, delta, iteration_cap)


def _scenario_instance(seed: int, params: GenParams, share: float, market: float,
                       share_index: int) -> Instance:
    base = generate(seed, params)
    scen_seed = np.random.SeedSequence([int(seed), 7000 + share_index])
    return scenario_bounds(base, share, market, scen_seed)


def _sweep_seed_worker(args):
    (seed, params, shares, market, cells, cap, nu0, audit) = args
    out = {}
    audit_log = None
    for si, share in enumerate(shares):
        inst = _scenario_instance(seed, params, share, market, si)
        z_p = solve_centralized(inst).z_p
        sbar_fracs = tuple(
            float(np.abs(p.allot_cap).sum() / np.abs(inst.capacity).sum())
            for p in inst.parties
        )
        for ci, cell in enumerate(cells):
            mode, config = _mode_config(cell, cap)
            want_audit = audit and si == 0 and ci == 0
            trace = run(inst, mode, config=config, max_iters=cap, seed=seed,
                        step=Diminishing(nu0), collect_messages=want_audit)
            summ = summarize(trace, z_p)
            out[(si, ci)] = (
                summ.gap_pct, summ.received_fraction, sbar_fracs, summ.overflow_l1_at_best
            )
            if want_audit:
                audit_log = trace.message_log
    return seed, out, audit_log


def run_sweep(
    params: GenParams | None = None,
    cells: list[Cell] | None = None,
    shares=DEFAULT_SHARES,
    market: float = 1.2,
    runs: int = 100,
    base_seed: int = 0,
    iteration_cap: int = 100,
    nu0: float = 1.0,
    workers: int | None = None,
    audit: bool = False,
):
    """Run the full grid; returns (aggregates, audit_message_log_or_None)."""
    params = params or GenParams()
    cells = cells if cells is not None else grid_cells()
    shares = tuple(shares)
    if workers is None:
        workers = min(os.cpu_count() or 1, runs)

    jobs = [
        (base_seed + i, params, shares, market, cells, iteration_cap, nu0,
         audit and i == 0)
        for i in range(runs)
    ]
    results = {}
    audit_log = None
    if workers > 1 and runs > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for seed, out, log in pool.map(_sweep_seed_worker, jobs, chunksize=1):
                results[seed] = out
                if log is not None:
                    audit_log = log
    else:
        for job in jobs:
            seed, out, log = _sweep_seed_worker(job)
            results[seed] = out
            if log is not None:
                audit_log = log

    n_parties = params.n_parties
    aggregates = []
    seeds = [base_seed + i for i in range(runs)]
    for si, share in enumerate(shares):
        for ci, cell in enumerate(cells):
            gaps = np.array([results[s][(si, ci)][0] for s in seeds])
            fracs = np.array([results[s][(si, ci)][1] for s in seeds])
            sbars = np.array([results[s][(si, ci)][2] for s in seeds])
            overf = np.array([results[s][(si, ci)][3] for s in seeds])
            regime, eps, delta = cell
            aggregates.append(
                CellAggregate(
                    share=share, market=market, regime=regime, epsilon=eps, delta=delta,
                    runs=runs,
                    gap_mean_pct=float(gaps.mean()),
                    gap_min_pct=float(gaps.min()),
                    gap_max_pct=float(gaps.max()),
                    overflow_l1_mean=float(overf.mean()),
                    frac_mean=tuple(float(v) for v in fracs.mean(axis=0)),
                    frac_min=tuple(float(v) for v in fracs.min(axis=0)),
                    frac_max=tuple(float(v) for v in fracs.max(axis=0)),
                    sbar_frac_mean=tuple(float(v) for v in sbars.mean(axis=0)),
                )
            )
    assert all(len(a.frac_mean) == n_parties for a in aggregates)
    return aggregates, audit_log


def sweep_csv_text(aggregates: list[CellAggregate]) -> str:
    if not aggregates:
        return "share,market,regime,epsilon,delta,runs\n"
    K = len(aggregates[0].frac_mean)
    cols = (
        ["share", "market", "regime", "epsilon", "delta", "runs",
         "gap_mean_pct", "gap_min_pct", "gap_max_pct", "overflow_l1_mean"]
        + [f"frac_mean_{k + 1}" for k in range(K)]
        + [f"sbar_frac_{k + 1}" for k in range(K)]
    )
    fmt = lambda x: format(float(x), ".12g")  # noqa: E731
    lines = [",".join(cols)]
    for a in aggregates:
        lines.append(",".join(
            [fmt(a.share), fmt(a.market), a.regime, fmt(a.epsilon), fmt(a.delta),
             str(a.runs), fmt(a.gap_mean_pct), fmt(a.gap_min_pct), fmt(a.gap_max_pct),
             fmt(a.overflow_l1_mean)]
            + [fmt(v) for v in a.frac_mean]
            + [fmt(v) for v in a.sbar_frac_mean]
        ))
    return "\n".join(lines) + "\n"


# --- noiseless convergence batches -------------------------------------------


def _convergence_worker(args):
    (seed, params, iterations, nu0) = args
    inst = generate(seed, params)
    z_p = solve_centralized(inst).z_p
    trace = run(inst, Mode.DATA_HIDING, max_iters=iterations, seed=seed,
                step=Diminishing(nu0))
    gaps = (trace.dual_values() - z_p) / z_p * 100.0
    return seed, np.minimum.accumulate(gaps)


def convergence_curves(
    params: GenParams | None = None,
    runs: int = 100,
    iterations: int = 1000,
    base_seed: int = 0,
    nu0: float = 1.0,
    workers: int | None = None,
) -> np.ndarray:
    """Best-so-far gap curves, one row per seeded noiseless run."""
    params = params or GenParams()
    if workers is None:
        workers = min(os.cpu_count() or 1, runs)
    jobs = [(base_seed + i, params, iterations, nu0) for i in range(runs)]
    rows = {}
    if workers > 1 and runs > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for seed, curve in pool.map(_convergence_worker, jobs, chunksize=1):
                rows[seed] = curve
    else:
        for job in jobs:
            seed, curve = _convergence_worker(job)
            rows[seed] = curve
    return np.vstack([rows[base_seed + i] for i in range(runs)])
