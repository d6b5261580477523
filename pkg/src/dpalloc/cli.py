"""Command-line harness: gen, solve, run, sweep, bounds.

Exit codes: 0 success, 2 usage problem, 3 infeasible or unbounded instance,
4 privacy budget exhausted, 5 numerical failure inside the solver.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bounds import approx_bound, bound_inputs_from_instance, pure_bound
from .coordinator import (
    Constant,
    Diminishing,
    Mode,
    run,
    summarize,
    theorem_step,
    write_message_log,
    write_summary_json,
    write_trace_csv,
)
from .lp import LpNumericalError
from .model import load_instance, save_instance, validate_instance
from .oracle import (
    InfeasibleInstanceError,
    UnboundedInstanceError,
    distance_M,
    solve_centralized,
    solve_dual_lp,
)
from .privacy import PrivacyBudgetExhausted, PrivacyConfig, Regime
from .sweep import (
    DEFAULT_DELTAS,
    DEFAULT_EPSILONS,
    DEFAULT_SHARES,
    grid_cells,
    run_sweep,
    sweep_csv_text,
)
from .synthgen import GenParams, generate, scenario_bounds

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_BUDGET = 4
EXIT_NUMERICAL = 5


class UsageError(Exception):
    pass


def _load_params_file(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"params file not found: {path}")
    if p.suffix.lower() == ".toml":
        try:
            import tomllib  # py>=3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        doc = tomllib.loads(p.read_text())
    else:
        doc = json.loads(p.read_text())
    if not isinstance(doc, dict):
        raise UsageError("params file must contain a table/object")
    return doc


def _gen_params(args) -> GenParams:
    params = GenParams()
    if args.params:
        doc = _load_params_file(args.params)
        known = set(params.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise UsageError(f"unknown params file keys: {sorted(unknown)}")
        doc = {k: tuple(v) if isinstance(v, list) else v for k, v in doc.items()}
        params = replace(params, **doc)
    if args.k is not None:
        params = replace(params, n_parties=args.k)
    if args.m is not None:
        params = replace(params, n_shared=args.m)
    if args.products is not None:
        params = replace(params, product_count=tuple(args.products))
    if args.caps is not None:
        params = replace(params, private_capacity_count=tuple(args.caps))
    return params


def _cmd_gen(args) -> int:
    params = _gen_params(args)
    inst = generate(args.seed, params)
    if args.share is not None or args.market is not None:
        share = args.share if args.share is not None else DEFAULT_SHARES[0]
        market = args.market if args.market is not None else 1.2
        scen_seed = np.random.SeedSequence([int(args.seed), 7000])
        inst = scenario_bounds(inst, share, market, scen_seed)
    report = validate_instance(inst)
    if not report.ok:
        raise AssertionError(f"generated instance failed validation: {report.violations}")
    save_instance(inst, args.out)
    print(f"wrote instance with K={inst.n_parties}, m={inst.m} to {args.out}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    central = solve_centralized(inst)
    dual = solve_dual_lp(inst)
    resid = abs(central.z_p - dual.z_d) / max(1.0, abs(central.z_p))
    print(f"Z_P = {central.z_p:.12g}")
    print(f"Z_D = {dual.z_d:.12g}")
    print(f"lambda* = {np.array2string(central.lam, precision=8)}")
    print(f"strong_duality_residual = {resid:.3e}")
    return EXIT_OK


def _parse_step(spec: str, inst, config, lam_star):
    if spec.startswith("diminishing"):
        _, _, nu0 = spec.partition(":")
        return Diminishing(float(nu0) if nu0 else 1.0)
    if spec.startswith("constant:"):
        return Constant(float(spec.split(":", 1)[1]))
    if spec == "theorem":
        if config is None:
            raise UsageError("theorem step requires a privacy configuration")
        M = float(np.linalg.norm(lam_star))
        b = bound_inputs_from_instance(inst, M, config.iteration_cap,
                                       config.epsilon, config.delta)
        return theorem_step(M, config, b.sigma, b.s_bar_total_norm)
    raise UsageError(f"unknown step spec: {spec}")


def _cmd_run(args) -> int:
    inst = load_instance(args.instance)
    mode = {m.value: m for m in Mode}[args.mode]
    config = None
    if mode is not Mode.DATA_HIDING:
        regime = Regime.PURE if mode is Mode.PURE_DP else Regime.APPROX
        try:
            config = PrivacyConfig(regime, args.eps, args.delta, args.T)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    central = solve_centralized(inst)
    step = _parse_step(args.step, inst, config, central.lam)
    iters = args.iters
    if iters is None:
        if config is None:
            raise UsageError("data-hiding mode requires --iters")
        iters = config.iteration_cap
    trace = run(inst, mode, config=config, max_iters=iters, seed=args.seed, step=step,
                collect_messages=args.message_log is not None)
    summary = summarize(trace, central.z_p)
    extra: dict = {}
    if config is not None:
        M = distance_M(inst, np.zeros(inst.m), central)
        b = bound_inputs_from_instance(inst, M, config.iteration_cap,
                                       config.epsilon, config.delta)
        value = pure_bound(b) if config.regime is Regime.PURE else approx_bound(b)
        extra["bound"] = {
            "kind": config.regime.value, "M": M, "sigma": b.sigma,
            "s_bar_total_norm": b.s_bar_total_norm, "value": value,
        }
    prefix = args.out_prefix
    write_trace_csv(trace, central.z_p, f"{prefix}_trace.csv")
    write_summary_json(summary, trace, f"{prefix}_summary.json", extra=extra)
    if args.message_log is not None:
        write_message_log(trace, args.message_log)
    print(
        f"mode={mode.value} iters={trace.iterations} best_t={summary.best_t} "
        f"gap_pct={summary.gap_pct:.6g}"
    )
    return EXIT_OK


def _cmd_sweep(args) -> int:
    params = _gen_params(args)
    cells = grid_cells(tuple(args.eps_grid), tuple(args.delta_grid), args.include_pure)
    aggregates, audit_log = run_sweep(
        params=params, cells=cells, shares=tuple(args.shares), market=args.market,
        runs=args.runs, base_seed=args.seed, iteration_cap=args.T, nu0=args.nu0,
        workers=args.workers, audit=args.audit_log is not None,
    )
    Path(args.out).write_text(sweep_csv_text(aggregates))
    if args.audit_log is not None:
        lines = [json.dumps(e, sort_keys=True) for e in (audit_log or [])]
        Path(args.audit_log).write_text("\n".join(lines) + ("\n" if lines else ""))
    print(f"wrote {len(aggregates)} aggregate rows to {args.out}")
    return EXIT_OK


def _cmd_bounds(args) -> int:
    inst = load_instance(args.instance)
    central = solve_centralized(inst)
    M = distance_M(inst, np.zeros(inst.m), central)
    b = bound_inputs_from_instance(inst, M, args.T, args.eps, args.delta)
    doc = {
        "M": M,
        "sigma": b.sigma,
        "s_bar_total_norm": b.s_bar_total_norm,
        "T": args.T,
        "epsilon": args.eps,
        "delta": args.delta,
        "pure_bound": pure_bound(b),
        "approx_bound": (
            approx_bound(b) if 0 < args.eps < 0.9 and 0 < args.delta <= 1 else None
        ),
    }
    text = json.dumps(doc, sort_keys=True, indent=2)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return EXIT_OK


def _add_gen_like_flags(sub):
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--params", type=str, default=None, help="TOML/JSON generator params")
    sub.add_argument("--k", type=int, default=None, help="override party count")
    sub.add_argument("--m", type=int, default=None, help="override shared-resource count")
    sub.add_argument("--products", type=int, nargs=2, default=None,
                     help="override product-count range (inclusive)")
    sub.add_argument("--caps", type=int, nargs=2, default=None,
                     help="override private-capacity-count range (inclusive)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dpalloc",
                                 description="multi-party resource sharing harness")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a seeded instance file")
    _add_gen_like_flags(g)
    g.add_argument("--share", type=float, default=None, help="party 1 claim fraction")
    g.add_argument("--market", type=float, default=None, help="total claim factor")
    g.add_argument("--out", type=str, required=True)
    g.set_defaults(func=_cmd_gen)

    s = sub.add_parser("solve", help="centralized oracle and explicit dual")
    s.add_argument("instance")
    s.set_defaults(func=_cmd_solve)

    r = sub.add_parser("run", help="run the decomposition loop on an instance")
    r.add_argument("instance")
    r.add_argument("--mode", choices=[m.value for m in Mode], default="data-hiding")
    r.add_argument("--eps", type=float, default=0.1)
    r.add_argument("--delta", type=float, default=0.0)
    r.add_argument("--T", type=int, default=100, help="privacy iteration cap")
    r.add_argument("--iters", type=int, default=None)
    r.add_argument("--step", type=str, default="diminishing:1",
                   help="diminishing[:NU0] | constant:NU | theorem")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out-prefix", type=str, default="run")
    r.add_argument("--message-log", type=str, default=None)
    r.set_defaults(func=_cmd_run)

    w = sub.add_parser("sweep", help="privacy-parameter grid over seeded runs")
    _add_gen_like_flags(w)
    w.add_argument("--eps-grid", type=float, nargs="+", default=list(DEFAULT_EPSILONS))
    w.add_argument("--delta-grid", type=float, nargs="+", default=list(DEFAULT_DELTAS))
    w.add_argument("--include-pure", action="store_true")
    w.add_argument("--shares", type=float, nargs="+", default=list(DEFAULT_SHARES))
    w.add_argument("--market", type=float, default=1.2)
    w.add_argument("--runs", type=int, default=100)
    w.add_argument("--T", type=int, default=100)
    w.add_argument("--nu0", type=float, default=1.0)
    w.add_argument("--workers", type=int, default=None)
    w.add_argument("--out", type=str, required=True)
    w.add_argument("--audit-log", type=str, default=None)
    w.set_defaults(func=_cmd_sweep)

    b = sub.add_parser("bounds", help="evaluate the theoretical gap bounds")
    b.add_argument("instance")
    b.add_argument("--eps", type=float, required=True)
    b.add_argument("--delta", type=float, default=0.0)
    b.add_argument("--T", type=int, default=100)
    b.add_argument("--out", type=str, default=None)
    b.set_defaults(func=_cmd_bounds)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleInstanceError, UnboundedInstanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except PrivacyBudgetExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except LpNumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
