"""Dual-decomposition loop over price updates from released allotments.

Three modes share one loop. In the data-hiding mode parties release their
true allotments; in the two differentially private modes they release
noisy ones. The only bytes crossing the party boundary are (t, price)
inbound and (t, released allotment) outbound; everything else (true
allotments, dual values, the primal surrogate) travels on a measurement
channel owned by the harness and never feeds the price update.

The price is left unprojected: the coupling constraint is an equality, so
its multiplier is sign-free, and the allotment box keeps every party
response bounded regardless.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable

import numpy as np

from .model import Instance, PartyData
from .privacy import (
    BudgetLedger,
    NoiseStream,
    PrivacyBudgetExhausted,
    PrivacyConfig,
    Regime,
    party_noise_scale,
    privacy_spent,
)
from .subproblem import PartySolver, SubproblemResult, perturb_allotment


class Mode(Enum):
    DATA_HIDING = "data-hiding"
    PURE_DP = "pure"
    APPROX_DP = "approx"


# --- step-length schemes ----------------------------------------------------


@dataclass(frozen=True)
class Diminishing:
    nu0: float = 1.0


@dataclass(frozen=True)
class Constant:
    nu: float


@dataclass(frozen=True)
class TheoremConstant:
    M: float
    B: float
    T: int


StepScheme = Diminishing | Constant | TheoremConstant


def step_length(scheme: StepScheme, t: int) -> float:
    """Step length at (1-based) iteration t."""
    if isinstance(scheme, Diminishing):
        if t < 1:
            raise ValueError("diminishing steps start at t = 1")
        return scheme.nu0 / math.sqrt(t)
    if isinstance(scheme, Constant):
        return scheme.nu
    if isinstance(scheme, TheoremConstant):
        return scheme.M / (scheme.B * math.sqrt(scheme.T))
    raise TypeError(f"unknown step scheme {scheme!r}")


def theorem_B(config: PrivacyConfig, sigma: float, s_bar_total_norm: float) -> float:
    """Subgradient second-moment bound used by the constant-step analysis."""
    T, eps = config.iteration_cap, config.epsilon
    if config.regime is Regime.PURE:
        return math.sqrt(2.0 * T * T * sigma / eps**2 + s_bar_total_norm**2)
    return math.sqrt(
        (8.0 * T / eps**2) * math.log(math.e + eps / config.delta) * sigma
        + s_bar_total_norm**2
    )


def theorem_step(M: float, config: PrivacyConfig, sigma: float,
                 s_bar_total_norm: float) -> TheoremConstant:
    return TheoremConstant(M=M, B=theorem_B(config, sigma, s_bar_total_norm),
                           T=config.iteration_cap)


# --- state and records ------------------------------------------------------


@dataclass(frozen=True)
class DualState:
    lam: np.ndarray
    t: int
    scheme: StepScheme

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        if not np.all(np.isfinite(lam)):
            raise ValueError("price vector must be finite")
        object.__setattr__(self, "lam", lam)


def dual_update(state: DualState, capacity: np.ndarray, released) -> DualState:
    """Price update from released allotments: lam - nu * (c - sum released)."""
    capacity = np.asarray(capacity, dtype=float)
    total = np.zeros_like(capacity)
    for s in released:
        s = np.asarray(s, dtype=float)
        if s.shape != capacity.shape:
            raise ValueError(f"released allotment shape {s.shape} != capacity {capacity.shape}")
        total += s
    t_next = state.t + 1
    nu = step_length(state.scheme, t_next)
    lam_new = state.lam - nu * (capacity - total)
    return DualState(lam=lam_new, t=t_next, scheme=state.scheme)


@dataclass(frozen=True)
class IterateRecord:
    t: int
    lambda_before: np.ndarray
    released: tuple[np.ndarray, ...]
    # measurement channel (harness only):
    dual_value: float
    primal_surrogate: float
    overflow: np.ndarray
    s_true: tuple[np.ndarray, ...]


# --- message contract -------------------------------------------------------


@dataclass(frozen=True)
class PriceMessage:
    t: int
    price: np.ndarray


@dataclass(frozen=True)
class AllotmentMessage:
    t: int
    allotment: np.ndarray


class PartyAgent:
    """Owns one party's data; answers price messages with released allotments."""

    def __init__(self, party: PartyData, index: int, noise_scale: float, master_seed: int,
                 measure: Callable[[int, int, SubproblemResult], None] | None = None):
        self.index = index
        self.noise_scale = noise_scale
        self.master_seed = master_seed
        self._solver = PartySolver(party, index=index)
        self._measure = measure
        self._dim = party.n_shared

    def respond(self, msg: PriceMessage) -> AllotmentMessage:
        res = self._solver.solve(msg.price)
        if self._measure is not None:
            self._measure(self.index, msg.t, res)
        noise = NoiseStream(self.master_seed, self.index, msg.t, self.noise_scale).sample(self._dim)
        return AllotmentMessage(t=msg.t, allotment=perturb_allotment(res.s, noise))


# --- run --------------------------------------------------------------------


@dataclass
class RunTrace:
    mode: Mode
    seed: int
    scheme: StepScheme
    capacity: np.ndarray
    allot_cap_l1: tuple[float, ...]
    records: list[IterateRecord] = field(default_factory=list)
    config: PrivacyConfig | None = None
    message_log: list[dict] | None = None

    @property
    def iterations(self) -> int:
        return len(self.records)

    def dual_values(self) -> np.ndarray:
        return np.array([r.dual_value for r in self.records])

    @property
    def best_index(self) -> int:
        return int(np.argmin(self.dual_values()))


def run(
    inst: Instance,
    mode: Mode,
    config: PrivacyConfig | None = None,
    max_iters: int | None = None,
    seed: int = 0,
    step: StepScheme | None = None,
    lambda0: np.ndarray | None = None,
    collect_messages: bool = False,
) -> RunTrace:
    """Execute the decomposition loop and return the full measured trace."""
    if step is None:
        step = Diminishing(1.0)
    if mode is Mode.DATA_HIDING:
        if max_iters is None:
            raise ValueError("data-hiding mode needs an explicit iteration count")
        scales = [0.0] * inst.n_parties
        ledger = None
    else:
        if config is None:
            raise ValueError(f"{mode.value} mode needs a privacy configuration")
        want = Regime.PURE if mode is Mode.PURE_DP else Regime.APPROX
        if config.regime is not want:
            raise ValueError(f"mode {mode.value} does not match regime {config.regime.value}")
        if max_iters is None:
            max_iters = config.iteration_cap
        if max_iters > config.iteration_cap:
            raise PrivacyBudgetExhausted(
                f"privacy budget exhausted: requested {max_iters} iterations, "
                f"cap is {config.iteration_cap}"
            )
        scales = [party_noise_scale(config, p) for p in inst.parties]
        ledger = BudgetLedger(config)

    capacity = inst.capacity
    lam = np.zeros(inst.m) if lambda0 is None else np.asarray(lambda0, dtype=float).copy()
    state = DualState(lam=lam, t=0, scheme=step)

    measured: dict[int, SubproblemResult] = {}

    def record_measurement(k: int, t: int, res: SubproblemResult) -> None:
        measured[k] = res

    agents = [
        PartyAgent(p, k, scales[k], seed, measure=record_measurement)
        for k, p in enumerate(inst.parties)
    ]
    trace = RunTrace(
        mode=mode, seed=seed, scheme=step, capacity=capacity,
        allot_cap_l1=tuple(float(np.abs(p.allot_cap).sum()) for p in inst.parties),
        config=config, message_log=[] if collect_messages else None,
    )

    for it in range(1, max_iters + 1):
        if ledger is not None:
            ledger.charge(1)
        msg = PriceMessage(t=it, price=state.lam.copy())
        released: list[np.ndarray] = []
        for agent in agents:
            reply = agent.respond(msg)
            released.append(reply.allotment)
            if collect_messages:
                trace.message_log.append(
                    {"t": it, "direction": "to_party", "party": agent.index,
                     "price": msg.price.tolist()}
                )
                trace.message_log.append(
                    {"t": it, "direction": "to_coordinator", "party": agent.index,
                     "allotment": reply.allotment.tolist()}
                )

        s_true = tuple(measured[k].s for k in range(inst.n_parties))
        dual_value = float(capacity @ state.lam) + sum(
            measured[k].g_value for k in range(inst.n_parties)
        )
        primal = sum(
            float(inst.parties[k].utility @ measured[k].x) for k in range(inst.n_parties)
        )
        overflow = np.maximum(0.0, np.sum(s_true, axis=0) - capacity)
        trace.records.append(
            IterateRecord(
                t=it, lambda_before=state.lam.copy(), released=tuple(released),
                dual_value=dual_value, primal_surrogate=primal,
                overflow=overflow, s_true=s_true,
            )
        )
        state = dual_update(state, capacity, released)

    return trace


# --- summaries and serialization --------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


@dataclass(frozen=True)
class RunSummary:
    best_t: int
    best_dual: float
    z_p: float
    gap_pct: float
    received_fraction: tuple[float, ...]
    allotments: tuple[tuple[float, ...], ...]  # per-party claims at the best iterate
    overflow_at_best: tuple[float, ...]
    overflow_l1_at_best: float
    overflow_l1_mean: float
    iterations: int
    eps_spent: float
    delta_spent: float


def summarize(trace: RunTrace, z_p: float, weak_duality_tol: float = 1e-6) -> RunSummary:
    """Best-iterate summary; asserts weak duality on every measured iterate."""
    duals = trace.dual_values()
    slack = weak_duality_tol * (1.0 + abs(z_p))
    if float(duals.min()) < z_p - slack:
        raise ValueError(
            f"measured dual value {duals.min():.6g} undercuts the oracle optimum {z_p:.6g}"
        )
    best = int(np.argmin(duals))
    rec = trace.records[best]
    fractions = tuple(
        float(np.abs(s).sum()) / l1 if l1 > 0 else 0.0
        for s, l1 in zip(rec.s_true, trace.allot_cap_l1)
    )
    if trace.config is not None:
        eps_spent, delta_spent = privacy_spent(trace.config, trace.iterations)
    else:
        eps_spent, delta_spent = 0.0, 0.0
    return RunSummary(
        best_t=rec.t,
        best_dual=rec.dual_value,
        z_p=z_p,
        gap_pct=(rec.dual_value - z_p) / z_p * 100.0,
        received_fraction=fractions,
        allotments=tuple(tuple(s.tolist()) for s in rec.s_true),
        overflow_at_best=tuple(rec.overflow.tolist()),
        overflow_l1_at_best=float(rec.overflow.sum()),
        overflow_l1_mean=float(
            np.mean([r.overflow.sum() for r in trace.records])
        ),
        iterations=trace.iterations,
        eps_spent=eps_spent,
        delta_spent=delta_spent,
    )


def trace_csv_text(trace: RunTrace, z_p: float) -> str:
    """Fixed-format CSV: one row per iteration, 12 significant digits."""
    lines = ["t,dual_value,primal_surrogate,gap_pct,overflow_l1,lambda_norm"]
    for r in trace.records:
        gap = (r.dual_value - z_p) / z_p * 100.0
        lines.append(
            ",".join(
                [
                    str(r.t),
                    _fmt(r.dual_value),
                    _fmt(r.primal_surrogate),
                    _fmt(gap),
                    _fmt(float(r.overflow.sum())),
                    _fmt(float(np.linalg.norm(r.lambda_before))),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def write_trace_csv(trace: RunTrace, z_p: float, path: str | Path) -> None:
    Path(path).write_text(trace_csv_text(trace, z_p))


def summary_json_text(summary: RunSummary, trace: RunTrace, extra: dict | None = None) -> str:
    doc = {
        "mode": trace.mode.value,
        "seed": trace.seed,
        "iterations": summary.iterations,
        "step": _scheme_descr(trace.scheme),
        "z_p": summary.z_p,
        "best": {
            "t": summary.best_t,
            "dual_value": summary.best_dual,
            "gap_pct": summary.gap_pct,
            "received_fraction": list(summary.received_fraction),
            "allotments": [list(s) for s in summary.allotments],
            "overflow": list(summary.overflow_at_best),
            "overflow_l1": summary.overflow_l1_at_best,
        },
        "overflow_l1_mean": summary.overflow_l1_mean,
        "privacy": (
            {
                "regime": trace.config.regime.value,
                "epsilon": trace.config.epsilon,
                "delta": trace.config.delta,
                "iteration_cap": trace.config.iteration_cap,
                "eps_spent": summary.eps_spent,
                "delta_spent": summary.delta_spent,
            }
            if trace.config is not None
            else None
        ),
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_summary_json(summary: RunSummary, trace: RunTrace, path: str | Path,
                       extra: dict | None = None) -> None:
    Path(path).write_text(summary_json_text(summary, trace, extra))


def write_message_log(trace: RunTrace, path: str | Path) -> None:
    if trace.message_log is None:
        raise ValueError("run was executed without message collection")
    lines = [json.dumps(entry, sort_keys=True) for entry in trace.message_log]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def _scheme_descr(scheme: StepScheme) -> str:
    if isinstance(scheme, Diminishing):
        return f"diminishing:{_fmt(scheme.nu0)}"
    if isinstance(scheme, Constant):
        return f"constant:{_fmt(scheme.nu)}"
    return f"theorem:M={_fmt(scheme.M)},B={_fmt(scheme.B)},T={scheme.T}"
