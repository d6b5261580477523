"""Self-contained dense linear-programming solver.

Two-phase primal simplex on a dense tableau. The entering rule is largest
reduced cost with a largest-pivot-element ratio tie-break (deterministic),
falling back to Bland's rule after a pivot-count threshold so cycling cannot
occur. Free variables are split into positive and negative parts; variables
with a zero lower bound map directly onto the standard-form domain; every
finite nontrivial bound is rewritten as an explicit inequality row.

The solver is a pure function of its input: identical problems produce
bitwise-identical solutions.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from enum import Enum

import numpy as np

DEFAULT_TOL_FEAS = 1e-9
DEFAULT_TOL_GAP = 1e-7


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LpError(Exception):
    """Base class for solver failures."""


class LpNumericalError(LpError):
    """Pivot budget exhausted or invariants violated after a nominal solve."""


@dataclass(frozen=True)
class LpProblem:
    """Dense LP: optimize obj over {x : G x <= h, eq_G x = eq_h, lower <= x <= upper}."""

    sense: str                 # "max" or "min"
    obj: np.ndarray            # (n,)
    G: np.ndarray              # (p, n)
    h: np.ndarray              # (p,)
    eq_G: np.ndarray | None = None   # (q, n)
    eq_h: np.ndarray | None = None   # (q,)
    lower: np.ndarray | None = None  # (n,), default 0
    upper: np.ndarray | None = None  # (n,), default +inf

    def __post_init__(self):
        obj = np.asarray(self.obj, dtype=float)
        n = obj.size
        G = np.asarray(self.G, dtype=float).reshape(-1, n)
        h = np.asarray(self.h, dtype=float).reshape(-1)
        eq_G = (
            np.asarray(self.eq_G, dtype=float).reshape(-1, n)
            if self.eq_G is not None
            else np.zeros((0, n))
        )
        eq_h = (
            np.asarray(self.eq_h, dtype=float).reshape(-1)
            if self.eq_h is not None
            else np.zeros(0)
        )
        lower = (
            np.asarray(self.lower, dtype=float).reshape(-1)
            if self.lower is not None
            else np.zeros(n)
        )
        upper = (
            np.asarray(self.upper, dtype=float).reshape(-1)
            if self.upper is not None
            else np.full(n, np.inf)
        )
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', got {self.sense!r}")
        if not np.all(np.isfinite(obj)):
            raise ValueError("objective coefficients must be finite")
        if G.shape[0] != h.size:
            raise ValueError(f"G has {G.shape[0]} rows but h has {h.size} entries")
        if eq_G.shape[0] != eq_h.size:
            raise ValueError(f"eq_G has {eq_G.shape[0]} rows but eq_h has {eq_h.size} entries")
        if lower.size != n or upper.size != n:
            raise ValueError("bound vectors must match the variable count")
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound")
        for name, a in (("obj", obj), ("G", G), ("h", h), ("eq_G", eq_G),
                        ("eq_h", eq_h), ("lower", lower), ("upper", upper)):
            a.setflags(write=False)
        object.__setattr__(self, "obj", obj)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "eq_G", eq_G)
        object.__setattr__(self, "eq_h", eq_h)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n(self) -> int:
        return self.obj.size


@dataclass(frozen=True)
class LpSolution:
    """Solver outcome.

    For an optimal solve the dual vectors satisfy, up to tolerance,
    ``objective_value == h @ dual_ineq + eq_h @ dual_eq + dual_bound_value``
    where ``dual_bound_value`` collects the contribution of the inequality
    rows synthesized from finite variable bounds. ``dual_ineq`` is
    nonnegative for maximization problems and nonpositive for minimization.
    """

    status: LpStatus
    x: np.ndarray | None = None
    objective_value: float | None = None
    dual_ineq: np.ndarray | None = None
    dual_eq: np.ndarray | None = None
    dual_bound_value: float = 0.0
    pivots: int = 0


class _Standardized:
    """Obj-independent standard form min c z, A z = b, z >= 0 with b >= 0.

    Built once per constraint structure so repeated solves with varying
    objectives (the party subproblem across iterations) skip the setup and
    phase 1 entirely.
    """

    __slots__ = (
        "n", "p_user", "q", "n_primary", "split_cols", "neg_col_of",
        "n_struct", "n_slack", "n_rows", "A", "b", "flip_sign",
        "row_is_eq", "bound_row_rhs_start", "tableau0", "basis0",
        "rows_kept", "needs_phase1", "art_cols",
    )


def _standardize(problem: LpProblem) -> _Standardized:
    n = problem.n
    lower, upper = problem.lower, problem.upper

    # finite nontrivial bounds become explicit rows; a zero lower bound is the
    # native standard-form domain, negative/absent lower bounds force a split
    bound_rows: list[tuple[int, float, float]] = []  # (var, coeff, rhs)
    split = np.zeros(n, dtype=bool)
    for j in range(n):
        lb, ub = lower[j], upper[j]
        if lb == 0.0:
            pass
        elif np.isfinite(lb):
            bound_rows.append((j, -1.0, -lb))
            if lb < 0:
                split[j] = True
        else:
            split[j] = True
        if np.isfinite(ub):
            bound_rows.append((j, 1.0, ub))

    std = _Standardized()
    std.n = n
    std.p_user = problem.G.shape[0]
    std.q = problem.eq_G.shape[0]
    std.split_cols = split
    neg_col_of = np.full(n, -1, dtype=int)
    neg_col_of[split] = n + np.arange(int(split.sum()))
    std.neg_col_of = neg_col_of
    std.n_primary = n
    n_struct = n + int(split.sum())
    std.n_struct = n_struct

    p_all = std.p_user + len(bound_rows)
    q = std.q
    n_rows = p_all + q
    std.n_slack = p_all
    std.n_rows = n_rows
    std.bound_row_rhs_start = std.p_user

    G_all = np.zeros((p_all, n))
    h_all = np.zeros(p_all)
    G_all[: std.p_user] = problem.G
    h_all[: std.p_user] = problem.h
    for r, (j, coeff, rhs) in enumerate(bound_rows):
        G_all[std.p_user + r, j] = coeff
        h_all[std.p_user + r] = rhs

    rhs_user = np.concatenate([h_all, problem.eq_h])
    lhs_user = np.vstack([G_all, problem.eq_G]) if q else G_all
    row_is_eq = np.zeros(n_rows, dtype=bool)
    row_is_eq[p_all:] = True

    flip = rhs_user < 0
    flip_sign = np.where(flip, -1.0, 1.0)
    lhs = lhs_user * flip_sign[:, None]
    b = rhs_user * flip_sign

    # structural block: primary columns then negative parts of split variables
    A_struct = np.zeros((n_rows, n_struct))
    A_struct[:, :n] = lhs
    if split.any():
        A_struct[:, n:] = -lhs[:, split]

    A_slack = np.zeros((n_rows, p_all))
    A_slack[np.arange(p_all), np.arange(p_all)] = flip_sign[:p_all]

    needs_art = row_is_eq | flip
    art_rows = np.flatnonzero(needs_art)
    n_art = art_rows.size
    A_art = np.zeros((n_rows, n_art))
    A_art[art_rows, np.arange(n_art)] = 1.0

    A = np.hstack([A_struct, A_slack, A_art])
    std.A = A
    std.b = b
    std.flip_sign = flip_sign
    std.row_is_eq = row_is_eq
    std.needs_phase1 = n_art > 0
    std.art_cols = n_struct + p_all + np.arange(n_art)

    basis = np.empty(n_rows, dtype=int)
    basis[~needs_art] = n_struct + np.flatnonzero(~needs_art)
    basis[art_rows] = std.art_cols
    std.basis0 = basis
    std.tableau0 = None
    std.rows_kept = np.arange(n_rows)
    return std


def _run_simplex(T, basis, tol, bland_after, max_pivots, pivots, buf):
    """Minimize on tableau T in place. Returns (is_optimal, pivots).

    Largest-coefficient entering with a largest-pivot-element ratio
    tie-break; once the pivot count passes ``bland_after`` the loop switches
    to Bland's rule (lowest-index entering, lowest-basis-index leaving),
    which cannot cycle.
    """
    m = T.shape[0] - 1
    while True:
        red = T[-1, :-1]
        bland = pivots >= bland_after
        if not bland:
            j = int(np.argmin(red))
            if red[j] >= -tol:
                return True, pivots
        else:
            neg = np.flatnonzero(red < -tol)
            if neg.size == 0:
                return True, pivots
            j = int(neg[0])
        col = T[:m, j]
        pos = col > tol
        if not pos.any():
            return False, pivots  # unbounded direction along column j
        rhs = np.maximum(T[:m, -1], 0.0)
        ratios = np.full(m, np.inf)
        ratios[pos] = rhs[pos] / col[pos]
        rmin = ratios.min()
        cand = np.flatnonzero(ratios <= rmin + 1e-12 * (1.0 + rmin))
        if bland:
            i = int(cand[np.argmin(basis[cand])])
        else:
            i = int(cand[np.argmax(col[cand])])
        piv = T[i, j]
        T[i, :] /= piv
        colj = T[:, j].copy()
        colj[i] = 0.0
        np.outer(colj, T[i, :], out=buf)
        np.subtract(T, buf, out=T)
        T[:, j] = 0.0
        T[i, j] = 1.0
        basis[i] = j
        pivots += 1
        if pivots > max_pivots:
            raise LpNumericalError(
                f"pivot budget exhausted after {pivots} pivots"
            )


def _dump_tableau(label: str, T: np.ndarray, limit: int = 16) -> None:
    print(f"[lp] {label}: {T.shape[0] - 1} rows x {T.shape[1] - 1} cols", file=sys.stderr)
    if T.shape[0] <= limit and T.shape[1] <= 2 * limit:
        print(np.array2string(T, precision=4, suppress_small=True), file=sys.stderr)


def _phase1(std: _Standardized, tol, bland_after, max_pivots, debug=False):
    """Drive artificials to zero; returns (tableau, basis, kept_rows, pivots) or None if infeasible."""
    n_rows = std.n_rows
    n_cols = std.A.shape[1]
    T = np.empty((n_rows + 1, n_cols + 1))
    T[:n_rows, :n_cols] = std.A
    T[:n_rows, -1] = std.b
    c1 = np.zeros(n_cols)
    c1[std.art_cols] = 1.0
    art_rows = np.flatnonzero(np.isin(std.basis0, std.art_cols))
    T[-1, :n_cols] = c1 - std.A[art_rows].sum(axis=0)
    T[-1, -1] = -std.b[art_rows].sum()
    basis = std.basis0.copy()
    buf = np.empty_like(T)

    ok, pivots = _run_simplex(T, basis, tol, bland_after, max_pivots, 0, buf)
    if not ok:
        raise LpNumericalError("phase 1 reported an unbounded direction")
    phase1_value = -T[-1, -1]
    if debug:
        print(f"[lp] phase1 value {phase1_value:.3e} after {pivots} pivots", file=sys.stderr)
        _dump_tableau("phase1 final", T)
    if phase1_value > tol * (1.0 + float(np.abs(std.b).sum())) * 10.0:
        return None

    # pivot remaining artificials out of the basis; rows that cannot be
    # repaired are redundant and get dropped
    art_set = set(std.art_cols.tolist())
    struct_slack = std.n_struct + std.n_slack
    drop_rows = []
    for i in range(n_rows):
        if basis[i] in art_set:
            row = T[i, :struct_slack]
            cand = np.flatnonzero(np.abs(row) > 1e-7)
            if cand.size == 0:
                drop_rows.append(i)
                continue
            j = int(cand[0])
            piv = T[i, j]
            T[i, :] /= piv
            colj = T[:, j].copy()
            colj[i] = 0.0
            np.outer(colj, T[i, :], out=buf)
            np.subtract(T, buf, out=T)
            T[:, j] = 0.0
            T[i, j] = 1.0
            basis[i] = j
            pivots += 1

    keep = np.setdiff1d(np.arange(n_rows), np.array(drop_rows, dtype=int))
    T2 = np.empty((keep.size + 1, struct_slack + 1))
    T2[:-1, :struct_slack] = T[keep, :struct_slack]
    T2[:-1, -1] = T[keep, -1]
    T2[-1, :] = 0.0
    return T2, basis[keep], keep, pivots


def _expand_costs(std: _Standardized, c_min: np.ndarray) -> np.ndarray:
    c_int = np.zeros(std.n_struct + std.n_slack)
    c_int[: std.n] = c_min
    if std.split_cols.any():
        c_int[std.n : std.n_struct] = -c_min[std.split_cols]
    return c_int


def _solve_phase2(std, T, basis, kept, c_int, tol, bland_after, max_pivots, pivots, debug=False):
    """Run phase 2 on a prepared feasible tableau. Returns (status, x_std, y, pivots)."""
    body = T[:-1, :-1]
    rhs = T[:-1, -1]
    T[-1, :-1] = c_int - c_int[basis] @ body
    T[-1, -1] = -float(c_int[basis] @ rhs)
    buf = np.empty_like(T)
    ok, pivots = _run_simplex(T, basis, tol, bland_after, max_pivots, pivots, buf)
    if debug:
        print(f"[lp] phase2 done (optimal={ok}) after {pivots} pivots", file=sys.stderr)
        _dump_tableau("phase2 final", T)
    if not ok:
        return LpStatus.UNBOUNDED, None, None, pivots
    x_std = np.zeros(std.n_struct + std.n_slack)
    x_std[basis] = T[:-1, -1]
    A_keep = std.A[kept][:, : std.n_struct + std.n_slack]
    try:
        y = np.linalg.solve(A_keep[:, basis].T, c_int[basis])
    except np.linalg.LinAlgError as exc:
        raise LpNumericalError("singular basis when recovering duals") from exc
    return LpStatus.OPTIMAL, x_std, (y, kept), pivots


def solve_lp(
    problem: LpProblem,
    tol_feas: float = DEFAULT_TOL_FEAS,
    tol_gap: float = DEFAULT_TOL_GAP,
    max_pivots: int | None = None,
    debug: bool = False,
) -> LpSolution:
    """Solve a dense LP; raises LpNumericalError on pivot exhaustion."""
    std = _standardize(problem)
    return _solve_standardized(problem, std, tol_feas, tol_gap, max_pivots, debug)


def _solve_standardized(problem, std, tol_feas, tol_gap, max_pivots, debug=False):
    n_rows = std.n_rows
    n_cols_all = std.A.shape[1]
    if max_pivots is None:
        max_pivots = 50 * (n_rows + n_cols_all)
    bland_after = max(100, 3 * (n_rows + n_cols_all))

    pivots = 0
    if std.needs_phase1:
        out = _phase1(std, tol_feas, bland_after, max_pivots, debug)
        if out is None:
            return LpSolution(status=LpStatus.INFEASIBLE)
        T, basis, kept, pivots = out
    else:
        sz = std.n_struct + std.n_slack
        T = np.empty((n_rows + 1, sz + 1))
        T[:n_rows, :sz] = std.A[:, :sz]
        T[:n_rows, -1] = std.b
        T[-1, :] = 0.0
        basis = std.basis0.copy()
        kept = std.rows_kept

    sense_sign = -1.0 if problem.sense == "max" else 1.0
    c_min = sense_sign * problem.obj
    c_int = _expand_costs(std, c_min)
    status, x_std, duals, pivots = _solve_phase2(
        std, T, basis, kept, c_int, tol_feas, bland_after, max_pivots, pivots, debug
    )
    if status is not LpStatus.OPTIMAL:
        return LpSolution(status=status, pivots=pivots)

    x = x_std[: std.n].copy()
    if std.split_cols.any():
        x[std.split_cols] -= x_std[std.n : std.n_struct]
    objective = float(problem.obj @ x)

    y, kept_rows = duals
    row_dual = np.zeros(std.n_rows)
    row_dual[kept_rows] = sense_sign * std.flip_sign[kept_rows] * y
    # row_dual now holds user-facing duals: obj contribution is rhs . dual
    dual_ineq = row_dual[: std.p_user].copy()
    dual_eq = row_dual[std.n_slack :].copy()
    bound_rhs = std.b[std.bound_row_rhs_start : std.n_slack] * std.flip_sign[
        std.bound_row_rhs_start : std.n_slack
    ]
    dual_bound_value = float(row_dual[std.bound_row_rhs_start : std.n_slack] @ bound_rhs)

    _check_optimal_invariants(
        problem, x, objective, dual_ineq, dual_eq, dual_bound_value, tol_feas, tol_gap
    )
    return LpSolution(
        status=LpStatus.OPTIMAL,
        x=x,
        objective_value=objective,
        dual_ineq=dual_ineq,
        dual_eq=dual_eq,
        dual_bound_value=dual_bound_value,
        pivots=pivots,
    )


def _check_optimal_invariants(problem, x, objective, dual_ineq, dual_eq, dual_bound_value,
                              tol_feas, tol_gap):
    scale = 1.0 + max(
        float(np.max(np.abs(problem.h))) if problem.h.size else 0.0,
        float(np.max(np.abs(problem.eq_h))) if problem.eq_h.size else 0.0,
        float(np.max(np.abs(x))),
    )
    feas_tol = tol_feas * scale * 100.0
    if problem.G.shape[0]:
        slack = problem.h - problem.G @ x
        if float(slack.min(initial=0.0)) < -feas_tol:
            raise LpNumericalError(f"primal infeasibility {-slack.min():.3e} beyond tolerance")
        comp = np.abs(dual_ineq * slack)
        if comp.size and float(comp.max()) > feas_tol * (1.0 + np.abs(dual_ineq).max()):
            raise LpNumericalError("complementary slackness violated beyond tolerance")
    if problem.eq_G.shape[0]:
        resid = float(np.max(np.abs(problem.eq_G @ x - problem.eq_h)))
        if resid > feas_tol:
            raise LpNumericalError(f"equality residual {resid:.3e} beyond tolerance")
    lb_viol = problem.lower - x
    ub_viol = x - problem.upper
    if float(np.max(lb_viol, initial=-np.inf)) > feas_tol or float(
        np.max(ub_viol, initial=-np.inf)
    ) > feas_tol:
        raise LpNumericalError("variable bound violated beyond tolerance")
    dual_value = (
        float(problem.h @ dual_ineq) + float(problem.eq_h @ dual_eq) + dual_bound_value
    )
    if abs(objective - dual_value) > tol_gap * (1.0 + abs(objective)):
        raise LpNumericalError(
            f"duality gap {abs(objective - dual_value):.3e} beyond tolerance"
        )


def extract_duals(sol: LpSolution) -> tuple[np.ndarray, np.ndarray]:
    """Return (dual_ineq, dual_eq) of an optimal solution."""
    if sol.status is not LpStatus.OPTIMAL:
        raise ValueError(f"duals only available for optimal solves, status is {sol.status.value}")
    return sol.dual_ineq, sol.dual_eq


class PreparedLp:
    """Reusable constraint skeleton for repeated solves with varying objectives.

    Phase 1 depends only on the constraints, so its result is cached: each
    ``solve`` starts from the cached feasible tableau and runs phase 2 alone.
    """

    def __init__(self, template: LpProblem, tol_feas: float = DEFAULT_TOL_FEAS,
                 tol_gap: float = DEFAULT_TOL_GAP, max_pivots: int | None = None):
        self.template = template
        self.tol_feas = tol_feas
        self.tol_gap = tol_gap
        self.std = _standardize(template)
        n_rows, n_cols_all = self.std.n_rows, self.std.A.shape[1]
        self.max_pivots = max_pivots if max_pivots is not None else 50 * (n_rows + n_cols_all)
        self.bland_after = max(100, 3 * (n_rows + n_cols_all))
        if self.std.needs_phase1:
            out = _phase1(self.std, tol_feas, self.bland_after, self.max_pivots)
            if out is None:
                self._infeasible = True
                return
            self._T0, self._basis0, self._kept, self._pivots0 = out
        else:
            sz = self.std.n_struct + self.std.n_slack
            T = np.empty((n_rows + 1, sz + 1))
            T[:n_rows, :sz] = self.std.A[:, :sz]
            T[:n_rows, -1] = self.std.b
            T[-1, :] = 0.0
            self._T0, self._basis0, self._kept, self._pivots0 = (
                T, self.std.basis0.copy(), self.std.rows_kept, 0,
            )
        self._infeasible = False

    @property
    def infeasible(self) -> bool:
        return self._infeasible

    def solve(self, obj: np.ndarray, sense: str | None = None) -> LpSolution:
        if self._infeasible:
            return LpSolution(status=LpStatus.INFEASIBLE)
        sense = sense or self.template.sense
        obj = np.asarray(obj, dtype=float)
        problem = LpProblem(
            sense=sense, obj=obj, G=self.template.G, h=self.template.h,
            eq_G=self.template.eq_G, eq_h=self.template.eq_h,
            lower=self.template.lower, upper=self.template.upper,
        )
        T = self._T0.copy()
        basis = self._basis0.copy()
        sense_sign = -1.0 if sense == "max" else 1.0
        c_int = _expand_costs(self.std, sense_sign * obj)
        status, x_std, duals, pivots = _solve_phase2(
            self.std, T, basis, self._kept, c_int,
            self.tol_feas, self.bland_after, self.max_pivots, self._pivots0,
        )
        if status is not LpStatus.OPTIMAL:
            return LpSolution(status=status, pivots=pivots)
        x = x_std[: self.std.n].copy()
        if self.std.split_cols.any():
            x[self.std.split_cols] -= x_std[self.std.n : self.std.n_struct]
        objective = float(obj @ x)
        y, kept_rows = duals
        row_dual = np.zeros(self.std.n_rows)
        row_dual[kept_rows] = sense_sign * self.std.flip_sign[kept_rows] * y
        dual_ineq = row_dual[: self.std.p_user].copy()
        dual_eq = row_dual[self.std.n_slack :].copy()
        bound_rhs = self.std.b[self.std.bound_row_rhs_start : self.std.n_slack] * (
            self.std.flip_sign[self.std.bound_row_rhs_start : self.std.n_slack]
        )
        dual_bound_value = float(
            row_dual[self.std.bound_row_rhs_start : self.std.n_slack] @ bound_rhs
        )
        _check_optimal_invariants(
            problem, x, objective, dual_ineq, dual_eq, dual_bound_value,
            self.tol_feas, self.tol_gap,
        )
        return LpSolution(
            status=LpStatus.OPTIMAL, x=x, objective_value=objective,
            dual_ineq=dual_ineq, dual_eq=dual_eq,
            dual_bound_value=dual_bound_value, pivots=pivots,
        )
