"""Problem data model: shared capacities plus one private dataset per party.

An :class:`Instance` holds the shared capacity vector ``c`` and an ordered
list of :class:`PartyData`. Each party owns a block of decision variables
constrained privately by ``B_k x_k <= b_k``, consumes shared resources
through ``A_k x_k``, and declares an allotment cap ``s_bar_k <= c``.
All arrays are dense float64 and immutable after construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


def _as_vector(v, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {a.shape}")
    a.setflags(write=False)
    return a


def _as_matrix(v, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.ndim == 1 and a.size == 0:
        a = a.reshape(0, 0)
    if a.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {a.shape}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PartyData:
    """One party's private dataset: coupling matrix, private polytope, utilities.

    ``shared_coeff`` maps the party's variables to shared-resource usage,
    ``private_coeff``/``private_rhs`` define the private polytope, ``utility``
    is the objective block, and ``allot_cap`` bounds the party's claim on each
    shared resource.
    """

    shared_coeff: np.ndarray   # (m, n_k)
    private_coeff: np.ndarray  # (m_k, n_k)
    private_rhs: np.ndarray    # (m_k,)
    utility: np.ndarray        # (n_k,)
    allot_cap: np.ndarray      # (m,)
    row_kinds: tuple[str, ...] | None = None  # generator bookkeeping, optional

    def __post_init__(self):
        object.__setattr__(self, "shared_coeff", _as_matrix(self.shared_coeff, "shared_coeff"))
        object.__setattr__(self, "private_coeff", _as_matrix(self.private_coeff, "private_coeff"))
        object.__setattr__(self, "private_rhs", _as_vector(self.private_rhs, "private_rhs"))
        object.__setattr__(self, "utility", _as_vector(self.utility, "utility"))
        object.__setattr__(self, "allot_cap", _as_vector(self.allot_cap, "allot_cap"))
        if self.row_kinds is not None:
            object.__setattr__(self, "row_kinds", tuple(self.row_kinds))

    @property
    def n_vars(self) -> int:
        return self.shared_coeff.shape[1]

    @property
    def n_private(self) -> int:
        return self.private_coeff.shape[0]

    @property
    def n_shared(self) -> int:
        return self.shared_coeff.shape[0]


@dataclass(frozen=True)
class Instance:
    """Shared capacities together with every party's private dataset."""

    capacity: np.ndarray  # (m,)
    parties: tuple[PartyData, ...]
    meta: dict | None = None

    def __post_init__(self):
        object.__setattr__(self, "capacity", _as_vector(self.capacity, "capacity"))
        object.__setattr__(self, "parties", tuple(self.parties))

    @property
    def m(self) -> int:
        return self.capacity.size

    @property
    def n_parties(self) -> int:
        return len(self.parties)


@dataclass(frozen=True)
class AllotmentBundle:
    """Per-party shared-resource claims, optionally with the private solutions."""

    allotments: tuple[np.ndarray, ...]          # each (m,)
    solutions: tuple[np.ndarray, ...] | None = None  # each (n_k,), party-local

    def __post_init__(self):
        object.__setattr__(
            self, "allotments", tuple(_as_vector(s, "allotment") for s in self.allotments)
        )
        if self.solutions is not None:
            object.__setattr__(
                self, "solutions", tuple(_as_vector(x, "solution") for x in self.solutions)
            )

    def check_bounds(self, inst: Instance, tol: float = 0.0) -> list[str]:
        """Return violations of 0 <= s_k <= s_bar_k against ``inst``."""
        problems = []
        for k, s in enumerate(self.allotments):
            cap = inst.parties[k].allot_cap
            if s.size != cap.size:
                problems.append(f"party {k}: allotment has {s.size} components, expected {cap.size}")
                continue
            if np.any(s < -tol):
                problems.append(f"party {k}: allotment negative at {np.flatnonzero(s < -tol).tolist()}")
            if np.any(s > cap + tol):
                problems.append(f"party {k}: allotment exceeds cap at {np.flatnonzero(s > cap + tol).tolist()}")
        return problems


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...] = field(default_factory=tuple)


def validate_instance(inst: Instance) -> ValidationReport:
    """Check structural invariants; reports violations instead of raising."""
    bad: list[str] = []
    m = inst.m
    if inst.n_parties < 1:
        bad.append("instance has no parties")
    if np.any(inst.capacity < 0):
        idx = np.flatnonzero(inst.capacity < 0).tolist()
        bad.append(f"capacity negative at components {idx}")
    for k, p in enumerate(inst.parties):
        if p.shared_coeff.shape[0] != m:
            bad.append(f"party {k}: shared_coeff has {p.shared_coeff.shape[0]} rows, expected {m}")
        n_k = p.shared_coeff.shape[1]
        if p.private_coeff.shape[1] != n_k and p.private_coeff.size > 0:
            bad.append(
                f"party {k}: private_coeff has {p.private_coeff.shape[1]} columns, expected {n_k}"
            )
        if p.private_rhs.size != p.private_coeff.shape[0]:
            bad.append(
                f"party {k}: private_rhs has {p.private_rhs.size} entries, "
                f"expected {p.private_coeff.shape[0]}"
            )
        if p.utility.size != n_k:
            bad.append(f"party {k}: utility has {p.utility.size} entries, expected {n_k}")
        if p.allot_cap.size != m:
            bad.append(f"party {k}: allot_cap has {p.allot_cap.size} entries, expected {m}")
        else:
            if np.any(p.allot_cap < 0):
                idx = np.flatnonzero(p.allot_cap < 0).tolist()
                bad.append(f"party {k}: allot_cap negative at components {idx}")
            if np.any(p.allot_cap > inst.capacity):
                idx = np.flatnonzero(p.allot_cap > inst.capacity).tolist()
                bad.append(f"party {k}: allot_cap exceeds capacity at components {idx}")
    return ValidationReport(ok=not bad, violations=tuple(bad))


def sensitivity(party: PartyData) -> float:
    """Worst-case single-resource claim: the infinity norm of the allotment cap."""
    if party.allot_cap.size == 0:
        return 0.0
    return float(np.max(np.abs(party.allot_cap)))


def total_utility(inst: Instance, solutions: Sequence[np.ndarray]) -> float:
    """Sum of per-party utility values u_k . x_k."""
    if len(solutions) != inst.n_parties:
        raise ValueError(
            f"got {len(solutions)} solution vectors for {inst.n_parties} parties"
        )
    total = 0.0
    for k, x in enumerate(solutions):
        x = np.asarray(x, dtype=float)
        u = inst.parties[k].utility
        if x.shape != u.shape:
            raise ValueError(f"party {k}: solution shape {x.shape} does not match utility {u.shape}")
        total += float(u @ x)
    return total


# --- JSON interchange -------------------------------------------------------
# Schema: {m, c, parties: [{n_k, A_k, B_k, b_k, u_k, s_bar_k}]} with matrices
# as row-major nested arrays. An additive "meta" object carries generator
# bookkeeping and is ignored by consumers that do not know it.


def instance_to_dict(inst: Instance) -> dict:
    doc = {
        "m": inst.m,
        "c": inst.capacity.tolist(),
        "parties": [
            {
                "n_k": p.n_vars,
                "A_k": p.shared_coeff.tolist(),
                "B_k": p.private_coeff.tolist(),
                "b_k": p.private_rhs.tolist(),
                "u_k": p.utility.tolist(),
                "s_bar_k": p.allot_cap.tolist(),
                **({"row_kinds": list(p.row_kinds)} if p.row_kinds is not None else {}),
            }
            for p in inst.parties
        ],
    }
    if inst.meta is not None:
        doc["meta"] = inst.meta
    return doc


def instance_from_dict(doc: dict) -> Instance:
    parties = []
    for entry in doc["parties"]:
        n_k = int(entry["n_k"])
        b_mat = np.asarray(entry["B_k"], dtype=float)
        if b_mat.size == 0:
            b_mat = b_mat.reshape(0, n_k)
        parties.append(
            PartyData(
                shared_coeff=np.asarray(entry["A_k"], dtype=float).reshape(-1, n_k),
                private_coeff=b_mat,
                private_rhs=np.asarray(entry["b_k"], dtype=float),
                utility=np.asarray(entry["u_k"], dtype=float),
                allot_cap=np.asarray(entry["s_bar_k"], dtype=float),
                row_kinds=tuple(entry["row_kinds"]) if "row_kinds" in entry else None,
            )
        )
    return Instance(
        capacity=np.asarray(doc["c"], dtype=float),
        parties=tuple(parties),
        meta=doc.get("meta"),
    )


def instance_to_json(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), sort_keys=True, indent=2) + "\n"


def instance_from_json(text: str) -> Instance:
    return instance_from_dict(json.loads(text))


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(instance_to_json(inst))


def load_instance(path: str | Path) -> Instance:
    return instance_from_json(Path(path).read_text())
