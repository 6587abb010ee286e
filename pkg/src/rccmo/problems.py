"""Problem interface and the TRI bi-objective constraint-topology suite.

Every TRI variant shares the decision-to-objective map

    g(x) = sum_{i>=2} (x_i - 0.5)^2,   f1 = x1 + g,   f2 = 1 - x1 + g

and places its constraints in objective space, so the attainable objective
set is fully described by the pair ``(x1, g)``. That makes a brute-force grid
over ``(x1, g)`` an exact oracle for constrained Pareto fronts.

    TRI1  both boundaries shape the front, third constraint inert
    TRI2  one boundary shapes the front, a second truncates it
    TRI3  two axis-aligned walls meet in a single optimal point
    TRIM  TRI2 plus eight inert constraints (scalability)
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import DEFAULT_EQ_TOL, ContractError, Population, compute_violations

TRI_VARIANTS = ("TRI1", "TRI2", "TRI3", "TRIM")
DEFAULT_DIMS = {"TRI1": 15, "TRI2": 15, "TRI3": 15, "TRIM": 30}


@dataclass(frozen=True)
class ProblemSpec:
    """A constrained multi-objective problem.

    ``evaluate(x)`` returns ``(objectives, raw_g, raw_h)`` for one decision
    vector; feasibility means ``raw_g <= 0`` and ``raw_h == 0``.
    ``evaluate_batch``, if given, does the same for a 2-D array of rows.
    """

    name: str
    m: int
    d: int
    p: int
    q: int
    lb: np.ndarray
    ub: np.ndarray
    evaluate: Callable
    evaluate_batch: Optional[Callable] = None

    @property
    def n_constraints(self):
        return self.p + self.q

    def evaluate_many(self, X):
        X = np.asarray(X, dtype=np.float64)
        if self.evaluate_batch is not None:
            F, G, H = self.evaluate_batch(X)
        else:
            rows = [self.evaluate(x) for x in X]
            F = np.array([r[0] for r in rows], dtype=np.float64).reshape(len(X), self.m)
            G = np.array([r[1] for r in rows], dtype=np.float64).reshape(len(X), self.p)
            H = np.array([r[2] for r in rows], dtype=np.float64).reshape(len(X), self.q)
        F = np.asarray(F, dtype=np.float64).reshape(len(X), self.m)
        G = np.asarray(G, dtype=np.float64).reshape(len(X), self.p)
        H = np.asarray(H, dtype=np.float64).reshape(len(X), self.q)
        return F, G, H


def evaluate_population(problem: ProblemSpec, X, first_id, eq_tol=DEFAULT_EQ_TOL, role=None):
    """Evaluate rows of ``X``; eval ids run from ``first_id`` upward."""
    X = np.asarray(X, dtype=np.float64).reshape(-1, problem.d)
    F, G, H = problem.evaluate_many(X)
    C, cv = compute_violations(G, H, eq_tol)
    if C.shape[1] != problem.n_constraints:
        C = C.reshape(len(X), problem.n_constraints)
    raw = np.hstack([G, H])
    ids = np.arange(first_id, first_id + len(X), dtype=np.int64)
    return Population(X, F, raw, C, cv, ids, role=role)


# --------------------------------------------------------------------------
# TRI suite
# --------------------------------------------------------------------------

def _tri_constraints(variant, f1, f2):
    if variant == "TRI1":
        cons = [1.5 - f1 - 2 * f2, 1.5 - 2 * f1 - f2, np.full_like(f1, -1.0)]
    elif variant == "TRI2":
        cons = [1.2 - f1 - f2, 0.5 - f1, np.full_like(f1, -1.0)]
    elif variant == "TRI3":
        cons = [0.65 - f2, 0.65 - f1, np.full_like(f1, -1.0)]
    elif variant == "TRIM":
        cons = [1.2 - f1 - f2, 0.5 - f1] + [np.full_like(f1, -float(k)) for k in range(3, 11)]
    else:
        raise ContractError(f"unknown TRI variant {variant!r}")
    return np.stack(cons, axis=-1)


def n_tri_constraints(variant):
    return 10 if variant == "TRIM" else 3


def tri_objectives_from_shape(x1, g):
    """Objectives as a function of position ``x1`` and distance ``g``."""
    return x1 + g, 1.0 - x1 + g


def evaluate_tri(variant, x):
    """Objectives and raw inequality values of a TRI variant.

    Accepts a single vector or a 2-D batch; inputs must lie in ``[0, 1]``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] < 2:
        raise ContractError("TRI problems need d >= 2")
    if np.any(x < 0.0) or np.any(x > 1.0) or not np.all(np.isfinite(x)):
        raise ContractError("decision vector outside the [0, 1] box")
    g = ((x[..., 1:] - 0.5) ** 2).sum(axis=-1)
    f1, f2 = tri_objectives_from_shape(x[..., 0], g)
    return np.stack([f1, f2], axis=-1), _tri_constraints(variant, f1, f2)


def make_tri(variant, d=None) -> ProblemSpec:
    variant = variant.upper()
    if variant not in TRI_VARIANTS:
        raise ContractError(f"unknown TRI variant {variant!r}")
    d = DEFAULT_DIMS[variant] if d is None else int(d)
    if d < 2:
        raise ContractError("TRI problems need d >= 2")
    nc = n_tri_constraints(variant)

    def evaluate(x):
        f, g = evaluate_tri(variant, x)
        return f, g, np.zeros(0)

    def evaluate_batch(X):
        F, G = evaluate_tri(variant, X)
        return F, G, np.zeros((len(X), 0))

    return ProblemSpec(
        name=f"{variant}:d={d}", m=2, d=d, p=nc, q=0,
        lb=np.zeros(d), ub=np.ones(d),
        evaluate=evaluate, evaluate_batch=evaluate_batch,
    )


_NAME_RE = re.compile(r"^([A-Za-z][A-Za-z0-9_]*)(?::d=(\d+))?$")


def parse_problem_name(name):
    """Split ``"TRI1:d=15"`` into ``("TRI1", 15)``; ``d`` may be omitted."""
    m = _NAME_RE.match(name.strip())
    if not m:
        raise ContractError(f"malformed problem name {name!r} (expected NAME[:d=INT])")
    variant = m.group(1).upper()
    if variant not in TRI_VARIANTS:
        raise ContractError(f"unknown problem {m.group(1)!r}")
    d = int(m.group(2)) if m.group(2) else DEFAULT_DIMS[variant]
    if d < 2:
        raise ContractError("TRI problems need d >= 2")
    return variant, d


def get_problem(name) -> ProblemSpec:
    variant, d = parse_problem_name(name)
    return make_tri(variant, d)


# --------------------------------------------------------------------------
# Grid oracle
# --------------------------------------------------------------------------

def _shape_grid(d, resolution):
    x1 = np.linspace(0.0, 1.0, resolution)
    g = np.linspace(0.0, 0.25 * (d - 1), resolution)
    X1, G = np.meshgrid(x1, g, indexing="ij")
    f1, f2 = tri_objectives_from_shape(X1.ravel(), G.ravel())
    return f1, f2


def nondominated_2d(points):
    """Non-dominated subset of 2-D points, sorted by the first objective."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(points) == 0:
        return points
    order = np.lexsort((points[:, 1], points[:, 0]))
    p = points[order]
    prev_min = np.concatenate([[np.inf], np.minimum.accumulate(p[:, 1])[:-1]])
    return p[p[:, 1] < prev_min]


def reference_front(variant, resolution=1000, d=None, active=None):
    """Constrained Pareto front of a TRI variant from a ``(x1, g)`` grid.

    ``active`` restricts feasibility to the listed 1-based constraint
    indices (default: all), which gives single-constraint fronts.
    """
    if resolution < 2:
        raise ContractError("resolution too small")
    variant = variant.upper()
    d = DEFAULT_DIMS[variant] if d is None else d
    f1, f2 = _shape_grid(d, resolution)
    raw = _tri_constraints(variant, f1, f2)
    if active is not None:
        raw = raw[:, [i - 1 for i in active]]
    ok = (raw <= 0.0).all(axis=1)
    return nondominated_2d(np.column_stack([f1[ok], f2[ok]]))


def classify_constraints(variant, resolution=400, d=None):
    """Geometric role of each constraint: 'shaping', 'obstructing' or 'irrelevant'.

    Shaping: the single-constraint front shares more than one grid point with
    the globally feasible set (a lone touching point is measure-zero).
    Obstructing: not shaping, and its infeasible region reaches attainable
    points that dominate part of the global front.
    """
    variant = variant.upper()
    d = DEFAULT_DIMS[variant] if d is None else d
    f1, f2 = _shape_grid(d, resolution)
    raw = _tri_constraints(variant, f1, f2)
    feasible = (raw <= 0.0).all(axis=1)
    cpf = nondominated_2d(np.column_stack([f1[feasible], f2[feasible]]))

    # cpf sorted by f1 ascending, so f2 descends: the first front point with
    # c1 >= p1 has the largest c2 among candidates p could dominate.
    pos = np.searchsorted(cpf[:, 0], f1, side="left")
    inside = pos < len(cpf)
    c = cpf[np.minimum(pos, len(cpf) - 1)]
    dominating = inside & (c[:, 1] >= f2) & ((c[:, 0] > f1) | (c[:, 1] > f2))

    roles = {}
    for i in range(raw.shape[1]):
        sat = raw[:, i] <= 0.0
        scpf = np.column_stack([f1[sat], f2[sat]])
        front = nondominated_2d(scpf)
        f_raw = _tri_constraints(variant, front[:, 0], front[:, 1])
        shared = int((f_raw <= 0.0).all(axis=1).sum())
        if shared > 1:
            roles[i + 1] = "shaping"
        elif np.any(dominating & ~sat):
            roles[i + 1] = "obstructing"
        else:
            roles[i + 1] = "irrelevant"
    return roles
