"""MOEA primitives shared by every population in the framework.

Populations are stored column-wise (one array per attribute) so that sorting
and fitness assignment work on whole arrays; ``Solution`` is the per-member
view.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels

DEFAULT_EQ_TOL = 1e-4


class ContractError(ValueError):
    """Raised when an operation's input contract is violated."""


# --------------------------------------------------------------------------
# Constraint violation
# --------------------------------------------------------------------------

def compute_violations(raw_g, raw_h=(), eq_tol=DEFAULT_EQ_TOL):
    """Per-constraint violations and their sum.

    Inequalities violate by ``max(0, g)``; equalities by ``max(0, |h| - eq_tol)``.
    Works on a single solution (1-D inputs, returns a float ``cv``) or on a
    batch (2-D inputs with constraints along the last axis).
    Non-finite raw values yield a ``+inf`` violation for that constraint.
    """
    if eq_tol < 0:
        raise ContractError("eq_tol must be non-negative")
    g = np.asarray(raw_g, dtype=np.float64)
    h = np.asarray(raw_h, dtype=np.float64)
    single = g.ndim <= 1 and h.ndim <= 1
    if single:
        g = g.reshape(1, -1)
        h = h.reshape(1, -1)
    else:
        if g.ndim == 1 and g.size == 0:
            g = np.zeros((h.shape[0], 0))
        if h.ndim == 1 and h.size == 0:
            h = np.zeros((g.shape[0], 0))
    with np.errstate(invalid="ignore"):
        cg = np.maximum(0.0, g)
        ch = np.maximum(0.0, np.abs(h) - eq_tol)
    viol = np.concatenate([cg, ch], axis=1)
    viol[~np.isfinite(viol)] = np.inf
    cv = viol.sum(axis=1)
    if single:
        return viol[0], float(cv[0])
    return viol, cv


# --------------------------------------------------------------------------
# Solutions and populations
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Solution:
    decision: np.ndarray
    objectives: np.ndarray
    con_raw: np.ndarray
    con_viol: np.ndarray
    cv: float
    eval_id: int

    @property
    def feasible(self) -> bool:
        return self.cv == 0.0


@dataclass(frozen=True)
class Role:
    """Population role tag: MAIN, PROBE, UPF, POS(i) or NEG(i)."""

    kind: str
    index: Optional[int] = None

    def __str__(self):
        return self.kind if self.index is None else f"{self.kind}({self.index})"

    @classmethod
    def pos(cls, i):
        return cls("POS", i)

    @classmethod
    def neg(cls, i):
        return cls("NEG", i)


MAIN = Role("MAIN")
PROBE = Role("PROBE")
UPF = Role("UPF")


def _frozen(a, n=None, dtype=np.float64):
    a = np.array(a, dtype=dtype, copy=True)
    if n is not None and not (a.ndim == 2 and a.shape[0] == n):
        a = a.reshape(n, -1) if a.size else a.reshape(n, 0)
    a.setflags(write=False)
    return a


class Population:
    """An ordered set of evaluated solutions, stored as parallel arrays.

    ``role`` and ``capacity`` are optional so the same type carries offspring
    batches and merged selection pools.
    """

    __slots__ = ("X", "F", "raw", "C", "cv", "eval_id", "role", "capacity")

    def __init__(self, X, F, raw, C, cv, eval_id, role=None, capacity=None):
        n = len(eval_id)
        self.X = _frozen(X, n)
        self.F = _frozen(F, n)
        self.raw = _frozen(raw, n)
        self.C = _frozen(C, n)
        self.cv = _frozen(cv).reshape(n)
        self.eval_id = _frozen(eval_id, dtype=np.int64).reshape(n)
        if capacity is not None and capacity < 1:
            raise ContractError("capacity must be positive")
        self.role = role
        self.capacity = capacity

    def __len__(self):
        return len(self.eval_id)

    def __getitem__(self, i) -> Solution:
        return Solution(self.X[i], self.F[i], self.raw[i], self.C[i], float(self.cv[i]), int(self.eval_id[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __repr__(self):
        return f"Population(role={self.role}, n={len(self)}, capacity={self.capacity})"

    @property
    def members(self):
        return list(self)

    @property
    def feasible(self):
        return self.cv == 0.0

    @property
    def degenerate(self):
        """Members whose evaluation produced non-finite values."""
        return ~np.isfinite(self.F).all(axis=1) | np.isinf(self.cv)

    def take(self, idx, role=None, capacity=None):
        idx = np.asarray(idx, dtype=np.int64)
        return Population(
            self.X[idx], self.F[idx], self.raw[idx], self.C[idx], self.cv[idx], self.eval_id[idx],
            role=role if role is not None else self.role,
            capacity=capacity if capacity is not None else self.capacity,
        )

    def with_role(self, role, capacity):
        return Population(self.X, self.F, self.raw, self.C, self.cv, self.eval_id, role=role, capacity=capacity)

    def merge(self, other):
        """Concatenate members; the result keeps this population's role."""
        return Population(
            np.vstack([self.X, other.X]),
            np.vstack([self.F, other.F]),
            np.vstack([self.raw, other.raw]),
            np.vstack([self.C, other.C]),
            np.concatenate([self.cv, other.cv]),
            np.concatenate([self.eval_id, other.eval_id]),
            role=self.role,
            capacity=self.capacity,
        )

    @classmethod
    def from_solutions(cls, solutions, role=None, capacity=None):
        sols = list(solutions)
        if not sols:
            raise ContractError("cannot infer dimensions from an empty solution list")
        return cls(
            np.array([s.decision for s in sols]),
            np.array([s.objectives for s in sols]),
            np.array([s.con_raw for s in sols]),
            np.array([s.con_viol for s in sols]),
            np.array([s.cv for s in sols]),
            np.array([s.eval_id for s in sols]),
            role=role,
            capacity=capacity,
        )


# --------------------------------------------------------------------------
# Selection views
# --------------------------------------------------------------------------

OBJECTIVES_ONLY = "OBJECTIVES_ONLY"
CDP_TOTAL_CV = "CDP_TOTAL_CV"
AUGMENTED_CV = "AUGMENTED_CV"
SINGLE_CONSTRAINT = "SINGLE_CONSTRAINT"
NEGATED_OBJECTIVES = "NEGATED_OBJECTIVES"


@dataclass(frozen=True)
class SelectionView:
    """How a population is projected before sorting and fitness assignment.

    ``project`` returns ``(vectors, violation)``; ``violation`` is ``None`` for
    the unconstrained views and a 1-D array for the constrained ones.
    ``index`` is the 1-based constraint index for SINGLE_CONSTRAINT.
    """

    kind: str
    index: Optional[int] = None

    def __post_init__(self):
        if self.kind not in (OBJECTIVES_ONLY, CDP_TOTAL_CV, AUGMENTED_CV, SINGLE_CONSTRAINT, NEGATED_OBJECTIVES):
            raise ContractError(f"unknown view kind {self.kind!r}")
        if (self.kind == SINGLE_CONSTRAINT) != (self.index is not None):
            raise ContractError("SINGLE_CONSTRAINT requires a constraint index (and only it)")

    @classmethod
    def single(cls, j):
        return cls(SINGLE_CONSTRAINT, j)

    @property
    def constrained(self):
        return self.kind in (CDP_TOTAL_CV, SINGLE_CONSTRAINT)

    def project(self, pop: Population):
        if self.kind == OBJECTIVES_ONLY:
            return pop.F, None
        if self.kind == NEGATED_OBJECTIVES:
            return -pop.F, None
        if self.kind == AUGMENTED_CV:
            return np.hstack([pop.F, pop.cv[:, None]]), None
        if self.kind == CDP_TOTAL_CV:
            return pop.F, pop.cv
        return pop.F, pop.C[:, self.index - 1]


VIEW_OBJECTIVES = SelectionView(OBJECTIVES_ONLY)
VIEW_CDP = SelectionView(CDP_TOTAL_CV)
VIEW_AUGMENTED = SelectionView(AUGMENTED_CV)
VIEW_NEGATED = SelectionView(NEGATED_OBJECTIVES)


# --------------------------------------------------------------------------
# Dominance and sorting
# --------------------------------------------------------------------------

def dominates(a, b) -> bool:
    """Pareto dominance for minimization."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ContractError(f"length mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def _degenerate_rows(objs, viol):
    bad = ~np.isfinite(objs).all(axis=1)
    if viol is not None:
        bad |= np.isnan(viol)
    return bad


def nondominated_sort(objs, viol=None):
    """1-based front index of every row.

    With ``viol`` given, constrained dominance applies: a smaller violation
    dominates regardless of objectives, equal violations compare by Pareto
    dominance. Rows with non-finite objectives (or NaN violation) are placed
    in a final front of their own.
    """
    objs = np.asarray(objs, dtype=np.float64)
    n = objs.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    objs = objs.reshape(n, -1)
    v = None if viol is None else np.asarray(viol, dtype=np.float64).reshape(n)
    bad = _degenerate_rows(objs, v)
    ranks = np.zeros(n, dtype=np.int64)
    good = np.flatnonzero(~bad)
    if good.size:
        dom = kernels.dominance_matrix(objs[good], None if v is None else v[good])
        ranks[good] = kernels.front_ranks(dom)
    if bad.any():
        ranks[bad] = ranks.max() + 1
    return ranks


def _normalize(points):
    lo = points.min(axis=0)
    span = points.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (points - lo) / safe, 0.0)


def spea2_density(points):
    """SPEA2 density ``1 / (sigma_k + 2)`` on min-max normalized coordinates.

    ``k = floor(sqrt(n))``; a lone point gets ``sigma = 0``.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if n == 0:
        return np.zeros(0)
    k = max(1, int(np.sqrt(n)))
    if n == 1:
        sigma = np.zeros(1)
    else:
        sigma = kernels.kth_distance(_normalize(points.reshape(n, -1)), min(k, n - 1))
    return 1.0 / (sigma + 2.0)


def spea2_fitness(points, viol=None):
    """Raw SPEA2 fitness plus density; non-dominated points score below 1."""
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if n == 0:
        return np.zeros(0)
    points = points.reshape(n, -1)
    dom = kernels.dominance_matrix(points, viol)
    return kernels.strength_raw(dom) + spea2_density(points)


def environmental_selection(pool: Population, capacity: int, view: SelectionView,
                            role=None) -> Population:
    """Keep the ``capacity`` best members of ``pool`` under ``view``.

    Unconstrained views rank by SPEA2 fitness of the projected vectors.
    Constrained views rank members feasible under the view first (by SPEA2
    fitness among themselves), then the rest by ascending relevant violation.
    Degenerate members come last; remaining ties go to the lower eval_id.
    Survivors are returned in their original pool order.
    """
    if capacity < 1:
        raise ContractError("capacity must be positive")
    role = role if role is not None else pool.role
    n = len(pool)
    if n <= capacity:
        return pool.with_role(role, capacity)
    order = selection_order(pool, view)
    keep = np.sort(order[:capacity])
    return pool.take(keep, role=role, capacity=capacity)


def selection_order(pool: Population, view: SelectionView):
    """Indices of ``pool`` from best to worst under ``view``."""
    vectors, viol = view.project(pool)
    n = len(pool)
    bad = pool.degenerate
    tier = np.zeros(n, dtype=np.int64)
    score = np.zeros(n)
    if viol is None:
        good = np.flatnonzero(~bad)
        if good.size:
            score[good] = spea2_fitness(vectors[good])
    else:
        ok = (viol == 0.0) & ~bad
        feas = np.flatnonzero(ok)
        if feas.size:
            score[feas] = spea2_fitness(vectors[feas])
        infeas = ~ok & ~bad
        tier[infeas] = 1
        score[infeas] = viol[infeas]
    tier[bad] = 2
    return np.lexsort((pool.eval_id, score, tier))
