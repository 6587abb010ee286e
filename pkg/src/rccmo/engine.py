"""RCCMO: constraint ranking with evolutionary / anti-evolutionary search.

The run is a three-stage state machine driven by ``pc``:

* ``pc == nc + 1`` -- stage 1, a UPF population evolves on objectives only;
* ``1 <= pc <= nc`` -- stage 2, offspring come from the positive or negative
  population of constraint ``pc``;
* ``pc == 0`` -- stage 3, plain feasibility-first refinement of ``P0``.

The main population ``P0`` and the probe ``Pb`` absorb every offspring batch.
Dual populations of inactive constraints are refreshed every ``v``
generations only.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import kernels
from .core import (
    DEFAULT_EQ_TOL,
    MAIN,
    PROBE,
    UPF,
    VIEW_CDP,
    VIEW_OBJECTIVES,
    ContractError,
    Population,
    Role,
    SelectionView,
    environmental_selection,
    nondominated_sort,
    spea2_density,
    spea2_fitness,
)
from .problems import ProblemSpec, evaluate_population
from .variation import VariationParams, de_offspring

log = logging.getLogger(__name__)


class Direction(str, enum.Enum):
    POSITIVE = "POSITIVE"
    NEGATIVE = "NEGATIVE"


@dataclass(frozen=True)
class RunConfig:
    n: int = 100
    max_fe: int = 100_000
    v: int = 30
    beta: float = 0.7
    stability_window: int = 20
    stability_tol: float = 1e-3
    per_target_fe_cap: Optional[int] = None  # None -> max(2000, beta*max_fe/(2*nc))
    stage1_fe_cap: Optional[int] = None  # None -> 2 * per-target cap
    variation: VariationParams = field(default_factory=VariationParams)
    eq_tol: float = DEFAULT_EQ_TOL
    seed: int = 0

    def __post_init__(self):
        if self.n < 5:
            raise ContractError("population size must be at least 5")
        if not 0.0 < self.beta <= 1.0:
            raise ContractError("beta must lie in (0, 1]")
        if self.v < 1:
            raise ContractError("update interval v must be at least 1")
        if self.stability_window < 2:
            raise ContractError("stability window must be at least 2")
        if self.max_fe < self.n:
            raise ContractError("max_fe must cover the initial population")
        if self.eq_tol < 0:
            raise ContractError("eq_tol must be non-negative")

    def target_cap(self, nc):
        if self.per_target_fe_cap is not None:
            return self.per_target_fe_cap
        return max(2000, math.floor(self.beta * self.max_fe / (2 * max(nc, 1))))

    def stage1_cap(self, nc):
        if self.stage1_fe_cap is not None:
            return self.stage1_fe_cap
        return 2 * self.target_cap(nc)


@dataclass
class PriorityReport:
    feas_rate: np.ndarray
    probe_infeas: np.ndarray
    ranking: List[int]
    pc: int
    direction: Direction
    processed: set

    def to_dict(self):
        return {
            "F": [float(x) for x in self.feas_rate],
            "IF": [float(x) for x in self.probe_infeas],
            "R": list(self.ranking),
            "pc": self.pc,
            "direction": self.direction.value,
        }


@dataclass
class TraceRecord:
    gen: int
    fe: int
    pc: int
    dirs: List[str]
    R: List[int]
    feas_main: int
    min_cv_main: float
    # not serialized: stage that produced this generation's offspring and the
    # number of selections run on inactive dual populations
    active_pc: int = 0
    inactive_selections: int = 0

    def to_json_dict(self):
        return {
            "gen": self.gen,
            "fe": self.fe,
            "pc": self.pc,
            "dirs": list(self.dirs),
            "R": list(self.R),
            "feas_main": self.feas_main,
            "min_cv_main": self.min_cv_main,
        }


@dataclass
class AlgorithmState:
    nc: int
    p0: Population
    probe: Population
    upf: Population
    pos: List[Population]
    neg: List[Population]
    pc: int
    dirs: List[Direction]
    priority: List[int] = field(default_factory=list)
    processed: set = field(default_factory=set)
    fe_used: int = 0
    generation: int = 0

    def active_population(self):
        if self.pc == self.nc + 1:
            pop = self.upf
        elif self.pc == 0:
            pop = self.p0
        elif self.dirs[self.pc - 1] is Direction.POSITIVE:
            pop = self.pos[self.pc - 1]
        else:
            pop = self.neg[self.pc - 1]
        return pop if len(pop) > 0 else self.p0


@dataclass
class RunResult:
    final: Population
    trace: List[TraceRecord]
    reports: List[tuple]
    fe_used: int
    state: AlgorithmState


# --------------------------------------------------------------------------
# Population updates
# --------------------------------------------------------------------------

def _best(score, eval_id, count):
    """Indices of the ``count`` smallest scores, ties by eval id."""
    order = np.lexsort((eval_id, score))
    return order[:count]


def _augmented(pop):
    return np.hstack([pop.F, pop.cv[:, None]])


def _clean(pop):
    bad = pop.degenerate
    return pop.take(np.flatnonzero(~bad)) if bad.any() else pop


def update_probe(pb: Population, offspring: Population, p0: Population, n: int) -> Population:
    """Keep candidates that dominate part of ``p0`` without being dominated by it.

    Over capacity, infeasible candidates are preferred (feasible ones get an
    infinite surrogate violation) and ranked by fronts of the negated
    objectives plus SPEA2 density.
    """
    pool = _clean(pb.merge(offspring)).with_role(PROBE, n)
    ref = _clean(p0)
    if len(ref) == 0:
        raise ContractError("main population must not be empty")
    if len(pool) == 0:
        return pool
    cross = kernels.cross_dominance(pool.F, ref.F)
    back = kernels.cross_dominance(ref.F, pool.F)
    keep = cross.any(axis=1) & ~back.any(axis=0)
    cand = pool.take(np.flatnonzero(keep))
    if len(cand) <= n:
        return cand
    surrogate = np.where(cand.feasible, np.inf, 0.0)
    fronts = nondominated_sort(-cand.F, surrogate)
    fitness = fronts + spea2_density(cand.F)
    return cand.take(np.sort(_best(fitness, cand.eval_id, n)))


def update_positive(pos: Population, offspring: Population, i: int, n: int) -> Population:
    """Select on constraint ``i``'s own violation, ignoring all others."""
    return environmental_selection(pos.merge(offspring), n, SelectionView.single(i), role=Role.pos(i))


def update_negative(neg: Population, offspring: Population, p0: Population, i: int, n: int) -> Population:
    """Anti-evolutionary update tracing the infeasible side of constraint ``i``."""
    pool = _clean(neg.merge(offspring))
    role = Role.neg(i)
    violating = pool.C[:, i - 1] > 0.0
    vio = pool.take(np.flatnonzero(violating))
    sat = pool.take(np.flatnonzero(~violating))

    if len(vio) <= n:
        fit_vio = spea2_fitness(_augmented(vio)) if len(vio) else np.zeros(0)
        offset = fit_vio.max() if len(vio) else 0.0
        room = min(n - len(vio), len(sat))
        chosen = [np.flatnonzero(violating)]
        if room > 0:
            fit_sat = spea2_fitness(_augmented(sat)) + offset
            chosen.append(np.flatnonzero(~violating)[_best(fit_sat, sat.eval_id, room)])
        return pool.take(np.sort(np.concatenate(chosen)), role=role, capacity=n)

    fit = spea2_fitness(_augmented(vio))
    ref = _clean(p0)
    if len(ref):
        behind = kernels.cross_dominance(ref.F, vio.F).any(axis=0)
        fit = np.where(behind, fit + fit.max(), fit)
    top = np.flatnonzero(fit < 1.0)
    if len(top) > n:
        fit_top = spea2_fitness(-vio.F[top])
        pick = top[_best(fit_top, vio.eval_id[top], n)]
    else:
        pick = _best(fit, vio.eval_id, n)
    return vio.take(np.sort(pick), role=role, capacity=n)


def update_dual(p0, pos, neg, offspring, i, n):
    """Refresh both populations of constraint ``i``."""
    if i < 1:
        raise ContractError("constraint index is 1-based")
    return update_positive(pos, offspring, i, n), update_negative(neg, offspring, p0, i, n)


# --------------------------------------------------------------------------
# Priority, flipping, stability
# --------------------------------------------------------------------------

def rank_constraints(feas_rate, probe_infeas, processed=(), nc=None) -> PriorityReport:
    """Signed priority list and next target from raw rates.

    Constraints with a positive feasibility rate rank first (positive sign,
    descending rate) and have their probe rate cleared; the rest rank by probe
    infeasibility (negative sign). Constraints with both rates zero are left
    out. Indices are 1-based.
    """
    F = np.asarray(feas_rate, dtype=np.float64).copy()
    IF = np.asarray(probe_infeas, dtype=np.float64).copy()
    nc = len(F) if nc is None else nc
    IF[F > 0] = 0.0
    # stable sort keeps lower indices first among equal rates
    r_f = [int(i) + 1 for i in np.argsort(-F, kind="stable") if F[i] > 0]
    r_if = [-(int(i) + 1) for i in np.argsort(-IF, kind="stable") if IF[i] > 0]
    ranking = r_f + r_if
    u = set(processed)
    if not ranking:
        return PriorityReport(F, IF, [], 0, Direction.POSITIVE, u)
    remaining = [r for r in ranking if abs(r) not in u]
    if not remaining:
        u = set()
        remaining = ranking
    head = remaining[0]
    u.add(abs(head))
    direction = Direction.NEGATIVE if head < 0 else Direction.POSITIVE
    return PriorityReport(F, IF, ranking, abs(head), direction, u)


def determine_target(pos_all, pb: Population, processed, nc) -> PriorityReport:
    feas = np.array([np.mean(p.cv == 0.0) if len(p) else 0.0 for p in pos_all[:nc]])
    if len(pb) == 0:
        infeas = np.zeros(nc)
    else:
        infeas = (pb.C[:, :nc] > 0.0).mean(axis=0)
    return rank_constraints(feas, infeas, processed, nc)


def flip_check(state: AlgorithmState) -> Optional[Direction]:
    """New direction for the current target, or None if it stays."""
    pc = state.pc
    if not 1 <= pc <= state.nc:
        raise ContractError("flip_check only applies during stage 2")
    pos = state.pos[pc - 1]
    min_cv = float(pos.cv.min()) if len(pos) else math.inf
    current = state.dirs[pc - 1]
    if current is Direction.POSITIVE and min_cv > 0:
        return Direction.NEGATIVE
    if current is Direction.NEGATIVE and min_cv == 0:
        return Direction.POSITIVE
    return None


def stability_check(history, window, tol) -> bool:
    """True once the last ``window`` summaries moved less than ``tol`` per step."""
    if len(history) < window:
        return False
    recent = np.asarray(history[-window:], dtype=np.float64)
    deltas = np.abs(np.diff(recent, axis=0)).max(axis=1)
    return bool(deltas.max() < tol)


class _Monitor:
    """Normalized mean-objective history of one population."""

    def __init__(self):
        self.history = []
        self.scale = None

    def reset(self):
        self.history = []
        self.scale = None

    def push(self, pop):
        F = pop.F[np.isfinite(pop.F).all(axis=1)]
        if len(F) == 0:
            return
        if self.scale is None:
            span = np.ptp(F, axis=0)
            self.scale = np.where(span > 1e-12, span, 1.0)
        self.history.append(F.mean(axis=0) / self.scale)


# --------------------------------------------------------------------------
# Main loop
# --------------------------------------------------------------------------

def _record(state, active_pc, inactive):
    p0 = state.p0
    return TraceRecord(
        gen=state.generation,
        fe=state.fe_used,
        pc=state.pc,
        dirs=[d.value for d in state.dirs],
        R=list(state.priority),
        feas_main=int(np.sum(p0.cv == 0.0)),
        min_cv_main=float(p0.cv.min()) if len(p0) else math.inf,
        active_pc=active_pc,
        inactive_selections=inactive,
    )


def run(problem: ProblemSpec, config: RunConfig) -> RunResult:
    """Run RCCMO on ``problem`` until ``config.max_fe`` evaluations are spent."""
    rng = np.random.default_rng(config.seed)
    n = config.n
    nc = problem.n_constraints
    var = config.variation
    cap = config.target_cap(nc)
    cap1 = config.stage1_cap(nc)
    budget_gate = config.beta * config.max_fe

    X0 = problem.lb + rng.random((n, problem.d)) * (problem.ub - problem.lb)
    p0 = evaluate_population(problem, X0, 0, config.eq_tol).with_role(MAIN, n)
    state = AlgorithmState(
        nc=nc,
        p0=p0,
        probe=p0.with_role(PROBE, n),
        upf=p0.with_role(UPF, n),
        pos=[p0.with_role(Role.pos(i), n) for i in range(1, nc + 1)],
        neg=[p0.with_role(Role.neg(i), n) for i in range(1, nc + 1)],
        pc=nc + 1,
        dirs=[Direction.POSITIVE] * nc,
        fe_used=n,
    )
    trace: List[TraceRecord] = []
    reports = []
    monitor = _Monitor()
    stage_fe = 0

    def retarget():
        nonlocal stage_fe
        report = determine_target(state.pos, state.probe, state.processed, nc)
        reports.append((state.generation, report))
        state.priority = list(report.ranking)
        state.processed = set(report.processed)
        state.pc = report.pc
        if report.pc > 0:
            state.dirs[report.pc - 1] = report.direction
        monitor.reset()
        stage_fe = 0
        log.debug("gen %d: R=%s -> pc=%d %s", state.generation, report.ranking, report.pc, report.direction.value)

    def refresh_all(offspring, skip=()):
        count = 0
        for i in range(1, nc + 1):
            if ("pos", i) not in skip:
                state.pos[i - 1] = update_positive(state.pos[i - 1], offspring, i, n)
                count += 1
            if ("neg", i) not in skip:
                state.neg[i - 1] = update_negative(state.neg[i - 1], offspring, state.p0, i, n)
                count += 1
        return count

    while state.fe_used < config.max_fe:
        state.generation += 1
        gen = state.generation
        active_pc = state.pc
        parents = state.active_population()
        count = min(n, config.max_fe - state.fe_used)
        Xo = de_offspring(parents.X, count, var, problem.lb, problem.ub, rng)
        offspring = evaluate_population(problem, Xo, state.fe_used, config.eq_tol)
        state.fe_used += count
        stage_fe += count

        state.probe = update_probe(state.probe, offspring, state.p0, n)
        state.p0 = environmental_selection(state.p0.merge(offspring), n, VIEW_CDP, role=MAIN)
        inactive = 0

        if state.pc == nc + 1:
            state.upf = environmental_selection(state.upf.merge(offspring), n, VIEW_OBJECTIVES, role=UPF)
            if gen % config.v == 0:
                refresh_all(offspring)
            monitor.push(state.upf)
            stable = stability_check(monitor.history, config.stability_window, config.stability_tol)
            # the cap only fires right after an interval refresh so the first
            # ranking reads up-to-date dual populations
            if stable or (stage_fe >= cap1 and gen % config.v == 0):
                retarget()
            elif state.fe_used > budget_gate:
                state.pc = 0
        elif state.pc > 0:
            pc = state.pc
            negative = state.dirs[pc - 1] is Direction.NEGATIVE
            if gen % config.v == 0:
                refresh_all(offspring)
                inactive = 2 * nc - (2 if negative else 1)
            else:
                state.pos[pc - 1] = update_positive(state.pos[pc - 1], offspring, pc, n)
                if negative:
                    state.neg[pc - 1] = update_negative(state.neg[pc - 1], offspring, state.p0, pc, n)

            flipped = flip_check(state)
            if flipped is not None:
                state.dirs[pc - 1] = flipped
                monitor.reset()

            monitor.push(state.active_population())
            if stage_fe >= cap or stability_check(monitor.history, config.stability_window, config.stability_tol):
                retarget()
            if state.fe_used > budget_gate:
                state.pc = 0

        trace.append(_record(state, active_pc, inactive))

    return RunResult(final=state.p0, trace=trace, reports=reports, fe_used=state.fe_used, state=state)
