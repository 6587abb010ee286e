"""End-to-end acceptance checks.

Each test prints one ``[PASS]``/``[FAIL]`` line; the lines are repeated in
the pytest terminal summary. Run standalone with
``python tests/test_acceptance.py`` to get just the lines.
"""

import math
import time
from functools import lru_cache

import numpy as np
import pytest

from rccmo import engine
from rccmo.core import (
    VIEW_AUGMENTED,
    VIEW_CDP,
    VIEW_NEGATED,
    VIEW_OBJECTIVES,
    Population,
    SelectionView,
    nondominated_sort,
    spea2_fitness,
)
from rccmo.engine import Direction, RunConfig, rank_constraints
from rccmo.harness import ExperimentConfig, run_cdp_baseline, run_cell, run_experiment
from rccmo.metrics import A_BETTER, NO_DIFFERENCE, _hv_2d, hypervolume, hypervolume_mc, igd, wilcoxon_rank_sum
from rccmo.problems import make_tri, reference_front
from trace_checks import budget_ok, inactive_bound_ok, stage_pattern_ok

RESULTS = []
SEEDS = range(10)
BUDGET = 50_000


def report(n, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


# ---------------------------------------------------------------- shared runs

@lru_cache(maxsize=None)
def front(variant):
    return reference_front(variant, 1000, d=15)


@lru_cache(maxsize=None)
def rccmo_runs(variant):
    out = []
    for seed in SEEDS:
        t0 = time.perf_counter()
        res = engine.run(make_tri(variant, 15), RunConfig(n=100, max_fe=BUDGET, seed=seed))
        out.append((res, time.perf_counter() - t0))
    return out


@lru_cache(maxsize=None)
def cdp_runs(variant):
    return [run_cdp_baseline(make_tri(variant, 15), RunConfig(n=100, max_fe=BUDGET, seed=s)) for s in SEEDS]


def feasible_F(pop):
    return pop.F[pop.feasible]


def run_igd(variant, pop):
    value = igd(front(variant), feasible_F(pop)).value
    return math.inf if math.isnan(value) else value


# ---------------------------------------------------------------- criteria

def test_criterion_1_priority_golden():
    rep = rank_constraints([0.20, 0, 0, 0, 0.46, 0], [0, 0, 0.30, 0.10, 0.48, 0], set())
    best = min(_timed(lambda: rank_constraints([0.20, 0, 0, 0, 0.46, 0], [0, 0, 0.30, 0.10, 0.48, 0], set()))
               for _ in range(50))
    ok = rep.ranking == [5, 1, -3, -4] and rep.pc == 5 and rep.direction is Direction.POSITIVE and best < 1e-3
    assert report(1, ok, f"R={rep.ranking} pc={rep.pc} {rep.direction.value} in {best * 1e6:.0f} us")


def _timed(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def test_criterion_2_topology_classification():
    parts = []
    ok = True
    for variant in ("TRI1", "TRI2", "TRI3"):
        firsts = [res.reports[0][1].ranking for res, _ in rccmo_runs(variant)]
        excl = sum(3 not in map(abs, r) for r in firsts)
        ok &= excl >= 8
        parts.append(f"{variant} c3 excluded {excl}/10")
        if variant == "TRI1":
            both = sum(1 in r and 2 in r for r in firsts)
            ok &= both >= 8
            parts.append(f"TRI1 +1,+2 {both}/10")
        if variant == "TRI2":
            neg = sum(any(t.dirs[1] == Direction.NEGATIVE.value for t in res.trace) for res, _ in rccmo_runs(variant))
            ok &= neg >= 8
            parts.append(f"TRI2 c2 NEGATIVE {neg}/10")
    assert report(2, ok, "; ".join(parts))


def test_criterion_3_convergence():
    parts = []
    ok = True
    for variant in ("TRI1", "TRI2"):
        med = float(np.median([run_igd(variant, res.final) for res, _ in rccmo_runs(variant)]))
        ok &= med <= 0.05
        parts.append(f"{variant} median IGD {med:.4f}")
    dists = []
    for res, _ in rccmo_runs("TRI3"):
        F = feasible_F(res.final)
        dists.append(np.linalg.norm(F - 0.65, axis=1).min() if len(F) else math.inf)
    med = float(np.median(dists))
    ok &= med <= 0.02
    parts.append(f"TRI3 median dist {med:.4f}")
    slowest = max(t for v in ("TRI1", "TRI2", "TRI3") for _, t in rccmo_runs(v))
    ok &= slowest < 60
    parts.append(f"slowest run {slowest:.1f} s")
    assert report(3, ok, "; ".join(parts))


def test_criterion_4_baseline_on_blocked_landscapes():
    parts = []
    ok = True
    for variant in ("TRI2", "TRI3"):
        a = [run_igd(variant, res.final) for res, _ in rccmo_runs(variant)]
        b = [run_igd(variant, res.final) for res in cdp_runs(variant)]
        verdict = wilcoxon_rank_sum(a, b, 0.05)
        good = np.median(a) <= np.median(b) and verdict in (A_BETTER, NO_DIFFERENCE)
        ok &= good
        parts.append(f"{variant} RCCMO {np.median(a):.4f} vs CDP {np.median(b):.4f} {verdict}")
    assert report(4, ok, "; ".join(parts))


def test_criterion_5_aus_runtime():
    times = {}
    for alg in ("RCCMO", "RCCMO_NO_AUS"):
        times[alg] = np.mean([run_cell("TRIM:d=30", alg, s, {"max_fe": BUDGET})["runtime_ms"] for s in range(5)])
    ok = times["RCCMO"] < times["RCCMO_NO_AUS"]
    assert report(5, ok, f"TRIM mean ms V=30 {times['RCCMO']:.0f} vs V=1 {times['RCCMO_NO_AUS']:.0f}")


def _brute_fronts(vectors, viol):
    n = len(vectors)
    v = np.zeros(n) if viol is None else viol
    dom = np.zeros((n, n), dtype=bool)
    for i in range(n):
        le = (vectors[i] <= vectors).all(axis=1)
        lt = (vectors[i] < vectors).any(axis=1)
        dom[i] = (v[i] < v) | ((v[i] == v) & le & lt)
    ranks = np.zeros(n, dtype=int)
    left = np.ones(n, dtype=bool)
    level = 0
    while left.any():
        level += 1
        cur = left & ~dom[left].any(axis=0)
        ranks[cur] = level
        left &= ~cur
    return ranks


def test_criterion_6_sorting_oracles():
    rng = np.random.default_rng(2024)
    views = [VIEW_OBJECTIVES, VIEW_CDP, VIEW_AUGMENTED, VIEW_NEGATED, SelectionView.single(1), SelectionView.single(2)]
    bad = 0
    for _ in range(200):
        n, m = int(rng.integers(1, 201)), int(rng.choice([2, 3]))
        F = rng.random((n, m))
        F[rng.random(n) < 0.1] = F[0]  # duplicates
        C = np.where(rng.random((n, 2)) < 0.5, 0.0, rng.integers(1, 4, (n, 2)) / 4)
        pop = Population(np.zeros((n, 1)), F, C, C, C.sum(axis=1), np.arange(n))
        for view in views:
            vectors, viol = view.project(pop)
            fronts = nondominated_sort(vectors, viol)
            if not np.array_equal(fronts, _brute_fronts(vectors, viol)):
                bad += 1
            if not np.array_equal(spea2_fitness(vectors, viol) < 1, fronts == 1):
                bad += 1
    assert report(6, bad == 0, f"1200 (instance, view) pairs, {bad} mismatches")


def test_criterion_7_metric_oracles():
    checks = [
        igd([[0, 1], [1, 0]], [[0, 1], [1, 0]]).value - 0.0,
        igd([[0, 1], [1, 0]], [[0, 0]]).value - 1.0,
        igd([[0, 0]], [[3, 4]]).value - 5.0,
        hypervolume([[0.5, 0.5]], [1, 1]).value - 0.25,
        hypervolume([[0.2, 0.6], [0.6, 0.2]], [1, 1]).value - 0.48,
        hypervolume([[1.5, 0.2]], [1, 1]).value - 0.0,
    ]
    exact_ok = max(abs(c) for c in checks) <= 1e-9
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        pts = rng.random((int(rng.integers(1, 40)), 2))
        exact = _hv_2d(pts, np.ones(2))
        worst = max(worst, abs(hypervolume_mc(pts, np.ones(2), seed=int(rng.integers(1 << 31))) - exact) / exact)
    ok = exact_ok and worst < 0.01
    assert report(7, ok, f"trivial examples exact={exact_ok}; worst MC rel. error {worst:.4f}")


def test_criterion_8_determinism(tmp_path):
    cfg = ExperimentConfig(problems=["TRI1:d=8", "TRI2:d=8"], algorithms=["RCCMO", "CDP_BASELINE"], runs=2,
                           run_config={"n": 30, "max_fe": 3000, "v": 5})
    blobs = []
    for i, threads in enumerate((1, 1, 4)):
        out = tmp_path / f"run{i}"
        run_experiment(cfg, out=out, threads=threads)
        lines = (out / "results.csv").read_text(encoding="utf-8").splitlines()
        col = lines[0].split(",").index("runtime_ms")
        blobs.append("\n".join(",".join(c for j, c in enumerate(l.split(",")) if j != col) for l in lines))
    ok = blobs[0] == blobs[1] == blobs[2]
    assert report(8, ok, "serial, serial and 4-process CSVs " + ("identical" if ok else "differ"))


def test_criterion_9_trace_invariants():
    n_runs = fails = 0
    for variant in ("TRI1", "TRI2", "TRI3"):
        for res, _ in rccmo_runs(variant):
            n_runs += 1
            good = (res.fe_used <= BUDGET and budget_ok(res.trace, BUDGET)
                    and stage_pattern_ok(res.trace, 3) and inactive_bound_ok(res.trace, 3, 30))
            fails += not good
        for res in cdp_runs(variant):
            n_runs += 1
            fails += not (res.fe_used <= BUDGET and budget_ok(res.trace, BUDGET))
    assert report(9, fails == 0, f"{n_runs} runs checked, {fails} violations")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
