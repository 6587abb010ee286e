import itertools
import math

import numpy as np
import pytest
from scipy.stats import mannwhitneyu

from rccmo.core import ContractError, Population
from rccmo.metrics import (
    A_BETTER,
    B_BETTER,
    NO_DIFFERENCE,
    _hv_2d,
    feasibility_rate,
    hypervolume,
    hypervolume_mc,
    igd,
    rank_sum_pvalue,
    rank_sum_statistic,
    wilcoxon_rank_sum,
)


def exact_rank_sum_pvalue(a, b):
    """Two-sided exact p-value by enumerating every split of the pooled ranks."""
    pooled = np.concatenate([a, b])
    ranks = np.argsort(np.argsort(pooled)) + 1.0  # no ties in callers
    n1 = len(a)
    mean = n1 * (len(pooled) + 1) / 2
    observed = abs(ranks[:n1].sum() - mean)
    total = hits = 0
    for combo in itertools.combinations(ranks, n1):
        total += 1
        hits += abs(sum(combo) - mean) >= observed - 1e-12
    return hits / total


def test_igd_examples():
    P = np.array([[0, 1], [1, 0.0]])
    assert igd(P, P).value == 0.0
    assert abs(igd(P, [[0, 0]]).value - 1.0) < 1e-9
    assert abs(igd([[0, 0]], [[3, 4]]).value - 5.0) < 1e-9
    assert not igd(P, np.zeros((0, 2))).defined
    with pytest.raises(ContractError):
        igd(P, [[0, 0, 0]])


def test_igd_monotone_in_obtained_set():
    rng = np.random.default_rng(0)
    P = rng.random((50, 2))
    Q1, Q2 = rng.random((10, 2)), rng.random((10, 2))
    assert igd(P, Q1).value >= igd(P, np.vstack([Q1, Q2])).value


def test_hv_examples():
    assert abs(hypervolume([[0.5, 0.5]], [1, 1]).value - 0.25) < 1e-9
    assert abs(hypervolume([[0.2, 0.6], [0.6, 0.2]], [1, 1]).value - 0.48) < 1e-9
    assert hypervolume([[1.5, 0.2]], [1, 1]).value == 0.0
    assert hypervolume(np.zeros((0, 2)), [1, 1]).value == 0.0
    with pytest.raises(ContractError):
        hypervolume([[0.5, 0.5]], [np.inf, 1])


def test_hv_monotone():
    rng = np.random.default_rng(1)
    pts = rng.random((20, 2))
    base = hypervolume(pts, [1, 1]).value
    assert hypervolume(np.vstack([pts, rng.random((1, 2))]), [1, 1]).value >= base


def test_hv_monte_carlo_matches_sweep_2d():
    rng = np.random.default_rng(2)
    for _ in range(50):
        t = np.sort(rng.random(int(rng.integers(2, 30))))
        front = np.column_stack([t, (1 - t) ** rng.uniform(0.5, 2)]) * 0.9
        exact = _hv_2d(front, np.ones(2))
        approx = hypervolume_mc(front, np.ones(2), seed=int(rng.integers(1 << 30)))
        assert abs(approx - exact) / exact < 0.01


def test_hv_3d_uses_monte_carlo():
    res = hypervolume([[0.5, 0.5, 0.5]], [1, 1, 1])
    assert res.details["method"] == "monte_carlo"
    assert abs(res.value - 0.125) < 0.005


def test_rank_sum_golden():
    a, b = np.arange(1, 11.0), np.arange(11, 21.0)
    assert rank_sum_statistic(a, b) == 55
    assert wilcoxon_rank_sum(a, b) == A_BETTER
    assert wilcoxon_rank_sum(b, a) == B_BETTER


def test_rank_sum_verdict_matches_exact_test():
    # disjoint ranges: enumeration gives the exact p-value
    a, b = np.arange(6.0), np.arange(6.0) + 100
    assert exact_rank_sum_pvalue(a, b) == 2 / math.comb(12, 6)
    assert wilcoxon_rank_sum(np.arange(10.0), np.arange(10.0) + 100) == A_BETTER

    rng = np.random.default_rng(3)
    checked = 0
    for _ in range(200):
        a, b = rng.normal(0, 1, 10), rng.normal(rng.uniform(0, 3), 1, 10)
        exact = mannwhitneyu(a, b, method="exact").pvalue
        if 0.02 < exact < 0.1:
            continue  # too close to alpha for an approximation to be held to
        verdict = wilcoxon_rank_sum(a, b, 0.05)
        assert (verdict != NO_DIFFERENCE) == (exact < 0.05)
        checked += 1
    assert checked > 150


def test_rank_sum_matches_scipy_normal_approximation():
    rng = np.random.default_rng(4)
    a = rng.integers(0, 8, 15).astype(float)  # ties
    b = rng.integers(2, 10, 12).astype(float)
    _, p = rank_sum_pvalue(a, b)
    ref = mannwhitneyu(a, b, use_continuity=False, method="asymptotic").pvalue
    assert math.isclose(p, ref, rel_tol=1e-9)


def test_rank_sum_edge_cases():
    a = np.linspace(0, 1, 30)
    assert wilcoxon_rank_sum(a, a) == NO_DIFFERENCE
    assert wilcoxon_rank_sum(np.ones(8), np.ones(8)) == NO_DIFFERENCE
    assert wilcoxon_rank_sum(a, a + 10) == A_BETTER
    with pytest.raises(ContractError):
        wilcoxon_rank_sum([1, 2, 3], [4, 5, 6])
    with pytest.raises(ContractError):
        wilcoxon_rank_sum(a, a, alpha=0.9)


def test_rank_sum_symmetric():
    rng = np.random.default_rng(5)
    swap = {A_BETTER: B_BETTER, B_BETTER: A_BETTER, NO_DIFFERENCE: NO_DIFFERENCE}
    for _ in range(30):
        a, b = rng.normal(0, 1, 10), rng.normal(rng.uniform(0, 2), 1, 10)
        assert wilcoxon_rank_sum(b, a) == swap[wilcoxon_rank_sum(a, b)]


def test_feasibility_rate():
    def pop(cv):
        n = len(cv)
        return Population(np.zeros((n, 1)), np.zeros((n, 2)), np.zeros((n, 1)), np.zeros((n, 1)), cv, np.arange(n))

    assert feasibility_rate(pop(np.zeros(4))) == 1.0
    assert feasibility_rate(pop(np.ones(4))) == 0.0
    assert feasibility_rate(pop(np.r_[np.zeros(3), np.ones(7)])) == 0.3
    assert math.isnan(feasibility_rate(np.zeros(0)))
