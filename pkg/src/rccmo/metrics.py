"""Quality indicators and the rank-sum comparison used between algorithms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import norm, rankdata

from .core import ContractError

MC_SAMPLES = 100_000

A_BETTER = "A_BETTER"
B_BETTER = "B_BETTER"
NO_DIFFERENCE = "NO_DIFFERENCE"


@dataclass(frozen=True)
class MetricResult:
    name: str
    value: float
    sample_size: int
    details: dict = field(default_factory=dict)

    @property
    def defined(self):
        return not math.isnan(self.value)


def igd(reference, obtained) -> MetricResult:
    """Mean distance from each reference point to its nearest obtained point.

    ``obtained`` should hold only feasible objective vectors; an empty set
    gives an undefined (NaN) result.
    """
    P = np.asarray(reference, dtype=np.float64)
    Q = np.asarray(obtained, dtype=np.float64)
    if P.ndim != 2 or len(P) == 0:
        raise ContractError("reference set must be a non-empty 2-D array")
    if Q.size == 0:
        return MetricResult("igd", float("nan"), 0, {"undefined": "no feasible solutions"})
    Q = Q.reshape(-1, Q.shape[-1])
    if Q.shape[1] != P.shape[1]:
        raise ContractError(f"dimension mismatch: {P.shape[1]} vs {Q.shape[1]}")
    dist, _ = cKDTree(Q).query(P)
    return MetricResult("igd", float(dist.mean()), len(Q), {"reference_size": len(P)})


def _hv_2d(points, ref):
    pts = points[np.lexsort((points[:, 1], points[:, 0]))]
    volume = 0.0
    best_f2 = ref[1]
    for f1, f2 in pts:
        if f2 < best_f2:
            volume += (ref[0] - f1) * (best_f2 - f2)
            best_f2 = f2
    return volume


def hypervolume_mc(points, ref, samples=MC_SAMPLES, seed=0):
    """Monte Carlo estimate of the dominated volume inside ``[ideal, ref]``."""
    points = np.asarray(points, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if len(points) == 0:
        return 0.0
    lo = points.min(axis=0)
    box = float(np.prod(ref - lo))
    rng = np.random.default_rng(seed)
    hits = 0
    chunk = 10_000
    for start in range(0, samples, chunk):
        s = lo + rng.random((min(chunk, samples - start), len(ref))) * (ref - lo)
        covered = np.zeros(len(s), dtype=bool)
        for p in points:
            covered |= (s >= p).all(axis=1)
        hits += int(covered.sum())
    return box * hits / samples


def hypervolume(front, ref_point, samples=MC_SAMPLES, seed=0) -> MetricResult:
    """Hypervolume of ``front`` w.r.t. ``ref_point`` (minimization).

    Exact sweep for two objectives, seeded Monte Carlo otherwise. Points that
    do not strictly dominate the reference point add nothing.
    """
    ref = np.asarray(ref_point, dtype=np.float64)
    if not np.all(np.isfinite(ref)):
        raise ContractError("reference point must be finite")
    pts = np.asarray(front, dtype=np.float64)
    if pts.size == 0:
        return MetricResult("hv", 0.0, 0, {"method": "empty"})
    pts = pts.reshape(-1, len(ref))
    pts = pts[np.all(pts < ref, axis=1)]
    if len(pts) == 0:
        return MetricResult("hv", 0.0, 0, {"method": "empty"})
    if len(ref) == 2:
        return MetricResult("hv", _hv_2d(pts, ref), len(pts), {"method": "sweep"})
    value = hypervolume_mc(pts, ref, samples, seed)
    return MetricResult("hv", value, len(pts), {"method": "monte_carlo", "samples": samples, "seed": seed})


def rank_sum_statistic(a, b):
    """Rank sum of sample ``a`` within the pooled sample (average ranks on ties)."""
    ranks = rankdata(np.concatenate([a, b]))
    return float(ranks[: len(a)].sum())


def rank_sum_pvalue(a, b):
    """Two-sided p-value of the rank-sum test, normal approximation with tie correction."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n1, n2 = len(a), len(b)
    pooled = np.concatenate([a, b])
    w = rank_sum_statistic(a, b)
    mean = n1 * (n1 + n2 + 1) / 2.0
    _, counts = np.unique(pooled, return_counts=True)
    n = n1 + n2
    tie = float((counts ** 3 - counts).sum())
    var = n1 * n2 / 12.0 * ((n + 1) - tie / (n * (n - 1)))
    if var <= 0:
        return w, 1.0
    z = (w - mean) / math.sqrt(var)
    return w, float(2.0 * norm.sf(abs(z)))


def wilcoxon_rank_sum(a, b, alpha=0.05):
    """Compare two samples of a minimized metric.

    Returns A_BETTER / B_BETTER when the two-sided test is significant at
    ``alpha`` (the sample with the smaller median wins), else NO_DIFFERENCE.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) < 5 or len(b) < 5:
        raise ContractError("rank-sum comparison needs at least 5 values per sample")
    if not 0 < alpha <= 0.5:
        raise ContractError("alpha must lie in (0, 0.5]")
    w, p = rank_sum_pvalue(a, b)
    if p >= alpha:
        return NO_DIFFERENCE
    ma, mb = np.median(a), np.median(b)
    if ma != mb:
        return A_BETTER if ma < mb else B_BETTER
    # equal medians: fall back to the mean rank
    expected = len(a) * (len(a) + len(b) + 1) / 2.0
    return A_BETTER if w < expected else B_BETTER


def feasibility_rate(pop) -> float:
    cv = pop.cv if hasattr(pop, "cv") else np.asarray(pop, dtype=np.float64)
    if len(cv) == 0:
        return float("nan")
    return float(np.mean(np.asarray(cv) == 0.0))
