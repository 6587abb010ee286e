"""Experiment runner: problems x algorithms x seeds, CSV results, JSONL traces."""

from __future__ import annotations

import csv
import dataclasses
import itertools
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import engine
from .core import MAIN, VIEW_CDP, ContractError, environmental_selection
from .engine import RunConfig, TraceRecord
from .metrics import NO_DIFFERENCE, A_BETTER, B_BETTER, hypervolume, igd, wilcoxon_rank_sum
from .problems import evaluate_population, get_problem, parse_problem_name, reference_front
from .variation import VariationParams, de_offspring

log = logging.getLogger(__name__)

ALGORITHMS = ("RCCMO", "RCCMO_NO_AUS", "CDP_BASELINE")
RESULT_COLUMNS = ("problem", "algorithm", "seed", "fe_used", "runtime_ms", "feasible_count", "igd", "hv")
OUTPUT_ENV = "RCCMO_OUTPUT_DIR"
REFERENCE_RESOLUTION = 1000


class ConfigError(ContractError):
    """Experiment configuration failed validation."""


@dataclass(frozen=True)
class ExperimentConfig:
    problems: List[str]
    algorithms: List[str]
    runs: int = 30
    base_seed: int = 0
    run_config: dict = field(default_factory=dict)
    outputs: str = "results"
    emit_trace: bool = False

    def __post_init__(self):
        if not self.problems:
            raise ConfigError("no problems given")
        for name in self.problems:
            try:
                parse_problem_name(name)
            except ContractError as exc:
                raise ConfigError(str(exc)) from None
        if not self.algorithms:
            raise ConfigError("no algorithms given")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {alg!r}; choose from {', '.join(ALGORITHMS)}")
        if self.runs < 1:
            raise ConfigError("runs must be positive")
        try:
            make_run_config(self.run_config, "RCCMO", self.base_seed)
        except (TypeError, ContractError) as exc:
            raise ConfigError(f"bad run_config: {exc}") from None

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path):
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(data)

    def cells(self):
        """(problem, algorithm, seed) triples in output order."""
        for problem, alg, r in itertools.product(self.problems, self.algorithms, range(self.runs)):
            yield problem, alg, self.base_seed + r


def make_run_config(overrides, algorithm, seed) -> RunConfig:
    opts = dict(overrides or {})
    variation = VariationParams(**opts.pop("variation", {}))
    opts.pop("seed", None)
    cfg = RunConfig(variation=variation, seed=seed, **opts)
    if algorithm == "RCCMO_NO_AUS":
        cfg = dataclasses.replace(cfg, v=1)
    return cfg


# --------------------------------------------------------------------------
# Baseline
# --------------------------------------------------------------------------

@dataclass
class BaselineResult:
    final: object
    trace: List[TraceRecord]
    fe_used: int


def run_cdp_baseline(problem, config: RunConfig, view=VIEW_CDP) -> BaselineResult:
    """Single-population DE with constrained-dominance selection every generation."""
    rng = np.random.default_rng(config.seed)
    n = config.n
    X0 = problem.lb + rng.random((n, problem.d)) * (problem.ub - problem.lb)
    pop = evaluate_population(problem, X0, 0, config.eq_tol).with_role(MAIN, n)
    fe = n
    gen = 0
    trace = []
    while fe < config.max_fe:
        gen += 1
        count = min(n, config.max_fe - fe)
        Xo = de_offspring(pop.X, count, config.variation, problem.lb, problem.ub, rng)
        offspring = evaluate_population(problem, Xo, fe, config.eq_tol)
        fe += count
        pop = environmental_selection(pop.merge(offspring), n, view, role=MAIN)
        trace.append(TraceRecord(
            gen=gen, fe=fe, pc=0, dirs=[], R=[],
            feas_main=int(np.sum(pop.cv == 0.0)),
            min_cv_main=float(pop.cv.min()),
        ))
    return BaselineResult(final=pop, trace=trace, fe_used=fe)


# --------------------------------------------------------------------------
# Cells
# --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _reference(variant, d):
    return reference_front(variant, REFERENCE_RESOLUTION, d=d)


def run_cell(problem_name, algorithm, seed, overrides=None, trace_dir=None):
    """Run one (problem, algorithm, seed) cell and return its result row."""
    problem = get_problem(problem_name)
    variant, d = parse_problem_name(problem_name)
    cfg = make_run_config(overrides, algorithm, seed)
    start = time.perf_counter()
    if algorithm == "CDP_BASELINE":
        result = run_cdp_baseline(problem, cfg)
    else:
        result = engine.run(problem, cfg)
    runtime_ms = int(round((time.perf_counter() - start) * 1000))

    final = result.final
    feasible = final.F[final.feasible]
    row = {
        "problem": problem_name,
        "algorithm": algorithm,
        "seed": seed,
        "fe_used": result.fe_used,
        "runtime_ms": runtime_ms,
        "feasible_count": int(len(feasible)),
        "igd": float(igd(_reference(variant, d), feasible).value),
        "hv": float(hypervolume(feasible, np.ones(problem.m)).value),
    }
    if trace_dir is not None:
        path = Path(trace_dir) / f"{_slug(problem_name)}__{algorithm}__{seed}.jsonl"
        with open(path, "w", encoding="utf-8") as fh:
            for rec in result.trace:
                fh.write(json.dumps(rec.to_json_dict()) + "\n")
    return row


def _slug(name):
    return name.replace(":", "_").replace("=", "")


def _run_cell_args(args):
    return run_cell(*args)


def resolve_output_dir(cfg: ExperimentConfig, out=None):
    if out:
        return Path(out)
    env = os.environ.get(OUTPUT_ENV)
    return Path(env) if env else Path(cfg.outputs)


def run_experiment(cfg: ExperimentConfig, out=None, threads=1):
    """Run every cell, write ``results.csv`` (and traces), return the rows.

    Cells are independent and seeded individually, so the rows do not
    depend on ``threads``; they are always written in cell order.
    """
    out_dir = resolve_output_dir(cfg, out)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace_dir = None
    if cfg.emit_trace:
        trace_dir = out_dir / "traces"
        trace_dir.mkdir(exist_ok=True)
    jobs = [(p, a, s, cfg.run_config, None if trace_dir is None else str(trace_dir)) for p, a, s in cfg.cells()]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_run_cell_args, jobs))
    else:
        rows = [_run_cell_args(job) for job in jobs]
    write_results(out_dir / "results.csv", rows)
    return rows


def _fmt(value):
    if isinstance(value, float):
        return repr(float(value))  # plain repr even for numpy scalars
    return str(value)


def write_results(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in RESULT_COLUMNS])


def read_results(path):
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for raw in csv.DictReader(fh):
            rows.append({
                "problem": raw["problem"],
                "algorithm": raw["algorithm"],
                "seed": int(raw["seed"]),
                "fe_used": int(raw["fe_used"]),
                "runtime_ms": int(raw["runtime_ms"]),
                "feasible_count": int(raw["feasible_count"]),
                "igd": float(raw["igd"]),
                "hv": float(raw["hv"]),
            })
    return rows


# --------------------------------------------------------------------------
# Statistics
# --------------------------------------------------------------------------

SYMBOLS = {A_BETTER: "+", B_BETTER: "-", NO_DIFFERENCE: "≈"}


@dataclass
class Comparison:
    metric: str
    alpha: float
    verdicts: dict  # (problem, alg_a, alg_b) -> verdict
    tallies: dict  # (alg_a, alg_b) -> {"+": int, "-": int, "≈": int}

    def lines(self):
        out = []
        for (problem, a, b), verdict in self.verdicts.items():
            out.append(f"{problem}\t{a} vs {b}\t{SYMBOLS[verdict]}\t{verdict}")
        for (a, b), t in self.tallies.items():
            out.append(f"TOTAL\t{a} vs {b}\t{t['+']}/{t['-']}/{t['≈']}")
        return out


def _metric_samples(rows, metric):
    """Per-cell values oriented for minimization; undefined ranks worst."""
    cells = {}
    for row in rows:
        value = float(row[metric])
        if metric == "hv":
            value = -value
        if math.isnan(value):
            value = math.inf
        cells.setdefault((row["problem"], row["algorithm"]), []).append((row["seed"], value))
    return {k: [v for _, v in sorted(vals)] for k, vals in cells.items()}


def compare(rows, metric="igd", alpha=0.05, pairs=None) -> Comparison:
    """Pairwise rank-sum verdicts per problem with +/-/≈ tallies.

    ``+`` means the first algorithm of the pair is significantly better.
    By default every ordered pair of distinct algorithms (in first-seen
    order) is compared; pass ``pairs`` to choose them explicitly.
    """
    if metric not in ("igd", "hv"):
        raise ContractError(f"unknown metric {metric!r}")
    samples = _metric_samples(rows, metric)
    problems = list(dict.fromkeys(r["problem"] for r in rows))
    algorithms = list(dict.fromkeys(r["algorithm"] for r in rows))
    if pairs is None:
        pairs = list(itertools.combinations(algorithms, 2))
    verdicts = {}
    tallies = {}
    for a, b in pairs:
        t = tallies.setdefault((a, b), {"+": 0, "-": 0, "≈": 0})
        for problem in problems:
            if (problem, a) not in samples or (problem, b) not in samples:
                continue
            verdict = wilcoxon_rank_sum(samples[(problem, a)], samples[(problem, b)], alpha)
            verdicts[(problem, a, b)] = verdict
            t[SYMBOLS[verdict]] += 1
    return Comparison(metric, alpha, verdicts, tallies)
