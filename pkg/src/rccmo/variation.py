"""Offspring generation: DE/rand/1/bin followed by polynomial mutation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import ContractError


@dataclass(frozen=True)
class VariationParams:
    de_f: float = 0.5
    de_cr: float = 0.9
    pm: Optional[float] = None  # None -> 1/d
    eta_m: float = 20.0

    def __post_init__(self):
        if not np.isfinite(self.de_f):
            raise ContractError("de_f must be finite")
        if not 0.0 <= self.de_cr <= 1.0:
            raise ContractError("de_cr must lie in [0, 1]")
        if self.pm is not None and not 0.0 <= self.pm <= 1.0:
            raise ContractError("pm must lie in [0, 1]")
        if not self.eta_m > 0:
            raise ContractError("eta_m must be positive")

    def mutation_rate(self, d):
        return 1.0 / d if self.pm is None else self.pm


def rand1_mutant(x_r1, x_r2, x_r3, f):
    return np.asarray(x_r1) + f * (np.asarray(x_r2) - np.asarray(x_r3))


def _pick_donors(k, targets, rng):
    count = len(targets)
    if k < 4:
        return rng.integers(0, k, size=(count, 3))
    keys = rng.random((count, k))
    keys[np.arange(count), targets] = 2.0  # never choose the target itself
    return np.argpartition(keys, 3, axis=1)[:, :3]


def polynomial_mutation(x, params: VariationParams, lb, ub, rng):
    """Polynomial mutation of one vector or a batch of row vectors.

    Each coordinate mutates with probability ``params.pm`` (default ``1/d``);
    the result is clamped to ``[lb, ub]``.
    """
    x = np.array(x, dtype=np.float64)
    single = x.ndim == 1
    pop = x.reshape(1, -1) if single else x
    n, d = pop.shape
    lb = np.broadcast_to(np.asarray(lb, dtype=np.float64), (d,))
    ub = np.broadcast_to(np.asarray(ub, dtype=np.float64), (d,))
    pm = params.mutation_rate(d)
    eta = params.eta_m

    site = rng.random((n, d)) < pm
    u = rng.random((n, d))
    span = np.where(ub > lb, ub - lb, 1.0)
    delta1 = (pop - lb) / span
    delta2 = (ub - pop) / span
    mut_pow = 1.0 / (eta + 1.0)
    low = u <= 0.5
    with np.errstate(invalid="ignore", over="ignore"):
        val_lo = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - delta1) ** (eta + 1.0)
        val_hi = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - delta2) ** (eta + 1.0)
        deltaq = np.where(low, val_lo ** mut_pow - 1.0, 1.0 - val_hi ** mut_pow)
    out = np.where(site, pop + deltaq * span, pop)
    out = np.clip(out, lb, ub)
    return out[0] if single else out


def de_offspring(parents, count, params: VariationParams, lb, ub, rng):
    """``count`` DE/rand/1/bin trial vectors, polynomially mutated and clamped.

    Targets cycle through ``parents`` in order; the three donors are distinct
    and differ from the target when at least four parents exist, otherwise
    they are drawn with replacement.
    """
    parents = np.asarray(parents, dtype=np.float64)
    if parents.ndim != 2 or parents.shape[0] == 0:
        raise ContractError("de_offspring needs a non-empty 2-D parent array")
    if count < 1:
        raise ContractError("count must be at least 1")
    k, d = parents.shape
    lb = np.broadcast_to(np.asarray(lb, dtype=np.float64), (d,))
    ub = np.broadcast_to(np.asarray(ub, dtype=np.float64), (d,))

    targets = np.arange(count) % k
    donors = _pick_donors(k, targets, rng)
    mutant = rand1_mutant(parents[donors[:, 0]], parents[donors[:, 1]], parents[donors[:, 2]], params.de_f)

    cross = rng.random((count, d)) < params.de_cr
    cross[np.arange(count), rng.integers(0, d, size=count)] = True
    trial = np.where(cross, mutant, parents[targets])
    trial = np.clip(trial, lb, ub)
    return polynomial_mutation(trial, params, lb, ub, rng)
