import numpy as np
import pytest

from rccmo.core import ContractError
from rccmo.variation import VariationParams, de_offspring, polynomial_mutation, rand1_mutant


def test_rand1_arithmetic():
    parents = np.array([[0.0], [1.0], [2.0], [3.0]])
    assert rand1_mutant(parents[1], parents[2], parents[3], 0.5)[0] == 0.5


def test_pm_zero_is_identity():
    rng = np.random.default_rng(0)
    x = rng.random((20, 5))
    out = polynomial_mutation(x, VariationParams(pm=0.0), 0.0, 1.0, rng)
    assert np.array_equal(out, x)


def test_mutation_respects_bounds():
    rng = np.random.default_rng(1)
    x = rng.random((100_000, 2)) * 2 - 1
    x[:10] = [-1, 1]  # sit on the bounds
    out = polynomial_mutation(x, VariationParams(pm=1.0), -1.0, 1.0, rng)
    assert out.min() >= -1.0 and out.max() <= 1.0


def test_mutation_shrinks_with_eta():
    x = np.full((20_000, 1), 0.5)
    means = []
    for eta in (5, 10, 20, 40, 80):
        out = polynomial_mutation(x, VariationParams(pm=1.0, eta_m=eta), 0.0, 1.0, np.random.default_rng(eta))
        means.append(np.abs(out - x).mean())
    assert all(a > b for a, b in zip(means, means[1:]))


def test_identical_parents_give_parent():
    v = np.array([0.2, 0.4, 0.6])
    parents = np.tile(v, (10, 1))
    out = de_offspring(parents, 30, VariationParams(pm=0.0), 0.0, 1.0, np.random.default_rng(2))
    assert np.array_equal(out, np.tile(v, (30, 1)))


@pytest.mark.parametrize("k", [1, 2, 3, 4, 50])
def test_offspring_shape_bounds_determinism(k):
    parents = np.random.default_rng(k).random((k, 6))
    a = de_offspring(parents, 17, VariationParams(), 0.0, 1.0, np.random.default_rng(9))
    b = de_offspring(parents, 17, VariationParams(), 0.0, 1.0, np.random.default_rng(9))
    assert a.shape == (17, 6)
    assert np.array_equal(a, b)
    assert a.min() >= 0.0 and a.max() <= 1.0


def test_invalid_inputs():
    with pytest.raises(ContractError):
        de_offspring(np.zeros((0, 3)), 5, VariationParams(), 0, 1, np.random.default_rng())
    with pytest.raises(ContractError):
        VariationParams(de_cr=1.5)
    with pytest.raises(ContractError):
        VariationParams(eta_m=0)
