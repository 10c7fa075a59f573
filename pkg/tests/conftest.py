import numpy as np
import pytest

from neumann_mitigation import StochasticMatrix


def column_stochastic(gen: np.random.Generator, n: int) -> StochasticMatrix:
    """Generic random column-stochastic matrix (resistance unconstrained)."""
    d = 1 << n
    m = gen.random((d, d))
    return StochasticMatrix(n, m / m.sum(axis=0))


def usable_stochastic(gen: np.random.Generator, n: int) -> StochasticMatrix:
    """Random column-stochastic matrix with every diagonal entry above 0.5."""
    d = 1 << n
    lam = 0.55 + 0.425 * gen.random()
    m = gen.random((d, d))
    m = lam * np.eye(d) + (1.0 - lam) * (m / m.sum(axis=0))
    return StochasticMatrix(n, m / m.sum(axis=0))


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


@pytest.fixture
def gen():
    return np.random.default_rng(20240915)
