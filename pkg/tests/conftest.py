"""Shared fixtures and seeded dataset generators."""

from __future__ import annotations

import numpy as np
import pytest

from cyclorat import (
    Dataset,
    LuceExponential,
    Menu,
    Observation,
    PairwiseRegret,
    SimplexPoint,
    ValueVector,
    make_dataset,
    pum_solve_closed,
    simulate_dataset,
)


def menu_of(size: int, menu_id: str = "m") -> Menu:
    return Menu(menu_id, tuple(f"a{k + 1}" for k in range(size)))


@pytest.fixture
def softmax_fixture() -> Dataset:
    # Two observations of the exponential-strength model, probabilities
    # rounded to five decimals; the rounding keeps the data cyclically
    # monotone with a wide margin.
    return make_dataset(
        "m",
        [[0.0, 0.0], [1.0, 0.0]],
        [[0.5, 0.5], [0.73106, 0.26894]],
    )


@pytest.fixture
def violation_fixture() -> Dataset:
    # Hand-built two-cycle violation: the 1 -> 2 -> 1 sum is
    # (0.3 - 0.7) + (-0.6 + 0.4) = -0.6.
    return make_dataset(
        "m",
        [[1.0, 0.0], [0.0, 1.0]],
        [[0.3, 0.7], [0.6, 0.4]],
    )


def pum_dataset(kind: str, rng: np.random.Generator, n: int, size: int, menu_id: str = "m") -> Dataset:
    """Dataset generated by the closed-form perturbed-utility solver."""
    menu = menu_of(size, menu_id)
    obs = []
    for _ in range(n):
        v = rng.uniform(-4.0, 4.0, size)
        obs.append(Observation(ValueVector(v), pum_solve_closed(kind, v)))
    return Dataset(menu, tuple(obs))


def luce_dataset(rng: np.random.Generator, n: int, size: int, menu_id: str = "m") -> Dataset:
    values = rng.uniform(-4.0, 4.0, (n, size)).tolist()
    return simulate_dataset(LuceExponential(), menu_of(size, menu_id), values)


def regret_dataset(rng: np.random.Generator, n: int, size: int, theta: float = 3.0) -> Dataset:
    values = rng.uniform(-3.0, 3.0, (n, size)).tolist()
    return simulate_dataset(PairwiseRegret(theta=theta), menu_of(size), values)


def random_probs_dataset(rng: np.random.Generator, n: int, size: int) -> Dataset:
    """Values and probabilities drawn independently; usually not monotone."""
    menu = menu_of(size)
    obs = []
    for _ in range(n):
        v = rng.uniform(-4.0, 4.0, size)
        p = rng.dirichlet(np.ones(size))
        obs.append(Observation(ValueVector(v), SimplexPoint(p)))
    return Dataset(menu, tuple(obs))


def mixed_pool_dataset(rng: np.random.Generator, n: int, size: int) -> Dataset:
    """Draw from the generator families so both verdicts appear."""
    pick = rng.integers(0, 4)
    if pick == 0:
        return luce_dataset(rng, n, size)
    if pick == 1:
        return pum_dataset("quadratic", rng, n, size)
    if pick == 2:
        return regret_dataset(rng, n, size, theta=float(rng.uniform(1.5, 4.0)))
    return random_probs_dataset(rng, n, size)
