"""Seeded random scenarios for sweeps over the invariants."""

from __future__ import annotations

import numpy as np

from .core import PossibilityDistribution, SampleSpace, Variable
from .scenario import (
    AffineGenerator,
    ExplicitGenerator,
    Scenario,
    SeededUniformGenerator,
)


def random_distribution(rng: np.random.Generator, size: int) -> PossibilityDistribution:
    space = SampleSpace(tuple(f"w{i}" for i in range(size)))
    weights = rng.uniform(0.0, 1.0, size)
    weights[rng.random(size) < 0.15] = 0.0
    weights[rng.integers(size)] = 1.0
    return PossibilityDistribution(space, tuple(weights))


def random_case(rng: np.random.Generator, max_size: int = 20, max_n: int = 50):
    """A distribution and a list of n variables with mixed-sign values."""
    dist = random_distribution(rng, int(rng.integers(1, max_size + 1)))
    n = int(rng.integers(1, max_n + 1))
    scale = float(rng.choice([0.1, 1.0, 10.0]))
    table = rng.normal(0.0, scale, (n, len(dist.space)))
    if rng.random() < 0.3:
        table = np.abs(table)
    if rng.random() < 0.2:
        table = np.round(table)
    return dist, [Variable(dist.space, tuple(row)) for row in table]


def random_cases(seed: int, count: int, max_size: int = 20, max_n: int = 50):
    rng = np.random.default_rng(seed)
    return [random_case(rng, max_size, max_n) for _ in range(count)]


def random_affine_scenario(rng: np.random.Generator, max_size: int = 6) -> Scenario:
    dist = random_distribution(rng, int(rng.integers(1, max_size + 1)))
    choices = np.array([-1.0, 0.0, 0.0, 0.5, 1.0, 2.0])
    coeffs = []
    for _ in dist.space:
        alpha, beta, gamma = rng.choice(choices, 3)
        if rng.random() < 0.3:
            alpha = beta = gamma = 0.0
        coeffs.append((float(alpha), float(beta), float(gamma), float(rng.normal())))
    return Scenario(dist, AffineGenerator(dist.space, tuple(coeffs)))


def random_explicit_scenario(rng: np.random.Generator, horizon: int, max_size: int = 6) -> Scenario:
    """Tables whose columns settle, oscillate or decay towards a constant."""
    dist = random_distribution(rng, int(rng.integers(1, max_size + 1)))
    k = np.arange(1, horizon + 1, dtype=float)
    cols = []
    for _ in dist.space:
        level = float(rng.normal())
        kind = rng.integers(4)
        if kind == 0:
            col = np.full(horizon, level)
        elif kind == 1:
            col = level + rng.uniform(0.5, 2.0) / k
        elif kind == 2:
            col = level + rng.uniform(0.1, 1.0) * (-1.0) ** k
        else:
            col = level + rng.normal(0.0, 1.0, horizon)
        cols.append(col)
    table = np.stack(cols, axis=1)
    return Scenario(dist, ExplicitGenerator(dist.space, tuple(map(tuple, table))), horizon=horizon)


def random_seeded_scenario(rng: np.random.Generator, max_size: int = 6) -> Scenario:
    dist = random_distribution(rng, int(rng.integers(1, max_size + 1)))
    size = len(dist.space)
    amp = rng.uniform(0.0, 2.0, size)
    amp[rng.random(size) < 0.4] = 0.0
    return Scenario(
        dist,
        SeededUniformGenerator(dist.space, int(rng.integers(0, 2**63)), tuple(rng.normal(size=size)), tuple(amp)),
    )


def scenario_corpus(seed: int, count: int, horizon: int = 400) -> list[Scenario]:
    """Mixed closed-form, tabulated and seeded scenarios."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        kind = i % 3
        if kind == 0:
            out.append(random_affine_scenario(rng))
        elif kind == 1:
            out.append(random_explicit_scenario(rng, horizon))
        else:
            out.append(random_seeded_scenario(rng))
    return out
