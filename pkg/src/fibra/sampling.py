"""Seeded state sampling: uniform [-1, 1]^d on Euclidean factors, [0, 2pi) on circles."""

from __future__ import annotations

import numpy as np

from .graphs import PhaseSpace, StateIndex, TWO_PI


def sample_space(space: PhaseSpace, rng: np.random.Generator) -> np.ndarray:
    if space.is_circle:
        return rng.uniform(0.0, TWO_PI, size=1)
    return rng.uniform(-1.0, 1.0, size=space.dim)


def sample_state(index: StateIndex, rng: np.random.Generator) -> np.ndarray:
    x = np.empty(index.total_dim)
    for a in index.order:
        x[index.slice_of(a)] = sample_space(index.spaces[a], rng)
    return x
