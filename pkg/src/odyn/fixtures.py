"""Shared small fixtures: the 3-agent demo system and random stochastic matrices."""
from __future__ import annotations

import numpy as np

from .graphs import Graph, from_edge_list


def toy_adjacency() -> np.ndarray:
    """Row-stochastic influence matrix of the 3-agent demo system."""
    return np.array(
        [
            [0.0, 0.43, 0.57],
            [0.64, 0.0, 0.36],
            [0.70, 0.30, 0.0],
        ]
    )


def toy_initial_state() -> np.ndarray:
    """Initial 3-agent, 3-option state of the demo system."""
    return np.array(
        [
            [0.43, 0.29, 0.61],
            [0.14, 0.29, 0.37],
            [0.46, 0.79, 0.20],
        ]
    )


def toy_graph() -> Graph:
    """The demo influence matrix as a weighted directed graph."""
    a = toy_adjacency()
    edges = [
        (i, j, float(a[i, j]))
        for i in range(3)
        for j in range(3)
        if a[i, j] != 0.0
    ]
    return from_edge_list(edges, 3)


def random_row_stochastic(
    n: int, rng: np.random.Generator, zero_diagonal: bool = True
) -> np.ndarray:
    """Random row-stochastic matrix; diagonal zeroed by default like the demo."""
    if n == 1:
        # A 1x1 stochastic matrix is [1]; a zero diagonal is impossible here.
        return np.ones((1, 1))
    m = rng.uniform(0.0, 1.0, size=(n, n))
    if zero_diagonal:
        np.fill_diagonal(m, 0.0)
    return m / m.sum(axis=1, keepdims=True)
