"""Shared fixtures and dense reference implementations.

Generated instances are cached per (per_class, d, seed) so the acceptance
tests and the unit tests reuse the same graphs instead of regenerating them.
The dense helpers build explicit matrices for the arc-space operators; they
are deliberately written in index-by-index style so they share no code with
the vectorized implementations they check.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import pytest

from plantedbp import GenParams, build_arc_table, generate


@lru_cache(maxsize=None)
def instance(per_class: int, d: int, seed: int = 0):
    """Cached (graph, coloring, arc_table) for a generated instance."""
    graph, coloring = generate(GenParams(per_class=per_class, d=d, seed=seed))
    return graph, coloring, build_arc_table(graph)


@pytest.fixture(scope="session")
def octahedron():
    return instance(2, 2, 7)


@pytest.fixture(scope="session")
def small8():
    """(d=8, m=50): the smaller workhorse instance."""
    return instance(50, 8, 0)


@pytest.fixture(scope="session")
def mid16():
    """(d=16, m=100): the trajectory-scale instance."""
    return instance(100, 16, 0)


# ---------------------------------------------------------------------------
# dense reference operators
# ---------------------------------------------------------------------------


def dense_excluded_matrix(arc_table) -> np.ndarray:
    """T[k, k'] = 1 iff arc k' feeds arc k: head(k') = tail(k), k' != reverse(k)."""
    num = arc_table.num_arcs
    T = np.zeros((num, num))
    for k in range(num):
        v = arc_table.tail[k]
        for kp in range(num):
            if arc_table.head[kp] == v and kp != arc_table.reverse_index[k]:
                T[k, kp] = 1.0
    return T


def dense_L_apply(arc_table, gamma: np.ndarray) -> np.ndarray:
    T = dense_excluded_matrix(arc_table)
    return np.stack([-0.5 * (T @ gamma[a]) for a in range(3)])


def dense_adjacency(graph) -> np.ndarray:
    n = graph.num_vertices
    A = np.zeros((n, n))
    for u, v in graph.edges:
        A[u, v] = 1.0
        A[v, u] = 1.0
    return A


def random_zero_colsum(rng, num_arcs: int, sup: float) -> np.ndarray:
    """Random (3, A) array with per-arc color sums exactly 0 and sup norm = sup."""
    g = rng.standard_normal((3, num_arcs))
    g -= g.mean(axis=0, keepdims=True)
    m = np.max(np.abs(g))
    return g * (sup / m) if m > 0 else g
