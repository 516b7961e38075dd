"""Seeded sampler for the planted tripartite regular random graph model.

A sample is a uniformly random equal tripartition of ``3 * per_class``
vertices plus, for each of the three class pairs, an independent random
``d``-regular bipartite graph between the classes.  Everything is a pure
function of the seed: one :class:`numpy.random.SeedSequence` is spawned into
four independent streams (partition, then one per class pair in the fixed
order (0,1), (0,2), (1,2)).

Bipartite d-regular sampling uses the configuration model (d stubs per
vertex, one random matching) with rejection until simple, which is exactly
uniform.  The acceptance probability decays like ``exp(-(d - 1)**2 / 2)``,
hopeless already at d = 8, so when the budget cannot plausibly produce a hit
the sampler raises immediately and :func:`generate` falls back to switch
repair: keep the multigraph, break up duplicate edges with random 2-switches,
then apply ``10 * m * d`` further random 2-switches to mix.  The fallback is
approximately uniform (not exactly), and still deterministic given the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import Graph, PlantedColoring

__all__ = [
    "GenParams",
    "RejectionBudgetError",
    "sample_partition",
    "sample_bipartite_regular",
    "generate",
]

_CLASS_PAIRS = ((0, 1), (0, 2), (1, 2))


class RejectionBudgetError(RuntimeError):
    """Rejection sampling exhausted its budget (caller should switch-repair)."""


@dataclass(frozen=True)
class GenParams:
    """Parameters of one graph draw."""

    per_class: int
    d: int
    seed: int
    max_rejections: int = 10_000

    def __post_init__(self):
        if self.per_class < 1:
            raise ValueError(f"per_class must be >= 1, got {self.per_class}")
        if not 1 <= self.d <= self.per_class:
            raise ValueError(
                f"d must satisfy 1 <= d <= per_class, got d={self.d} "
                f"per_class={self.per_class}"
            )
        if self.max_rejections < 1:
            raise ValueError("max_rejections must be >= 1")

    @property
    def num_vertices(self) -> int:
        return 3 * self.per_class


def sample_partition(per_class: int, rng: np.random.Generator) -> PlantedColoring:
    """Uniform labeled partition of ``3 * per_class`` vertices into equal thirds."""
    n = 3 * per_class
    class_of = np.empty(n, dtype=np.int64)
    class_of[rng.permutation(n)] = np.repeat(np.arange(3), per_class)
    return PlantedColoring.from_array(class_of)


def _stub_pairs(m: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """One configuration-model draw: (m*d, 2) local index pairs."""
    left = np.repeat(np.arange(m), d)
    right = rng.permutation(np.repeat(np.arange(m), d))
    return np.column_stack([left, right])


def _is_simple(pairs: np.ndarray, m: int) -> bool:
    key = pairs[:, 0] * m + pairs[:, 1]
    return np.unique(key).size == key.size


def sample_bipartite_regular(
    left: np.ndarray,
    right: np.ndarray,
    d: int,
    rng: np.random.Generator,
    max_rejections: int = 10_000,
) -> list[tuple[int, int]]:
    """Exactly uniform random d-regular bipartite graph between two vertex sets.

    ``left`` and ``right`` are disjoint arrays of global vertex ids of equal
    size m >= d.  Returns the edge list as global id pairs.

    Raises
    ------
    RejectionBudgetError
        When the rejection budget is exhausted -- immediately, without
        drawing, if the expected number of simple hits over the whole budget
        is below 3 (acceptance probability ~ exp(-(d-1)^2 / 2)).
    """
    left = np.asarray(left)
    right = np.asarray(right)
    m = left.size
    if right.size != m:
        raise ValueError(f"class sizes differ: {m} vs {right.size}")
    if not 1 <= d <= m:
        raise ValueError(f"need 1 <= d <= {m}, got d={d}")
    if d == m:
        # complete bipartite graph; nothing to sample
        return [(int(u), int(v)) for u in left for v in right]
    p_simple = math.exp(-((d - 1) ** 2) / 2.0)
    if p_simple * max_rejections < 3.0:
        raise RejectionBudgetError(
            f"simple-graph probability ~{p_simple:.2e} at d={d}: "
            f"budget {max_rejections} cannot plausibly succeed"
        )
    for _ in range(max_rejections):
        pairs = _stub_pairs(m, d, rng)
        if _is_simple(pairs, m):
            return [
                (int(left[i]), int(right[j])) for i, j in pairs
            ]
    raise RejectionBudgetError(
        f"no simple graph in {max_rejections} configuration draws (d={d}, m={m})"
    )


def _switch_repair_bipartite(
    left: np.ndarray, right: np.ndarray, d: int, rng: np.random.Generator
) -> list[tuple[int, int]]:
    """Approximate-uniform fallback: stub draw, repair duplicates, mix.

    Edge slots live in local index arrays; a 2-switch exchanges the right
    endpoints of two slots when doing so creates no duplicate edge.
    """
    m = left.size
    pairs = _stub_pairs(m, d, rng)
    ls = pairs[:, 0].copy()
    rs = pairs[:, 1].copy()
    num = ls.size
    counts: dict[tuple[int, int], int] = {}
    for k in range(num):
        e = (int(ls[k]), int(rs[k]))
        counts[e] = counts.get(e, 0) + 1

    def try_switch(i: int, j: int) -> None:
        a = (int(ls[i]), int(rs[i]))
        b = (int(ls[j]), int(rs[j]))
        na = (a[0], b[1])
        nb = (b[0], a[1])
        if na == nb:
            return
        # proposed edges must not occur at any slot other than i and j
        occ_a = counts.get(na, 0) - (1 if na == a else 0) - (1 if na == b else 0)
        occ_b = counts.get(nb, 0) - (1 if nb == a else 0) - (1 if nb == b else 0)
        if occ_a > 0 or occ_b > 0:
            return
        for e in (a, b):
            counts[e] -= 1
            if counts[e] == 0:
                del counts[e]
        counts[na] = counts.get(na, 0) + 1
        counts[nb] = counts.get(nb, 0) + 1
        rs[i], rs[j] = rs[j], rs[i]

    # phase 1: untangle duplicate edges (rescan after each full pass)
    while True:
        dup_slots = [
            k for k in range(num) if counts[(int(ls[k]), int(rs[k]))] > 1
        ]
        if not dup_slots:
            break
        for k in dup_slots:
            while counts[(int(ls[k]), int(rs[k]))] > 1:
                j = int(rng.integers(num))
                if j != k:
                    try_switch(k, j)
    # phase 2: mixing
    for _ in range(10 * num):
        i, j = rng.integers(num, size=2)
        if i != j:
            try_switch(int(i), int(j))
    return [(int(left[ls[k]]), int(right[rs[k]])) for k in range(num)]


def generate(params: GenParams) -> tuple[Graph, PlantedColoring]:
    """Draw a planted tripartite d-regular graph; pure function of the seed."""
    streams = np.random.SeedSequence(params.seed).spawn(4)
    coloring = sample_partition(
        params.per_class, np.random.default_rng(streams[0])
    )
    edges: list[tuple[int, int]] = []
    for k, (i, j) in enumerate(_CLASS_PAIRS):
        rng = np.random.default_rng(streams[1 + k])
        left = coloring.vertices_in(i)
        right = coloring.vertices_in(j)
        try:
            pair_edges = sample_bipartite_regular(
                left, right, params.d, rng, params.max_rejections
            )
        except RejectionBudgetError:
            pair_edges = _switch_repair_bipartite(left, right, params.d, rng)
        edges.extend(pair_edges)
    return Graph.from_edges(params.num_vertices, edges), coloring
