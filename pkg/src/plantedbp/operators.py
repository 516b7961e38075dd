"""Arc-space operators for analyzing the message dynamics.

All operators act on centered arc vectors: ``gamma`` has shape
``(3, num_arcs)`` (one row per color) and represents message deviations from
the uniform point, ``gamma = eta - 1/3``.  Single-color operators
(:func:`apply_M`, :func:`apply_K`) act on one row.

* ``apply_B``   -- the full nonlinear one-step map in centered form,
* ``apply_Bprime`` -- its total derivative at the uniform point,
* ``apply_L``   -- the color-diagonal part of that derivative,
* ``apply_M`` / ``apply_K`` -- in-neighborhood sum and arc reversal, the two
  pieces ``L`` decomposes into (``L = -1/2 (M - K)`` color by color),
* ``m_matrix`` -- the 6x6 matrix of ``M - K`` restricted to arc vectors that
  are constant on each ordered class pair of a planted-regular graph.

``apply_B(gamma)`` agrees with ``bp_step`` exactly in exact arithmetic and to
~1e-15 in floating point; it is computed here with gather + segmented
reductions rather than the engine's scatter-sums, so the two code paths are
genuinely independent implementations of the same map.
"""

from __future__ import annotations

import numpy as np

from .engine import ContradictionError, _log_survival, _recenter
from .graphs import ArcTable, Graph

__all__ = [
    "PAIR_ORDER",
    "apply_B",
    "apply_Bprime",
    "apply_L",
    "apply_M",
    "apply_K",
    "m_matrix",
]

# ordered class pairs (i, j), i != j, indexing the 6 block-constant directions
PAIR_ORDER: tuple[tuple[int, int], ...] = (
    (0, 1),
    (0, 2),
    (1, 0),
    (1, 2),
    (2, 0),
    (2, 1),
)


def _segment_sums(arc_table: ArcTable, values: np.ndarray) -> np.ndarray:
    """Per-vertex sums of ``values`` over each vertex's out-arc segment.

    ``values`` is laid out per arc; segments follow ``out_start``.  Vertices
    with no out-arcs get garbage from reduceat (it cannot express an empty
    segment) but their totals are never read back through ``tail``.
    """
    starts = arc_table.out_start[:-1]
    if values.shape[-1] == 0:
        return np.zeros(values.shape[:-1] + starts.shape)
    # reduceat rejects a start index == len (a trailing out-arc-less vertex);
    # clip it -- the bogus total is unreachable through `tail` anyway
    return np.add.reduceat(
        values, np.minimum(starts, values.shape[-1] - 1), axis=-1
    )


def apply_B(graph: Graph, arc_table: ArcTable, gamma: np.ndarray) -> np.ndarray:
    """The nonlinear one-step message map in centered coordinates.

    Gather formulation: position ``k`` (arc ``v -> w``) reads the reversed
    arc's log-survival ``g[w -> v]`` via ``reverse_index``, so the per-vertex
    totals are segmented sums of the gathered array and the excluded term is
    the gathered entry itself.  -inf logs (saturated messages) are counted
    per segment to keep the exclusion exact.

    Raises
    ------
    ContradictionError
        If some arc ends up with every color excluded.
    """
    gamma = np.asarray(gamma, dtype=np.float64)
    g = _log_survival(gamma)
    incoming = g[:, arc_table.reverse_index]
    finite = np.isfinite(incoming)
    finite_totals = _segment_sums(arc_table, np.where(finite, incoming, 0.0))
    inf_counts = _segment_sums(arc_table, (~finite).astype(np.float64))
    tail = arc_table.tail
    others_inf = inf_counts[:, tail] - (~finite)
    base = finite_totals[:, tail] - np.where(finite, incoming, 0.0)
    ell = np.where(others_inf > 0, -np.inf, base)
    return _recenter(ell, arc_table)


def _excluded_sums(arc_table: ArcTable, gamma: np.ndarray) -> np.ndarray:
    """Per arc ``v -> w`` and row: plain sum of the row over in-arcs of v except w -> v."""
    n = arc_table.num_vertices
    out = np.empty_like(gamma)
    for a in range(gamma.shape[0]):
        totals = np.bincount(arc_table.head, weights=gamma[a], minlength=n)
        out[a] = totals[arc_table.tail] - gamma[a][arc_table.reverse_index]
    return out


def apply_Bprime(graph: Graph, arc_table: ArcTable, gamma: np.ndarray) -> np.ndarray:
    """Total derivative of the map at the uniform point.

    Row ``a`` gets ``-1/2`` times its own excluded in-sum plus ``1/6`` times
    the excluded in-sum totalled over colors (the normalization backflow).
    """
    gamma = np.asarray(gamma, dtype=np.float64)
    sums = _excluded_sums(arc_table, gamma)
    return -0.5 * sums + sums.sum(axis=0, keepdims=True) / 6.0


def apply_L(graph: Graph, arc_table: ArcTable, gamma: np.ndarray) -> np.ndarray:
    """Color-diagonal part of the derivative: ``-1/2`` excluded in-sum per row.

    On zero-column-sum inputs (per-arc colors summing to 0) this equals
    :func:`apply_Bprime`, whose backflow term then vanishes.
    """
    gamma = np.asarray(gamma, dtype=np.float64)
    return -0.5 * _excluded_sums(arc_table, gamma)


def apply_M(graph: Graph, arc_table: ArcTable, xi: np.ndarray) -> np.ndarray:
    """Full in-neighborhood sum: out value at ``v -> w`` sums xi over all in-arcs of v."""
    xi = np.asarray(xi, dtype=np.float64)
    totals = np.bincount(
        arc_table.head, weights=xi, minlength=arc_table.num_vertices
    )
    return totals[arc_table.tail]


def apply_K(graph: Graph, arc_table: ArcTable, xi: np.ndarray) -> np.ndarray:
    """Arc reversal: out value at ``v -> w`` is xi at ``w -> v``."""
    xi = np.asarray(xi, dtype=np.float64)
    return xi[arc_table.reverse_index]


def m_matrix(d: int) -> np.ndarray:
    """``M - K`` restricted to class-pair-constant arc vectors, as a 6x6 matrix.

    Basis order is :data:`PAIR_ORDER`.  On a planted-regular graph the unit
    vector on pair ``(i, j)`` maps to ``d`` on pair ``(j, k)`` (k the third
    class) plus ``d - 1`` on pair ``(j, i)``; columns hold the images.

    Eigenvalues: ``2d - 1`` (constant vector), ``1`` (cyclic orientation
    sign), and two double eigenvalues ``(-d -+ sqrt(d^2 - 8d + 4)) / 2``,
    real for d >= 8.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    index = {pair: k for k, pair in enumerate(PAIR_ORDER)}
    out = np.zeros((6, 6))
    for col, (i, j) in enumerate(PAIR_ORDER):
        k = 3 - i - j
        out[index[(j, k)], col] += float(d)
        out[index[(j, i)], col] += float(d - 1)
    return out
