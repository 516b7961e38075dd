"""Spectral structure checks and the eigenvector 3-coloring heuristic.

The planted model leaves two exact fingerprints in the adjacency spectrum:
indicator differences of class pairs are eigenvectors with eigenvalue ``-d``
(checked exactly by :func:`verify_r1`), and everything orthogonal to the
class indicators should have small norm growth under A (the ``epsilon_hat``
of :func:`estimate_epsilon`, a deflated power iteration).
:func:`spectral_color` runs the converse direction: recover the classes from
the bottom eigenplane without being told them.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .graphs import Graph, PlantedColoring

__all__ = [
    "RegularityReport",
    "SpectralColoringError",
    "adjacency_matvec",
    "verify_r1",
    "estimate_epsilon",
    "spectral_color",
    "discrepancy_check",
]


@dataclass(frozen=True)
class RegularityReport:
    """Outcome of the structural + spectral regularity estimate."""

    r1_residual: float
    epsilon_hat: float
    power_iters: int
    converged: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self))


class SpectralColoringError(RuntimeError):
    """Eigenvector clustering did not produce exactly three groups."""

    def __init__(self, message: str, num_groups: int | None = None):
        super().__init__(message)
        self.num_groups = num_groups


# ---------------------------------------------------------------------------
# adjacency action and R1
# ---------------------------------------------------------------------------


def _arc_endpoints(graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    e = graph.edge_array()
    return (
        np.concatenate([e[:, 0], e[:, 1]]),
        np.concatenate([e[:, 1], e[:, 0]]),
    )


def adjacency_matvec(graph: Graph, x: np.ndarray) -> np.ndarray:
    """(Ax)_v = sum of x over neighbors of v."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (graph.num_vertices,):
        raise ValueError(
            f"x has shape {x.shape}, expected ({graph.num_vertices},)"
        )
    tail, head = _arc_endpoints(graph)
    return np.bincount(tail, weights=x[head], minlength=graph.num_vertices)


def verify_r1(graph: Graph, coloring: PlantedColoring, d: int) -> np.ndarray:
    """Sup-norm residuals of A(1_i - 1_j) = -d (1_i - 1_j), pairs (0,1),(0,2),(1,2).

    Integer-exact: built from cross-class degree counts.
    """
    n = graph.num_vertices
    cls = coloring.class_of
    cross = np.zeros((n, 3), dtype=np.int64)
    e = graph.edge_array()
    if e.size:
        np.add.at(cross, (e[:, 0], cls[e[:, 1]]), 1)
        np.add.at(cross, (e[:, 1], cls[e[:, 0]]), 1)
    residuals = np.empty(3)
    for k, (i, j) in enumerate(((0, 1), (0, 2), (1, 2))):
        sign = (cls == i).astype(np.int64) - (cls == j).astype(np.int64)
        vec = cross[:, i] - cross[:, j] + d * sign
        residuals[k] = float(np.max(np.abs(vec))) if n else 0.0
    return residuals


# ---------------------------------------------------------------------------
# R2 estimate
# ---------------------------------------------------------------------------


def _project_off_indicators(x: np.ndarray, cls: np.ndarray) -> np.ndarray:
    """Remove the span of the three class indicators: subtract class means."""
    out = x.copy()
    for c in range(3):
        mask = cls == c
        if np.any(mask):
            out[mask] -= out[mask].mean()
    return out


def estimate_epsilon(
    graph: Graph,
    coloring: PlantedColoring,
    d: int,
    tol: float = 1e-8,
    max_iters: int = 10_000,
    rng: np.random.Generator | None = None,
) -> RegularityReport:
    """Estimate max ‖Ax‖/(d‖x‖) over x orthogonal to the class indicators.

    Power iteration on A² with re-orthogonalization against the indicators
    every step; the running estimate is the Rayleigh value ‖Ax‖ for unit x,
    converged when its relative change drops below ``tol``.

    Raises
    ------
    ValueError
        If the R1 residuals exceed 1e-9 (the indicator span would not be
        A-invariant, so deflating it would not bound anything meaningful).
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    r1 = verify_r1(graph, coloring, d)
    r1_residual = float(np.max(r1))
    if r1_residual > 1e-9:
        raise ValueError(
            f"R1 residual {r1_residual} exceeds 1e-9; "
            "estimate_epsilon needs an exactly planted-regular graph"
        )
    if rng is None:
        rng = np.random.default_rng(0)
    cls = coloring.class_of
    x = _project_off_indicators(rng.standard_normal(graph.num_vertices), cls)
    norm = np.linalg.norm(x)
    if norm < 1e-12:
        # complement of the indicator span is trivial (n = 3)
        return RegularityReport(r1_residual, 0.0, 0, True)
    x /= norm
    sigma_prev = None
    iters = 0
    converged = False
    sigma = 0.0
    while iters < max_iters:
        iters += 1
        ax = _project_off_indicators(adjacency_matvec(graph, x), cls)
        sigma = float(np.linalg.norm(ax))
        if sigma < 1e-12:
            # the complement is in A's kernel (e.g. complete tripartite)
            converged = True
            break
        x = _project_off_indicators(adjacency_matvec(graph, ax), cls)
        x /= np.linalg.norm(x)
        if sigma_prev is not None and abs(sigma - sigma_prev) <= tol * sigma:
            converged = True
            break
        sigma_prev = sigma
    return RegularityReport(r1_residual, sigma / d, iters, converged)


# ---------------------------------------------------------------------------
# the coloring heuristic
# ---------------------------------------------------------------------------


def spectral_color(
    graph: Graph,
    d: int,
    cluster_tol: float = 1e-6,
    rng: np.random.Generator | None = None,
    max_iters: int = 10_000,
) -> np.ndarray:
    """Recover a 3-coloring from the two eigenvectors with eigenvalue near -d.

    Works blind (no planted coloring input): power iteration on the shifted
    operator ``sigma I - A`` (sigma = max degree) restricted orthogonal to
    the all-ones vector lifts the most negative adjacency eigenvalue to the
    top; a second vector is found by deflation.  Vertices are grouped by
    their rounded coordinate pairs -- on an exactly regular graph the
    eigenplane is exactly class-constant.

    Raises
    ------
    SpectralColoringError
        If the rounded coordinates form anything but exactly 3 groups.
    """
    n = graph.num_vertices
    if n < 3:
        raise SpectralColoringError(f"graph too small to 3-color ({n} vertices)")
    if rng is None:
        rng = np.random.default_rng(0)
    shift = float(max(graph.degree(v) for v in range(n)))

    def op(v: np.ndarray) -> np.ndarray:
        w = shift * v - adjacency_matvec(graph, v)
        return w - w.mean()

    def top_vector(deflate: np.ndarray | None) -> np.ndarray:
        x = rng.standard_normal(n)
        x -= x.mean()
        if deflate is not None:
            x -= (x @ deflate) * deflate
        x /= np.linalg.norm(x)
        for _ in range(max_iters):
            y = op(x)
            if deflate is not None:
                y -= (y @ deflate) * deflate
            norm = np.linalg.norm(y)
            if norm < 1e-15:
                break
            y /= norm
            # the shifted operator is PSD, so the iterate cannot flip sign;
            # watch the vector itself -- the Rayleigh value settles much
            # earlier than the direction does
            moved = float(np.linalg.norm(y - x))
            x = y
            if moved <= 1e-13:
                break
        return x

    chi1 = top_vector(None)
    chi2 = top_vector(chi1)
    decimals = max(1, int(round(-math.log10(max(cluster_tol, 1e-15)))))
    coords = np.column_stack([chi1, chi2])
    sup = np.max(np.abs(coords))
    if sup > 0:
        coords = coords / sup
    # the +0.0 collapses -0.0 into +0.0, which axis-unique would otherwise
    # treat as a distinct byte pattern
    rounded = np.round(coords, decimals) + 0.0
    # group by first appearance so output labels are deterministic
    _, first_pos, inverse = np.unique(
        rounded, axis=0, return_index=True, return_inverse=True
    )
    inverse = np.ravel(inverse)
    order = np.argsort(np.argsort(first_pos))
    groups = order[inverse]
    num_groups = int(groups.max()) + 1
    if num_groups != 3:
        raise SpectralColoringError(
            f"eigenvector clustering produced {num_groups} groups, not 3",
            num_groups=num_groups,
        )
    return groups


# ---------------------------------------------------------------------------
# discrepancy diagnostic
# ---------------------------------------------------------------------------


def discrepancy_check(
    graph: Graph,
    coloring: PlantedColoring,
    d: int,
    num_samples: int = 1000,
    rng: np.random.Generator | None = None,
) -> float:
    """Monte Carlo edge-discrepancy diagnostic (no hard pass/fail).

    Samples random subset pairs (S of one class, T of another) of random
    sizes and returns the max of ``|e(S,T) - |S||T| p| / (d^0.51 sqrt(|S||T|))``
    with ``p = d/m``.  Values that stay ~1 or below are consistent with the
    pseudo-random edge distribution the planted model should exhibit.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    sizes = coloring.class_sizes
    if min(sizes) < 1:
        raise ValueError("discrepancy_check needs three nonempty classes")
    m = sizes[0]
    if sizes != (m, m, m):
        raise ValueError(f"classes must be balanced, got sizes {sizes}")
    p = d / m
    tail, head = _arc_endpoints(graph)
    members = [coloring.vertices_in(c) for c in range(3)]
    pairs = ((0, 1), (0, 2), (1, 2))
    worst = 0.0
    n = graph.num_vertices
    for _ in range(num_samples):
        i, j = pairs[int(rng.integers(3))]
        s = int(rng.integers(1, m + 1))
        t = int(rng.integers(1, m + 1))
        in_s = np.zeros(n, dtype=bool)
        in_t = np.zeros(n, dtype=bool)
        in_s[rng.choice(members[i], size=s, replace=False)] = True
        in_t[rng.choice(members[j], size=t, replace=False)] = True
        # S and T live in different classes, so each S-T edge is exactly
        # one arc with tail in S and head in T
        count = int(np.count_nonzero(in_s[tail] & in_t[head]))
        value = abs(count - s * t * p) / (d**0.51 * math.sqrt(s * t))
        worst = max(worst, value)
    return worst
