"""Synchronous belief-propagation engine for 3-coloring.

Message arrays have shape ``(3, num_arcs)`` -- one row per color, arcs in
:class:`~plantedbp.graphs.ArcTable` order.  The state is stored *centered*:
:class:`MessageState` holds ``delta = eta - 1/3`` and exposes ``eta`` as a
view.  This is not cosmetic: the symmetry-breaking perturbations this solver
runs from (default ``exp(-ln^3 n)``) are far below the floating-point
resolution of 1/3, so an ``eta``-valued array would silently round them away.
For the same reason the update never forms products of near-1 factors
directly; it works with ``log1p(-1.5 * delta)`` -- the log of each survival
factor relative to its value at the uniform point -- accumulates per-vertex
totals, subtracts the excluded in-arc, and recenters through ``expm1``.
Saturated messages (``eta = 1``, a neighbor certain of a color) make the log
``-inf``; those are tracked by count so exclusion stays exact, and a vertex
whose every color is forbidden raises :class:`ContradictionError`.

The update rule per arc ``v -> w`` and color ``a``: take the product over
in-neighbors ``u != w`` of ``(1 - eta^a(u -> v))``, normalize across colors.
Rounding to a coloring averages ``1 - eta^a`` over *all* in-arcs and takes
the argmax color (lowest index on ties).
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .graphs import ArcTable, Graph, PlantedColoring
from .records import TrialRecord

__all__ = [
    "UNIFORM",
    "MessageState",
    "BpParams",
    "InitRecord",
    "ContradictionError",
    "default_delta",
    "default_l_star",
    "init_independent",
    "init_balanced",
    "init_aligned",
    "bp_step",
    "round_beliefs",
    "is_proper",
    "is_proper_coloring",
    "matches_up_to_permutation",
    "run_bpcol",
]

UNIFORM = 1.0 / 3.0

# properness thresholds for message vectors, with one-ulp-style forgiveness
# so that states sitting exactly on the boundary count as proper
_PROPER_OWN = 0.99
_PROPER_OFF = 0.01
_PROPER_SLACK = 1e-12

# below this, per-step rounding noise amplifies faster than the seeded bias
# and double precision cannot realize the intended dynamics (see run_bpcol)
_DELTA_NOISE_FLOOR = 1e-30

_DELTA_CLAMP = 1e-200


class ContradictionError(RuntimeError):
    """Some arc's message update found every color forbidden."""

    def __init__(self, arc: int, tail: int, head: int):
        super().__init__(
            f"contradiction on arc {arc} ({tail} -> {head}): "
            "all colors are excluded by saturated in-messages"
        )
        self.arc = arc
        self.tail = tail
        self.head = head


# ---------------------------------------------------------------------------
# state
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MessageState:
    """Message assignment at one iteration; ``delta`` is ``eta - 1/3``.

    ``delta`` has shape ``(3, num_arcs)``.  Per-arc column sums are zero by
    construction (messages are normalized across colors).
    """

    delta: np.ndarray
    iteration: int = 0

    @property
    def eta(self) -> np.ndarray:
        """Messages in probability form (computed view; lossy for tiny delta)."""
        return self.delta + UNIFORM

    @classmethod
    def from_eta(cls, eta: np.ndarray, iteration: int = 0) -> "MessageState":
        """Build from probability-form messages, validating normalization."""
        eta = np.asarray(eta, dtype=np.float64)
        if eta.ndim != 2 or eta.shape[0] != 3:
            raise ValueError(f"eta must have shape (3, num_arcs), got {eta.shape}")
        if eta.size and (eta.min() < -1e-12 or eta.max() > 1 + 1e-12):
            raise ValueError("eta entries must lie in [0, 1]")
        col = eta.sum(axis=0)
        if eta.size and np.max(np.abs(col - 1.0)) > 1e-9:
            raise ValueError("eta columns must sum to 1")
        return cls(eta - UNIFORM, iteration)

    @property
    def num_arcs(self) -> int:
        return self.delta.shape[1]

    def sup_distance(self, other: "MessageState") -> float:
        if self.delta.size == 0:
            return 0.0
        return float(np.max(np.abs(self.delta - other.delta)))


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------


def default_delta(n: int) -> float:
    """``exp(-ln^3 n)``, clamped at 1e-200 (with a warning) for large n."""
    if n < 2:
        return 0.25
    val = math.exp(-math.log(n) ** 3)
    if val < _DELTA_CLAMP:
        warnings.warn(
            f"default delta underflows at n={n}; clamping to {_DELTA_CLAMP}",
            RuntimeWarning,
            stacklevel=2,
        )
        return _DELTA_CLAMP
    return val


def default_l_star(n: int) -> int:
    """``ceil(ln^4 n)``, at least 1."""
    if n < 2:
        return 1
    return max(1, math.ceil(math.log(n) ** 4))


@dataclass(frozen=True)
class BpParams:
    """Run parameters.

    ``delta`` may be 0 (a deliberately unbiased start, which cannot break
    symmetry and is expected to fail).  ``tie_break`` is fixed to
    ``"lowest-index"``; the field exists so records are explicit about it.
    """

    delta: float
    l_star: int
    early_stop: bool = True
    tie_break: str = "lowest-index"
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.delta < UNIFORM:
            raise ValueError(f"delta must lie in [0, 1/3), got {self.delta}")
        if self.l_star < 1:
            raise ValueError(f"l_star must be >= 1, got {self.l_star}")
        if self.tie_break != "lowest-index":
            raise ValueError(f"unsupported tie_break {self.tie_break!r}")

    @classmethod
    def for_size(cls, n: int, **overrides) -> "BpParams":
        """Defaults scaled to an n-vertex graph."""
        base = {"delta": default_delta(n), "l_star": default_l_star(n)}
        base.update(overrides)
        return cls(**base)


# ---------------------------------------------------------------------------
# initializations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InitRecord:
    """Which color each vertex leaned toward at the start, and how chosen."""

    w_partition: np.ndarray
    mode: str


def _state_from_groups(
    arc_table: ArcTable, groups: np.ndarray, delta: float
) -> MessageState:
    """Bias each out-arc toward its tail's group color: +delta own, -delta/2 others."""
    own = groups[arc_table.tail]
    d0 = np.where(
        np.arange(3)[:, None] == own[None, :], delta, -0.5 * delta
    ).astype(np.float64)
    return MessageState(d0, 0)


def init_independent(
    graph: Graph, arc_table: ArcTable, delta: float, rng: np.random.Generator
) -> tuple[MessageState, InitRecord]:
    """Each vertex picks a uniform color independently."""
    groups = rng.integers(0, 3, size=graph.num_vertices)
    state = _state_from_groups(arc_table, groups, delta)
    return state, InitRecord(groups, "independent")


def init_balanced(
    graph: Graph, arc_table: ArcTable, delta: float, rng: np.random.Generator
) -> tuple[MessageState, InitRecord]:
    """A uniformly random *exactly balanced* group assignment (n must divide by 3)."""
    n = graph.num_vertices
    if n % 3 != 0:
        raise ValueError(
            f"balanced init needs num_vertices divisible by 3, got {n}"
        )
    groups = np.empty(n, dtype=np.int64)
    groups[rng.permutation(n)] = np.repeat(np.arange(3), n // 3)
    state = _state_from_groups(arc_table, groups, delta)
    return state, InitRecord(groups, "balanced")


def init_aligned(
    graph: Graph, arc_table: ArcTable, coloring: PlantedColoring, delta: float
) -> tuple[MessageState, InitRecord]:
    """Groups equal to the planted classes (the analysis-friendly start)."""
    if coloring.num_vertices != graph.num_vertices:
        raise ValueError("coloring does not match graph size")
    groups = coloring.class_of
    state = _state_from_groups(arc_table, groups, delta)
    return state, InitRecord(groups, "aligned")


# ---------------------------------------------------------------------------
# the update
# ---------------------------------------------------------------------------


def _log_survival(delta: np.ndarray) -> np.ndarray:
    """``ln((1 - eta) / (2/3)) = log1p(-1.5 * delta)``, clamped against fp spill.

    ``delta`` can reach 2/3 only up to rounding; the clamp keeps the argument
    of log1p at -1 (giving -inf, the saturated case) instead of NaN.
    """
    t = np.maximum(-1.5 * delta, -1.0)
    with np.errstate(divide="ignore"):
        return np.log1p(t)


def _excluded_log_sums(arc_table: ArcTable, g: np.ndarray) -> np.ndarray:
    """Per arc ``v -> w``: sum of ``g`` over in-arcs of ``v`` except ``w -> v``.

    Scatter-sum formulation: per-vertex totals via bincount on arc heads,
    minus the excluded reverse-arc term.  -inf entries are handled by
    counting them separately so the exclusion never forms ``inf - inf``.
    """
    n = arc_table.num_vertices
    head, tail, rev = arc_table.head, arc_table.tail, arc_table.reverse_index
    ell = np.empty_like(g)
    for a in range(3):
        ga = g[a]
        neg_inf = np.isneginf(ga)
        finite_total = np.bincount(
            head, weights=np.where(neg_inf, 0.0, ga), minlength=n
        )
        inf_count = np.bincount(head[neg_inf], minlength=n)
        g_rev = ga[rev]
        rev_inf = neg_inf[rev]
        remaining_inf = inf_count[tail] - rev_inf
        base = finite_total[tail] - np.where(rev_inf, 0.0, g_rev)
        ell[a] = np.where(remaining_inf > 0, -np.inf, base)
    return ell


def _recenter(ell: np.ndarray, arc_table: ArcTable) -> np.ndarray:
    """Normalize per-arc log scores into centered messages.

    With ``m = max_a ell_a`` finite, ``G_a = expm1(ell_a - m)`` and the new
    centered message is ``(3 G_a - sum_b G_b) / (3 (3 + sum_b G_b))``, which
    equals ``exp(ell_a)/sum_b exp(ell_b) - 1/3`` exactly but stays accurate
    when all ``ell`` are within rounding of each other.
    """
    top = np.max(ell, axis=0)
    bad = ~np.isfinite(top)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise ContradictionError(k, int(arc_table.tail[k]), int(arc_table.head[k]))
    growth = np.expm1(ell - top[None, :])
    total = growth.sum(axis=0)
    return (3.0 * growth - total) / (3.0 * (3.0 + total))


def bp_step(
    graph: Graph, arc_table: ArcTable, state: MessageState
) -> MessageState:
    """One synchronous update of every arc message (double-buffered)."""
    if state.num_arcs != arc_table.num_arcs:
        raise ValueError(
            f"state has {state.num_arcs} arcs, table has {arc_table.num_arcs}"
        )
    g = _log_survival(state.delta)
    ell = _excluded_log_sums(arc_table, g)
    return MessageState(_recenter(ell, arc_table), state.iteration + 1)


# ---------------------------------------------------------------------------
# rounding and properness
# ---------------------------------------------------------------------------


def round_beliefs(
    graph: Graph, arc_table: ArcTable, state: MessageState
) -> np.ndarray:
    """Vertex colors from incoming messages: argmax of mean (1 - eta^a).

    Ties break to the lowest color index (argmax semantics).  Isolated
    vertices have no incoming information; they get color 0 and a warning.
    """
    n = graph.num_vertices
    deg = arc_table.degrees()
    isolated = deg == 0
    safe_deg = np.where(isolated, 1, deg).astype(np.float64)
    beta = np.empty((3, n))
    for a in range(3):
        sums = np.bincount(arc_table.head, weights=state.delta[a], minlength=n)
        # beta^a_v = mean of (1 - eta^a) = 2/3 - mean(delta^a)
        beta[a] = 2.0 / 3.0 - sums / safe_deg
    if np.any(isolated):
        beta[:, isolated] = 0.0
        warnings.warn(
            f"{int(isolated.sum())} isolated vertices assigned color 0",
            RuntimeWarning,
            stacklevel=2,
        )
    return np.argmax(beta, axis=0)


def is_proper(
    state: MessageState,
    coloring: PlantedColoring | np.ndarray,
    arc_table: ArcTable,
) -> bool:
    """Is the state decided for ``coloring``: own-color messages >= 0.99,
    off-color <= 0.01 on every arc (with 1e-12 boundary slack)?

    The arc table is needed to know each arc's tail vertex.
    """
    class_of = (
        coloring.class_of
        if isinstance(coloring, PlantedColoring)
        else np.asarray(coloring)
    )
    if state.num_arcs == 0:
        return True
    own = class_of[arc_table.tail]
    eta_own = state.delta[own, np.arange(state.num_arcs)] + UNIFORM
    if eta_own.min() < _PROPER_OWN - _PROPER_SLACK:
        return False
    for a in range(3):
        off = own != a
        if np.any(off):
            eta_off = state.delta[a, off] + UNIFORM
            if eta_off.max() > _PROPER_OFF + _PROPER_SLACK:
                return False
    return True


def is_proper_coloring(graph: Graph, colors: np.ndarray) -> bool:
    """No edge monochromatic."""
    e = graph.edge_array()
    if not e.size:
        return True
    colors = np.asarray(colors)
    return bool(np.all(colors[e[:, 0]] != colors[e[:, 1]]))


def matches_up_to_permutation(colors: np.ndarray, planted: np.ndarray) -> bool:
    """Does some relabeling of the three colors turn ``colors`` into ``planted``?"""
    colors = np.asarray(colors)
    planted = np.asarray(planted)
    return any(
        np.array_equal(np.asarray(p)[planted], colors)
        for p in permutations(range(3))
    )


# ---------------------------------------------------------------------------
# full runs
# ---------------------------------------------------------------------------

_EARLY_STOP_TOL = 1e-12


def run_bpcol(
    graph: Graph,
    arc_table: ArcTable,
    params: BpParams,
    rng: np.random.Generator | None = None,
    init_mode: str = "independent",
    coloring: PlantedColoring | None = None,
) -> tuple[np.ndarray, TrialRecord]:
    """Initialize, iterate up to ``l_star`` times, round, and report.

    ``init_mode`` is one of ``independent`` / ``balanced`` / ``aligned``
    (aligned requires ``coloring``; the random modes require ``rng``).  With
    ``early_stop`` the loop ends as soon as the state stops moving
    (sup-change < 1e-12) or it is already proper for its own rounding.  A
    contradiction ends the run as a failure rather than raising.

    Returns the rounded coloring and a :class:`TrialRecord` with the fields
    the engine can observe filled in (callers enrich the rest).
    """
    t0 = time.perf_counter()
    if 0.0 < params.delta < _DELTA_NOISE_FLOOR:
        warnings.warn(
            f"delta={params.delta:.3e} is below the double-precision noise "
            "floor (~1e-30): rounding noise amplifies faster than the seeded "
            "bias and the run will likely not reach the planted coloring",
            RuntimeWarning,
            stacklevel=2,
        )
    if init_mode == "independent":
        if rng is None:
            raise ValueError("independent init needs an rng")
        state, _ = init_independent(graph, arc_table, params.delta, rng)
    elif init_mode == "balanced":
        if rng is None:
            raise ValueError("balanced init needs an rng")
        state, _ = init_balanced(graph, arc_table, params.delta, rng)
    elif init_mode == "aligned":
        if coloring is None:
            raise ValueError("aligned init needs the planted coloring")
        state, _ = init_aligned(graph, arc_table, coloring, params.delta)
    else:
        raise ValueError(f"unknown init_mode {init_mode!r}")

    contradiction = False
    iterations = 0
    for _ in range(params.l_star):
        try:
            new_state = bp_step(graph, arc_table, state)
        except ContradictionError:
            contradiction = True
            break
        iterations = new_state.iteration
        moved = new_state.sup_distance(state)
        state = new_state
        if params.early_stop:
            if moved < _EARLY_STOP_TOL:
                break
            # properness needs own-color delta >= 0.99 - 1/3, so skip the
            # rounding work until messages are decidedly polarized
            if state.delta.size and np.max(state.delta) > 0.6:
                rounded = round_beliefs(graph, arc_table, state)
                if is_proper(state, rounded, arc_table):
                    break

    colors = round_beliefs(graph, arc_table, state)
    success = (not contradiction) and is_proper_coloring(graph, colors)
    matches = None
    if coloring is not None:
        matches = success and matches_up_to_permutation(colors, coloring.class_of)
    record = TrialRecord(
        seed=params.seed,
        per_class=None,
        d=None,
        delta=params.delta,
        init_mode=init_mode,
        iterations_run=iterations,
        success=success,
        success_matches_planted=matches,
        wall_time=time.perf_counter() - t0,
    )
    return colors, record
