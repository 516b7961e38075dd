"""Lockstep evolution of the true and linearized message dynamics.

Starting from the same centered initial state, the true nonlinear map and
its linearization are advanced together; per-iteration sup norms of both
trajectories and of their gap quantify how long, and how faithfully, the
linear picture predicts the solver.  The crossing iteration ``L2`` (last
step where the linear trajectory stays under ``epsilon``) is where theory
hands off to saturation: properness of the true state is then tested one
and two steps later.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .basis import (
    EigBasis,
    build_eig_basis,
    is_feasible,
    normalized_source_pattern,
    projections,
    y_from_x,
)
from .engine import MessageState, is_proper
from .graphs import ArcTable, Graph, PlantedColoring
from .operators import apply_B, apply_L

__all__ = ["TrajectoryRecord", "trajectory_diagnostics"]

_GROWTH_BAND = 0.05
_ENVELOPE_LOW = 0.49
_ENVELOPE_HIGH = 1.1
_LIN_ERROR_SLACK = 10.0


@dataclass
class TrajectoryRecord:
    """Everything measured along one lockstep run.

    ``xi_inf[l]`` / ``delta_inf[l]`` / ``err_inf[l]`` are the sup norms of
    the linear trajectory, the true trajectory, and their difference at
    iteration ``l`` (running through ``L2 + 1``, the crossing step).  ``x``
    (six, plane-major) and ``y`` (nine, row-major) are the Euclidean
    projections of the start; ``nu`` their scale; ``nu_cal`` the calibrated
    seed amplitude the envelope check uses.  ``L3`` is the first of
    ``L2+1, L2+2`` at which the true state is proper for the planted
    coloring, or None.
    """

    xi_inf: list[float]
    delta_inf: list[float]
    err_inf: list[float]
    x: list[float]
    y: list[float]
    nu: float
    nu_cal: float
    L1: int
    L2: int
    L3: int | None
    feasible_strict: bool
    feasible_relaxed: bool
    proper_at_L3: bool
    growth_ok: bool
    growth_ratios: list[float] = field(default_factory=list)
    envelope_ok: bool = True
    lin_error_ratio: float = math.nan
    lin_error_ok: bool = False
    epsilon: float = math.nan
    growth_rate: float = math.nan

    def to_json_dict(self) -> dict:
        return asdict(self)

    def trajectory_csv(self) -> str:
        """Per-iteration norms as CSV with columns l, xi_inf, delta_inf, err_inf."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["l", "xi_inf", "delta_inf", "err_inf"])
        for l, (xi, de, er) in enumerate(
            zip(self.xi_inf, self.delta_inf, self.err_inf)
        ):
            writer.writerow([l, repr(xi), repr(de), repr(er)])
        return buf.getvalue()


def _sup(arr: np.ndarray) -> float:
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def trajectory_diagnostics(
    graph: Graph,
    arc_table: ArcTable,
    delta0: np.ndarray,
    epsilon: float,
    max_iters: int = 200,
    coloring: PlantedColoring | None = None,
    d: int | None = None,
    basis: EigBasis | None = None,
    relaxed_tau: float = 0.2,
) -> TrajectoryRecord:
    """Run and compare the true and linear dynamics from ``delta0``.

    The planted coloring is required (directly or through ``basis``) since
    both the eigenbasis and the properness target depend on it; ``d`` is
    inferred from the (regular) graph when omitted.

    Raises
    ------
    ValueError
        If the start already exceeds ``epsilon`` in the linear norm, or the
        structure inputs are inconsistent.
    RuntimeError
        If the linear trajectory fails to cross ``epsilon`` within
        ``max_iters`` iterations.
    """
    if basis is None:
        if coloring is None:
            raise ValueError("need either a prebuilt basis or the coloring")
        if d is None:
            degrees = {graph.degree(v) for v in range(graph.num_vertices)}
            if len(degrees) != 1:
                raise ValueError("graph is not regular; pass d explicitly")
            total = degrees.pop()
            if total % 2:
                raise ValueError(
                    f"vertex degree {total} is odd; not a planted-regular graph"
                )
            d = total // 2
        basis = build_eig_basis(graph, arc_table, coloring, d)
    coloring = basis.coloring
    constants = basis.constants

    delta0 = np.asarray(delta0, dtype=np.float64)
    if delta0.shape != (3, arc_table.num_arcs):
        raise ValueError(
            f"delta0 has shape {delta0.shape}, expected (3, {arc_table.num_arcs})"
        )

    x, nu = projections(delta0, basis)
    y = y_from_x(x)
    feasible_strict, feasible_relaxed = is_feasible(
        delta0, basis, epsilon, relaxed_tau
    )
    _, nu_cal = normalized_source_pattern(delta0, basis)

    xi = delta0.copy()
    de = delta0.copy()
    xi_inf = [_sup(xi)]
    delta_inf = [_sup(de)]
    err_inf = [0.0]
    if xi_inf[0] > epsilon:
        raise ValueError(
            f"initial linear norm {xi_inf[0]:.3e} already exceeds epsilon={epsilon}"
        )
    crossed = None
    for l in range(1, max_iters + 1):
        xi = apply_L(graph, arc_table, xi)
        de = apply_B(graph, arc_table, de)
        xi_inf.append(_sup(xi))
        delta_inf.append(_sup(de))
        err_inf.append(_sup(de - xi))
        if xi_inf[-1] > epsilon:
            crossed = l
            break
    if crossed is None:
        raise RuntimeError(
            f"linear trajectory stayed below epsilon={epsilon} for "
            f"{max_iters} iterations; L2 not reached"
        )
    L2 = crossed - 1
    L1 = 2 * math.ceil(math.log(graph.num_vertices))

    # growth and envelope over the analysis window [L1, L2]
    growth_ratios = [
        xi_inf[l + 1] / xi_inf[l]
        for l in range(L1, L2)
        if xi_inf[l] > 0.0
    ]
    lam = constants.lambda_
    growth_ok = all(
        abs(r - lam) <= _GROWTH_BAND * lam for r in growth_ratios
    )
    envelope_ok = nu_cal > 0.0 and all(
        _ENVELOPE_LOW * nu_cal * lam**l
        <= xi_inf[l]
        <= _ENVELOPE_HIGH * nu_cal * lam**l
        for l in range(L1, L2 + 1)
    )

    lin_error_ratio = (
        err_inf[L2] / xi_inf[L2] ** 2 if xi_inf[L2] > 0 else math.inf
    )
    lin_error_ok = lin_error_ratio <= _LIN_ERROR_SLACK * (-math.log(epsilon))

    # properness of the true state at L2+1 and L2+2
    L3 = None
    state = MessageState(de, iteration=crossed)
    if is_proper(state, coloring, arc_table):
        L3 = L2 + 1
    else:
        de = apply_B(graph, arc_table, de)
        state = MessageState(de, iteration=crossed + 1)
        if is_proper(state, coloring, arc_table):
            L3 = L2 + 2

    return TrajectoryRecord(
        xi_inf=xi_inf,
        delta_inf=delta_inf,
        err_inf=err_inf,
        x=[float(v) for v in x.ravel()],
        y=[float(v) for v in y.ravel()],
        nu=float(nu),
        nu_cal=float(nu_cal),
        L1=L1,
        L2=L2,
        L3=L3,
        feasible_strict=feasible_strict,
        feasible_relaxed=feasible_relaxed,
        proper_at_L3=L3 is not None,
        growth_ok=growth_ok,
        growth_ratios=[float(r) for r in growth_ratios],
        envelope_ok=envelope_ok,
        lin_error_ratio=float(lin_error_ratio),
        lin_error_ok=bool(lin_error_ok),
        epsilon=epsilon,
        growth_rate=lam,
    )
