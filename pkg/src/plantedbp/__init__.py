"""Planted 3-coloring: instance generation, message passing, spectral tools.

The package samples tripartite d-regular graphs with a hidden balanced
3-coloring, runs a damped message-passing solver seeded with a small bias,
and provides the linear-operator machinery (arc-space update maps, their
eigenstructure, trajectory diagnostics) used to study when the solver locks
onto the planted classes.  A CLI (``plantedbp``) wraps generation, solving,
regularity verification, diagnostics, and seeded Monte Carlo sweeps.
"""

from __future__ import annotations

from .basis import (
    EigBasis,
    SpectralConstants,
    build_eig_basis,
    f1_color_balance,
    is_feasible,
    projections,
    y_from_x,
)
from .engine import (
    BpParams,
    ContradictionError,
    InitRecord,
    MessageState,
    bp_step,
    default_delta,
    default_l_star,
    init_aligned,
    init_balanced,
    init_independent,
    is_proper,
    is_proper_coloring,
    matches_up_to_permutation,
    round_beliefs,
    run_bpcol,
)
from .generate import GenParams, RejectionBudgetError, generate
from .graphs import (
    ArcTable,
    Graph,
    GraphFormatError,
    PlantedColoring,
    RegularityCheck,
    build_arc_table,
    check_planted_regular,
    complete_tripartite,
    read_graph,
    write_graph,
)
from .operators import (
    PAIR_ORDER,
    apply_B,
    apply_Bprime,
    apply_K,
    apply_L,
    apply_M,
    m_matrix,
)
from .records import TRIAL_RECORD_SCHEMA, TrialRecord
from .spectral import (
    RegularityReport,
    SpectralColoringError,
    estimate_epsilon,
    spectral_color,
    verify_r1,
)
from .sweep import SweepConfig, run_sweep, wilson_interval
from .trajectory import TrajectoryRecord, trajectory_diagnostics

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # graphs
    "Graph",
    "ArcTable",
    "PlantedColoring",
    "RegularityCheck",
    "GraphFormatError",
    "build_arc_table",
    "check_planted_regular",
    "complete_tripartite",
    "read_graph",
    "write_graph",
    # generation
    "GenParams",
    "RejectionBudgetError",
    "generate",
    # engine
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
    # operators
    "PAIR_ORDER",
    "apply_B",
    "apply_Bprime",
    "apply_L",
    "apply_M",
    "apply_K",
    "m_matrix",
    # spectral
    "RegularityReport",
    "SpectralColoringError",
    "verify_r1",
    "estimate_epsilon",
    "spectral_color",
    # basis / lab
    "SpectralConstants",
    "EigBasis",
    "build_eig_basis",
    "projections",
    "y_from_x",
    "f1_color_balance",
    "is_feasible",
    "TrajectoryRecord",
    "trajectory_diagnostics",
    # records / sweeps
    "TrialRecord",
    "TRIAL_RECORD_SCHEMA",
    "SweepConfig",
    "run_sweep",
    "wilson_interval",
]
