"""Lockstep true/linear trajectory diagnostics."""

from __future__ import annotations

import math

import numpy as np
import pytest

from plantedbp import (
    Graph,
    build_arc_table,
    build_eig_basis,
    init_aligned,
    trajectory_diagnostics,
)


@pytest.fixture(scope="module")
def mid16_report(mid16):
    graph, coloring, arc_table = mid16
    state, _ = init_aligned(graph, arc_table, coloring, 1e-30)
    return trajectory_diagnostics(
        graph, arc_table, state.delta, epsilon=0.05, coloring=coloring, d=16
    )


def test_crossing_indices(mid16_report):
    r = mid16_report
    assert r.L1 == 12  # 2 * ceil(ln 300)
    assert r.L2 == 34
    assert r.L3 == 36
    # L2 is the last iterate below epsilon
    assert r.xi_inf[r.L2] <= 0.05 < r.xi_inf[r.L2 + 1]
    assert r.xi_inf[34] == pytest.approx(0.0333571, rel=1e-4)
    assert r.xi_inf[35] == pytest.approx(0.22923, rel=1e-3)
    assert len(r.xi_inf) == r.L2 + 2
    assert len(r.delta_inf) == len(r.xi_inf) == len(r.err_inf)


def test_feasibility_and_scales(mid16_report):
    r = mid16_report
    assert r.feasible_strict and r.feasible_relaxed
    assert r.nu == pytest.approx(7.07e-32, rel=1e-2)
    assert r.nu_cal == pytest.approx(1.1963106e-30, rel=1e-6)
    assert len(r.x) == 6 and len(r.y) == 9
    assert r.epsilon == 0.05


def test_growth_matches_dominant_rate(mid16_report):
    r = mid16_report
    assert r.growth_rate == pytest.approx(6.872281323269014, abs=1e-12)
    assert r.growth_ok
    assert len(r.growth_ratios) == r.L2 - r.L1
    worst = max(abs(g - r.growth_rate) for g in r.growth_ratios)
    assert worst <= 0.05 * r.growth_rate


def test_envelope_and_linear_error(mid16_report):
    r = mid16_report
    assert r.envelope_ok
    assert r.lin_error_ok
    assert r.lin_error_ratio == pytest.approx(0.985, abs=0.05)
    assert r.lin_error_ratio <= -math.log(0.05) * 10.0


def test_proper_at_l3(mid16_report):
    r = mid16_report
    assert r.proper_at_L3
    assert r.L3 in (r.L2 + 1, r.L2 + 2)


def test_json_and_csv_round_trip(mid16_report):
    d = mid16_report.to_json_dict()
    assert d["L2"] == 34 and d["proper_at_L3"] is True
    assert isinstance(d["xi_inf"], list)
    csv_text = mid16_report.trajectory_csv()
    lines = csv_text.strip().split("\n")
    assert lines[0] == "l,xi_inf,delta_inf,err_inf"
    assert len(lines) == len(mid16_report.xi_inf) + 1
    # repr round-trip keeps the norms exact
    first = lines[1].split(",")
    assert float(first[1]) == mid16_report.xi_inf[0]


def test_start_above_epsilon_rejected(small8):
    graph, coloring, arc_table = small8
    state, _ = init_aligned(graph, arc_table, coloring, 0.4)
    with pytest.raises(ValueError, match="epsilon"):
        trajectory_diagnostics(
            graph, arc_table, state.delta, epsilon=0.05, coloring=coloring, d=8
        )


def test_no_crossing_within_budget(small8):
    graph, coloring, arc_table = small8
    state, _ = init_aligned(graph, arc_table, coloring, 1e-30)
    with pytest.raises(RuntimeError, match="L2 not reached"):
        trajectory_diagnostics(
            graph,
            arc_table,
            state.delta,
            epsilon=0.05,
            coloring=coloring,
            d=8,
            max_iters=5,
        )


def test_shape_validation(small8):
    graph, coloring, arc_table = small8
    with pytest.raises(ValueError, match="shape"):
        trajectory_diagnostics(
            graph, arc_table, np.zeros((3, 5)), epsilon=0.05,
            coloring=coloring, d=8,
        )
    with pytest.raises(ValueError, match="basis or the coloring"):
        trajectory_diagnostics(
            graph, arc_table, np.zeros((3, arc_table.num_arcs)), epsilon=0.05
        )


def test_degree_inference_rejects_irregular():
    graph = Graph.from_edges(3, [(0, 1), (1, 2)])
    arc_table = build_arc_table(graph)
    from plantedbp.graphs import PlantedColoring

    coloring = PlantedColoring.from_array([0, 1, 2])
    with pytest.raises(ValueError, match="not regular"):
        trajectory_diagnostics(
            graph, arc_table, np.zeros((3, 4)), epsilon=0.05, coloring=coloring
        )


def test_degree_inference_rejects_odd_degree():
    graph = Graph.from_edges(2, [(0, 1)])
    arc_table = build_arc_table(graph)
    from plantedbp.graphs import PlantedColoring

    coloring = PlantedColoring.from_array([0, 1])
    with pytest.raises(ValueError, match="odd"):
        trajectory_diagnostics(
            graph, arc_table, np.zeros((3, 2)), epsilon=0.05, coloring=coloring
        )


def test_prebuilt_basis_matches_inferred(mid16, mid16_report):
    graph, coloring, arc_table = mid16
    basis = build_eig_basis(graph, arc_table, coloring, 16)
    state, _ = init_aligned(graph, arc_table, coloring, 1e-30)
    again = trajectory_diagnostics(
        graph, arc_table, state.delta, epsilon=0.05, basis=basis
    )
    assert again.L2 == mid16_report.L2
    assert again.xi_inf == mid16_report.xi_inf
