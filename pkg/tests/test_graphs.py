from __future__ import annotations

import io

import numpy as np
import pytest

from plantedbp import (
    Graph,
    GraphFormatError,
    PlantedColoring,
    build_arc_table,
    check_planted_regular,
    complete_tripartite,
    read_graph,
    write_graph,
)


def test_from_edges_sorts_and_validates():
    g = Graph.from_edges(4, [(2, 3), (1, 0), (0, 2)])
    assert g.edges == ((0, 1), (0, 2), (2, 3))
    assert g.num_edges == 3
    assert g.degree(0) == 2
    assert g.degree(3) == 1


def test_from_edges_rejects_self_loop():
    with pytest.raises(ValueError, match="self loop"):
        Graph.from_edges(3, [(1, 1)])


def test_from_edges_rejects_duplicate():
    with pytest.raises(ValueError, match="duplicate"):
        Graph.from_edges(3, [(0, 1), (1, 0)])


def test_from_edges_rejects_out_of_range():
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 3)])


def test_empty_graph():
    g = Graph.from_edges(5, [])
    at = build_arc_table(g)
    assert g.num_edges == 0
    assert at.num_arcs == 0
    assert g.edge_array().shape == (0, 2)


def test_arc_table_reverse_is_involution(octahedron):
    graph, _, at = octahedron
    assert at.num_arcs == 2 * graph.num_edges
    rev = at.reverse_index
    assert np.array_equal(rev[rev], np.arange(at.num_arcs))
    # reversal swaps endpoints
    assert np.array_equal(at.tail[rev], at.head)
    assert np.array_equal(at.head[rev], at.tail)


def test_arc_table_out_arcs_grouped_by_tail(octahedron):
    graph, _, at = octahedron
    for v in range(graph.num_vertices):
        out = at.out_arcs(v)
        assert np.all(at.tail[out] == v)
        assert len(out) == graph.degree(v)
        ins = at.in_arcs(v)
        assert np.all(at.head[ins] == v)


def test_arc_table_arrays_frozen(octahedron):
    _, _, at = octahedron
    with pytest.raises(ValueError):
        at.tail[0] = 5


def test_planted_coloring_basics():
    col = PlantedColoring.from_array([0, 1, 2, 0, 1, 2])
    assert col.is_balanced()
    assert tuple(col.class_sizes) == (2, 2, 2)
    assert list(col.vertices_in(1)) == [1, 4]
    assert not PlantedColoring.from_array([0, 0, 1]).is_balanced()


def test_complete_tripartite_is_regular():
    g, col = complete_tripartite(2)
    assert g.num_vertices == 6
    assert g.num_edges == 12  # 3 pairs x 2x2
    chk = check_planted_regular(g, col, 2)
    assert chk.passed
    assert not chk.failures()


def test_check_planted_regular_flags_violations():
    g, col = complete_tripartite(2)
    # drop one edge: its two endpoints lose a cross-class neighbor
    edges = list(g.edges)[1:]
    g2 = Graph.from_edges(g.num_vertices, edges)
    chk = check_planted_regular(g2, col, 2)
    assert not chk.passed
    assert len(chk.failures()) == 2


def test_check_planted_regular_rejects_intra_class_edges():
    col = PlantedColoring.from_array([0, 0, 1, 1, 2, 2])
    g = Graph.from_edges(6, [(0, 1)])
    chk = check_planted_regular(g, col, 0)
    assert not chk.passed
    assert chk.intra_class_edges == ((0, 1),)


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------


def test_write_read_round_trip(octahedron):
    graph, coloring, _ = octahedron
    buf = io.StringIO()
    write_graph(graph, coloring, buf, d=2)
    text = buf.getvalue()
    g2, c2, d2 = read_graph(io.StringIO(text))
    assert d2 == 2
    assert g2.edges == graph.edges
    assert np.array_equal(c2.class_of, coloring.class_of)
    # byte-exact second pass
    buf2 = io.StringIO()
    write_graph(g2, c2, buf2, d=d2)
    assert buf2.getvalue() == text


def test_write_read_round_trip_without_coloring():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    buf = io.StringIO()
    write_graph(g, None, buf)
    g2, c2, d2 = read_graph(io.StringIO(buf.getvalue()))
    assert c2 is None
    assert d2 == 0
    assert g2.edges == g.edges


def test_write_graph_to_path(tmp_path, octahedron):
    graph, coloring, _ = octahedron
    path = tmp_path / "g.txt"
    write_graph(graph, coloring, str(path), d=2)
    gf = read_graph(str(path))
    assert gf.graph.edges == graph.edges


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("", "empty"),
        ("e 0 1\n", "header"),
        ("p planted3 x 0 0\n", "header"),
        ("p wrong 3 0 0\n", "header"),
        ("p planted3 3 1 0\ne 0 5\n", "range"),
        ("p planted3 3 1 0\ne 1 0\n", "u < v"),
        ("p planted3 3 2 0\ne 0 1\ne 0 1\n", "order"),
        ("p planted3 3 2 0\ne 0 2\ne 0 1\n", "order"),
        ("p planted3 3 1 0\n", "promises"),
        ("p planted3 3 0 0\nc 0 0\n", "coloring"),
        ("p planted3 3 1 0\ne 0 1\nz zzz\n", "line"),
        ("p planted3 3 1 0\nc 0 0\nc 1 1\nc 2 4\ne 0 1\n", "class"),
        ("p planted3 3 1 0\ne 0 1\nc 0 0\n", "coloring line after"),
    ],
)
def test_read_graph_rejects_malformed(text, fragment):
    with pytest.raises(GraphFormatError) as err:
        read_graph(io.StringIO(text))
    assert fragment in str(err.value).lower()


def test_read_graph_error_carries_line_number():
    bad = "p planted3 3 2 0\ne 0 1\ne 9 9\n"
    with pytest.raises(GraphFormatError) as err:
        read_graph(io.StringIO(bad))
    assert err.value.line == 3
