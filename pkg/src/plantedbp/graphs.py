"""Graph, directed-arc, and planted-coloring primitives.

Everything downstream (the message-passing engine, the spectral checks, the
linearized-operator diagnostics) is built on three structures defined here:

* :class:`Graph` -- an immutable simple undirected graph on dense 0-based
  vertex ids,
* :class:`ArcTable` -- the directed-arc index (two arcs per edge) that all
  message arrays are laid out on, and
* :class:`PlantedColoring` -- a tripartition of the vertex set.

Arcs are ordered lexicographically by ``(tail, head)`` everywhere in the
package; any array indexed "per arc" uses exactly this order.  The text file
format read and written here is line-based::

    p planted3 <num_vertices> <num_edges> <degree>
    c <vertex> <class>          # optional, one line per vertex, all or none
    e <u> <v>                   # one per edge, u < v, lexicographically sorted

Parsing is strict: any deviation raises :class:`GraphFormatError` with the
offending line number.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import IO, Iterable, NamedTuple

import numpy as np

__all__ = [
    "Graph",
    "ArcTable",
    "PlantedColoring",
    "RegularityCheck",
    "GraphFile",
    "GraphFormatError",
    "build_arc_table",
    "check_planted_regular",
    "complete_tripartite",
    "read_graph",
    "write_graph",
]


class GraphFormatError(ValueError):
    """Malformed graph file; ``line`` carries the 1-based offending line."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


# ---------------------------------------------------------------------------
# core structures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0 .. num_vertices - 1``.

    ``edges`` holds each edge once as ``(u, v)`` with ``u < v``, sorted
    lexicographically; ``adjacency[v]`` is the sorted tuple of neighbors.
    Construct through :meth:`from_edges`, which validates simplicity.
    """

    num_vertices: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(
        cls, num_vertices: int, edges: Iterable[tuple[int, int]]
    ) -> "Graph":
        """Build a graph, normalizing edge order and checking simplicity.

        Raises
        ------
        ValueError
            On a negative vertex count, an endpoint out of range, a self
            loop, or a duplicate edge.
        """
        if num_vertices < 0:
            raise ValueError(f"num_vertices must be >= 0, got {num_vertices}")
        normalized = []
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < num_vertices and 0 <= v < num_vertices):
                raise ValueError(
                    f"edge ({u}, {v}) out of range for {num_vertices} vertices"
                )
            if u == v:
                raise ValueError(f"self loop at vertex {u}")
            normalized.append((u, v) if u < v else (v, u))
        normalized.sort()
        for k in range(1, len(normalized)):
            if normalized[k] == normalized[k - 1]:
                raise ValueError(f"duplicate edge {normalized[k]}")
        neighbors: list[list[int]] = [[] for _ in range(num_vertices)]
        for u, v in normalized:
            neighbors[u].append(v)
            neighbors[v].append(u)
        adjacency = tuple(tuple(sorted(ns)) for ns in neighbors)
        return cls(num_vertices, tuple(normalized), adjacency)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def edge_array(self) -> np.ndarray:
        """Edges as an ``(num_edges, 2)`` int array (empty-safe)."""
        if not self.edges:
            return np.empty((0, 2), dtype=np.int64)
        return np.asarray(self.edges, dtype=np.int64)


@dataclass(frozen=True)
class ArcTable:
    """Directed-arc index of a graph: two arcs per edge, lex-sorted.

    Attributes
    ----------
    tail, head : ndarray
        Endpoint arrays of length ``num_arcs``; arc ``k`` points
        ``tail[k] -> head[k]``.  Arcs are sorted by ``(tail, head)``.
    reverse_index : ndarray
        ``reverse_index[k]`` is the index of arc ``head[k] -> tail[k]``.
        An involution without fixed points.
    out_start : ndarray
        CSR row pointers of length ``num_vertices + 1``: the out-arcs of
        vertex ``v`` occupy positions ``out_start[v]:out_start[v+1]``.

    Because arc ``k = (v -> w)`` has ``reverse_index[k] = (w -> v)``, the
    in-arcs of ``v`` listed in out-arc order are
    ``reverse_index[out_start[v]:out_start[v+1]]``; :meth:`in_arcs` returns
    exactly that view.
    """

    tail: np.ndarray
    head: np.ndarray
    reverse_index: np.ndarray
    out_start: np.ndarray

    @property
    def num_arcs(self) -> int:
        return self.tail.shape[0]

    @property
    def num_vertices(self) -> int:
        return self.out_start.shape[0] - 1

    def out_arcs(self, v: int) -> np.ndarray:
        return np.arange(self.out_start[v], self.out_start[v + 1])

    def in_arcs(self, v: int) -> np.ndarray:
        return self.reverse_index[self.out_start[v] : self.out_start[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.out_start)


def build_arc_table(graph: Graph) -> ArcTable:
    """Index both orientations of every edge of ``graph``.

    Pure layout work: endpoints are concatenated, lex-sorted by
    ``(tail, head)``, and the reverse map is found by binary search on the
    packed key ``tail * n + head`` (unique because the graph is simple).
    """
    n = graph.num_vertices
    e = graph.edge_array()
    tail = np.concatenate([e[:, 0], e[:, 1]])
    head = np.concatenate([e[:, 1], e[:, 0]])
    order = np.lexsort((head, tail))
    tail = np.ascontiguousarray(tail[order])
    head = np.ascontiguousarray(head[order])
    key = tail * n + head
    reverse_index = np.searchsorted(key, head * n + tail)
    out_start = np.searchsorted(tail, np.arange(n + 1))
    for arr in (tail, head, reverse_index, out_start):
        arr.flags.writeable = False
    return ArcTable(tail, head, reverse_index, out_start)


@dataclass(frozen=True)
class PlantedColoring:
    """A partition of the vertices into three classes, ``class_of[v] in {0,1,2}``."""

    class_of: np.ndarray
    class_sizes: tuple[int, int, int]

    @classmethod
    def from_array(cls, class_of: Iterable[int]) -> "PlantedColoring":
        arr = np.asarray(class_of, dtype=np.int64).copy()
        if arr.ndim != 1:
            raise ValueError("class_of must be one-dimensional")
        if arr.size and (arr.min() < 0 or arr.max() > 2):
            raise ValueError("class labels must lie in {0, 1, 2}")
        sizes = tuple(int(np.count_nonzero(arr == c)) for c in range(3))
        arr.flags.writeable = False
        return cls(arr, sizes)  # type: ignore[arg-type]

    @property
    def num_vertices(self) -> int:
        return self.class_of.shape[0]

    def vertices_in(self, c: int) -> np.ndarray:
        """Sorted vertex ids of class ``c``."""
        return np.flatnonzero(self.class_of == c)

    def is_balanced(self) -> bool:
        return len(set(self.class_sizes)) == 1


# ---------------------------------------------------------------------------
# structural checks and stock constructions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegularityCheck:
    """Result of :func:`check_planted_regular`.

    ``cross_degrees[v, c]`` counts neighbors of ``v`` in class ``c``;
    ``intra_class_edges`` lists edges whose endpoints share a class;
    ``passed`` is True iff every vertex has exactly ``expected_d`` neighbors
    in each of the two other classes and none in its own.
    """

    passed: bool
    expected_d: int
    cross_degrees: np.ndarray
    intra_class_edges: tuple[tuple[int, int], ...]
    class_of: np.ndarray

    def failures(self) -> list[tuple[int, int, int]]:
        """Vertex-level violations as ``(vertex, class, count)`` triples."""
        out = []
        for v in range(self.cross_degrees.shape[0]):
            for c in range(3):
                want = 0 if self.class_of[v] == c else self.expected_d
                got = int(self.cross_degrees[v, c])
                if got != want:
                    out.append((v, c, got))
        return out


def check_planted_regular(
    graph: Graph, coloring: PlantedColoring, d: int
) -> RegularityCheck:
    """Verify the cross-degree structure: d neighbors in each other class.

    Exact integer counting; no tolerances.
    """
    if coloring.num_vertices != graph.num_vertices:
        raise ValueError(
            f"coloring covers {coloring.num_vertices} vertices, "
            f"graph has {graph.num_vertices}"
        )
    n = graph.num_vertices
    cls = coloring.class_of
    cross = np.zeros((n, 3), dtype=np.int64)
    e = graph.edge_array()
    if e.size:
        np.add.at(cross, (e[:, 0], cls[e[:, 1]]), 1)
        np.add.at(cross, (e[:, 1], cls[e[:, 0]]), 1)
    intra = tuple(
        (int(u), int(v)) for u, v in graph.edges if cls[u] == cls[v]
    )
    want = np.full((n, 3), d, dtype=np.int64)
    want[np.arange(n), cls] = 0
    passed = not intra and bool(np.array_equal(cross, want))
    return RegularityCheck(passed, d, cross, intra, cls)


def complete_tripartite(per_class: int) -> tuple[Graph, PlantedColoring]:
    """K_{m,m,m} with contiguous class blocks; ``per_class = 2`` is the octahedron."""
    m = per_class
    if m < 1:
        raise ValueError(f"per_class must be >= 1, got {m}")
    classes = [range(0, m), range(m, 2 * m), range(2 * m, 3 * m)]
    edges = []
    for i in range(3):
        for j in range(i + 1, 3):
            edges.extend((u, v) for u in classes[i] for v in classes[j])
    graph = Graph.from_edges(3 * m, edges)
    coloring = PlantedColoring.from_array(np.repeat(np.arange(3), m))
    return graph, coloring


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------


class GraphFile(NamedTuple):
    graph: Graph
    coloring: PlantedColoring | None
    d: int


def read_graph(source: str | IO[str]) -> GraphFile:
    """Parse a graph file; see the module docstring for the format.

    ``source`` may be a path or an open text stream.  Returns the graph, the
    coloring if ``c`` lines were present (all-or-nothing), and the degree
    parameter from the header (0 when the writer had none to record).
    """
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            return read_graph(fh)
    return _parse(source)


def _parse(fh: IO[str]) -> GraphFile:
    header = None
    classes: dict[int, int] = {}
    edges: list[tuple[int, int]] = []
    seen_edge = False
    for lineno, raw in enumerate(fh, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            raise GraphFormatError("blank line not allowed", lineno)
        fields = line.split()
        kind = fields[0]
        if header is None:
            if kind != "p":
                raise GraphFormatError(
                    f"expected header 'p planted3 ...', got {line!r}", lineno
                )
            if len(fields) != 5 or fields[1] != "planted3":
                raise GraphFormatError(
                    "header must be 'p planted3 <nv> <ne> <d>'", lineno
                )
            try:
                nv, ne, d = (int(x) for x in fields[2:5])
            except ValueError:
                raise GraphFormatError("non-integer header field", lineno) from None
            if nv < 0 or ne < 0 or d < 0:
                raise GraphFormatError("negative header field", lineno)
            header = (nv, ne, d)
            continue
        nv, ne, d = header
        if kind == "p":
            raise GraphFormatError("duplicate header", lineno)
        elif kind == "c":
            if seen_edge:
                raise GraphFormatError("coloring line after edge lines", lineno)
            if len(fields) != 3:
                raise GraphFormatError("coloring line must be 'c <vertex> <class>'", lineno)
            try:
                v, c = int(fields[1]), int(fields[2])
            except ValueError:
                raise GraphFormatError("non-integer coloring field", lineno) from None
            if not 0 <= v < nv:
                raise GraphFormatError(f"vertex {v} out of range", lineno)
            if not 0 <= c <= 2:
                raise GraphFormatError(f"class {c} not in {{0, 1, 2}}", lineno)
            if v in classes:
                raise GraphFormatError(f"repeated coloring for vertex {v}", lineno)
            classes[v] = c
        elif kind == "e":
            seen_edge = True
            if len(fields) != 3:
                raise GraphFormatError("edge line must be 'e <u> <v>'", lineno)
            try:
                u, v = int(fields[1]), int(fields[2])
            except ValueError:
                raise GraphFormatError("non-integer edge field", lineno) from None
            if not (0 <= u < nv and 0 <= v < nv):
                raise GraphFormatError(f"edge ({u}, {v}) out of range", lineno)
            if u >= v:
                raise GraphFormatError(
                    f"edge ({u}, {v}) violates u < v", lineno
                )
            if edges and (u, v) <= edges[-1]:
                raise GraphFormatError(
                    f"edge ({u}, {v}) out of lexicographic order", lineno
                )
            edges.append((u, v))
        else:
            raise GraphFormatError(f"unknown line type {kind!r}", lineno)
    if header is None:
        raise GraphFormatError("empty file: missing header")
    nv, ne, d = header
    if len(edges) != ne:
        raise GraphFormatError(
            f"header promises {ne} edges, file has {len(edges)}"
        )
    coloring = None
    if classes:
        if len(classes) != nv:
            raise GraphFormatError(
                f"coloring covers {len(classes)} of {nv} vertices "
                "(must be all or none)"
            )
        coloring = PlantedColoring.from_array(
            [classes[v] for v in range(nv)]
        )
    graph = Graph.from_edges(nv, edges)
    return GraphFile(graph, coloring, d)


def write_graph(
    graph: Graph,
    coloring: PlantedColoring | None,
    sink: str | IO[str],
    d: int = 0,
) -> None:
    """Serialize in the format :func:`read_graph` accepts; deterministic bytes."""
    if isinstance(sink, str):
        buf = io.StringIO()
        write_graph(graph, coloring, buf, d)
        with open(sink, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
        return
    if coloring is not None and coloring.num_vertices != graph.num_vertices:
        raise ValueError("coloring does not match graph size")
    sink.write(f"p planted3 {graph.num_vertices} {graph.num_edges} {d}\n")
    if coloring is not None:
        for v in range(graph.num_vertices):
            sink.write(f"c {v} {int(coloring.class_of[v])}\n")
    for u, v in graph.edges:
        sink.write(f"e {u} {v}\n")
