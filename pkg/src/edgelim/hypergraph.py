"""Hypergraphs, sparsity patterns, and edge elimination.

A hypergraph is a fixed vertex set plus a collection of hyperedges (nonempty
vertex sets).  Eliminating an edge ``x`` removes it and replaces every edge
``e`` with ``e & x != {}`` by ``e | x``; vertices are never removed.  This is
the symbolic model of how rank-1 updates spread the supports of the remaining
update vectors, and everything in :mod:`edgelim.ordering` is built on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

__all__ = [
    "SparsityPattern",
    "HyperEdge",
    "Hypergraph",
    "hypergraph_from_matrix_pattern",
    "hypergraph_from_spd_pattern",
]


@dataclass(frozen=True)
class SparsityPattern:
    """Set of (row, col) positions of an ``n_rows`` x ``n_cols`` matrix."""

    n_rows: int
    n_cols: int
    entries: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "entries", frozenset(self.entries))
        for (i, j) in self.entries:
            if not (0 <= i < self.n_rows and 0 <= j < self.n_cols):
                raise ValueError(
                    f"entry ({i}, {j}) outside a {self.n_rows}x{self.n_cols} pattern"
                )

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def is_square(self) -> bool:
        return self.n_rows == self.n_cols

    def is_symmetric(self) -> bool:
        return self.is_square() and all((j, i) in self.entries for (i, j) in self.entries)

    def transpose(self) -> "SparsityPattern":
        return SparsityPattern(self.n_cols, self.n_rows, {(j, i) for (i, j) in self.entries})

    def to_dense(self):
        import numpy as np

        a = np.zeros((self.n_rows, self.n_cols), dtype=bool)
        for (i, j) in self.entries:
            a[i, j] = True
        return a

    @classmethod
    def from_dense(cls, a) -> "SparsityPattern":
        import numpy as np

        a = np.asarray(a)
        rows, cols = np.nonzero(a)
        return cls(a.shape[0], a.shape[1], set(zip(rows.tolist(), cols.tolist())))


@dataclass(frozen=True)
class HyperEdge:
    """A hyperedge: stable integer id plus a sorted, duplicate-free vertex tuple."""

    id: int
    vertices: tuple[int, ...]

    def __post_init__(self):
        verts = tuple(sorted(set(self.vertices)))
        if not verts:
            raise ValueError(f"hyperedge {self.id} has no vertices")
        object.__setattr__(self, "vertices", verts)

    def __len__(self) -> int:
        return len(self.vertices)

    def intersects(self, other: "HyperEdge") -> bool:
        a, b = self.vertices, other.vertices
        if len(b) < len(a):
            a, b = b, a
        bs = set(b)
        return any(v in bs for v in a)


@dataclass(frozen=True)
class Hypergraph:
    """Immutable hypergraph: ``n_vertices`` and an ordered tuple of edges.

    Edge ids are stable handles: they survive eliminations, so an ordering
    expressed in ids stays valid as the graph evolves.
    """

    n_vertices: int
    edges: tuple[HyperEdge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        seen = set()
        for e in self.edges:
            if e.id in seen:
                raise ValueError(f"duplicate edge id {e.id}")
            seen.add(e.id)
            if e.vertices[-1] >= self.n_vertices or e.vertices[0] < 0:
                raise ValueError(
                    f"edge {e.id} touches vertices outside 0..{self.n_vertices - 1}"
                )

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_ids(self) -> tuple[int, ...]:
        return tuple(e.id for e in self.edges)

    def edge_by_id(self, edge_id: int) -> HyperEdge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise KeyError(f"no edge with id {edge_id}")

    # -- elimination ----------------------------------------------------

    def eliminate_edge(self, edge_id: int) -> "Hypergraph":
        """Remove edge ``x`` and grow every intersecting edge by ``x``'s vertices.

        Edges disjoint from ``x`` are returned unchanged (same objects); the
        vertex set is untouched.
        """
        x = self.edge_by_id(edge_id)
        xset = set(x.vertices)
        new_edges = []
        for e in self.edges:
            if e.id == edge_id:
                continue
            if xset.intersection(e.vertices):
                new_edges.append(HyperEdge(e.id, tuple(set(e.vertices) | xset)))
            else:
                new_edges.append(e)
        return Hypergraph(self.n_vertices, tuple(new_edges))

    # -- matrices --------------------------------------------------------

    def incidence_matrix(self) -> SparsityPattern:
        """|V| x |E| pattern with (i, j) set iff vertex i lies in the j-th edge."""
        entries = set()
        for j, e in enumerate(self.edges):
            for v in e.vertices:
                entries.add((v, j))
        return SparsityPattern(self.n_vertices, len(self.edges), entries)

    def adjacency_matrices(self) -> tuple[SparsityPattern, SparsityPattern]:
        """Vertex-vertex and edge-edge adjacency patterns.

        ``A_V[i, j]`` is set iff some edge contains both vertices; ``A_E[i, j]``
        iff the i-th and j-th edges share a vertex.  Both are symmetric, with a
        diagonal entry for every non-isolated vertex / every edge.
        """
        av = set()
        for e in self.edges:
            vs = e.vertices
            for a in vs:
                for b in vs:
                    av.add((a, b))
        ae = set()
        m = len(self.edges)
        vsets = [set(e.vertices) for e in self.edges]
        for i in range(m):
            for j in range(i, m):
                if vsets[i] & vsets[j]:
                    ae.add((i, j))
                    ae.add((j, i))
        return (
            SparsityPattern(self.n_vertices, self.n_vertices, av),
            SparsityPattern(m, m, ae),
        )

    # -- duality ---------------------------------------------------------

    def dual(self) -> tuple["Hypergraph", tuple[int, ...]]:
        """Swap the roles of vertices and edges.

        The dual has one vertex per edge of ``self`` and one edge per
        non-isolated vertex of ``self``; its incidence pattern is the transpose
        of ``self``'s.  Isolated vertices would give empty dual edges, so they
        are dropped; the returned index map lists, per dual edge, the original
        vertex it came from.
        """
        star: dict[int, list[int]] = {}
        for j, e in enumerate(self.edges):
            for v in e.vertices:
                star.setdefault(v, []).append(j)
        kept = sorted(star)
        dual_edges = tuple(
            HyperEdge(pos, tuple(star[v])) for pos, v in enumerate(kept)
        )
        return Hypergraph(len(self.edges), dual_edges), tuple(kept)

    # -- text format -------------------------------------------------------

    def to_text(self) -> str:
        """Line format: header ``n_vertices n_edges``, then 1-based vertex lists."""
        lines = [f"{self.n_vertices} {len(self.edges)}"]
        for e in self.edges:
            lines.append(" ".join(str(v + 1) for v in e.vertices))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Hypergraph":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not rows:
            raise ValueError("empty hypergraph text")
        try:
            n_vertices, n_edges = (int(t) for t in rows[0])
        except ValueError as exc:
            raise ValueError(f"bad hypergraph header {rows[0]!r}") from exc
        if len(rows) - 1 != n_edges:
            raise ValueError(f"expected {n_edges} edge lines, found {len(rows) - 1}")
        edges = []
        for k, row in enumerate(rows[1:]):
            verts = tuple(int(t) - 1 for t in row)
            if any(v < 0 or v >= n_vertices for v in verts):
                raise ValueError(f"edge line {k + 1}: vertex index out of range")
            edges.append(HyperEdge(k, verts))
        return cls(n_vertices, tuple(edges))


def hypergraph_from_matrix_pattern(pattern: SparsityPattern) -> Hypergraph:
    """Hypergraph of a symmetric matrix pattern.

    One vertex per matrix index, one 2-vertex edge per strictly-lower-triangle
    nonzero (conjugate pairs counted once); diagonal entries are ignored.  Edge
    ids run in column-major order over the lower triangle.
    """
    if not pattern.is_square():
        raise ValueError(f"pattern is {pattern.n_rows}x{pattern.n_cols}, not square")
    if not pattern.is_symmetric():
        raise ValueError("pattern is not symmetric")
    lower = sorted(
        ((j, i) for (i, j) in pattern.entries if i > j)
    )  # (col, row), column-major
    edges = tuple(
        HyperEdge(k, (col, row)) for k, (col, row) in enumerate(lower)
    )
    return Hypergraph(pattern.n_rows, edges)


def _connected(n: int, pairs: Iterable[tuple[int, int]]) -> bool:
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for (i, j) in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
    return len({find(i) for i in range(n)}) == 1


def hypergraph_from_spd_pattern(pattern: SparsityPattern) -> Hypergraph:
    """Hypergraph whose edge-edge adjacency pattern equals ``pattern``.

    The input must be the pattern of an irreducible symmetric positive
    definite matrix: square, symmetric, full diagonal, connected off-diagonal
    graph.  The construction puts one vertex on each strict-lower-triangle
    nonzero and one edge per matrix column, containing the vertices sitting in
    that column's part of the strict lower triangle (column below the diagonal
    plus row to its left).  Then edges j and k share a vertex exactly when
    position (k, j) is nonzero, so ``adjacency_matrices()[1]`` of the result
    reproduces the input pattern.
    """
    if not pattern.is_square():
        raise ValueError(f"pattern is {pattern.n_rows}x{pattern.n_cols}, not square")
    if not pattern.is_symmetric():
        raise ValueError("pattern is not symmetric")
    n = pattern.n_rows
    missing_diag = [i for i in range(n) if (i, i) not in pattern.entries]
    if missing_diag:
        raise ValueError(
            f"pattern lacks diagonal entries {missing_diag}; a positive definite "
            "matrix has a full diagonal"
        )
    offdiag = [(i, j) for (i, j) in pattern.entries if i > j]
    if n < 2 or not _connected(n, offdiag):
        raise ValueError(
            "pattern is reducible (off-diagonal graph not connected); "
            "each column needs at least one off-diagonal nonzero"
        )
    # Vertex v_(i,j) per strict-lower nonzero, numbered column-major.
    lower = sorted((j, i) for (i, j) in offdiag)  # (col, row)
    vid = {(row, col): k for k, (col, row) in enumerate(lower)}
    edges = []
    for j in range(n):
        members = [vid[(i, j)] for i in range(j + 1, n) if (i, j) in pattern.entries]
        members += [vid[(j, i)] for i in range(j) if (j, i) in pattern.entries]
        edges.append(HyperEdge(j, tuple(members)))
    return Hypergraph(len(lower), tuple(edges))
