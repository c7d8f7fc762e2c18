"""Directed graph container, edge-list IO and ground-truth in-degree counts.

The graph is immutable after construction. Out-adjacency is the only
structure samplers are allowed to read; the in-adjacency index exists for
ground-truth computations and can be withheld (see
:meth:`DirectedGraph.without_in_index`) to verify that samplers never
touch it.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DataError

__all__ = [
    "DegreeCounts",
    "DirectedGraph",
    "load_edge_list",
    "save_edge_list",
    "in_degree",
    "in_degree_counts",
    "largest_component",
]


class DegreeCounts:
    """Vector indexed by in-degree j holding counts or estimates.

    ``values[j]`` is the number of vertices with in-degree j (a float so the
    same container can hold estimated counts, which may be fractional or,
    for the raw least-squares estimator, negative).
    """

    __slots__ = ("values",)

    def __init__(self, values):
        v = np.asarray(values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("degree counts must be a non-empty 1-d vector")
        self.values = v

    @property
    def max_index(self) -> int:
        return self.values.size - 1

    def total(self) -> float:
        return float(np.nansum(self.values))

    def padded(self, length: int) -> np.ndarray:
        """Values zero-padded (or truncated) to exactly ``length`` entries."""
        out = np.zeros(length)
        k = min(length, self.values.size)
        out[:k] = self.values[:k]
        return out

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, j):
        return self.values[j]

    def __repr__(self) -> str:  # pragma: no cover
        return f"DegreeCounts(max_index={self.max_index}, total={self.total():g})"


def as_counts(values) -> DegreeCounts:
    """Coerce an array-like (or pass through a DegreeCounts) to DegreeCounts."""
    if isinstance(values, DegreeCounts):
        return values
    return DegreeCounts(values)


class DirectedGraph:
    """Simple directed graph with dense 0-based vertex ids.

    Invariants enforced at construction: no self-loops, no duplicate
    directed edges, and every vertex carries at least one in- or out-edge.
    """

    def __init__(self, n_vertices: int, out_adj, in_adj, original_ids=None):
        if n_vertices <= 0:
            raise ValueError("graph must have at least one vertex")
        self.vertex_count = int(n_vertices)
        self._out_adj = [np.asarray(a, dtype=np.int64) for a in out_adj]
        self._in_adj = (
            None if in_adj is None else [np.asarray(a, dtype=np.int64) for a in in_adj]
        )
        self.edge_count = int(sum(len(a) for a in self._out_adj))
        self.original_ids = (
            None if original_ids is None else np.asarray(original_ids, dtype=np.int64)
        )
        # counts reported by load_edge_list / generators
        self.self_loops_dropped = 0
        self.duplicates_dropped = 0
        self._edge_array = None
        for a in self._out_adj:
            a.setflags(write=False)
        if self._in_adj is not None:
            for a in self._in_adj:
                a.setflags(write=False)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_edges(cls, n_vertices: int, edges, original_ids=None) -> "DirectedGraph":
        """Build from an iterable of (u, v) pairs, dropping self-loops and
        duplicate directed edges (counts kept on the instance)."""
        seen = set()
        self_loops = 0
        duplicates = 0
        cleaned = []
        for u, v in edges:
            u = int(u)
            v = int(v)
            if not (0 <= u < n_vertices and 0 <= v < n_vertices):
                raise ValueError(f"edge ({u},{v}) outside vertex range 0..{n_vertices - 1}")
            if u == v:
                self_loops += 1
                continue
            if (u, v) in seen:
                duplicates += 1
                continue
            seen.add((u, v))
            cleaned.append((u, v))
        out_lists = [[] for _ in range(n_vertices)]
        in_lists = [[] for _ in range(n_vertices)]
        for u, v in cleaned:
            out_lists[u].append(v)
            in_lists[v].append(u)
        untouched = sum(1 for k in range(n_vertices) if not out_lists[k] and not in_lists[k])
        if untouched:
            raise ValueError(
                f"{untouched} vertices have no in- or out-edges; "
                "remove them or relabel the graph densely"
            )
        g = cls(n_vertices, out_lists, in_lists, original_ids=original_ids)
        g.self_loops_dropped = self_loops
        g.duplicates_dropped = duplicates
        return g

    # -- accessors ---------------------------------------------------------

    @property
    def out_adj(self):
        """Per-vertex arrays of out-neighbor ids (sampler-visible)."""
        return self._out_adj

    @property
    def in_adj(self):
        """Per-vertex arrays of in-neighbor ids (ground truth only)."""
        if self._in_adj is None:
            raise RuntimeError("in-adjacency was withheld on this graph instance")
        return self._in_adj

    def out_degree(self, v: int) -> int:
        return len(self._out_adj[v])

    def edge_array(self) -> np.ndarray:
        """All directed edges as an (N_e, 2) array, ordered by tail then
        position in the out-adjacency list. Cached; sampler-visible."""
        if self._edge_array is None:
            if self.edge_count == 0:
                arr = np.empty((0, 2), dtype=np.int64)
            else:
                tails = np.repeat(
                    np.arange(self.vertex_count, dtype=np.int64),
                    [len(a) for a in self._out_adj],
                )
                heads = np.concatenate([a for a in self._out_adj if len(a)])
                arr = np.column_stack([tails, heads])
            arr.setflags(write=False)
            self._edge_array = arr
        return self._edge_array

    def without_in_index(self) -> "DirectedGraph":
        """Copy sharing all structure except the in-adjacency, which raises on
        access. Used to prove samplers only look at out-edges."""
        g = DirectedGraph.__new__(DirectedGraph)
        g.vertex_count = self.vertex_count
        g.edge_count = self.edge_count
        g._out_adj = self._out_adj
        g._in_adj = None
        g.original_ids = self.original_ids
        g.self_loops_dropped = self.self_loops_dropped
        g.duplicates_dropped = self.duplicates_dropped
        g._edge_array = self._edge_array
        return g

    def __repr__(self) -> str:  # pragma: no cover
        return f"DirectedGraph(N_v={self.vertex_count}, N_e={self.edge_count})"


def load_edge_list(path) -> DirectedGraph:
    """Read a whitespace-separated "u v" edge list.

    Lines starting with '#' are comments. Vertex ids (arbitrary non-negative
    integers) are relabeled densely to 0..N_v-1 in order of first appearance;
    the original ids are kept in ``graph.original_ids``. Self-loops and
    duplicate directed edges are dropped and counted.
    """
    relabel: dict[int, int] = {}
    edges = []
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read edge list {path!r}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected 'u v', got {line.rstrip()!r}")
            try:
                u_raw, v_raw = int(parts[0]), int(parts[1])
            except ValueError:
                raise DataError(
                    f"{path}:{lineno}: non-integer vertex id in {line.rstrip()!r}"
                ) from None
            if u_raw < 0 or v_raw < 0:
                raise DataError(f"{path}:{lineno}: negative vertex id")
            u = relabel.setdefault(u_raw, len(relabel))
            v = relabel.setdefault(v_raw, len(relabel))
            edges.append((u, v))
    if not relabel:
        raise DataError(f"{path}: empty graph (no edges)")
    original = np.empty(len(relabel), dtype=np.int64)
    for raw, dense in relabel.items():
        original[dense] = raw
    return DirectedGraph.from_edges(len(relabel), edges, original_ids=original)


def save_edge_list(g: DirectedGraph, path, header: str | None = None) -> None:
    """Write the graph in the same "u v" format accepted by load_edge_list.

    Dense ids are written; re-loading yields an isomorphic graph.
    """
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for u, v in g.edge_array():
            fh.write(f"{u} {v}\n")


def in_degree(g: DirectedGraph, v: int) -> int:
    """Number of directed edges pointing into v (ground truth)."""
    if not 0 <= v < g.vertex_count:
        raise ValueError(f"vertex id {v} out of range 0..{g.vertex_count - 1}")
    return len(g.in_adj[v])


def in_degree_counts(g: DirectedGraph) -> DegreeCounts:
    """Counts D(j) of vertices with in-degree j, for j = 0..J."""
    degs = np.array([len(a) for a in g.in_adj], dtype=np.int64)
    return DegreeCounts(np.bincount(degs))


def largest_component(g: DirectedGraph) -> DirectedGraph:
    """Subgraph induced by the largest weakly connected component.

    Size ties are broken toward the component containing the smallest
    vertex id. Vertices are relabeled densely, preserving id order.
    """
    edges = g.edge_array()
    adj = coo_matrix(
        (np.ones(len(edges), dtype=np.int8), (edges[:, 0], edges[:, 1])),
        shape=(g.vertex_count, g.vertex_count),
    )
    n_comp, labels = connected_components(adj, directed=True, connection="weak")
    if n_comp == 1:
        keep_label = 0
    else:
        sizes = np.bincount(labels, minlength=n_comp)
        best = np.flatnonzero(sizes == sizes.max())
        # np.argmax over the label array returns the first (= smallest) vertex id
        keep_label = min(best, key=lambda lab: int(np.argmax(labels == lab)))
    keep = np.flatnonzero(labels == keep_label)
    remap = -np.ones(g.vertex_count, dtype=np.int64)
    remap[keep] = np.arange(len(keep))
    mask = remap[edges[:, 0]] >= 0
    sub_edges = np.column_stack([remap[edges[mask, 0]], remap[edges[mask, 1]]])
    original = g.original_ids[keep] if g.original_ids is not None else keep
    return DirectedGraph.from_edges(len(keep), sub_edges, original_ids=original)
