import numpy as np
import pytest

from indeg import DirectedGraph


def make_ring_graph(n_vertices: int, extra_edges: int, seed: int) -> DirectedGraph:
    """Directed ring plus random chords; undirected view connected and
    non-bipartite for extra_edges >= 1."""
    rng = np.random.default_rng(seed)
    edges = {(i, (i + 1) % n_vertices) for i in range(n_vertices)}
    while len(edges) < n_vertices + extra_edges:
        u, v = int(rng.integers(n_vertices)), int(rng.integers(n_vertices))
        if u != v:
            edges.add((u, v))
    return DirectedGraph.from_edges(n_vertices, sorted(edges))


def make_census_graph() -> DirectedGraph:
    """28-vertex graph with affine in-degree counts [7,6,5,4,3,2,1].

    The seven in-degree-0 vertices (ids 0..6) act as sources for everyone
    else, so the graph is weakly connected and simple by construction.
    """
    counts = [7, 6, 5, 4, 3, 2, 1]
    targets = []
    v = 0
    for j, cnt in enumerate(counts):
        for _ in range(cnt):
            targets.append((v, j))
            v += 1
    edges = []
    for v_id, k in targets:
        for i in range(k):
            edges.append(((v_id + i) % 7, v_id))
    return DirectedGraph.from_edges(v, edges)


@pytest.fixture(scope="session")
def census_graph() -> DirectedGraph:
    return make_census_graph()


@pytest.fixture(scope="session")
def ring50() -> DirectedGraph:
    return make_ring_graph(50, 75, seed=3)


@pytest.fixture(scope="session")
def graph100e() -> DirectedGraph:
    g = make_ring_graph(40, 60, seed=7)
    assert g.edge_count == 100
    return g
