import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from indeg import (DataError, DegreeCounts, DirectedGraph, in_degree,
                   in_degree_counts, largest_component, load_edge_list,
                   save_edge_list)


def test_load_small_edge_list(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# a comment\n0 1\n1 2\n0 2\n")
    g = load_edge_list(path)
    assert g.vertex_count == 3
    assert g.edge_count == 3


def test_load_drops_self_loops(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("0 0\n0 1\n")
    g = load_edge_list(path)
    assert g.vertex_count == 2
    assert g.edge_count == 1
    assert g.self_loops_dropped == 1


def test_load_drops_duplicates(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("0 1\n0 1\n1 0\n")
    g = load_edge_list(path)
    assert g.edge_count == 2
    assert g.duplicates_dropped == 1


def test_load_reports_malformed_line_number(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("0 1\nnot-an-edge\n")
    with pytest.raises(DataError, match=":2"):
        load_edge_list(path)


def test_load_rejects_empty(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# nothing\n")
    with pytest.raises(DataError, match="empty"):
        load_edge_list(path)


def test_load_missing_file(tmp_path):
    with pytest.raises(DataError):
        load_edge_list(tmp_path / "missing.txt")


def test_load_keeps_original_ids(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("1000000000000 7\n7 42\n")
    g = load_edge_list(path)
    assert list(g.original_ids) == [1000000000000, 7, 42]


def test_roundtrip_preserves_degree_counts(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("5 0\n5 1\n5 2\n5 3\n0 5\n1 2\n")
    g = load_edge_list(path)
    out = tmp_path / "copy.txt"
    save_edge_list(g, out, header="roundtrip")
    g2 = load_edge_list(out)
    assert g2.vertex_count == g.vertex_count
    assert g2.edge_count == g.edge_count
    assert np.array_equal(in_degree_counts(g).values, in_degree_counts(g2).values)


def test_in_degree_basic():
    g = DirectedGraph.from_edges(3, [(0, 1), (2, 1)])
    assert in_degree(g, 1) == 2
    assert in_degree(g, 0) == 0
    with pytest.raises(ValueError):
        in_degree(g, 3)


def test_in_degree_sums_to_edge_count(census_graph):
    total = sum(in_degree(census_graph, v) for v in range(census_graph.vertex_count))
    assert total == census_graph.edge_count


def test_in_degree_counts_triangle():
    g = DirectedGraph.from_edges(3, [(0, 1), (2, 1), (1, 2)])
    assert list(in_degree_counts(g).values) == [1, 1, 1]


def test_in_degree_counts_star():
    # star 5 -> {0,1,2,3} plus 0 -> 5: five vertices of in-degree 1, one of 0
    g = DirectedGraph.from_edges(6, [(5, 0), (5, 1), (5, 2), (5, 3), (0, 5)])
    counts = in_degree_counts(g)
    assert list(counts.values) == [1, 5]
    assert counts.max_index == 1


def test_counts_match_brute_force(census_graph):
    counts = in_degree_counts(census_graph)
    brute = np.zeros(int(counts.max_index) + 1)
    for v in range(census_graph.vertex_count):
        brute[in_degree(census_graph, v)] += 1
    assert np.array_equal(counts.values, brute)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9)),
                min_size=1, max_size=40))
def test_partition_and_handshake_identities(pairs):
    edges = [(u, v) for u, v in pairs if u != v]
    if not edges:
        return
    used = sorted({x for e in edges for x in e})
    relabel = {x: i for i, x in enumerate(used)}
    g = DirectedGraph.from_edges(len(used), [(relabel[u], relabel[v]) for u, v in edges])
    counts = in_degree_counts(g)
    assert counts.total() == g.vertex_count
    assert np.sum(np.arange(len(counts.values)) * counts.values) == g.edge_count


def test_largest_component_tie_break():
    # two disjoint triangles; tie broken toward the one holding vertex 0
    edges = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]
    g = DirectedGraph.from_edges(6, edges)
    sub = largest_component(g)
    assert sub.vertex_count == 3
    assert set(sub.original_ids) == {0, 1, 2}


def test_largest_component_identity(census_graph):
    sub = largest_component(census_graph)
    assert sub.vertex_count == census_graph.vertex_count
    assert sub.edge_count == census_graph.edge_count
    assert np.array_equal(in_degree_counts(sub).values,
                          in_degree_counts(census_graph).values)


def test_largest_component_triangle_beats_edge():
    g = DirectedGraph.from_edges(5, [(0, 1), (1, 2), (2, 0), (3, 4)])
    sub = largest_component(g)
    assert sub.vertex_count == 3
    assert set(sub.original_ids) == {0, 1, 2}


def test_isolated_vertex_rejected():
    with pytest.raises(ValueError, match="no in- or out-edges"):
        DirectedGraph.from_edges(3, [(0, 1)])


def test_withheld_in_index_raises(census_graph):
    blind = census_graph.without_in_index()
    assert blind.out_adj is census_graph.out_adj
    with pytest.raises(RuntimeError, match="withheld"):
        _ = blind.in_adj


def test_degree_counts_container():
    c = DegreeCounts([1.0, 2.0, 0.0])
    assert c.max_index == 2
    assert c.total() == 3.0
    assert list(c.padded(5)) == [1.0, 2.0, 0.0, 0.0, 0.0]
    assert list(c.padded(2)) == [1.0, 2.0]
    with pytest.raises(ValueError):
        DegreeCounts([])
