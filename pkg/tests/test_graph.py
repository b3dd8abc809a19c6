import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from profilematch.graph import (
    GraphFeatureVector, SocialGraph, degree_feature_vector, generate_synthetic_graph, graph_from_neighbors,
    load_edge_list, save_edge_list, sim_graph, split_graph,
)


def star_with_degrees(degs):
    """Centre node 'c' whose neighbour i has exactly degs[i] edges."""
    edges = []
    for i, d in enumerate(degs):
        edges.append(("c", f"n{i}"))
        edges += [(f"n{i}", f"n{i}_leaf{j}") for j in range(d - 1)]
    return SocialGraph.from_edges(edges)


def test_isolated_node_has_zero_vector():
    g = SocialGraph.from_edges([], ["x"])
    assert not degree_feature_vector(g, "x").counts.any()


def test_binning_example():
    fv = degree_feature_vector(star_with_degrees([3, 16, 20]), "c", n=70, b=15)
    assert fv.counts[0] == 1 and fv.counts[1] == 2 and fv.counts[2:].sum() == 0
    assert fv.length == 70


def test_large_degree_clamps_to_last_bin():
    fv = degree_feature_vector(star_with_degrees([40]), "c", n=2, b=15)
    assert list(fv.counts) == [0, 1]


@settings(max_examples=30)
@given(st.lists(st.integers(1, 60), min_size=1, max_size=8))
def test_counts_sum_to_degree(degs):
    g = star_with_degrees(degs)
    assert degree_feature_vector(g, "c").counts.sum() == g.degree("c")


def test_vector_invariant_under_relabelling():
    g = generate_synthetic_graph(60, 2, seed=1)
    names = {n: f"z{int(n) * 7 % 61}" for n in g.nodes}
    h = SocialGraph.from_edges([(names[u], names[v]) for u, v in g.edges()], names.values())
    for n in g.nodes:
        np.testing.assert_array_equal(degree_feature_vector(g, n).counts, degree_feature_vector(h, names[n]).counts)


def test_sim_graph_examples():
    a = GraphFeatureVector(np.array([1, 2, 0]), 15)
    assert sim_graph(a, a) == pytest.approx(1.0)
    assert sim_graph(a, GraphFeatureVector(np.array([0, 0, 3]), 15)) == 0.0
    assert sim_graph(a, GraphFeatureVector(np.zeros(3, dtype=np.int64), 15)) is None


def test_split_extremes():
    g = generate_synthetic_graph(200, 3, seed=0)
    a, t = split_graph(g, 1.0, seed=5)
    assert a.edges() == t.edges() == g.edges()
    a, t = split_graph(g, 0.0, seed=5)
    assert not set(a.edges()) & set(t.edges())
    assert set(a.edges()) | set(t.edges()) == set(g.edges())
    assert a.nodes == t.nodes == g.nodes


def test_split_overlap_fraction():
    g = generate_synthetic_graph(2005, 5, seed=3)
    assert g.num_edges == 10_000
    a, t = split_graph(g, 0.9, seed=11)
    shared = len(set(a.edges()) & set(t.edges()))
    assert abs(shared / g.num_edges - 0.9) <= 0.02
    assert set(a.edges()) | set(t.edges()) == set(g.edges())
    assert split_graph(g, 0.9, seed=11)[0].edges() == a.edges()


def test_split_rejects_bad_overlap():
    with pytest.raises(ValueError):
        split_graph(SocialGraph.from_edges([("a", "b")]), 1.5)


def test_small_attachment_graph_is_tree():
    g = generate_synthetic_graph(5, 1, seed=0)
    assert g.num_edges == 4
    seen, stack = set(), ["0"]
    while stack:
        n = stack.pop()
        if n not in seen:
            seen.add(n)
            stack.extend(g.adjacency[n])
    assert seen == g.nodes


def test_generator_deterministic_and_validated():
    assert generate_synthetic_graph(100, 3, seed=9).edges() == generate_synthetic_graph(100, 3, seed=9).edges()
    with pytest.raises(ValueError):
        generate_synthetic_graph(3, 3)


def test_hubs_emerge():
    for seed in range(10):
        g = generate_synthetic_graph(5000, 5, seed=seed)
        assert max(g.degree(n) for n in g.nodes) >= 50


def test_edge_list_round_trip(tmp_path):
    g = SocialGraph.from_edges([("a", "b"), ("b", "c")], ["lonely"])
    save_edge_list(g, tmp_path / "e.txt")
    again = load_edge_list(tmp_path / "e.txt")
    assert again.edges() == g.edges() and again.nodes == g.nodes


def test_graph_from_neighbors_symmetrises():
    g = graph_from_neighbors({"a": ["b"], "b": [], "c": ["a"]})
    assert g.edges() == [("a", "b"), ("a", "c")]
    assert g.degree("a") == 2
