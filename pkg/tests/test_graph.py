import math

import pytest
from hypothesis import given, strategies as st

from locald.errors import GraphError
from locald.graph import (
    DELETED,
    INFINITE,
    Decomposition,
    Graph,
    Hypergraph,
    clique,
    cycle,
    dominating_gadget,
    format_graph,
    format_hypergraph,
    gaifman_graph,
    generate,
    gnp,
    grid,
    induced_subgraph,
    mpx_adversarial,
    mpx_adversarial_parts,
    neighborhood,
    parse_graph,
    parse_hypergraph,
    path,
    set_diameter,
    subdivide,
    validate_decomposition,
)
from oracles import all_pairs_oracle, bfs_oracle, domination_number, is_bipartite, vertex_cover_number


def small_graphs():
    sizes = st.integers(2, 12)
    return st.builds(lambda n, seed: gnp(n, 0.4, seed), sizes, st.integers(0, 10**6))


class TestGraphBasics:
    def test_rejects_self_loop(self):
        with pytest.raises(GraphError):
            Graph.from_edges(2, [(0, 0)])

    def test_rejects_asymmetric_adjacency(self):
        with pytest.raises(GraphError):
            Graph([(1,), ()])

    def test_duplicate_edges_collapse(self):
        G = Graph.from_edges(2, [(0, 1), (0, 1)])
        assert G.m == 1

    def test_distances_match_oracle(self):
        G = gnp(12, 0.3, seed=5)
        oracle = all_pairs_oracle(G.adjacency)
        for u in range(G.n):
            for v in range(G.n):
                expect = oracle[u].get(v, INFINITE)
                assert G.dist(u, v) == expect


class TestNeighborhood:
    def test_path_example(self):
        assert neighborhood(path(5), 2, 1) == {1, 2, 3}

    def test_radius_zero_is_identity(self):
        assert neighborhood(cycle(7), 4, 0) == {4}

    def test_clique_radius_covers_all(self):
        assert neighborhood(clique(5), 0, 3) == set(range(5))

    def test_invalid_vertex(self):
        with pytest.raises(GraphError):
            neighborhood(path(3), 7, 1)

    @given(small_graphs(), st.integers(0, 5))
    def test_monotone_and_component(self, G, r):
        v = 0
        inner = neighborhood(G, v, r)
        outer = neighborhood(G, v, r + 1)
        assert inner <= outer
        assert neighborhood(G, v, G.n) == set(bfs_oracle(G.adjacency, v))


class TestSetDiameter:
    def test_cycle_weak(self):
        assert set_diameter(cycle(6), {0, 3}, "weak") == 3

    def test_cycle_strong_disconnected(self):
        assert set_diameter(cycle(6), {0, 3}, "strong") == INFINITE

    def test_singleton(self):
        assert set_diameter(cycle(6), {2}, "weak") == 0
        assert set_diameter(cycle(6), {2}, "strong") == 0

    def test_empty_raises(self):
        with pytest.raises(GraphError):
            set_diameter(cycle(6), set(), "weak")

    @given(small_graphs(), st.data())
    def test_weak_at_most_strong(self, G, data):
        size = data.draw(st.integers(1, G.n))
        S = data.draw(st.permutations(range(G.n)))[:size]
        assert set_diameter(G, S, "weak") <= set_diameter(G, S, "strong")


class TestValidateDecomposition:
    def test_triangle_single_cluster(self):
        D = Decomposition.from_labels([0, 0, 0])
        rep = validate_decomposition(clique(3), D, eps=0.0, d=1)
        assert rep.all_ok and rep.deleted_fraction == 0.0

    def test_adjacent_singletons_flagged(self):
        D = Decomposition.from_labels([0, 1, 2])
        rep = validate_decomposition(clique(3), D, eps=0.0, d=1)
        assert not rep.non_adjacent_ok

    def test_path_with_deleted_separator(self):
        D = Decomposition.from_labels([0, 0, DELETED, 1, 1])
        rep = validate_decomposition(path(5), D, eps=0.2, d=1)
        assert rep.all_ok
        assert rep.deleted_count == 1 and rep.deleted_fraction == 0.2

    @given(small_graphs(), st.data())
    def test_equivalent_to_edge_scan(self, G, data):
        labels = [data.draw(st.sampled_from([DELETED, 0, 1, 2])) for _ in range(G.n)]
        D = Decomposition.from_labels(labels)
        rep = validate_decomposition(G, D, eps=1.0, d=G.n)
        scan = all(
            D.assignment[u] is DELETED or D.assignment[v] is DELETED or D.assignment[u] == D.assignment[v]
            for u, v in G.edges()
        )
        assert rep.non_adjacent_ok == scan

    def test_dimension_mismatch(self):
        with pytest.raises(GraphError):
            validate_decomposition(path(3), Decomposition.from_labels([0, 0]), 0.5, 1)


class TestGaifman:
    def test_single_hyperedge_is_clique(self):
        G = gaifman_graph(Hypergraph(3, [{0, 1, 2}]))
        assert set(G.edges()) == {(0, 1), (0, 2), (1, 2)}

    def test_chain_of_pairs_is_path(self):
        G = gaifman_graph(Hypergraph(3, [{0, 1}, {1, 2}]))
        assert set(G.edges()) == {(0, 1), (1, 2)}

    def test_singletons_give_edgeless(self):
        G = gaifman_graph(Hypergraph(4, [{0}, {1}, {2}, {3}]))
        assert G.m == 0


class TestGenerators:
    def test_mpx_adversarial_counts(self):
        G = mpx_adversarial(3)
        assert (G.n, G.m) == (14, 21)
        G = mpx_adversarial(20)
        assert (G.n, G.m) == (82, 480)

    def test_mpx_structure(self):
        t = 4
        G = mpx_adversarial(t)
        parts = mpx_adversarial_parts(t)
        for w in parts.s_left | parts.left:
            assert parts.u in G.adjacency[w]
        for a in parts.left:
            assert parts.right <= set(G.adjacency[a])

    def test_clique_edges(self):
        assert clique(5).m == 10

    def test_path_singleton(self):
        G = path(1)
        assert (G.n, G.m) == (1, 0)

    def test_grid(self):
        assert grid(3, 2).m == 7

    def test_gnp_deterministic(self):
        assert gnp(10, 0.5, seed=4) == gnp(10, 0.5, seed=4)

    def test_gnp_needs_valid_p(self):
        with pytest.raises(GraphError):
            gnp(5, 1.5, seed=0)

    def test_generate_parses_specs(self):
        assert generate("cycle(9)") == cycle(9)
        assert generate("gnp(8,0.3)", seed=2) == gnp(8, 0.3, 2)
        with pytest.raises(GraphError):
            generate("blob(3)")
        with pytest.raises(GraphError):
            generate("path(0)")


class TestSubdivide:
    def test_single_edge(self):
        G = subdivide(Graph.from_edges(2, [(0, 1)]), 1)
        assert (G.n, G.m) == (4, 3)
        assert bfs_oracle(G.adjacency, 0)[1] == 3

    def test_identity(self):
        G = cycle(5)
        assert subdivide(G, 0) == G

    def test_k4_counts(self):
        G = subdivide(clique(4), 2)
        assert G.n == 4 + 2 * 2 * 6 == 28
        assert G.m == 5 * 6

    @given(small_graphs(), st.integers(1, 3))
    def test_bipartite_and_counts(self, G, x):
        H = subdivide(G, x)
        assert H.n == G.n + 2 * x * G.m
        assert H.m == (2 * x + 1) * G.m
        assert is_bipartite(H.adjacency)


class TestDominatingGadget:
    def test_single_edge_triangle(self):
        H = dominating_gadget(Graph.from_edges(2, [(0, 1)]))
        assert (H.n, H.m) == (3, 3)
        assert domination_number(H.adjacency) == 1 == vertex_cover_number([(1,), (0,)])

    def test_edgeless_unchanged(self):
        G = Graph([(), (), ()])
        assert dominating_gadget(G) == G

    def test_triangle(self):
        H = dominating_gadget(clique(3))
        assert H.n == 6
        assert domination_number(H.adjacency) == 2 == vertex_cover_number(clique(3).adjacency)

    @given(st.integers(2, 7), st.integers(0, 50))
    def test_gadget_matches_cover_number(self, n, seed):
        G = gnp(n, 0.45, seed)
        assert domination_number(dominating_gadget(G).adjacency) == vertex_cover_number(G.adjacency)


class TestTextFormats:
    def test_graph_round_trip(self):
        G = gnp(9, 0.4, seed=6)
        assert parse_graph(format_graph(G)) == G

    def test_hypergraph_round_trip(self):
        H = Hypergraph(5, [{0, 1, 2}, {3, 4}, {2}])
        assert parse_hypergraph(format_hypergraph(H)) == H

    def test_rejects_unordered_edge(self):
        with pytest.raises(GraphError):
            parse_graph("2 1\n1 0\n")


class TestInducedSubgraph:
    def test_translation_table(self):
        sub, table = induced_subgraph(cycle(6), {1, 2, 5})
        assert table == (1, 2, 5)
        assert set(sub.edges()) == {(0, 1)}
