import itertools
import warnings

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from measonly.ensembles import FactorizableSpec, RangeDist, SiteProbs, XYZSpec, cycle_model
from measonly.graph import (
    FrustrationGraph,
    build_graph,
    classify,
    clique_lower_bound,
    has_triangle,
    shortest_odd_cycle,
    two_coloring,
)
from measonly.pauli import anticommutes

SYM = SiteProbs(1 / 3, 1 / 3, 1 / 3)


def offsets_with_edges(graph):
    """Ring offsets (relative to node 0's start) of node 0's neighbours."""
    start0 = graph.nodes[0].op.contiguous_range()[0]
    L = graph.nodes[0].op.length
    return sorted((graph.nodes[v].op.contiguous_range()[0] - start0) % L for v in graph.neighbors(0))


def to_networkx(graph):
    g = nx.Graph()
    g.add_nodes_from(range(len(graph)))
    g.add_edges_from(graph.edges())
    return g


def odd_cycle_bruteforce(graph, max_len=7):
    """Shortest odd closed walk length via adjacency powers (an odd closed walk contains an odd cycle)."""
    a = graph.adjacency.astype(np.int64)
    power = a.copy()
    for k in range(2, max_len + 1):
        power = np.minimum(power @ a, 1)
        if k % 2 and np.trace(power) > 0:
            return k
    return None


class TestBuild:
    def test_cycle3_six_sites(self):
        with pytest.warns(UserWarning):
            g = build_graph(cycle_model(3, 6))
        assert len(g) == 6
        assert offsets_with_edges(g) == [1, 2, 4, 5]

    def test_cycle4_eight_sites(self):
        with pytest.warns(UserWarning):
            g = build_graph(cycle_model(4, 8))
        assert offsets_with_edges(g) == [1, 3, 5, 7]

    def test_all_z_edgeless(self):
        g = build_graph(FactorizableSpec(10, SiteProbs(0, 0, 1), RangeDist.fixed(3)))
        assert g.edges() == [] and classify(g).is_bipartite

    def test_edges_match_pauli_algebra(self):
        g = build_graph(FactorizableSpec(8, SiteProbs(0.5, 0.2, 0.3), RangeDist.fixed(2)))
        for u, v in itertools.combinations(range(len(g)), 2):
            assert g.adjacency[u, v] == bool(anticommutes(g.nodes[u].op, g.nodes[v].op))

    def test_cap(self):
        from measonly.ensembles import EnumerationTooLarge
        with pytest.raises(EnumerationTooLarge):
            build_graph(FactorizableSpec(32, SYM, RangeDist.fixed(5)), cap=1000)

    def test_no_warning_when_long_enough(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            build_graph(cycle_model(4, 10))

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            FrustrationGraph([None, None], np.array([[0, 1], [0, 0]]))

    def test_edge_list_format(self):
        g = build_graph(cycle_model(4, 10))
        lines = g.edge_list().splitlines()
        assert len(lines) == len(g.edges())
        assert all(len(line.split()) == 2 for line in lines)


class TestClassify:
    @pytest.mark.parametrize("L", [8, 9, 16])
    def test_cycle3(self, L):
        rep = classify(build_graph(cycle_model(3, L)))
        assert not rep.is_bipartite and rep.has_triangle
        assert rep.shortest_odd_cycle_length == 3
        assert rep.max_pairwise_anticommuting_clique_lower_bound >= 3

    @pytest.mark.parametrize("L", [10, 16, 32])
    def test_cycle4(self, L):
        rep = classify(build_graph(cycle_model(4, L)))
        assert rep.is_bipartite and not rep.has_triangle
        assert rep.shortest_odd_cycle_length is None

    @pytest.mark.parametrize("L", [13, 16, 24])
    def test_cycle5(self, L):
        rep = classify(build_graph(cycle_model(5, L)))
        assert not rep.is_bipartite and not rep.has_triangle
        assert rep.shortest_odd_cycle_length == 5
        assert rep.max_pairwise_anticommuting_clique_lower_bound == 2

    def test_cycle5_on_twelve_sites_wraps(self):
        # offsets 4 + 4 + 4 close a loop on a 12-ring, so a triangle appears
        # even though the ring meets the 2 * range + 2 length guideline
        assert classify(build_graph(cycle_model(5, 12))).has_triangle

    @pytest.mark.parametrize("r", range(1, 13))
    def test_xyz_parity(self, r):
        g = build_graph(XYZSpec(4 * r + 4, SYM, r))
        rep = classify(g)
        assert rep.is_bipartite == (r % 2 == 0)
        assert rep.is_bipartite == nx.is_bipartite(to_networkx(g))

    def test_coloring_is_proper(self):
        g = build_graph(cycle_model(4, 16))
        color = two_coloring(g)
        assert all(color[u] != color[v] for u, v in g.edges())

    def test_triangle_matches_networkx(self):
        for spec in (cycle_model(3, 9), cycle_model(5, 16), XYZSpec(16, SYM, 3)):
            g = build_graph(spec)
            assert has_triangle(g) == (sum(nx.triangles(to_networkx(g)).values()) > 0)


@st.composite
def random_graphs(draw):
    n = draw(st.integers(2, 9))
    bits = draw(st.lists(st.booleans(), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2))
    adj = np.zeros((n, n), dtype=bool)
    for (i, j), b in zip(itertools.combinations(range(n), 2), bits):
        adj[i, j] = adj[j, i] = b
    return FrustrationGraph([None] * n, adj)


@settings(max_examples=150, deadline=None)
@given(random_graphs())
def test_report_invariants(g):
    rep = classify(g)
    assert rep.is_bipartite == nx.is_bipartite(to_networkx(g))
    if rep.has_triangle:
        assert not rep.is_bipartite
    if rep.is_bipartite:
        assert rep.shortest_odd_cycle_length is None
    else:
        assert rep.shortest_odd_cycle_length == odd_cycle_bruteforce(g, max_len=len(g))
    assert (rep.shortest_odd_cycle_length == 3) == rep.has_triangle
    clique = rep.max_pairwise_anticommuting_clique_lower_bound
    assert clique <= max(len(c) for c in nx.find_cliques(to_networkx(g)))
    assert clique == clique_lower_bound(g)
    for u, v in g.edges()[:3]:
        smaller = shortest_odd_cycle(g.without_edge(u, v))
        if smaller is not None:
            assert smaller >= rep.shortest_odd_cycle_length
