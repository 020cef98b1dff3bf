"""Frustration (anticommutation) graphs of measurement ensembles."""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .ensembles import EnsembleSpec, WeightedOperator, enumerate_ensemble
from .index import anticommutation_matrix

DEFAULT_NODE_CAP = 10**4


@dataclass
class GraphReport:
    is_bipartite: bool
    shortest_odd_cycle_length: Optional[int]
    has_triangle: bool
    max_pairwise_anticommuting_clique_lower_bound: int
    n_nodes: int
    n_edges: int

    def to_dict(self) -> dict:
        return asdict(self)


class FrustrationGraph:
    """Operators as nodes, an edge between every anticommuting pair."""

    def __init__(self, nodes: list[WeightedOperator], adjacency: np.ndarray):
        adjacency = np.asarray(adjacency, dtype=bool)
        if adjacency.shape != (len(nodes), len(nodes)):
            raise ValueError("adjacency shape does not match node count")
        if np.any(np.diag(adjacency)) or np.any(adjacency != adjacency.T):
            raise ValueError("adjacency must be symmetric without self-loops")
        self.nodes = nodes
        self.adjacency = adjacency
        # neighbor sets as int bitmasks
        self._nbr = [sum(1 << int(j) for j in np.flatnonzero(row)) for row in adjacency]

    def __len__(self):
        return len(self.nodes)

    def neighbors(self, u: int) -> list[int]:
        return np.flatnonzero(self.adjacency[u]).tolist()

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(i.tolist(), j.tolist()))

    def without_edge(self, u: int, v: int) -> FrustrationGraph:
        adj = self.adjacency.copy()
        adj[u, v] = adj[v, u] = False
        return FrustrationGraph(self.nodes, adj)

    def edge_list(self) -> str:
        """Whitespace-separated ``u v`` pairs, one edge per line."""
        return "".join(f"{u} {v}\n" for u, v in self.edges())


def build_graph(spec: EnsembleSpec, cap: int = DEFAULT_NODE_CAP) -> FrustrationGraph:
    if spec.length < 2 * spec.max_range + 2:
        warnings.warn(
            f"ring length {spec.length} < 2 * range + 2; wraparound may alter the graph",
            stacklevel=2,
        )
    nodes = enumerate_ensemble(spec, cap)
    return FrustrationGraph(nodes, anticommutation_matrix([n.op for n in nodes]))


def two_coloring(graph: FrustrationGraph) -> Optional[list[int]]:
    """BFS 2-coloring, or None if some component has an odd cycle."""
    color = [-1] * len(graph)
    for s in range(len(graph)):
        if color[s] >= 0:
            continue
        color[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in graph.neighbors(u):
                if color[v] < 0:
                    color[v] = 1 - color[u]
                    queue.append(v)
                elif color[v] == color[u]:
                    return None
    return color


def has_triangle(graph: FrustrationGraph) -> bool:
    nbr = graph._nbr
    return any(nbr[u] & nbr[v] for u, v in graph.edges())


def shortest_odd_cycle(graph: FrustrationGraph) -> Optional[int]:
    """Length of the shortest odd cycle, by BFS layering from every vertex.

    An edge inside one BFS layer at depth d closes an odd walk of length
    2d + 1; the minimum over all roots is attained on a shortest odd cycle.
    """
    best = None
    for s in range(len(graph)):
        dist = {s: 0}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            du = dist[u]
            if best is not None and 2 * du + 1 >= best:
                break
            for v in graph.neighbors(u):
                if v not in dist:
                    dist[v] = du + 1
                    queue.append(v)
                elif dist[v] == du:
                    best = 2 * du + 1
                    break
    return best


def clique_lower_bound(graph: FrustrationGraph) -> int:
    """Exact search for cliques up to size 4, then greedy growth from each vertex."""
    n = len(graph)
    if n == 0:
        return 0
    nbr = graph._nbr
    best = 1
    for u, v in graph.edges():
        best = max(best, 2)
        common = nbr[u] & nbr[v]
        while common:
            w = (common & -common).bit_length() - 1
            common &= common - 1
            best = max(best, 3)
            if nbr[u] & nbr[v] & nbr[w]:
                best = 4
                break
        if best == 4:
            break
    for s in range(n):
        cand = nbr[s]
        size = 1
        while cand:
            # take the candidate with most neighbors among the remaining candidates
            pick, pick_deg = -1, -1
            c = cand
            while c:
                w = (c & -c).bit_length() - 1
                c &= c - 1
                deg = (nbr[w] & cand).bit_count()
                if deg > pick_deg:
                    pick, pick_deg = w, deg
            size += 1
            cand &= nbr[pick]
        best = max(best, size)
    return best


def classify(graph: FrustrationGraph) -> GraphReport:
    bipartite = two_coloring(graph) is not None
    return GraphReport(
        is_bipartite=bipartite,
        shortest_odd_cycle_length=None if bipartite else shortest_odd_cycle(graph),
        has_triangle=has_triangle(graph),
        max_pairwise_anticommuting_clique_lower_bound=clique_lower_bound(graph),
        n_nodes=len(graph),
        n_edges=int(np.count_nonzero(graph.adjacency)) // 2,
    )
