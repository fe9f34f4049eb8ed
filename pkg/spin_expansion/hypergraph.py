#  Copyright (c) 2025, The spin_expansion authors
#  MIT License (see CONTRIBUTING.md)
"""Multihypergraphs and their polymers.

A polymer is a connected set of edges, where two edges are adjacent when they
share a vertex. Polymers are compatible when their vertex supports are disjoint.
"""

from collections import defaultdict
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
import logging
from typing import Dict, FrozenSet, List, Tuple

from .exceptions import ModelError

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class Edge:
    """A uniquely labelled edge over an ordered set of distinct vertices."""

    edge_id: str
    vertices: Tuple[int, ...]

    @property
    def cardinality(self) -> int:
        """Return the number of vertices in the edge."""
        return len(self.vertices)


class Multihypergraph:
    """Vertices 0..n-1 plus uniquely labelled edges over arbitrary vertex subsets."""

    def __init__(self, n_vertices: int, edges: Iterable[Tuple[str, Sequence[int]]]):
        """Initialize and validate."""
        if not isinstance(n_vertices, int) or n_vertices < 0:
            raise ModelError(f"n_vertices must be a non-negative integer: {n_vertices}")

        self._n_vertices = n_vertices
        self._edges: List[Edge] = []
        self._index: Dict[str, int] = {}

        for edge_id, vertices in edges:
            edge_id = str(edge_id)
            vertices = tuple(int(v) for v in vertices)
            if edge_id in self._index:
                raise ModelError(f"Duplicate edge id: {edge_id}")
            if not vertices:
                raise ModelError(f"Edge {edge_id} has no vertices")
            if len(set(vertices)) != len(vertices):
                raise ModelError(f"Edge {edge_id} repeats a vertex: {list(vertices)}")
            for vertex in vertices:
                if not 0 <= vertex < n_vertices:
                    raise ModelError(
                        f"Edge {edge_id} references vertex {vertex} "
                        f"outside 0..{n_vertices - 1}"
                    )
            self._index[edge_id] = len(self._edges)
            self._edges.append(Edge(edge_id, vertices))

        self._incidence = defaultdict(list)
        for idx, edge in enumerate(self._edges):
            for vertex in edge.vertices:
                self._incidence[vertex].append(idx)

    @property
    def n_vertices(self) -> int:
        """Return the number of vertices |G|."""
        return self._n_vertices

    @property
    def edges(self) -> Tuple[Edge, ...]:
        """Return the edges in stored order."""
        return tuple(self._edges)

    @property
    def edge_ids(self) -> Tuple[str, ...]:
        """Return edge ids in stored order."""
        return tuple(edge.edge_id for edge in self._edges)

    @property
    def n_edges(self) -> int:
        """Return the number of edges ‖G‖."""
        return len(self._edges)

    def edge(self, edge_id: str) -> Edge:
        """Return the edge with a given id."""
        try:
            return self._edges[self._index[edge_id]]
        except KeyError as err:
            raise ModelError(f"Unknown edge id: {edge_id}") from err

    def edge_position(self, edge_id: str) -> int:
        """Return the canonical position of an edge."""
        try:
            return self._index[edge_id]
        except KeyError as err:
            raise ModelError(f"Unknown edge id: {edge_id}") from err

    def incident_edges(self, vertex: int) -> List[int]:
        """Return positions of edges incident to a vertex."""
        return list(self._incidence.get(vertex, []))

    def edge_neighbors(self, position: int) -> List[int]:
        """Return positions of other edges sharing a vertex with an edge."""
        neighbors = set()
        for vertex in self._edges[position].vertices:
            neighbors.update(self._incidence[vertex])
        neighbors.discard(position)
        return sorted(neighbors)

    def __repr__(self) -> str:
        """Return a short description."""
        return f"Multihypergraph(n_vertices={self._n_vertices}, edges={self.n_edges})"


@dataclass(frozen=True, order=True)
class Polymer:
    """A connected edge subset with its vertex support.

    `positions` are canonical edge positions in the graph, sorted; they define
    the lexicographic order of polymers.
    """

    positions: Tuple[int, ...]
    edge_ids: Tuple[str, ...]
    support: Tuple[int, ...]

    @property
    def size(self) -> int:
        """Return ‖γ‖, the number of edges."""
        return len(self.edge_ids)

    @property
    def order(self) -> int:
        """Return |γ|, the number of vertices in the support."""
        return len(self.support)


def graph_order_and_size(graph: Multihypergraph) -> Tuple[int, int]:
    """Return (|G|, ‖G‖)."""
    return graph.n_vertices, graph.n_edges


def degree_and_rank(graph: Multihypergraph) -> Tuple[int, int]:
    """Return (maximum degree, rank); multi-edges count with multiplicity."""
    degrees = [len(graph.incident_edges(v)) for v in range(graph.n_vertices)]
    max_degree = max(degrees, default=0)
    rank = max((edge.cardinality for edge in graph.edges), default=0)
    return max_degree, rank


def edge_overlap_index(graph: Multihypergraph) -> Dict[int, List[str]]:
    """Return vertex -> ids of incident edges, in edge order."""
    return {
        vertex: [graph.edges[idx].edge_id for idx in graph.incident_edges(vertex)]
        for vertex in range(graph.n_vertices)
    }


def make_polymer(graph: Multihypergraph, edge_ids: Iterable[str]) -> Polymer:
    """Build a polymer from edge ids; raise if the edges are not connected."""
    positions = tuple(sorted({graph.edge_position(eid) for eid in edge_ids}))
    if not positions:
        raise ModelError("A polymer needs at least one edge")
    if not _positions_connected(graph, positions):
        raise ModelError(f"Edges {edge_ids} are not connected")
    return polymer_from_positions(graph, positions)


def polymer_from_positions(
    graph: Multihypergraph, positions: Tuple[int, ...]
) -> Polymer:
    """Build a polymer from sorted edge positions without a connectivity check."""
    support = set()
    for idx in positions:
        support.update(graph.edges[idx].vertices)
    return Polymer(
        positions=positions,
        edge_ids=tuple(graph.edges[idx].edge_id for idx in positions),
        support=tuple(sorted(support)),
    )


def _positions_connected(graph: Multihypergraph, positions: Sequence[int]) -> bool:
    return len(_position_components(graph, positions)) <= 1


def _position_components(
    graph: Multihypergraph, positions: Sequence[int]
) -> List[FrozenSet[int]]:
    remaining = set(positions)
    components = []
    while remaining:
        start = min(remaining)
        stack = [start]
        seen = {start}
        while stack:
            current = stack.pop()
            for nbr in graph.edge_neighbors(current):
                if nbr in remaining and nbr not in seen:
                    seen.add(nbr)
                    stack.append(nbr)
        remaining -= seen
        components.append(frozenset(seen))
    return components


def connected_components(
    graph: Multihypergraph, edge_ids: Iterable[str]
) -> List[FrozenSet[str]]:
    """Split an edge subset into its maximally connected components."""
    positions = sorted({graph.edge_position(eid) for eid in edge_ids})
    return [
        frozenset(graph.edges[idx].edge_id for idx in component)
        for component in _position_components(graph, positions)
    ]


def is_connected(graph: Multihypergraph, edge_ids: Iterable[str]) -> bool:
    """Return True if the edge subset is connected (the empty set is not)."""
    positions = sorted({graph.edge_position(eid) for eid in edge_ids})
    return bool(positions) and _positions_connected(graph, positions)


def enumerate_polymers(graph: Multihypergraph, max_size: int) -> Iterator[Polymer]:
    """Yield every polymer with 1 <= ‖γ‖ <= max_size exactly once.

    Growth is rooted at the smallest edge position of each polymer. A candidate
    joins the extension list only if it is larger than the root and not adjacent
    to the current subset, so every connected subset has exactly one growth path.
    The stream is in lexicographic order of sorted edge positions.
    """
    if max_size < 1:
        raise ModelError(f"Polymer size bound must be >= 1: {max_size}")

    neighbors = [set(graph.edge_neighbors(idx)) for idx in range(graph.n_edges)]

    for root in range(graph.n_edges):
        found: List[Tuple[int, ...]] = []

        def extend(subset, closed_nbhd, extension):
            found.append(tuple(sorted(subset)))
            if len(subset) == max_size:
                return
            extension = list(extension)
            while extension:
                chosen = extension.pop()
                exclusive = [
                    u
                    for u in neighbors[chosen]
                    if u > root and u not in subset and u not in closed_nbhd
                ]
                extend(
                    subset | {chosen},
                    closed_nbhd | neighbors[chosen] | {chosen},
                    extension + exclusive,
                )

        extend(
            frozenset([root]),
            frozenset(neighbors[root] | {root}),
            [u for u in neighbors[root] if u > root],
        )
        _LOGGER.debug("Root edge %s: %d polymers", root, len(found))

        for positions in sorted(found):
            yield polymer_from_positions(graph, positions)


def are_compatible(first: Polymer, second: Polymer) -> bool:
    """Return True iff the supports are vertex-disjoint."""
    return not set(first.support).intersection(second.support)
