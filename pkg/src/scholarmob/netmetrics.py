"""Country-level networks and their structural and centrality measures.

Collaboration edges count co-published papers (full counting: one unit per
unordered country pair per publication).  Mobility edges count researchers,
not moves: a researcher contributes at most one unit to a given ordered
country pair, and the undirected weight of a pair is the sum of its two
directed flows.

All structural measures run on the unweighted presence graph; weights only
feed flow reports.  Graphs here have a few hundred nodes at most, so the
implementations favour clarity over asymptotics and are held to brute-force
oracles by the test suite.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .corpus import CountryRegistry, PublicationRecord
from .mobility import MobilityEvent


@dataclass(frozen=True)
class CountryGraph:
    """Weighted country graph; ``directed_flows`` is present for mobility only."""

    nodes: frozenset[str]
    edges: dict[tuple[str, str], int]
    directed_flows: dict[tuple[str, str], int] | None = None
    _adjacency: dict[str, set[str]] = field(
        default_factory=dict, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        for (a, b), weight in self.edges.items():
            if a == b:
                raise ValueError(f"self-loop on {a}")
            if a > b:
                raise ValueError(f"edge key ({a}, {b}) not sorted")
            if weight < 1:
                raise ValueError(f"edge ({a}, {b}) has weight {weight}")
        adjacency: dict[str, set[str]] = {node: set() for node in self.nodes}
        for a, b in self.edges:
            adjacency[a].add(b)
            adjacency[b].add(a)
        self._adjacency.update(adjacency)

    @property
    def vertex_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbors(self, node: str) -> set[str]:
        return self._adjacency[node]

    def weight(self, a: str, b: str) -> int:
        return self.edges.get((min(a, b), max(a, b)), 0)


def _edge_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a < b else (b, a)


def build_coauthorship_network(records: Iterable[PublicationRecord]) -> CountryGraph:
    """Co-publication weights over unordered country pairs, once per paper."""
    nodes: set[str] = set()
    edges: dict[tuple[str, str], int] = {}
    for record in records:
        countries = sorted({c for m in record.mentions for c in m.countries})
        nodes.update(countries)
        for i, a in enumerate(countries):
            for b in countries[i + 1 :]:
                key = _edge_key(a, b)
                edges[key] = edges.get(key, 0) + 1
    return CountryGraph(nodes=frozenset(nodes), edges=edges)


def build_mobility_network(
    events: Iterable[tuple[str, MobilityEvent]],
) -> CountryGraph:
    """Researcher flows per ordered pair, deduplicated per researcher."""
    seen: set[tuple[str, str, str]] = set()
    flows: dict[tuple[str, str], int] = {}
    nodes: set[str] = set()
    for cluster_id, event in events:
        dedup_key = (cluster_id, event.from_country, event.to_country)
        if dedup_key in seen:
            continue
        seen.add(dedup_key)
        pair = (event.from_country, event.to_country)
        flows[pair] = flows.get(pair, 0) + 1
        nodes.update(pair)
    edges: dict[tuple[str, str], int] = {}
    for (a, b), weight in flows.items():
        key = _edge_key(a, b)
        edges[key] = edges.get(key, 0) + weight
    return CountryGraph(nodes=frozenset(nodes), edges=edges, directed_flows=flows)


def density(graph: CountryGraph) -> float | None:
    """Edges over possible edges; undefined below two vertices."""
    n = graph.vertex_count
    if n < 2:
        return None
    return graph.edge_count / (n * (n - 1) / 2)


def average_degree(graph: CountryGraph) -> float | None:
    n = graph.vertex_count
    if n == 0:
        return None
    return 2 * graph.edge_count / n


def _bfs_distances(graph: CountryGraph, source: str) -> dict[str, int]:
    distances = {source: 0}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        for neighbor in graph.neighbors(node):
            if neighbor not in distances:
                distances[neighbor] = distances[node] + 1
                queue.append(neighbor)
    return distances


def diameter(graph: CountryGraph) -> int | None:
    """Longest shortest path over connected pairs; None when no edges exist.

    On disconnected graphs this is the maximum over finite distances;
    ``is_connected`` carries the flag.
    """
    best = 0
    for node in graph.nodes:
        distances = _bfs_distances(graph, node)
        if len(distances) > 1:
            best = max(best, max(distances.values()))
    return best if best > 0 else None


def is_connected(graph: CountryGraph) -> bool:
    if graph.vertex_count <= 1:
        return True
    start = next(iter(graph.nodes))
    return len(_bfs_distances(graph, start)) == graph.vertex_count


def clustering_coefficient(graph: CountryGraph) -> float | None:
    """Mean local clustering; nodes with degree below two contribute zero."""
    if graph.vertex_count == 0:
        return None
    total = 0.0
    # sorted iteration pins float summation order across processes
    for node in sorted(graph.nodes):
        neighbors = sorted(graph.neighbors(node))
        k = len(neighbors)
        if k < 2:
            continue
        links = sum(
            1
            for i, a in enumerate(neighbors)
            for b in neighbors[i + 1 :]
            if b in graph.neighbors(a)
        )
        total += links / (k * (k - 1) / 2)
    return total / graph.vertex_count


def assortativity(graph: CountryGraph) -> float | None:
    """Pearson correlation of endpoint degrees over the edge list.

    Each undirected edge contributes both orientations.  Degenerate degree
    variance (regular graphs) leaves the coefficient undefined.
    """
    if graph.edge_count == 0:
        return None
    degrees = {node: len(graph.neighbors(node)) for node in graph.nodes}
    xs: list[int] = []
    ys: list[int] = []
    for a, b in graph.edges:
        xs.extend((degrees[a], degrees[b]))
        ys.extend((degrees[b], degrees[a]))
    m = len(xs)
    mean_x = sum(xs) / m
    mean_y = sum(ys) / m
    cov = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    var_x = sum((x - mean_x) ** 2 for x in xs)
    var_y = sum((y - mean_y) ** 2 for y in ys)
    if var_x == 0 or var_y == 0:
        return None
    return cov / math.sqrt(var_x * var_y)


def degree_centrality(graph: CountryGraph, country: str) -> int:
    """Neighbor count in the full graph."""
    if country not in graph.nodes:
        raise KeyError(country)
    return len(graph.neighbors(country))


def closeness_centrality(graph: CountryGraph, country: str) -> float:
    """(n'-1) / sum of distances within the node's component; isolated -> 0."""
    if country not in graph.nodes:
        raise KeyError(country)
    distances = _bfs_distances(graph, country)
    if len(distances) == 1:
        return 0.0
    reachable = len(distances) - 1
    return reachable / sum(distances.values())


@dataclass(frozen=True)
class StructuralMeasures:
    vertex_count: int
    edge_count: int
    density: float | None
    average_degree: float | None
    diameter: int | None
    disconnected: bool
    clustering_coefficient: float | None
    assortativity: float | None


def structural_measures(graph: CountryGraph) -> StructuralMeasures:
    return StructuralMeasures(
        vertex_count=graph.vertex_count,
        edge_count=graph.edge_count,
        density=density(graph),
        average_degree=average_degree(graph),
        diameter=diameter(graph),
        disconnected=not is_connected(graph),
        clustering_coefficient=clustering_coefficient(graph),
        assortativity=assortativity(graph),
    )


def regional_flow_matrix(
    events: Iterable[tuple[str, MobilityEvent]],
    registry: CountryRegistry,
) -> dict[tuple[str, str], int]:
    """Researcher flows aggregated to ordered (origin region, destination region).

    Deduplication matches the mobility network: one unit per researcher per
    ordered country pair, then country flows are summed into region cells,
    so row and column sums equal the per-direction flow totals.
    """
    seen: set[tuple[str, str, str]] = set()
    matrix: dict[tuple[str, str], int] = {}
    for cluster_id, event in events:
        dedup_key = (cluster_id, event.from_country, event.to_country)
        if dedup_key in seen:
            continue
        seen.add(dedup_key)
        cell = (registry.region_of(event.from_country), registry.region_of(event.to_country))
        matrix[cell] = matrix.get(cell, 0) + 1
    return matrix


def write_edge_list(graph: CountryGraph, path, directed: bool = False) -> None:
    """Edge-list export: country_a, country_b, weight[, direction]."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        if directed:
            if graph.directed_flows is None:
                raise ValueError("graph carries no directed flows")
            handle.write("# country_a\tcountry_b\tweight\tdirection\n")
            for (a, b), weight in sorted(graph.directed_flows.items()):
                handle.write(f"{a}\t{b}\t{weight}\tout\n")
        else:
            handle.write("# country_a\tcountry_b\tweight\n")
            for (a, b), weight in sorted(graph.edges.items()):
                handle.write(f"{a}\t{b}\t{weight}\n")


def read_edge_list(path) -> CountryGraph:
    """Rebuild a graph from :func:`write_edge_list` output."""
    edges: dict[tuple[str, str], int] = {}
    flows: dict[tuple[str, str], int] = {}
    nodes: set[str] = set()
    directed = False
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            a, b, weight = parts[0], parts[1], int(parts[2])
            nodes.update((a, b))
            if len(parts) == 4:
                directed = True
                flows[(a, b)] = weight
            else:
                edges[_edge_key(a, b)] = weight
    if directed:
        for (a, b), weight in flows.items():
            key = _edge_key(a, b)
            edges[key] = edges.get(key, 0) + weight
        return CountryGraph(frozenset(nodes), edges, flows)
    return CountryGraph(frozenset(nodes), edges)
