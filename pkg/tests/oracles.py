"""Independent reference implementations used as test oracles.

Deliberately written with different algorithms and data layouts than the
package (Floyd-Warshall instead of BFS, plain dicts instead of graph
objects) so agreement is meaningful.
"""

from __future__ import annotations

import statistics

INF = float("inf")


# --------------------------------------------------------------------------
# Mobility typology oracle


def classify_oracle(entry_sets, years):
    """Restate the five typology rules over a list of per-entry country sets.

    Returns (typology, roles, events) with the same label vocabulary as the
    implementation.
    """
    k = len(entry_sets)
    if k < 2:
        return "insufficient_information", {}, []
    union = set()
    for countries in entry_sets:
        union |= set(countries)
    if len(union) == 1:
        home = sorted(union)[0]
        return "not_mobile", {home: "home"}, []
    if len({frozenset(countries) for countries in entry_sets}) == 1:
        return "traveller_non_directional", {}, []

    events = []
    already = set(entry_sets[0])
    for position in range(1, k):
        arrivals = sorted(set(entry_sets[position]) - already)
        for arrival in arrivals:
            for departure in sorted(entry_sets[position - 1]):
                events.append((departure, arrival, years[position]))
        already |= set(arrivals)

    origin = set(entry_sets[0])
    final = set(entry_sets[-1])
    if origin & final:
        roles = {}
        for country in union - origin:
            roles[country] = "incoming_traveller"
        for country in origin:
            ever_abroad = any(
                country in countries and set(countries) - origin
                for countries in entry_sets
            )
            roles[country] = "outgoing_traveller" if ever_abroad else "home"
        return "traveller_directional", roles, events

    roles = {country: "emigrant" for country in origin}
    for country in final:
        roles[country] = "immigrant"
    return "migrant", roles, events


# --------------------------------------------------------------------------
# Graph metric oracles (Floyd-Warshall based, n <= 12)


def floyd_warshall(nodes, edges):
    nodes = sorted(nodes)
    dist = {a: {b: (0 if a == b else INF) for b in nodes} for a in nodes}
    for a, b in edges:
        dist[a][b] = 1
        dist[b][a] = 1
    for via in nodes:
        for a in nodes:
            for b in nodes:
                through = dist[a][via] + dist[via][b]
                if through < dist[a][b]:
                    dist[a][b] = through
    return dist


def oracle_diameter(nodes, edges):
    dist = floyd_warshall(nodes, edges)
    finite = [d for row in dist.values() for d in row.values() if 0 < d < INF]
    return max(finite) if finite else None


def oracle_closeness(nodes, edges, node):
    dist = floyd_warshall(nodes, edges)
    reachable = [d for d in dist[node].values() if 0 < d < INF]
    if not reachable:
        return 0.0
    return len(reachable) / sum(reachable)


def _adjacency(nodes, edges):
    adjacency = {node: set() for node in nodes}
    for a, b in edges:
        adjacency[a].add(b)
        adjacency[b].add(a)
    return adjacency


def oracle_average_degree(nodes, edges):
    if not nodes:
        return None
    adjacency = _adjacency(nodes, edges)
    return sum(len(neighbors) for neighbors in adjacency.values()) / len(nodes)


def oracle_density(nodes, edges):
    n = len(nodes)
    if n < 2:
        return None
    return len(edges) / (n * (n - 1) / 2)


def oracle_clustering(nodes, edges):
    if not nodes:
        return None
    adjacency = _adjacency(nodes, edges)
    edge_set = {frozenset(edge) for edge in edges}
    total = 0.0
    for node in nodes:
        neighbors = sorted(adjacency[node])
        k = len(neighbors)
        if k < 2:
            continue
        triangles = 0
        for i in range(k):
            for j in range(i + 1, k):
                if frozenset((neighbors[i], neighbors[j])) in edge_set:
                    triangles += 1
        total += triangles / (k * (k - 1) / 2)
    return total / len(nodes)


def oracle_assortativity(nodes, edges):
    if not edges:
        return None
    adjacency = _adjacency(nodes, edges)
    degree = {node: len(neighbors) for node, neighbors in adjacency.items()}
    xs, ys = [], []
    for a, b in edges:
        xs.append(degree[a])
        ys.append(degree[b])
        xs.append(degree[b])
        ys.append(degree[a])
    try:
        return statistics.correlation(xs, ys)
    except statistics.StatisticsError:
        return None


def random_graph(rng, max_nodes=12):
    n = rng.randint(2, max_nodes)
    nodes = [f"N{i:02d}" for i in range(n)]
    p = rng.uniform(0.15, 0.7)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.append((nodes[i], nodes[j]))
    return nodes, edges
