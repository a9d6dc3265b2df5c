"""Per-node and whole-network measures for transfer networks.

Directed quantities (degrees, strengths, reciprocity, flow hierarchy,
betweenness, assortativity, path length) are defined on the directed
network; clustering and nearest-neighbour degree follow the undirected
projection, whose conventions the small-world machinery expects.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .network import TransferNetwork, to_networkx, undirected_projection

DIRECTED_SCOPE = "directed"
PROJECTION_SCOPE = "undirected-projection"


@dataclass(frozen=True)
class NodeMetrics:
    label: str
    degree: int
    in_degree: int
    out_degree: int
    net_connectivity: int
    strength: int
    in_strength: int
    out_strength: int
    clustering: float
    betweenness: float
    knn_weighted: float | None


@dataclass(frozen=True)
class NetworkMetrics:
    node_count: int
    edge_count: int
    total_weight: int
    mean_edge_weight: float | None
    reciprocity: float | None
    flow_hierarchy: float | None
    global_clustering: float | None
    transitivity: float | None
    avg_shortest_path: float | None
    path_coverage: float | None
    avg_shortest_path_undirected: float | None
    undirected_path_coverage: float | None
    assortativity: float | None
    assortativity_undirected: float | None
    degree_distribution: Mapping[int, float]
    reasons: Mapping[str, str] = field(default_factory=dict)


def _require_directed(net: TransferNetwork, op: str) -> None:
    if not net.directed:
        raise ValueError(f"{op} is defined on directed networks; symmetrize first")


def degrees(net: TransferNetwork) -> dict[str, tuple[int, int, int, int]]:
    """Per node (k, in_degree, out_degree, net_connectivity=in-out)."""
    _require_directed(net, "degrees")
    in_deg = {node: 0 for node in net.nodes}
    out_deg = {node: 0 for node in net.nodes}
    for u, v in net.edges:
        out_deg[u] += 1
        in_deg[v] += 1
    return {
        node: (in_deg[node] + out_deg[node], in_deg[node], out_deg[node], in_deg[node] - out_deg[node])
        for node in net.nodes
    }


def strengths(net: TransferNetwork) -> dict[str, tuple[int, int, int]]:
    """Per node (s, in_strength, out_strength); s sums all incident weights."""
    _require_directed(net, "strengths")
    in_s = {node: 0 for node in net.nodes}
    out_s = {node: 0 for node in net.nodes}
    for (u, v), weight in net.edges.items():
        out_s[u] += weight
        in_s[v] += weight
    return {node: (in_s[node] + out_s[node], in_s[node], out_s[node]) for node in net.nodes}


def reciprocity(net: TransferNetwork) -> float | None:
    """Fraction of directed edges whose reverse edge also exists."""
    _require_directed(net, "reciprocity")
    if not net.edges:
        return None
    reciprocated = sum(1 for (u, v) in net.edges if (v, u) in net.edges)
    return reciprocated / len(net.edges)


def _node_index(net: TransferNetwork) -> dict[str, int]:
    return {node: i for i, node in enumerate(net.sorted_nodes())}


def _adjacency(net: TransferNetwork, directed: bool) -> csr_matrix:
    index = _node_index(net)
    n = len(index)
    rows, cols, vals = [], [], []
    for (u, v), weight in net.edges.items():
        rows.append(index[u])
        cols.append(index[v])
        vals.append(weight)
        if not directed or not net.directed:
            rows.append(index[v])
            cols.append(index[u])
            vals.append(weight)
    return csr_matrix((vals, (rows, cols)), shape=(n, n))


def flow_hierarchy(net: TransferNetwork) -> float | None:
    """Fraction of edges that sit on no directed cycle.

    An edge is cyclic exactly when both endpoints share a strongly
    connected component (self-loops are excluded by construction, so a
    shared component always has size >= 2).
    """
    _require_directed(net, "flow_hierarchy")
    if not net.edges:
        return None
    index = _node_index(net)
    _, labels = connected_components(_adjacency(net, directed=True), directed=True, connection="strong")
    cyclic = sum(1 for (u, v) in net.edges if labels[index[u]] == labels[index[v]])
    return 1.0 - cyclic / len(net.edges)


def _neighbor_sets(net: TransferNetwork) -> dict[str, set[str]]:
    projection = undirected_projection(net)
    neighbors: dict[str, set[str]] = {node: set() for node in net.nodes}
    for u, v in projection.edges:
        neighbors[u].add(v)
        neighbors[v].add(u)
    return neighbors


def clustering(net: TransferNetwork) -> tuple[dict[str, float], float | None, float | None]:
    """Local coefficients, their mean, and transitivity, all unweighted.

    Computed on the undirected projection. Nodes with fewer than two
    neighbours get coefficient 0.
    """
    neighbors = _neighbor_sets(net)
    local: dict[str, float] = {}
    closed_triples = 0
    triples = 0
    for node, around in neighbors.items():
        d = len(around)
        if d < 2:
            local[node] = 0.0
            continue
        links = 0
        for u in around:
            links += len(neighbors[u] & around)
        links //= 2
        local[node] = links / (d * (d - 1) / 2)
        closed_triples += links  # each triangle counted once per corner
        triples += d * (d - 1) // 2
    c_av = sum(local.values()) / len(local) if local else None
    transitivity = closed_triples / triples if triples else None
    return local, c_av, transitivity


def betweenness(net: TransferNetwork, use_weights: bool = False) -> dict[str, float]:
    """Normalized betweenness centrality (Brandes accumulation).

    With use_weights, edge length is 1/weight so heavier traffic means a
    shorter edge; the default treats every edge as one hop.
    """
    graph = to_networkx(net)
    weight_key = None
    if use_weights:
        for u, v, data in graph.edges(data=True):
            data["distance"] = 1.0 / data["weight"]
        weight_key = "distance"
    result = nx.betweenness_centrality(graph, normalized=True, weight=weight_key)
    return {node: float(b) for node, b in result.items()}


def _pearson(xs: np.ndarray, ys: np.ndarray) -> float | None:
    if len(xs) < 2:
        return None
    sx = xs.std()
    sy = ys.std()
    if sx < 1e-15 or sy < 1e-15:
        return None
    return float(((xs - xs.mean()) * (ys - ys.mean())).mean() / (sx * sy))


def assortativity(net: TransferNetwork) -> float | None:
    """Pearson correlation of (source out-degree, target in-degree) over edges."""
    _require_directed(net, "assortativity")
    if len(net.edges) < 2:
        return None
    degree_map = degrees(net)
    xs = np.array([degree_map[u][2] for (u, v) in net.edges], dtype=float)
    ys = np.array([degree_map[v][1] for (u, v) in net.edges], dtype=float)
    return _pearson(xs, ys)


def assortativity_undirected(net: TransferNetwork) -> float | None:
    """Degree correlation over the undirected projection, both edge orientations."""
    projection = undirected_projection(net)
    if len(projection.edges) < 2:
        return None
    degree_of = {node: len(around) for node, around in _neighbor_sets(projection).items()}
    xs, ys = [], []
    for u, v in projection.edges:
        xs.extend((degree_of[u], degree_of[v]))
        ys.extend((degree_of[v], degree_of[u]))
    return _pearson(np.array(xs, dtype=float), np.array(ys, dtype=float))


def knn(net: TransferNetwork) -> tuple[dict[str, float | None], dict[int, float], tuple[float, float] | None]:
    """Weighted average nearest-neighbour degree on the undirected projection.

    Returns per-node values (None for isolated nodes), the curve of mean
    k_nn over nodes of each degree, and the (slope, intercept) of an
    ordinary least squares line through the curve points.
    """
    projection = undirected_projection(net)
    neighbors = _neighbor_sets(projection)
    degree_of = {node: len(around) for node, around in neighbors.items()}
    per_node: dict[str, float | None] = {}
    for node, around in neighbors.items():
        if not around:
            per_node[node] = None
            continue
        strength = sum(projection.weight(node, other) for other in around)
        mixed = sum(projection.weight(node, other) * degree_of[other] for other in around)
        per_node[node] = mixed / strength

    by_degree: dict[int, list[float]] = {}
    for node, value in per_node.items():
        if value is not None:
            by_degree.setdefault(degree_of[node], []).append(value)
    curve = {k: sum(vals) / len(vals) for k, vals in sorted(by_degree.items())}

    fit = None
    if len(curve) == 1:
        fit = (0.0, next(iter(curve.values())))  # a single degree pins a flat line
    elif len(curve) >= 2:
        ks = np.array(list(curve.keys()), dtype=float)
        vals = np.array(list(curve.values()), dtype=float)
        slope, intercept = np.polyfit(ks, vals, 1)
        fit = (float(slope), float(intercept))
    return per_node, curve, fit


def avg_shortest_path(net: TransferNetwork, scope: str = DIRECTED_SCOPE) -> tuple[float | None, float | None]:
    """Mean hop count over ordered reachable pairs in the giant component.

    Directed scope uses the largest strongly connected component;
    projection scope the largest connected component. Also returns the
    fraction of nodes the component covers.
    """
    if scope not in (DIRECTED_SCOPE, PROJECTION_SCOPE):
        raise ValueError(f"unknown scope {scope!r}")
    if not net.nodes:
        return None, None
    directed = scope == DIRECTED_SCOPE
    if directed:
        _require_directed(net, "avg_shortest_path(directed)")
    matrix = _adjacency(net, directed=directed)
    connection = "strong" if directed else "weak"
    _, labels = connected_components(matrix, directed=directed, connection=connection)
    counts = np.bincount(labels)
    giant = int(counts.argmax())
    members = np.flatnonzero(labels == giant)
    coverage = len(members) / net.node_count
    if len(members) < 2:
        return None, coverage
    sub = matrix[members][:, members]
    dist = shortest_path(sub, directed=directed, unweighted=True)
    off_diagonal = ~np.eye(len(members), dtype=bool)
    return float(dist[off_diagonal].mean()), coverage


def compute_node_metrics(net: TransferNetwork, betweenness_weighted: bool = False) -> dict[str, NodeMetrics]:
    _require_directed(net, "compute_node_metrics")
    degree_map = degrees(net)
    strength_map = strengths(net)
    local_clustering, _, _ = clustering(net)
    centrality = betweenness(net, use_weights=betweenness_weighted)
    knn_map, _, _ = knn(net)
    out = {}
    for node in net.sorted_nodes():
        k, in_deg, out_deg, nc = degree_map[node]
        s, in_s, out_s = strength_map[node]
        out[node] = NodeMetrics(
            label=node,
            degree=k,
            in_degree=in_deg,
            out_degree=out_deg,
            net_connectivity=nc,
            strength=s,
            in_strength=in_s,
            out_strength=out_s,
            clustering=local_clustering[node],
            betweenness=centrality[node],
            knn_weighted=knn_map[node],
        )
    return out


def compute_network_metrics(net: TransferNetwork) -> NetworkMetrics:
    _require_directed(net, "compute_network_metrics")
    reasons: dict[str, str] = {}

    def absent(name: str, reason: str) -> None:
        reasons[name] = reason

    edge_count = net.edge_count
    total = net.total_weight
    mean_weight = total / edge_count if edge_count else None
    if mean_weight is None:
        absent("mean_edge_weight", "network has no edges")

    r = reciprocity(net) if edge_count else None
    if r is None:
        absent("reciprocity", "network has no edges")
    h = flow_hierarchy(net) if edge_count else None
    if h is None:
        absent("flow_hierarchy", "network has no edges")

    _, c_av, transitivity = clustering(net)
    if c_av is None:
        absent("global_clustering", "network has no nodes")
    if transitivity is None:
        absent("transitivity", "no connected triples")

    l_directed, coverage_directed = avg_shortest_path(net, DIRECTED_SCOPE)
    if l_directed is None:
        absent("avg_shortest_path", "no reachable ordered pairs in the giant strongly connected component")
    l_projection, coverage_projection = avg_shortest_path(net, PROJECTION_SCOPE)
    if l_projection is None:
        absent("avg_shortest_path_undirected", "no reachable pairs in the giant component")

    a = assortativity(net)
    if a is None:
        absent("assortativity", "fewer than 2 edges or zero degree variance at edge endpoints")
    a_undirected = assortativity_undirected(net)
    if a_undirected is None:
        absent("assortativity_undirected", "fewer than 2 projected edges or zero degree variance")

    degree_map = degrees(net)
    p_k: dict[int, float] = {}
    if degree_map:
        n = len(degree_map)
        for k, *_ in degree_map.values():
            p_k[k] = p_k.get(k, 0) + 1
        p_k = {k: count / n for k, count in sorted(p_k.items())}

    return NetworkMetrics(
        node_count=net.node_count,
        edge_count=edge_count,
        total_weight=total,
        mean_edge_weight=mean_weight,
        reciprocity=r,
        flow_hierarchy=h,
        global_clustering=c_av,
        transitivity=transitivity,
        avg_shortest_path=l_directed,
        path_coverage=coverage_directed,
        avg_shortest_path_undirected=l_projection,
        undirected_path_coverage=coverage_projection,
        assortativity=a,
        assortativity_undirected=a_undirected,
        degree_distribution=p_k,
        reasons=reasons,
    )
