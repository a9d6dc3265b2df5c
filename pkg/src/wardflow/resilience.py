"""Connectivity degradation under random and targeted node removal."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .network import TransferNetwork, as_symmetric_directed, to_networkx

RANDOM = "random"
DEGREE = "degree"
BETWEENNESS = "betweenness"
EXPLICIT = "explicit"

ADAPTIVE = "adaptive"
STATIC = "static-order"


@dataclass(frozen=True)
class AttackStep:
    fraction_removed: float
    wcc_fraction: float
    scc_fraction: float
    efficiency: float


@dataclass(frozen=True)
class AttackResult:
    strategy: str
    recompute_policy: str
    step_fraction: float
    steps: tuple[AttackStep, ...]
    seed: int | None = None


def _measure(matrix: csr_matrix, alive: np.ndarray, n_total: int) -> tuple[float, float, float]:
    members = np.flatnonzero(alive)
    if len(members) == 0:
        return 0.0, 0.0, 0.0
    if len(members) == 1:
        return 1.0 / n_total, 1.0 / n_total, 0.0
    sub = matrix[members][:, members]
    _, weak = connected_components(sub, directed=True, connection="weak")
    _, strong = connected_components(sub, directed=True, connection="strong")
    wcc = int(np.bincount(weak).max()) / n_total
    scc = int(np.bincount(strong).max()) / n_total
    dist = shortest_path(sub, directed=True, unweighted=True)
    off_diag = ~np.eye(len(members), dtype=bool)
    finite = np.isfinite(dist) & off_diag
    inv_sum = float((1.0 / dist[finite]).sum()) if finite.any() else 0.0
    efficiency = inv_sum / (len(members) * (len(members) - 1))
    return wcc, scc, efficiency


def _degree_ranking(matrix: csr_matrix, alive: np.ndarray, labels: list[str]) -> list[int]:
    members = np.flatnonzero(alive)
    sub = matrix[members][:, members]
    binary = sub.copy()
    binary.data = np.ones_like(binary.data)
    totals = np.asarray(binary.sum(axis=0)).ravel() + np.asarray(binary.sum(axis=1)).ravel()
    ranked = sorted(range(len(members)), key=lambda i: (-totals[i], labels[members[i]]))
    return [int(members[i]) for i in ranked]


def _betweenness_ranking(graph: nx.DiGraph, alive: np.ndarray, labels: list[str]) -> list[int]:
    members = [labels[i] for i in np.flatnonzero(alive)]
    sub = graph.subgraph(members)
    centrality = nx.betweenness_centrality(sub, normalized=True)
    index = {label: i for i, label in enumerate(labels)}
    ranked = sorted(members, key=lambda node: (-centrality[node], node))
    return [index[node] for node in ranked]


def attack(net: TransferNetwork, strategy: str, step_fraction: float = 0.05,
           recompute_policy: str | None = None, seed: int | None = None,
           order: Sequence[str] | None = None) -> AttackResult:
    """Remove nodes in strategy order, tracking giant components and efficiency.

    Strategies: 'degree' and 'betweenness' target the highest-ranked nodes
    (adaptive re-ranking by default), 'random' uses a seeded shuffle, and
    'explicit' follows a caller-supplied label order. Each step removes
    max(1, round(step_fraction * n)) nodes; fractions are relative to the
    original node count, and step zero records the intact network.
    """
    if not 0.0 < step_fraction <= 1.0:
        raise ValueError("step_fraction must be in (0, 1]")
    if net.node_count < 2:
        raise ValueError("attack needs at least 2 nodes")
    directed_net = as_symmetric_directed(net)
    labels = directed_net.sorted_nodes()
    index = {label: i for i, label in enumerate(labels)}
    n = len(labels)

    rows, cols = [], []
    for u, v in directed_net.edges:
        rows.append(index[u])
        cols.append(index[v])
    matrix = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    graph = to_networkx(directed_net) if strategy == BETWEENNESS else None

    if strategy == RANDOM:
        if seed is None:
            raise ValueError("random strategy needs a seed")
        rng = np.random.default_rng(seed)
        schedule = [int(i) for i in rng.permutation(n)]
        policy = recompute_policy or STATIC
        name = f"random(seed={seed})"
    elif strategy == EXPLICIT:
        if order is None:
            raise ValueError("explicit strategy needs an order of node labels")
        unknown = [label for label in order if label not in index]
        if unknown:
            raise ValueError(f"unknown nodes in removal order: {unknown}")
        schedule = [index[label] for label in order]
        policy = recompute_policy or STATIC
        name = "explicit-list"
    elif strategy in (DEGREE, BETWEENNESS):
        policy = recompute_policy or ADAPTIVE
        schedule = []  # filled lazily under the adaptive policy
        name = f"{strategy}-targeted"
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    if policy not in (ADAPTIVE, STATIC):
        raise ValueError(f"unknown recompute policy {policy!r}")

    alive = np.ones(n, dtype=bool)
    per_step = max(1, round(step_fraction * n))
    steps = [AttackStep(0.0, *_measure(matrix, alive, n))]

    if strategy in (DEGREE, BETWEENNESS) and policy == STATIC:
        schedule = (_degree_ranking(matrix, alive, labels) if strategy == DEGREE
                    else _betweenness_ranking(graph, alive, labels))

    removed = 0
    cursor = 0
    while alive.any():
        if strategy in (DEGREE, BETWEENNESS) and policy == ADAPTIVE:
            ranking = (_degree_ranking(matrix, alive, labels) if strategy == DEGREE
                       else _betweenness_ranking(graph, alive, labels))
            batch = ranking[:per_step]
        else:
            batch = schedule[cursor:cursor + per_step]
            cursor += len(batch)
            if not batch:
                break
        alive[batch] = False
        removed += len(batch)
        steps.append(AttackStep(removed / n, *_measure(matrix, alive, n)))

    return AttackResult(name, policy, step_fraction, tuple(steps), seed=seed)


def giant_wcc_area(result: AttackResult) -> float:
    """Trapezoidal area under the (fraction removed, giant-WCC fraction) curve."""
    fractions = [step.fraction_removed for step in result.steps]
    wcc = [step.wcc_fraction for step in result.steps]
    return float(np.trapezoid(wcc, fractions))
