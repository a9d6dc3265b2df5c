"""Random and lattice reference ensembles and small-world coefficients.

References are built from the observed network by degree-preserving
double-edge swaps: the random ensemble accepts every legal swap, the
lattice ensemble only swaps that do not loosen a banded edge layout
(nodes ordered by degree, edges scored by negative index distance).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is an optional accelerator
    njit = None

from . import metrics as metrics_mod
from .network import TransferNetwork

_DEFAULT_SWAP_FACTOR = 10
# the greedy no-decrease rule needs far more proposals than free rewiring
# before banded structure (and with it lattice-level clustering) saturates
_DEFAULT_LATTICE_FACTOR = 1000
_RNG_BLOCK = 1 << 20


@dataclass(frozen=True)
class RewireResult:
    network: TransferNetwork
    attempted: int
    accepted: int

    @property
    def no_swap_possible(self) -> bool:
        """Warning flag: no proposed swap was ever legal."""
        return self.accepted == 0


@dataclass(frozen=True)
class SmallWorldReport:
    clustering: float | None
    path_length: float | None
    path_coverage: float | None
    clustering_random: float | None
    path_length_random: float | None
    clustering_lattice: float | None
    sigma: float | None
    omega: float | None
    n_samples: int
    seed: int
    n_swaps_random: int
    n_swaps_lattice: int
    accepted_swaps_random: tuple[int, ...]
    accepted_swaps_lattice: tuple[int, ...]
    reasons: Mapping[str, str]


def _swap_kernel(edge_u, edge_v, pick_a, pick_b, orientation, rank, lattice_rule, present):
    """Apply double-edge-swap proposals in place; returns accepted count.

    Edges are integer pairs with u < v; `present` is a flat n*n boolean
    adjacency table indexed by u * n + v. The lattice rule rejects swaps
    that increase the total rank-index span.
    """
    n = rank.shape[0]
    for t in range(edge_u.shape[0]):
        present[edge_u[t] * n + edge_v[t]] = True
    accepted = 0
    for t in range(pick_a.shape[0]):
        i = pick_a[t]
        j = pick_b[t]
        if i == j:
            continue
        a = edge_u[i]
        b = edge_v[i]
        c = edge_u[j]
        d = edge_v[j]
        if orientation[t] == 1:
            c, d = d, c
        if a == d or c == b:
            continue
        u1, v1 = (a, d) if a < d else (d, a)
        u2, v2 = (c, b) if c < b else (b, c)
        key1 = u1 * n + v1
        key2 = u2 * n + v2
        if key1 == key2 or present[key1] or present[key2]:
            continue
        if lattice_rule:
            old_span = abs(rank[a] - rank[b]) + abs(rank[edge_u[j]] - rank[edge_v[j]])
            new_span = abs(rank[u1] - rank[v1]) + abs(rank[u2] - rank[v2])
            if new_span > old_span:
                continue
        present[edge_u[i] * n + edge_v[i]] = False
        present[edge_u[j] * n + edge_v[j]] = False
        present[key1] = True
        present[key2] = True
        edge_u[i] = u1
        edge_v[i] = v1
        edge_u[j] = u2
        edge_v[j] = v2
        accepted += 1
    return accepted


if njit is not None:
    _swap_kernel = njit(cache=True)(_swap_kernel)


def _swap_edges(net: TransferNetwork, n_swaps: int, rng: np.random.Generator,
                lattice_rank: np.ndarray | None) -> tuple[TransferNetwork, int, int]:
    ordered = sorted(net.edges)
    if len(ordered) < 2 or n_swaps < 1:
        return net, max(n_swaps, 0), 0
    labels = net.sorted_nodes()
    index = {label: i for i, label in enumerate(labels)}
    # integer order follows label order, so u < v matches canonical edges
    edge_u = np.array([index[u] for u, _ in ordered], dtype=np.int64)
    edge_v = np.array([index[v] for _, v in ordered], dtype=np.int64)
    weights = [net.edges[edge] for edge in ordered]
    rank = lattice_rank if lattice_rank is not None else np.zeros(len(labels), dtype=np.int64)
    present = np.zeros(len(labels) * len(labels), dtype=np.bool_)

    accepted = 0
    remaining = n_swaps
    while remaining > 0:
        take = min(_RNG_BLOCK, remaining)
        remaining -= take
        pick_a = rng.integers(0, len(ordered), size=take)
        pick_b = rng.integers(0, len(ordered), size=take)
        orientation = rng.integers(0, 2, size=take)
        accepted += int(_swap_kernel(edge_u, edge_v, pick_a, pick_b, orientation,
                                     rank, lattice_rank is not None, present))

    edges = {
        (labels[int(u)], labels[int(v)]): weight
        for u, v, weight in zip(edge_u, edge_v, weights)
    }
    rewired = TransferNetwork(net.nodes, edges, directed=False, categories=net.categories)
    return rewired, n_swaps, accepted


def _require_undirected(net: TransferNetwork, op: str) -> None:
    if net.directed:
        raise ValueError(f"{op} expects the undirected projection")


def rewire_random(net: TransferNetwork, n_swaps: int | None = None, seed: int = 0) -> RewireResult:
    """Degree-preserving randomization by repeated double-edge swaps.

    Each of n_swaps attempts picks two edges uniformly and exchanges their
    endpoints unless that would create a self-loop or a parallel edge.
    Defaults to 10 swap attempts per edge. Networks admitting no legal swap
    (a star, for instance) come back unchanged with the warning flag set.
    """
    _require_undirected(net, "rewire_random")
    if n_swaps is None:
        n_swaps = _DEFAULT_SWAP_FACTOR * net.edge_count
    rng = np.random.default_rng(seed)
    rewired, attempted, accepted = _swap_edges(net, n_swaps, rng, lattice_rank=None)
    return RewireResult(rewired, attempted, accepted)


def latticize(net: TransferNetwork, seed: int = 0, n_swaps: int | None = None) -> RewireResult:
    """Degree-preserving swaps accepted only when bandedness does not drop.

    Nodes are ranked by (degree, label); an edge scores the negative index
    distance of its endpoints, and a swap must not decrease the total score.
    """
    _require_undirected(net, "latticize")
    if n_swaps is None:
        n_swaps = _DEFAULT_LATTICE_FACTOR * net.edge_count
    degree_of: dict[str, int] = {node: 0 for node in net.nodes}
    for u, v in net.edges:
        degree_of[u] += 1
        degree_of[v] += 1
    labels = net.sorted_nodes()
    rank = np.zeros(len(labels), dtype=np.int64)
    by_degree = sorted(labels, key=lambda x: (degree_of[x], x))
    position = {label: i for i, label in enumerate(labels)}
    for order_index, node in enumerate(by_degree):
        rank[position[node]] = order_index

    rng = np.random.default_rng(seed)
    rewired, attempted, accepted = _swap_edges(net, n_swaps, rng, lattice_rank=rank)
    return RewireResult(rewired, attempted, accepted)


def _member_seed(seed: int, tag: int, index: int) -> int:
    return int(np.random.SeedSequence((seed, tag, index)).generate_state(1)[0])


def small_world_report(net: TransferNetwork, n_samples: int = 20, seed: int = 0,
                       n_swaps: int | None = None, lattice_swaps: int | None = None) -> SmallWorldReport:
    """sigma and omega against degree-matched random and lattice ensembles.

    sigma = (C/C_rand) / (L/L_rand); omega = L_rand/L - C/C_lat. All
    clustering and path values are unweighted; path lengths are giant
    component means. Raw values are reported without clamping, and the
    ensemble components are kept so either coefficient can be recomputed.
    """
    _require_undirected(net, "small_world_report")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if n_swaps is None:
        n_swaps = _DEFAULT_SWAP_FACTOR * net.edge_count
    if lattice_swaps is None:
        lattice_swaps = _DEFAULT_LATTICE_FACTOR * net.edge_count

    _, c_av, _ = metrics_mod.clustering(net)
    l_av, coverage = metrics_mod.avg_shortest_path(net, metrics_mod.PROJECTION_SCOPE)

    random_c: list[float] = []
    random_l: list[float] = []
    random_accepted: list[int] = []
    lattice_c: list[float] = []
    lattice_accepted: list[int] = []
    for i in range(n_samples):
        randomized = rewire_random(net, n_swaps, seed=_member_seed(seed, 1, i))
        random_accepted.append(randomized.accepted)
        _, member_c, _ = metrics_mod.clustering(randomized.network)
        member_l, _ = metrics_mod.avg_shortest_path(randomized.network, metrics_mod.PROJECTION_SCOPE)
        if member_c is not None:
            random_c.append(member_c)
        if member_l is not None:
            random_l.append(member_l)

        lattice = latticize(net, seed=_member_seed(seed, 2, i), n_swaps=lattice_swaps)
        lattice_accepted.append(lattice.accepted)
        _, member_c, _ = metrics_mod.clustering(lattice.network)
        if member_c is not None:
            lattice_c.append(member_c)

    c_rand = sum(random_c) / len(random_c) if random_c else None
    l_rand = sum(random_l) / len(random_l) if random_l else None
    c_lat = sum(lattice_c) / len(lattice_c) if lattice_c else None

    reasons: dict[str, str] = {}
    sigma = None
    if None in (c_av, l_av, c_rand, l_rand) or c_rand == 0 or l_rand == 0:
        reasons["sigma"] = "needs C, L, and nonzero random-ensemble means"
    else:
        sigma = (c_av / c_rand) / (l_av / l_rand)
    omega = None
    if None in (c_av, l_av, l_rand, c_lat) or c_lat == 0:
        reasons["omega"] = "needs C, L, L_rand, and nonzero lattice clustering"
    else:
        omega = l_rand / l_av - c_av / c_lat

    return SmallWorldReport(
        clustering=c_av,
        path_length=l_av,
        path_coverage=coverage,
        clustering_random=c_rand,
        path_length_random=l_rand,
        clustering_lattice=c_lat,
        sigma=sigma,
        omega=omega,
        n_samples=n_samples,
        seed=seed,
        n_swaps_random=n_swaps,
        n_swaps_lattice=lattice_swaps,
        accepted_swaps_random=tuple(random_accepted),
        accepted_swaps_lattice=tuple(lattice_accepted),
        reasons=reasons,
    )
