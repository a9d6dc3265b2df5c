import numpy as np
import pytest

from wardflow.metrics import clustering
from wardflow.network import TransferNetwork, undirected_projection
from wardflow.smallworld import latticize, rewire_random, small_world_report
from wardflow.synth import ModelSpec, generate_network


def net_of(edges, extra_nodes=()):
    canonical = {}
    for (u, v), w in edges.items():
        canonical[(u, v) if u <= v else (v, u)] = w
    nodes = {u for u, _ in canonical} | {v for _, v in canonical} | set(extra_nodes)
    return TransferNetwork(frozenset(nodes), canonical, directed=False)


def degree_sequence(net):
    degree = {node: 0 for node in net.nodes}
    for u, v in net.edges:
        degree[u] += 1
        degree[v] += 1
    return sorted(degree.values())


def test_rewire_preserves_degree_sequence():
    net = generate_network(ModelSpec("uniform-random", n=30, seed=4, p=0.15))
    result = rewire_random(net, seed=11)
    assert degree_sequence(result.network) == degree_sequence(net)
    assert result.network.nodes == net.nodes


def test_rewire_star_returns_unchanged_with_warning():
    star = net_of({("H", f"L{i}"): 1 for i in range(6)})
    result = rewire_random(star, n_swaps=500, seed=3)
    assert result.network == star
    assert result.no_swap_possible


def test_rewire_actually_changes_cycle_with_chord():
    # a 4-cycle plus chord is degree-rigid (the two degree-3 nodes must link
    # to every other node), so a 6-cycle plus chord is the smallest honest fixture
    ring = {(f"n{i}", f"n{(i + 1) % 6}"): 1 for i in range(6)}
    ring[("n0", "n3")] = 1
    base = net_of(ring)
    changed = 0
    for seed in range(100):
        result = rewire_random(base, n_swaps=10_000, seed=seed)
        if result.network.edges != base.edges:
            changed += 1
    assert changed >= 90


def test_rewire_is_deterministic():
    net = generate_network(ModelSpec("uniform-random", n=25, seed=8, p=0.2))
    a = rewire_random(net, seed=21)
    b = rewire_random(net, seed=21)
    assert a.network == b.network
    assert a.accepted == b.accepted


def test_rewire_requires_undirected():
    directed = TransferNetwork(frozenset({"A", "B"}), {("A", "B"): 1}, directed=True)
    with pytest.raises(ValueError):
        rewire_random(directed)


def test_latticize_preserves_degree_sequence():
    net = generate_network(ModelSpec("uniform-random", n=30, seed=5, p=0.15))
    result = latticize(net, seed=9)
    assert degree_sequence(result.network) == degree_sequence(net)


def test_latticize_two_node_network_unchanged():
    net = net_of({("A", "B"): 1})
    result = latticize(net, seed=1)
    assert result.network == net
    assert result.no_swap_possible


def test_latticize_keeps_ring_clustering_above_random():
    ring = generate_network(ModelSpec("ring-rewire", n=60, k=6, p=0.0, seed=2))
    lattice = latticize(ring, seed=13)
    random = rewire_random(ring, seed=13)
    _, c_lat, _ = clustering(lattice.network)
    _, c_rand, _ = clustering(random.network)
    assert c_lat >= c_rand


def test_small_world_report_components_and_identities():
    net = generate_network(ModelSpec("ring-rewire", n=60, k=6, p=0.05, seed=7))
    report = small_world_report(net, n_samples=5, seed=42)
    assert report.n_samples == 5
    assert report.seed == 42
    assert len(report.accepted_swaps_random) == 5
    assert len(report.accepted_swaps_lattice) == 5
    # stored coefficients must be pure arithmetic of the stored components
    sigma = (report.clustering / report.clustering_random) / (report.path_length / report.path_length_random)
    omega = report.path_length_random / report.path_length - report.clustering / report.clustering_lattice
    assert abs(report.sigma - sigma) < 1e-12
    assert abs(report.omega - omega) < 1e-12


def test_small_world_report_deterministic():
    net = generate_network(ModelSpec("ring-rewire", n=40, k=4, p=0.1, seed=3))
    a = small_world_report(net, n_samples=4, seed=5)
    b = small_world_report(net, n_samples=4, seed=5)
    assert a == b


def test_small_world_report_rejects_directed_input():
    directed = TransferNetwork(frozenset({"A", "B"}), {("A", "B"): 1}, directed=True)
    with pytest.raises(ValueError):
        small_world_report(directed)
    small_world_report(undirected_projection(directed), n_samples=1, seed=0)


def test_small_world_report_absent_reasons_for_degenerate_input():
    # two disconnected dyads: every reference is identical, C values are 0
    net = net_of({("A", "B"): 1, ("C", "D"): 1})
    report = small_world_report(net, n_samples=2, seed=0)
    assert report.sigma is None
    assert "sigma" in report.reasons
    assert report.omega is None


def test_ensemble_growth_is_stable():
    net = generate_network(ModelSpec("ring-rewire", n=60, k=6, p=0.1, seed=19))
    small = small_world_report(net, n_samples=10, seed=3)
    large = small_world_report(net, n_samples=50, seed=3)
    assert abs(small.sigma - large.sigma) < 0.5
    assert abs(small.omega - large.omega) < 0.15
