from datetime import datetime, timedelta

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wardflow.eventlog import AdmissionJourney
from wardflow.network import (
    TransferNetwork,
    as_symmetric_directed,
    build_network,
    export_network,
    import_network,
    undirected_projection,
)

T0 = datetime(2016, 3, 1)


def journey(admission_id, *stops):
    times = tuple(T0 + timedelta(minutes=10 * i) for i in range(len(stops)))
    return AdmissionJourney(admission_id, stops, times)


def net_of(edges, directed=True, extra_nodes=(), categories=None):
    nodes = {u for u, _ in edges} | {v for _, v in edges} | set(extra_nodes)
    return TransferNetwork(frozenset(nodes), dict(edges), directed=directed, categories=categories)


def test_build_round_trip_journey():
    net = build_network([journey("a1", "A", "B", "A")])
    assert net.edges == {("A", "B"): 1, ("B", "A"): 1}
    assert net.directed


def test_build_empty():
    net = build_network([])
    assert net.node_count == 0 and net.edge_count == 0


def test_build_hand_counted_weights():
    net = build_network([
        journey("a1", "A", "B", "C"),
        journey("a2", "A", "B"),
        journey("a3", "B", "C"),
    ])
    assert net.edges == {("A", "B"): 2, ("B", "C"): 2}


def test_build_keeps_single_stop_journeys_as_isolated_nodes():
    net = build_network([journey("a1", "A", "B"), journey("a2", "Z")])
    assert "Z" in net.nodes
    assert net.edges == {("A", "B"): 1}


def test_build_total_weight_matches_transfer_count():
    journeys = [journey("a1", "A", "B", "C", "A"), journey("a2", "B", "C"), journey("a3", "C")]
    net = build_network(journeys)
    assert net.total_weight == sum(len(j.stops) - 1 for j in journeys)


def test_build_invariant_to_journey_order():
    journeys = [journey("a1", "A", "B", "C"), journey("a2", "C", "A"), journey("a3", "B", "A")]
    assert build_network(journeys) == build_network(list(reversed(journeys)))


def test_projection_sums_antiparallel_weights():
    net = net_of({("A", "B"): 3, ("B", "A"): 2})
    projected = undirected_projection(net)
    assert projected.edges == {("A", "B"): 5}
    assert not projected.directed


def test_projection_of_edgeless_network():
    net = TransferNetwork(frozenset({"A", "B"}), {}, directed=True)
    assert undirected_projection(net).edge_count == 0


def test_projection_triangle():
    net = net_of({("A", "B"): 1, ("B", "C"): 1, ("C", "A"): 1})
    projected = undirected_projection(net)
    assert projected.edges == {("A", "B"): 1, ("B", "C"): 1, ("A", "C"): 1}


def test_projection_preserves_total_weight():
    net = net_of({("A", "B"): 3, ("B", "A"): 2, ("B", "C"): 4})
    assert undirected_projection(net).total_weight == net.total_weight


def test_symmetric_directed_expansion():
    projected = net_of({("A", "B"): 5}, directed=False)
    expanded = as_symmetric_directed(projected)
    assert expanded.edges == {("A", "B"): 5, ("B", "A"): 5}


def test_validation_rejects_bad_networks():
    with pytest.raises(ValueError):
        net_of({("A", "A"): 1})
    with pytest.raises(ValueError):
        TransferNetwork(frozenset({"A"}), {("A", "B"): 1})
    with pytest.raises(ValueError):
        net_of({("A", "B"): 0})
    with pytest.raises(ValueError):
        net_of({("B", "A"): 1}, directed=False)


def test_edgelist_export_shape():
    net = net_of({("A", "B"): 1})
    assert export_network(net, "edgelist").decode() == "from,to,weight\nA,B,1\n"


def test_edgelist_export_empty_network_is_header_only():
    net = TransferNetwork(frozenset(), {})
    assert export_network(net, "edgelist").decode() == "from,to,weight\n"


def test_unsupported_format_errors():
    net = net_of({("A", "B"): 1})
    with pytest.raises(ValueError):
        export_network(net, "gexf")
    with pytest.raises(ValueError):
        import_network(b"", "dot")


def test_dot_export_contains_nodes_edges_and_categories():
    net = net_of({("A", "B"): 2}, categories={"A": "medical"})
    text = export_network(net, "dot").decode()
    assert "digraph" in text
    assert '"A" [category="medical"];' in text
    assert '"A" -> "B" [weight=2];' in text


def test_graphml_round_trip_keeps_categories_and_isolated_nodes():
    net = net_of({("A", "B"): 3}, extra_nodes=("Z",), categories={"A": "medical", "Z": "imaging"})
    back = import_network(export_network(net, "graphml"), "graphml")
    assert back == net
    assert back.categories == {"A": "medical", "Z": "imaging"}


networks = st.builds(
    lambda pairs, extra: net_of(
        {(f"n{a}", f"n{b}"): w for (a, b), w in pairs.items() if a != b},
        extra_nodes=[f"n{i}" for i in extra],
    ),
    st.dictionaries(
        st.tuples(st.integers(0, 5), st.integers(0, 5)),
        st.integers(min_value=1, max_value=9),
        max_size=14,
    ),
    st.lists(st.integers(6, 8), max_size=2),
)


@given(networks)
@settings(max_examples=80, deadline=None)
def test_round_trip_property(net):
    assert import_network(export_network(net, "graphml"), "graphml") == net
    assert import_network(export_network(net, "edgelist"), "edgelist", directed=True) == net


@given(networks)
@settings(max_examples=80, deadline=None)
def test_projection_weight_preservation_property(net):
    assert undirected_projection(net).total_weight == net.total_weight
