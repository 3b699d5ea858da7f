import json
import random
from itertools import combinations

import networkx as nx
import pytest

from advnet.bounds import singleton_cut_set_bound
from advnet.catalog import build_network as catalog_network
from advnet.netcore import (
    AdversaryModel,
    BadAdversary,
    CyclicGraph,
    DanglingIntermediate,
    EdgeCut,
    NetworkError,
    NotATerminal,
    OrderNotLinearExtension,
    ParseError,
    Scenario,
    SourceHasInEdges,
    TerminalHasOutEdges,
    UnreachableTerminal,
    build_network,
    describe,
    enumerate_edge_cuts,
    immediate_predecessors,
    load_description,
    parse_description,
    precedes,
    separates,
    serialize,
)


def diamond():
    return catalog_network("diamond").net


def raw(edges, nodes=None, terminals=("T",)):
    if nodes is None:
        nodes = sorted({v for _, a, b in edges for v in (a, b)})
    return {"nodes": nodes, "edges": [{"id": i, "from": a, "to": b} for i, a, b in edges],
            "source": "S", "terminals": list(terminals)}


@pytest.mark.parametrize("edges,terminals,err", [
    ([("e1", "S", "A"), ("e2", "A", "B"), ("e3", "B", "A"), ("e4", "B", "T")], ("T",), CyclicGraph),
    ([("e1", "S", "T"), ("e2", "A", "S")], ("T",), SourceHasInEdges),
    ([("e1", "S", "T"), ("e2", "T", "U"), ("e3", "S", "U")], ("T", "U"), TerminalHasOutEdges),
    ([("e1", "S", "A"), ("e2", "A", "T"), ("e3", "B", "U")], ("T", "U"), UnreachableTerminal),
    ([("e1", "S", "A"), ("e2", "A", "T"), ("e3", "S", "B")], ("T",), DanglingIntermediate),
    ([("e2", "A", "T"), ("e1", "S", "A")], ("T",), OrderNotLinearExtension),
    ([("e1", "S", "S")], ("T",), CyclicGraph),
])
def test_validation_errors(edges, terminals, err):
    nodes = sorted({v for _, a, b in edges for v in (a, b)} | set(terminals) | {"S"})
    with pytest.raises(err):
        parse_description(raw(edges, nodes, terminals))


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_description({"nodes": ["S", "T"], "edges": [{"id": "e1", "from": "S", "to": "X"}],
                           "source": "S", "terminals": ["T"]})
    with pytest.raises(ParseError):
        parse_description({"nodes": ["S"]})
    with pytest.raises(ParseError):
        parse_description(raw([("e1", "S", "T"), ("e1", "S", "T")]))
    with pytest.raises(ParseError):
        parse_description({**raw([("e1", "S", "T")]), "scenario": "sometimes"})


def test_adversary_checks():
    with pytest.raises(BadAdversary):
        AdversaryModel(frozenset({"e1"}), 2)
    with pytest.raises(BadAdversary):
        AdversaryModel(frozenset({"e1"}), -1)
    with pytest.raises(BadAdversary):
        AdversaryModel(frozenset({"zz"}), 1).check_against(diamond())
    assert AdversaryModel(frozenset(), 0, scenario="free").scenario is Scenario.FREE


def test_description_round_trip(tmp_path):
    inst = catalog_network("butterfly", q=3, rounds=2, scenario="free")
    text = serialize(inst.net, inst.adv, 3)
    net, adv, alphabet = parse_description(json.loads(text))
    assert net == inst.net and adv == inst.adv and alphabet.size == 3
    path = tmp_path / "b.json"
    path.write_text(text)
    assert load_description(path)[0] == inst.net
    (tmp_path / "bad.json").write_text("{nope")
    with pytest.raises(ParseError):
        load_description(tmp_path / "bad.json")
    assert describe(net)["source"] == "S"


def test_intermediates_follow_edge_order():
    net = catalog_network("butterfly").net
    order = net.intermediates
    assert order.index("V3") > order.index("V1") and order.index("V4") > order.index("V3")


def brute_force_cuts(net, terminal):
    """Minimal separating edge subsets, by enumerating every subset."""
    ids = net.edge_ids
    seps = [frozenset(c) for r in range(len(ids) + 1) for c in combinations(ids, r) if separates(net, c, terminal)]
    return {c for c in seps if not any(d < c for d in seps)}


def random_network(rng, n_inner):
    inner = [f"V{k}" for k in range(1, n_inner + 1)]
    order = ["S", *inner, "T"]
    edges = []
    for a_pos, a in enumerate(order[:-1]):
        for b in order[a_pos + 1:]:
            for _ in range(rng.choice((0, 0, 1, 1, 2))):
                edges.append((f"e{len(edges) + 1}", a, b))
    return build_network(edges, nodes=order)


def networks_for_cut_tests():
    rng = random.Random(7)
    nets = [diamond(), catalog_network("mirrored").net, catalog_network("butterfly").net,
            catalog_network("C", 2).net]
    while len(nets) < 14:
        try:
            net = random_network(rng, rng.randint(1, 3))
        except NetworkError:
            continue
        if len(net.edges) <= 10:
            nets.append(net)
    return nets


@pytest.mark.parametrize("net", networks_for_cut_tests())
def test_cut_enumeration_matches_subset_oracle(net):
    for T in net.terminals:
        got = {c.edges for c in enumerate_edge_cuts(net, T)}
        assert got == brute_force_cuts(net, T)


def test_cut_enumeration_errors():
    with pytest.raises(NotATerminal):
        enumerate_edge_cuts(diamond(), "V1")


def test_diamond_cuts():
    cuts = {c.edges for c in enumerate_edge_cuts(diamond(), "T")}
    assert frozenset({"e1", "e2", "e3"}) in cuts
    assert frozenset({"e4", "e5"}) in cuts
    assert frozenset({"e1", "e5"}) in cuts
    assert len(cuts) == 4


def test_precedence():
    net = diamond()
    first = EdgeCut(frozenset({"e1", "e2", "e3"}), "T")
    last = EdgeCut(frozenset({"e4", "e5"}), "T")
    assert precedes(net, first, last)
    assert not precedes(net, last, first)
    assert precedes(net, first, first)


def test_immediate_predecessors():
    net = diamond()
    assert immediate_predecessors(net, "e4", {"e1", "e2", "e3"}) == {"e1"}
    assert immediate_predecessors(net, "e5", {"e1", "e2", "e3"}) == {"e2", "e3"}
    b = catalog_network("butterfly").net
    assert immediate_predecessors(b, "e10", {"e1", "e2", "e3", "e4"}) == {"e1", "e2", "e3", "e4"}
    # an intervening cut edge hides the ones behind it
    assert immediate_predecessors(b, "e10", {"e1", "e6", "e9"}) == {"e9"}


def max_flow(net, terminal):
    g = nx.DiGraph()
    for e in net.edges:
        cap = g.edges[e.tail, e.head]["capacity"] + 1 if g.has_edge(e.tail, e.head) else 1
        g.add_edge(e.tail, e.head, capacity=cap)
    return nx.maximum_flow_value(g, net.source, terminal)


@pytest.mark.parametrize("net", networks_for_cut_tests())
def test_singleton_bound_without_adversary_is_min_cut(net):
    rep = singleton_cut_set_bound(net, AdversaryModel(frozenset(), 0))
    assert rep.value == min(max_flow(net, T) for T in net.terminals)
