import random
from itertools import combinations, product

import networkx as nx
import pytest

from advnet.channel import (
    DomainMismatch,
    EmptyDomain,
    _CliqueSearch,
    compatibility_graph,
    concatenate,
    deterministic_channel,
    find_collision,
    identity_channel,
    is_clique,
    is_finer,
    is_unambiguous,
    max_clique,
    one_shot_capacity,
    power,
    symbolic_rate,
    table_channel,
)
from advnet.transfer import hamming_channel


def random_graph(rng, n, p):
    adj = [0] * n
    for a, b in combinations(range(n), 2):
        if rng.random() < p:
            adj[a] |= 1 << b
            adj[b] |= 1 << a
    return adj


def least_max_clique(adj):
    """Smallest-lexicographic maximum clique by plain enumeration."""
    n = len(adj)
    for k in range(n, 0, -1):
        for c in combinations(range(n), k):
            if is_clique(adj, c):
                return list(c)
    return []


@pytest.mark.parametrize("seed", range(25))
def test_max_clique_against_oracles(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 14)
    adj = random_graph(rng, n, rng.choice((0.3, 0.5, 0.8)))
    got = max_clique(adj)
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from((a, b) for a in range(n) for b in range(a + 1, n) if adj[a] >> b & 1)
    assert len(got) == max(len(c) for c in nx.find_cliques(g))
    assert got == least_max_clique(adj)
    # a proven upper bound only shortens the search
    assert max_clique(adj, upper_bound=len(got)) == got
    assert _CliqueSearch(adj).colour_bound((1 << n) - 1) >= len(got)


def test_empty_graph():
    assert max_clique([]) == []


def distance_oracle(n, t, q):
    """Largest code with minimum distance 2t+1, by brute force over subsets."""
    words = list(product(range(q), repeat=n))
    best = 1
    for k in range(2, len(words) + 1):
        ok = any(all(sum(a != b for a, b in zip(x, y)) >= 2 * t + 1 for x, y in combinations(c, 2))
                 for c in combinations(words, k))
        if not ok:
            break
        best = k
    return best


@pytest.mark.parametrize("n,t,q", [(3, 1, 2), (4, 1, 2), (2, 1, 3), (3, 1, 3), (5, 1, 2)])
def test_hamming_capacity_matches_distance_oracle(n, t, q):
    assert one_shot_capacity(hamming_channel(n, t, q)).size == distance_oracle(n, t, q)


def test_capacity_examples():
    res = one_shot_capacity(hamming_channel(3, 1, 2))
    assert res.size == 2 and res.witness == ((0, 0, 0), (1, 1, 1))
    assert res.symbolic == "log_2(2)" and res.exact
    assert one_shot_capacity(identity_channel(2, 3)).size == 9
    restricted = one_shot_capacity(hamming_channel(3, 1, 2), domain=[(0, 0, 0), (0, 0, 1)])
    assert restricted.size == 1 and restricted.restricted


def test_collisions():
    ch = hamming_channel(3, 1, 2)
    hit = find_collision([(0, 0, 0), (0, 1, 1)], ch)
    assert hit is not None
    w1, w2, _, y = hit
    assert y in ch(w1) and y in ch(w2)
    assert is_unambiguous([(0, 0, 0), (1, 1, 1)], ch)
    assert not is_unambiguous([(0, 0, 0), (0, 1, 1)], [ch, identity_channel(3, 2)])


def test_errors():
    with pytest.raises(EmptyDomain):
        one_shot_capacity(hamming_channel(2, 1, 2), domain=[])
    with pytest.raises(DomainMismatch):
        one_shot_capacity([hamming_channel(2, 1, 2), hamming_channel(3, 1, 2)])
    with pytest.raises(DomainMismatch):
        concatenate(hamming_channel(2, 1, 2), hamming_channel(3, 1, 2))
    with pytest.raises(DomainMismatch):
        is_finer(hamming_channel(2, 1, 2), hamming_channel(2, 1, 3))
    with pytest.raises(ValueError):
        power(identity_channel(2, 2), 0)


def test_power_and_concatenation_by_hand():
    ch = table_channel({(0,): [(0,)], (1,): [(0,), (1,)], (2,): [(2,)]}, 3)
    assert one_shot_capacity(ch).size == 2
    assert power(ch, 2)((1, 2)) == {(0, 2), (1, 2)}
    assert one_shot_capacity(power(ch, 2)).size == 4
    flip = deterministic_channel(lambda x: ((x[0] + 1) % 3,), 1, 3)
    both = concatenate(ch, flip)
    assert both((1,)) == {(1,), (2,)}
    assert one_shot_capacity(both).size == 2


def test_compatibility_graph_matches_definition():
    ch = hamming_channel(3, 1, 2)
    words = list(product(range(2), repeat=3))
    adj = compatibility_graph(words, [ch])
    for a, b in combinations(range(len(words)), 2):
        assert bool(adj[a] >> b & 1) == ch(words[a]).isdisjoint(ch(words[b]))


def test_symbolic_rate():
    assert symbolic_rate(8, 3, 2) == "log_3(8)/2"
    assert symbolic_rate(2, 3) == "log_3(2)"
