from itertools import combinations

import pytest

from advnet.bounds import TwoLevelProfile
from advnet.catalog import build_network
from advnet.channel import is_unambiguous
from advnet.netcore import BudgetExceeded, Scenario
from advnet.search import (
    BadParameter,
    CodeSpace,
    SearchBudget,
    coincidence_argument_check,
    count_restricted_growth,
    general_2level_lower_bound,
    hamming_max_code,
    max_code_for_fixed_F,
    max_over_network_codes,
    restricted_growth,
)
from advnet.transfer import NetworkCode, forward, network_channels


@pytest.mark.parametrize("length,q", [(0, 2), (3, 2), (4, 3), (5, 2), (4, 4)])
def test_restricted_growth(length, q):
    seqs = list(restricted_growth(length, q))
    assert len(seqs) == len(set(seqs)) == count_restricted_growth(length, q)
    for s in seqs:
        seen = -1
        for x in s:
            assert x <= seen + 1
            seen = max(seen, x)


def test_code_space_size_matches_iteration():
    inst = build_network("diamond", q=2, rounds=2)
    for mode in ("same", "per_round", "block"):
        for relabel in (True, False):
            space = CodeSpace(inst.net, 2, 2, mode, up_to_relabelling=relabel)
            if space.size() <= 5000:
                assert sum(1 for _ in space) == space.size()


@pytest.mark.parametrize("kind,q", [("diamond", 2), ("diamond", 3), ("mirrored", 2)])
def test_methods_agree(kind, q):
    inst = build_network(kind, q=q)
    sizes = {m: max_over_network_codes(inst.net, inst.adv, q, method=m).size for m in ("enumerate", "branch", "codes")}
    assert len(set(sizes.values())) == 1, sizes


def test_relabelling_symmetry_does_not_change_the_maximum():
    inst = build_network("diamond", q=2, rounds=2)
    a = max_over_network_codes(inst.net, inst.adv, 2, up_to_relabelling=True)
    b = max_over_network_codes(inst.net, inst.adv, 2, up_to_relabelling=False)
    assert a.size == b.size


def test_fixed_code_below_search_and_fixed_above_free():
    inst = build_network("diamond", q=3)
    code = NetworkCode.uniform(3, {"V1": forward(), "V2": lambda ins: (ins[0],)})
    best = max_over_network_codes(inst.net, inst.adv, 3)
    assert max_code_for_fixed_F(inst.net, code, inst.adv).size <= best.size
    two = build_network("diamond", q=2, rounds=2)
    fixed = max_over_network_codes(two.net, two.adv, 2, mode="per_round")
    free = max_over_network_codes(two.net, two.adv.with_(scenario=Scenario.FREE), 2, mode="per_round")
    assert fixed.size >= free.size


def test_product_property_for_repeated_code():
    one = build_network("diamond", q=3)
    two = build_network("diamond", q=3, rounds=2, scenario="free")
    tables = {"V1": forward(), "V2": lambda ins: (ins[0] if ins[0] == ins[1] else 2,)}
    a = max_code_for_fixed_F(one.net, NetworkCode.uniform(3, tables), one.adv).size
    b = max_code_for_fixed_F(two.net, NetworkCode.uniform(3, tables, 2), two.adv).size
    assert b >= a * a


def test_witness_reverifies():
    inst = build_network("diamond", q=2, rounds=2)
    for mode, method in (("same", "enumerate"), ("block", "codes")):
        res = max_over_network_codes(inst.net, inst.adv, 2, mode=mode, method=method)
        assert len(res.witness) == res.size
        assert is_unambiguous(res.witness, network_channels(inst.net, res.code, inst.adv))


def test_budgets_and_parameters():
    inst = build_network("butterfly", q=3, rounds=2)
    with pytest.raises(BudgetExceeded):
        max_over_network_codes(inst.net, inst.adv, 3, budget=SearchBudget(max_domain=100))
    d = build_network("diamond", q=3)
    with pytest.raises(BudgetExceeded):
        max_over_network_codes(d.net, d.adv, 3, budget=SearchBudget(max_network_codes=10))
    with pytest.raises(BadParameter):
        max_over_network_codes(d.net, d.adv, 3, method="guess")
    with pytest.raises(BadParameter):
        CodeSpace(d.net, 3, mode="sometimes")


def min_distance_oracle(n, threshold, q):
    from itertools import product
    words = list(product(range(q), repeat=n))
    best = 1
    for k in range(2, len(words) + 1):
        if not any(all(sum(a != b for a, b in zip(x, y)) >= threshold for x, y in combinations(c, 2))
                   for c in combinations(words, k)):
            return best
        best = k
    return best


@pytest.mark.parametrize("n,t,q,threshold", [(3, 1, 2, 3), (4, 1, 2, 3), (5, 2, 2, 5), (3, 1, 3, 3), (5, 1, 2, 3)])
def test_hamming_max_code_matches_oracle(n, t, q, threshold):
    assert hamming_max_code(n, t, q, 1, threshold).size == min_distance_oracle(n, threshold, q)


def test_coincidence_examples():
    c = coincidence_argument_check(5, 2, 2, 1, threshold=5)
    assert c.confirmed and c.one_shot_max == 2
    d = coincidence_argument_check(4, 1, 2, 1, threshold=3)
    assert d.confirmed and d.max_size == 2


def test_family_D_power_channel_exceeds_q_to_the_i():
    """Round-wise distance 3 on 4 positions, two rounds: 5 words exist."""
    rep = hamming_max_code(4, 1, 2, 2, threshold=3)
    assert rep.size == 5
    blocks = [(w[:4], w[4:]) for w in rep.witness]
    for a, b in combinations(blocks, 2):
        assert any(sum(x != y for x, y in zip(a[r], b[r])) >= 3 for r in range(2))
    chk = coincidence_argument_check(4, 1, 2, 2, threshold=3)
    assert chk.confirmed and not chk.unrestricted_within_target


def test_general_lower_bound():
    lb = general_2level_lower_bound(TwoLevelProfile((1, 2), (1, 1)), 3, 2, a=1, b=1)
    assert lb.size == 8 and lb.conditional
    assert lb.symbolic == ">= log_3(3^2-1)/2"
    assert general_2level_lower_bound(None, 2, 1, a=2, b=1).size == 3
    with pytest.raises(BadParameter):
        general_2level_lower_bound(None, 2, 1, a=1, b=2)
    with pytest.raises(BadParameter):
        general_2level_lower_bound(None, 2, 1, a=0, b=1)
