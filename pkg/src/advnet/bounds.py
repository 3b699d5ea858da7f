"""Cut-set upper bounds and network reductions.

Integer-valued bounds (Singleton, generalized Singleton) are in symbols per
round.  Multishot bounds keep the exact i-round code-size bound and report
``log_q(size) / i`` next to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Any, Iterable, Sequence

import networkx as nx

from .channel import _CliqueSearch, compatibility_graph, one_shot_capacity, symbolic_rate
from .netcore import (
    AdversaryModel,
    AdvnetError,
    BudgetExceeded,
    CutsNotOrdered,
    EdgeCut,
    Network,
    Scenario,
    cut_value_edges,
    enumerate_edge_cuts,
    immediate_predecessors,
    precedes,
)
from .netcore import build_network as _from_triples
from .search import BadParameter, CodeSpace, SearchBudget
from .transfer import Evaluator, FanOutChannel, Word, channel_between_cuts


class NotThreeLevel(AdvnetError, ValueError):
    pass


class NotTwoLevel(AdvnetError, ValueError):
    pass


MODES = ("exact", "exhaustive", "catalog", "analytic")


@dataclass(frozen=True)
class TwoLevelProfile:
    a: tuple[int, ...]
    b: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(self.a))
        object.__setattr__(self, "b", tuple(self.b))
        if not self.a or len(self.a) != len(self.b):
            raise BadParameter("profile needs matching, nonempty degree lists")
        if min(self.a) < 1 or min(self.b) < 1:
            raise BadParameter("all degrees must be >= 1")

    @property
    def j(self) -> int:
        return len(self.a)

    @classmethod
    def of(cls, net: Network) -> "TwoLevelProfile":
        """Profile of a simple 2-level network, intermediates in network order."""
        if len(net.terminals) != 1:
            raise NotTwoLevel("simple 2-level networks have one terminal")
        T = net.terminals[0]
        a, b = [], []
        for v in net.intermediates:
            ins = [net.edges[k].tail for k in net.in_edges(v)]
            outs = [net.edges[k].head for k in net.out_edges(v)]
            if set(ins) != {net.source} or set(outs) != {T}:
                raise NotTwoLevel(f"{v} is not between source and terminal")
            a.append(len(ins))
            b.append(len(outs))
        if any(net.edges[k].tail == net.source for k in net.in_edges(T)):
            raise NotTwoLevel("direct source-terminal edge")
        return cls(tuple(a), tuple(b))


@dataclass(frozen=True)
class BoundReport:
    name: str
    value: float
    witness: Any
    code_size: int | None = None
    q: int | None = None
    rounds: int = 1
    mode: str = "exact"
    notes: dict = field(default_factory=dict, compare=False)

    @property
    def symbolic(self) -> str:
        if self.code_size is None:
            return str(self.value)
        return symbolic_rate(self.code_size, self.q, self.rounds)


# -- Singleton-type bounds --------------------------------------------------------------


def singleton_cut_value(cut: EdgeCut | Iterable[str], vulnerable: Iterable[str], t: int) -> int:
    edges = cut.edges if isinstance(cut, EdgeCut) else frozenset(cut)
    clean, hit = cut_value_edges(EdgeCut(frozenset(edges), ""), frozenset(vulnerable))
    return clean + max(0, hit - 2 * t)


def singleton_cut_set_bound(net: Network, adv: AdversaryModel) -> BoundReport:
    """Min over terminals and minimal cuts of |E'\\U| + max(0, |E'∩U| - 2t)."""
    adv.check_against(net)
    best = None
    for T in net.terminals:
        for cut in enumerate_edge_cuts(net, T):
            v = singleton_cut_value(cut, adv.vulnerable, adv.budget)
            if best is None or v < best[0]:
                best = (v, cut)
    value, cut = best
    return BoundReport("singleton", value, cut, mode="exact",
                       notes={"terminal": cut.terminal, "edges": cut.sorted_ids(net)})


def partition_value(profile: TwoLevelProfile, P1: Iterable[int], t: int) -> int:
    """Σ_{P1} b_i + max(0, Σ_{P2} a_i - 2t), nodes numbered from 1."""
    P1 = set(P1)
    forwarded = sum(profile.b[k - 1] for k in P1)
    exposed = sum(profile.a[k - 1] for k in range(1, profile.j + 1) if k not in P1)
    return forwarded + max(0, exposed - 2 * t)


def generalized_network_singleton_bound(profile: TwoLevelProfile, t: int) -> BoundReport:
    """Min over 2-partitions of the intermediates; the witness is P1."""
    best = None
    nodes = range(1, profile.j + 1)
    for r in range(profile.j + 1):
        for P1 in combinations(nodes, r):
            v = partition_value(profile, P1, t)
            if best is None or v < best[0]:
                best = (v, P1)
    return BoundReport("generalized-singleton", best[0], best[1], mode="exact")


# -- multishot cut-set bound ------------------------------------------------------------


def corruption_channel(n: int, positions: Sequence[int], t: int, q: int, rounds: int,
                       scenario: Scenario | str) -> FanOutChannel:
    """Pure corruption of up to t of the given positions, i rounds, round-major."""
    sc = Scenario.parse(scenario)
    pos = sorted(set(positions))
    m = min(t, len(pos))
    sets = list(combinations(pos, m))

    def free_positions(x: Word, free: Iterable[int]) -> set[Word]:
        free = list(free)
        out = set()
        for vals in product(range(q), repeat=len(free)):
            y = list(x)
            for p, v in zip(free, vals):
                y[p] = v
            out.add(tuple(y))
        return out

    def fn(x: Word) -> set[Word]:
        acc: set[Word] = set()
        if sc is Scenario.FIXED or rounds == 1:
            for s in sets:
                acc |= free_positions(x, [r * n + p for r in range(rounds) for p in s])
            return acc
        for choice in product(sets, repeat=rounds):
            acc |= free_positions(x, [r * n + p for r, s in enumerate(choice) for p in s])
        return acc

    return FanOutChannel(n * rounds, q, fn, label=f"corrupt({n},{len(pos)},{t})", out_length=n * rounds)


def corruption_capacity(v: int, t: int, q: int, rounds: int, scenario: Scenario | str,
                        budget: SearchBudget = SearchBudget()) -> int:
    """Largest unambiguous code when every one of v positions is vulnerable."""
    return _corruption_size(v, t, q, rounds, scenario, budget)[0]


def _corruption_size(v: int, t: int, q: int, rounds: int, scenario: Scenario | str,
                     budget: SearchBudget, at_least: int | None = None) -> tuple[int, bool]:
    """(size, exact).  With ``at_least`` the search stops at a code of that
    size, and the size is then only a lower bound."""
    if v == 0:
        return 1, True
    # two words agreeing on v-2t edges can be steered to the same observation
    cap = q ** (rounds * max(0, v - 2 * t))
    if cap == 1:
        return 1, True
    if q ** (v * rounds) > budget.max_domain:
        raise BudgetExceeded(f"corruption channel on {v} edges x {rounds} rounds exceeds max_domain")
    stop = cap if at_least is None else min(cap, at_least)
    channel = corruption_channel(v, range(v), t, q, rounds, scenario)
    size = _CliqueSearch(compatibility_graph(list(channel.words()), [channel])).clique_number(stop_at=stop)
    return size, size < stop or size == cap


def multishot_cut_set_bound(
    net: Network, adv: AdversaryModel, q: int, budget: SearchBudget = SearchBudget()
) -> BoundReport:
    """Min over terminals and minimal cuts of the corruption-channel capacity.

    Clean cut edges contribute a factor q^(clean*i) exactly, so only the
    vulnerable part is searched.  Cuts too large for the budget are skipped
    (every single cut is already a valid bound) and listed in the notes.
    """
    adv.check_against(net)
    i = adv.rounds
    cache: dict[int, int] = {}
    best = None
    skipped = []
    cuts = [(cut_value_edges(c, adv.vulnerable), c) for T in net.terminals for c in enumerate_edge_cuts(net, T)]
    # cheap cuts first so the clean-edge floor can skip the rest
    cuts.sort(key=lambda item: (item[0][0] + max(0, item[0][1] - 2 * adv.budget), item[0][1]))
    for (clean, hit), cut in cuts:
        floor = q ** (clean * i)
        if best is not None and floor >= best[0]:
            continue
        if hit not in cache:
            # the cut only matters if its capacity is below best / floor
            need = None if best is None else -(-best[0] // floor)
            try:
                val, exact = _corruption_size(hit, adv.budget, q, i, adv.scenario, budget, need)
            except BudgetExceeded:
                skipped.append(cut.sorted_ids(net))
                continue
            if not exact:
                continue
            cache[hit] = val
        size = floor * cache[hit]
        if best is None or size < best[0]:
            best = (size, cut)
    if best is None:
        raise BudgetExceeded("every cut exceeds the search budget")
    size, cut = best
    return BoundReport("multishot-cut-set", math.log(size, q) / i, cut, size, q, i, mode="exhaustive",
                       notes={"edges": cut.sorted_ids(net), "terminal": cut.terminal, "skipped": skipped})


# -- reductions -------------------------------------------------------------------------


@dataclass(frozen=True)
class Reduction:
    net: Network
    adv: AdversaryModel | None
    edge_map: dict  # original cut edge -> edge of the reduced network

    @property
    def profile(self) -> TwoLevelProfile:
        return TwoLevelProfile.of(self.net)


def cut_pair_to_3level(net: Network, c1: EdgeCut, c2: EdgeCut, adv: AdversaryModel | None = None) -> Reduction:
    """Simple 3-level network: one first-layer node per c1 edge, one second-layer
    node per c2 edge, joined when the c1 edge immediately precedes the c2 edge.

    Source edges keep the c1 edge ids; terminal edges are named ``<id>'``.
    c1 edges that precede no c2 edge carry nothing to the terminal and are dropped.
    """
    if not precedes(net, c1, c2):
        raise CutsNotOrdered("c1 does not precede c2")
    first = c1.sorted_ids(net)
    second = c2.sorted_ids(net)
    links = [(e, f) for f in second for e in sorted(immediate_predecessors(net, f, c1), key=net.edge_index.get)]
    used = [e for e in first if any(a == e for a, _ in links)]
    triples = [(e, "S", f"A[{e}]") for e in used]
    triples += [(f"{e}>{f}", f"A[{e}]", f"B[{f}]") for e, f in sorted(links, key=lambda p: (first.index(p[0]), second.index(p[1])))]
    triples += [(f"{f}'", f"B[{f}]", "T") for f in second]
    nodes = ["S", *(f"A[{e}]" for e in used), *(f"B[{f}]" for f in second), "T"]
    new = _from_triples(triples, nodes=nodes)
    adv2 = None
    if adv is not None:
        U = frozenset(e for e in used if e in adv.vulnerable)
        adv2 = AdversaryModel(U, min(adv.budget, len(U)), adv.rounds, adv.scenario)
    return Reduction(new, adv2, {e: e for e in used} | {f: f"{f}'" for f in second})


def reduce_3level_to_2level(net: Network, adv: AdversaryModel | None = None) -> Reduction:
    """Merge each connected component of the middle bipartite graph into one node."""
    if len(net.terminals) != 1:
        raise NotThreeLevel("needs a single terminal")
    T = net.terminals[0]
    g = net.graph
    for path in nx.all_simple_paths(g, net.source, T):
        if len(path) != 4:
            raise NotThreeLevel(f"path {path} does not have length 3")
    layer1 = [v for v in net.intermediates if all(net.edges[k].tail == net.source for k in net.in_edges(v))]
    layer2 = [v for v in net.intermediates if v not in layer1]
    middle = nx.Graph()
    middle.add_nodes_from(net.intermediates)
    for e in net.edges:
        if e.tail in layer1 and e.head in layer2:
            middle.add_edge(e.tail, e.head)
    pos = {v: k for k, v in enumerate(net.intermediates)}
    comps = sorted((sorted(c, key=pos.get) for c in nx.connected_components(middle)), key=lambda c: pos[c[0]])
    triples, edge_map = [], {}
    k = 0
    for idx, comp in enumerate(comps, 1):
        for v in comp:
            if v in layer1:
                for ke in net.in_edges(v):
                    k += 1
                    edge_map[net.edges[ke].id] = f"e{k}"
                    triples.append((f"e{k}", "S", f"V{idx}"))
    for idx, comp in enumerate(comps, 1):
        for v in comp:
            if v in layer2:
                for ke in net.out_edges(v):
                    k += 1
                    edge_map[net.edges[ke].id] = f"e{k}"
                    triples.append((f"e{k}", f"V{idx}", "T"))
    nodes = ["S", *(f"V{idx}" for idx in range(1, len(comps) + 1)), "T"]
    new = _from_triples(triples, nodes=nodes)
    adv2 = None
    if adv is not None:
        U = frozenset(edge_map[e] for e in adv.vulnerable if e in edge_map)
        adv2 = AdversaryModel(U, min(adv.budget, len(U)), adv.rounds, adv.scenario)
    return Reduction(new, adv2, edge_map)


def cut_pair_to_2level(net: Network, c1: EdgeCut, c2: EdgeCut, adv: AdversaryModel | None = None) -> Reduction:
    """3-level network of the cut pair, then component merging.  ``edge_map``
    sends original cut edges to edges of the final 2-level network."""
    three = cut_pair_to_3level(net, c1, c2, adv)
    two = reduce_3level_to_2level(three.net, three.adv)
    return Reduction(two.net, two.adv, {e: two.edge_map[m] for e, m in three.edge_map.items()})


# -- double cut-set bound ---------------------------------------------------------------


def closed_form_size(profile: TwoLevelProfile, adv: AdversaryModel, q: int) -> tuple[int, str] | None:
    """Known i-round capacity (code size) of a simple 2-level network, or None.

    Covers the networks whose multishot capacity is established: Diamond
    (= family E with t=1), Mirrored Diamond, families C and D, all with every
    source edge vulnerable and the matching budget.
    """
    i = adv.rounds
    n_src = sum(profile.a)
    if len(adv.vulnerable) != n_src:
        return None
    t = adv.budget
    shape = sorted(zip(profile.a, profile.b))
    fixed = adv.scenario is Scenario.FIXED
    if shape == [(1, 1), (2, 1)] and t == 1:
        return (q**i - 1, "diamond") if fixed else ((q - 1) ** i, "diamond")
    if shape == [(2 * t, 1), (2 * t, 1)] and t >= 1:
        return q**i, "mirrored" if t == 1 else f"D{t}"
    if t >= 2 and shape == sorted([(t, t), (t + 1, t)]):
        return q**i, f"C{t}"
    return None


def double_cut_set_bound(
    net: Network,
    adv: AdversaryModel,
    c1: EdgeCut,
    c2: EdgeCut,
    q: int,
    mode: str = "exhaustive",
    budget: SearchBudget = SearchBudget(),
    code_mode: str = "same",
    strategies: Sequence[Any] = (),
) -> BoundReport:
    """Bound from a preceding cut pair, with the mode stamped on the report.

    ``exhaustive``: max over every network code of the nodes between the cuts
    of the cut-to-cut channel capacity (certified upper bound).
    ``catalog``: the same max over the codes of the given strategies only
    (a lower estimate of the bound, not a certificate).
    ``analytic``: closed-form capacity of the reduced 2-level network.
    """
    adv.check_against(net)
    if not precedes(net, c1, c2):
        raise CutsNotOrdered("c1 does not precede c2")
    i = adv.rounds
    witness = (c1.sorted_ids(net), c2.sorted_ids(net))
    if mode == "analytic":
        red = cut_pair_to_2level(net, c1, c2, adv)
        try:
            profile = red.profile
        except NotTwoLevel:
            profile = None
        found = closed_form_size(profile, red.adv, q) if profile else None
        if found is None:
            raise BadParameter(f"no closed form for the network reduced from {witness}")
        size, name = found
        return BoundReport("double-cut-set", math.log(size, q) / i if size else float("-inf"), witness, size, q, i,
                           mode="analytic", notes={"reduced": name, "profile": (profile.a, profile.b)})
    if mode == "catalog":
        if not strategies:
            raise BadParameter("catalog mode needs strategies")
        best = None
        for s in strategies:
            ch = channel_between_cuts(net, s.code, c1, c2, adv)
            size = one_shot_capacity(ch).size
            if best is None or size > best:
                best = size
        return BoundReport("double-cut-set", math.log(best, q) / i, witness, best, q, i, mode="catalog",
                           notes={"strategies": [s.name for s in strategies]})
    if mode != "exhaustive":
        raise BadParameter(f"unknown mode {mode!r}")
    n_words = q ** (len(c1.edges) * i)
    if n_words > budget.max_domain:
        raise BudgetExceeded(f"cut domain of {n_words} words exceeds max_domain={budget.max_domain}")
    ev = Evaluator(net, [net.edge_index[e] for e in c1.sorted_ids(net)],
                   {"cut": [net.edge_index[e] for e in c2.sorted_ids(net)]})
    space = CodeSpace(net, q, i, code_mode, nodes=ev.nodes)
    total = space.size()
    if total > budget.max_network_codes:
        raise BudgetExceeded(f"{total} network codes exceed max_network_codes={budget.max_network_codes}")
    best = None
    for code in space:
        size = one_shot_capacity(channel_between_cuts(net, code, c1, c2, adv)).size
        if best is None or size > best:
            best = size
    return BoundReport("double-cut-set", math.log(best, q) / i, witness, best, q, i, mode="exhaustive",
                       notes={"codes": total, "code_mode": code_mode})


def cut_pairs(net: Network, terminal: str) -> list[tuple[EdgeCut, EdgeCut]]:
    cuts = enumerate_edge_cuts(net, terminal)
    return [(a, b) for a in cuts for b in cuts if precedes(net, a, b)]


def analytic_double_cut_bound(net: Network, adv: AdversaryModel, q: int) -> BoundReport:
    """Smallest closed-form double cut-set bound over every cut pair and terminal.

    Cut pairs whose reduced network has no known capacity are skipped.  A
    network's capacity is at most the bound for each of its terminals.
    """
    best = None
    tried = 0
    for T in net.terminals:
        for c1, c2 in cut_pairs(net, T):
            tried += 1
            try:
                rep = double_cut_set_bound(net, adv, c1, c2, q, mode="analytic")
            except BadParameter:
                continue
            if best is None or rep.code_size < best.code_size:
                best = rep
    if best is None:
        raise BadParameter("no cut pair reduces to a network with a known capacity")
    best.notes["pairs_tried"] = tried
    return best
