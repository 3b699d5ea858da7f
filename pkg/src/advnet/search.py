"""Exact brute-force searches: best codes for a fixed network code, best codes
over all network codes, and Hamming-type code oracles.

Three network-code spaces are available:

``same``       one table per node, reused every round
``per_round``  an independent table per node and round
``block``      one function per node on whole i-round edge histories

Enumeration can be reduced by two symmetries that never change the optimum:
nodes with one in-edge and one out-edge may be fixed to forwarding, and the
symbols written on each out-edge may be relabelled (tables are enumerated up
to that relabelling).  Both reductions can be switched off for soundness checks.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Any, Iterator, Sequence

from .channel import CapacityResult, _CliqueSearch, compatibility_graph, max_clique, one_shot_capacity, symbolic_rate
from .netcore import AdversaryModel, AdvnetError, BudgetExceeded, Network, Scenario
from .transfer import (
    AnyCode,
    BlockCode,
    Evaluator,
    NetworkCode,
    _attack_sets,
    _corruptible,
    _Patch,
    _round_major,
    forward,
    network_channels,
    split_rounds,
    terminal_evaluator,
)

MODES = ("same", "per_round", "block")


class BadParameter(AdvnetError, ValueError):
    pass


@dataclass(frozen=True)
class SearchBudget:
    max_domain: int = 20_000
    max_network_codes: int = 5_000_000
    max_seconds: float = 1800.0

    def __post_init__(self):
        if min(self.max_domain, self.max_network_codes, self.max_seconds) <= 0:
            raise ValueError("budget limits must be positive")


def _domain_size(net: Network, q: int, rounds: int) -> int:
    return q ** (net.out_degree(net.source) * rounds)


def max_code_for_fixed_F(
    net: Network, code: AnyCode, adv: AdversaryModel, budget: SearchBudget = SearchBudget()
) -> CapacityResult:
    """Largest unambiguous code over the full message domain for one network code."""
    n = _domain_size(net, code.q, adv.rounds)
    if n > budget.max_domain:
        raise BudgetExceeded(f"domain of {n} words exceeds max_domain={budget.max_domain}")
    return one_shot_capacity(network_channels(net, code, adv), rounds=adv.rounds)


def restricted_growth(length: int, q: int) -> Iterator[tuple[int, ...]]:
    """Sequences over range(q) in which each new symbol is the next unused one."""

    def rec(prefix: list[int], top: int) -> Iterator[tuple[int, ...]]:
        if len(prefix) == length:
            yield tuple(prefix)
            return
        for s in range(min(top + 2, q)):
            prefix.append(s)
            yield from rec(prefix, max(top, s))
            prefix.pop()

    return rec([], -1)


def count_restricted_growth(length: int, q: int) -> int:
    # sum of Stirling numbers of the second kind S(length, k), k <= q
    row = [1] + [0] * q
    for _ in range(length):
        new = [0] * (q + 1)
        for k in range(1, q + 1):
            new[k] = k * row[k] + row[k - 1]
        row = new
    return sum(row[1:]) if length else 1


@dataclass
class CodeSpace:
    """Enumerable family of network codes for ``net`` over ``q`` symbols."""

    net: Network
    q: int
    rounds: int = 1
    mode: str = "same"
    fix_forwarding: bool = True
    up_to_relabelling: bool = True
    nodes: Sequence[str] | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise BadParameter(f"mode must be one of {MODES}")
        nodes = list(self.net.intermediates if self.nodes is None else self.nodes)
        self.fixed = {}
        self.free = []
        for v in nodes:
            if self.fix_forwarding and self.net.in_degree(v) == 1 and self.net.out_degree(v) == 1:
                self.fixed[v] = forward()
            else:
                self.free.append(v)
        self.symbols = (
            list(product(range(self.q), repeat=self.rounds)) if self.mode == "block" else list(range(self.q))
        )
        self.copies = self.rounds if self.mode == "per_round" else 1

    def _entries(self, v: str) -> list[tuple]:
        return list(product(self.symbols, repeat=self.net.in_degree(v)))

    def _tables_for(self, v: str) -> int:
        n_in = len(self.symbols) ** self.net.in_degree(v)
        n_out = self.net.out_degree(v)
        if self.up_to_relabelling:
            return count_restricted_growth(n_in, len(self.symbols)) ** n_out
        return len(self.symbols) ** (n_in * n_out)

    def size(self) -> int:
        return math.prod(self._tables_for(v) for v in self.free) ** self.copies

    def _node_tables(self, v: str) -> Iterator[dict]:
        entries = self._entries(v)
        n_out = self.net.out_degree(v)
        k = len(self.symbols)
        if self.up_to_relabelling:
            columns = list(restricted_growth(len(entries), k))
            for cols in product(columns, repeat=n_out):
                yield {e: tuple(self.symbols[c[j]] for c in cols) for j, e in enumerate(entries)}
        else:
            for flat in product(range(k), repeat=len(entries) * n_out):
                yield {
                    e: tuple(self.symbols[flat[j * n_out + o]] for o in range(n_out))
                    for j, e in enumerate(entries)
                }

    def _round_assignments(self) -> Iterator[dict[str, Any]]:
        per_node = [list(self._node_tables(v)) for v in self.free]
        for combo in product(*per_node):
            tables = dict(self.fixed)
            tables.update(zip(self.free, combo))
            yield tables

    def __iter__(self) -> Iterator[AnyCode]:
        if self.mode == "block":
            for tables in self._round_assignments():
                yield BlockCode(self.q, self.rounds, tables)
        elif self.mode == "same":
            for tables in self._round_assignments():
                yield NetworkCode.uniform(self.q, tables, self.rounds)
        else:
            rounds = list(self._round_assignments())
            for combo in product(rounds, repeat=self.rounds):
                yield NetworkCode(self.q, combo, same_each_round=False)


@dataclass
class SearchResult:
    size: int
    q: int
    rounds: int
    code: AnyCode | None
    witness: tuple[tuple[int, ...], ...]
    mode: str
    method: str
    codes_examined: int = 0
    nodes_explored: int = 0
    seconds: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def rate(self) -> float:
        return math.log(self.size, self.q) / self.rounds if self.size else float("-inf")

    @property
    def symbolic(self) -> str:
        return symbolic_rate(self.size, self.q, self.rounds)


def max_over_network_codes(
    net: Network,
    adv: AdversaryModel,
    q: int,
    per_round_codes: bool = False,
    budget: SearchBudget = SearchBudget(),
    mode: str | None = None,
    method: str = "enumerate",
    fix_forwarding: bool = True,
    up_to_relabelling: bool = True,
) -> SearchResult:
    """Exact maximum code size jointly over network codes and outer codes.

    ``method="enumerate"`` runs a clique search for every code of the space;
    ``method="branch"`` assigns table entries one at a time and prunes with
    the clique number of the graph of collisions already forced.
    """
    mode = mode or ("per_round" if per_round_codes else "same")
    if mode == "block" and adv.scenario is Scenario.FREE and adv.rounds > 1 and up_to_relabelling:
        # relabelling whole histories does not commute with per-round corruption
        up_to_relabelling = False
    space = CodeSpace(net, q, adv.rounds, mode, fix_forwarding, up_to_relabelling)
    n_words = _domain_size(net, q, adv.rounds)
    if n_words > budget.max_domain:
        raise BudgetExceeded(f"domain of {n_words} words exceeds max_domain={budget.max_domain}")
    if method == "branch":
        return _branch_and_bound(space, adv, budget)
    if method == "codes":
        return _code_first(space, adv, budget)
    if method != "enumerate":
        raise BadParameter(f"unknown method {method!r}")
    total = space.size()
    if total > budget.max_network_codes:
        raise BudgetExceeded(f"{total} network codes exceed max_network_codes={budget.max_network_codes}")

    start = time.monotonic()
    words = list(product(range(q), repeat=net.out_degree(net.source) * adv.rounds))
    best: SearchResult | None = None
    examined = 0
    for code in space:
        examined += 1
        if time.monotonic() - start > budget.max_seconds:
            raise BudgetExceeded(f"wall-clock ceiling {budget.max_seconds}s reached after {examined} codes")
        chans = network_channels(net, code, adv)
        adj = compatibility_graph(words, chans)
        if best is not None and _CliqueSearch(adj).colour_bound((1 << len(words)) - 1) <= best.size:
            continue
        clique = max_clique(adj)
        if best is None or len(clique) > best.size:
            best = SearchResult(len(clique), q, adv.rounds, code, tuple(words[k] for k in clique), mode, method)
    assert best is not None
    best.codes_examined = examined
    best.seconds = time.monotonic() - start
    best.notes.update(fix_forwarding=fix_forwarding, up_to_relabelling=up_to_relabelling, space_size=total)
    return best


# -- branch and bound over table entries --------------------------------------------


class _Blocked(Exception):
    def __init__(self, key):
        self.key = key


def _actions(space: CodeSpace, adv: AdversaryModel, ev: Evaluator) -> list:
    corr = _corruptible(space.net, adv)
    sets = _attack_sets(corr, adv.budget)
    q, i = space.q, adv.rounds
    acts = []
    if space.mode == "block":
        hists = list(product(range(q), repeat=i))
        if adv.scenario is Scenario.FIXED or i == 1:
            for s in sets:
                for reps in product(hists, repeat=len(s)):
                    acts.append(dict(zip(s, reps)))
        else:
            for choice in product(sets, repeat=i):
                slots = [(k, r) for r, s in enumerate(choice) for k in s]
                for values in product(range(q), repeat=len(slots)):
                    ov: dict[int, _Patch] = {}
                    for (k, r), v in zip(slots, values):
                        ov.setdefault(k, _Patch())[r] = v
                    acts.append(ov)
        return acts
    per_set = {s: [dict(zip(s, vals)) for vals in product(range(q), repeat=len(s))] for s in sets}
    if adv.scenario is Scenario.FIXED or i == 1:
        for s in sets:
            for combo in product(per_set[s], repeat=i):
                acts.append(combo)
    else:
        singles = [d for s in sets for d in per_set[s]]
        acts = list(product(singles, repeat=i))
    return acts


class _Found(Exception):
    pass


def _branch_and_bound(
    space: CodeSpace,
    adv: AdversaryModel,
    budget: SearchBudget,
    words: list | None = None,
    need: int | None = None,
    acts: list | None = None,
    start: float | None = None,
) -> SearchResult:
    """Assign table entries one at a time, pruning on the clique number.

    With ``need`` set, stop at the first assignment whose code reaches that
    size, and prune any branch that cannot reach it.
    """
    from .transfer import _apply

    net, q, i = space.net, space.q, adv.rounds
    ev = terminal_evaluator(net)
    width = len(ev.inputs)
    if words is None:
        words = list(product(range(q), repeat=width * i))
    if acts is None:
        acts = _actions(space, adv, ev)
    tables: dict[tuple, tuple] = {}
    fixed = {v: f for v, f in space.fixed.items()}
    free = set(space.free)
    block = space.mode == "block"
    outputs = list(ev.outputs.items())

    def lookup(r: int, v: str, ins: tuple) -> tuple:
        if v in fixed:
            return fixed[v](ins)
        key = (r if space.mode == "per_round" else 0, v, ins)
        hit = tables.get(key)
        if hit is None:
            raise _Blocked(key)
        return hit

    def observe(w: int, a: int) -> tuple:
        x, act = words[w], acts[a]
        if block:
            hist = tuple(tuple(x[r * width + k] for r in range(i)) for k in range(width))
            vals = {}
            for k, v in zip(ev.inputs, hist):
                vals[k] = _apply(act, k, v)
            for node, ins, outs in ev.steps:
                res = lookup(0, node, tuple(vals[k] for k in ins))
                for k, v in zip(outs, res):
                    vals[k] = _apply(act, k, v)
            return tuple((label, _round_major([vals[k] for k in ks], i)) for label, ks in outputs)
        per_round = []
        for r, xr in enumerate(split_rounds(x, width, i)):
            ov = act[r]
            vals = {}
            for k, v in zip(ev.inputs, xr):
                vals[k] = ov.get(k, v)
            for node, ins, outs in ev.steps:
                res = lookup(r, node, tuple(vals[k] for k in ins))
                for k, v in zip(outs, res):
                    vals[k] = ov.get(k, v)
            per_round.append(vals)
        return tuple(
            (label, tuple(vals[k] for vals in per_round for k in ks)) for label, ks in outputs
        )

    n = len(words)
    conflicts = [0] * n
    obs_index: dict[tuple, int] = {}
    pending: dict[tuple, list[tuple[int, int]]] = {}
    trail: list = []

    def settle(w: int, a: int) -> None:
        try:
            obs = observe(w, a)
        except _Blocked as blk:
            lst = pending.setdefault(blk.key, [])
            lst.append((w, a))
            trail.append(("pend", blk.key))
            return
        bit = 1 << w
        for item in obs:
            prev = obs_index.get(item, 0)
            if prev & bit:
                continue
            others = prev
            trail.append(("obs", item, prev))
            obs_index[item] = prev | bit
            if others:
                trail.append(("conf", w, conflicts[w]))
                conflicts[w] |= others
                o = others
                while o:
                    low = o & -o
                    z = low.bit_length() - 1
                    trail.append(("conf", z, conflicts[z]))
                    conflicts[z] |= bit
                    o ^= low

    def undo(mark: int) -> None:
        while len(trail) > mark:
            rec = trail.pop()
            if rec[0] == "obs":
                if rec[2]:
                    obs_index[rec[1]] = rec[2]
                else:
                    del obs_index[rec[1]]
            elif rec[0] == "conf":
                conflicts[rec[1]] = rec[2]
            elif rec[0] == "pend":
                pending[rec[1]].pop()
                if not pending[rec[1]]:
                    del pending[rec[1]]
            elif rec[0] == "take":
                pending[rec[1]] = rec[2]
            elif rec[0] == "set":
                del tables[rec[1]]
            elif rec[0] == "use":
                used[rec[1]] = rec[2]

    full = (1 << n) - 1

    def bound() -> list[int]:
        adj = [full & ~conflicts[w] & ~(1 << w) for w in range(n)]
        return adj

    # Symbols already written on each (table, out-coordinate).  Unused symbols
    # on an edge into a terminal are interchangeable, so only one is tried.
    # Edges into other nodes are left alone: a partial downstream table can
    # already distinguish two unused symbols.
    used: dict[tuple, int] = {}
    n_symbols = len(space.symbols)
    into_terminal = {
        (v, o): net.edges[k].head in net.terminals
        for v in space.free
        for o, k in enumerate(net.out_edges(v))
    }

    def choices(key: tuple) -> list[tuple]:
        r, v, _ = key
        per_coord = []
        for o in range(net.out_degree(v)):
            top = used.get((r, v, o), 0)
            relabel = space.up_to_relabelling and into_terminal[(v, o)]
            limit = min(top + 1, n_symbols) if relabel else n_symbols
            per_coord.append([space.symbols[s] for s in range(limit)])
        return list(product(*per_coord))

    start = time.monotonic() if start is None else start
    best = {"size": 0, "tables": None, "witness": ()}
    floor = 0 if need is None else need - 1
    explored = 0

    def dfs() -> None:
        nonlocal explored
        explored += 1
        if time.monotonic() - start > budget.max_seconds:
            raise BudgetExceeded(f"wall-clock ceiling {budget.max_seconds}s reached")
        adj = bound()
        search = _CliqueSearch(adj)
        if not pending:
            omega = search.clique_number()
            if omega > max(best["size"], floor):
                clique = max_clique(adj)
                best.update(size=omega, tables=dict(tables), witness=tuple(words[k] for k in clique))
                if need is not None and omega >= need:
                    raise _Found
            return
        if search.clique_number() <= max(best["size"], floor):
            return
        key = max(pending, key=lambda k: (len(pending[k]), k))
        r, v, _ = key
        for value in choices(key):
            mark = len(trail)
            tables[key] = value
            trail.append(("set", key))
            for o in range(len(value)):
                sym = space.symbols.index(value[o])
                prev = used.get((r, v, o), 0)
                if sym + 1 > prev:
                    trail.append(("use", (r, v, o), prev))
                    used[(r, v, o)] = sym + 1
            waiting = pending.pop(key)
            trail.append(("take", key, waiting))
            for w, a in waiting:
                settle(w, a)
            dfs()
            undo(mark)

    for w in range(n):
        for a in range(len(acts)):
            settle(w, a)
    trail.clear()
    try:
        dfs()
    except _Found:
        pass

    code = _complete(space, best["tables"] or {})
    return SearchResult(
        best["size"], q, i, code, best["witness"], space.mode, "branch",
        nodes_explored=explored, seconds=time.monotonic() - start,
        notes={"fix_forwarding": space.fix_forwarding, "up_to_relabelling": space.up_to_relabelling,
               "actions": len(acts)},
    )


def _code_first(space: CodeSpace, adv: AdversaryModel, budget: SearchBudget) -> SearchResult:
    """Grow outer codes word by word; each candidate code is a small table CSP.

    Feasibility is inherited by subcodes, so an infeasible prefix closes its
    subtree.  Under block or per-round codes each source symbol of each round
    can be relabelled independently, so the first word is fixed to zeros.
    """
    net, q, i = space.net, space.q, adv.rounds
    ev = terminal_evaluator(net)
    acts = _actions(space, adv, ev)
    words = list(product(range(q), repeat=len(ev.inputs) * i))
    start = time.monotonic()
    cache: dict[tuple, SearchResult | None] = {}
    csps = 0

    def feasible(code: tuple[int, ...]) -> SearchResult | None:
        nonlocal csps
        hit = cache.get(code, False)
        if hit is not False:
            return hit
        csps += 1
        sub = [words[k] for k in code]
        res = _branch_and_bound(space, adv, budget, words=sub, need=len(sub), acts=acts, start=start)
        out = res if res.size == len(sub) else None
        cache[code] = out
        return out

    first = [0] if space.mode in ("block", "per_round") else range(len(words))
    # pairwise feasibility with every possible first word is needed for the graph
    pair_ok = {}

    def compatible(a: int, b: int) -> bool:
        key = (a, b)
        if key not in pair_ok:
            pair_ok[key] = feasible((a, b)) is not None
        return pair_ok[key]

    best: dict = {"code": (), "res": None}

    def extend(code: tuple[int, ...], cands: list[int]) -> None:
        if len(code) > len(best["code"]):
            best["code"], best["res"] = code, feasible(code)
        if len(code) + len(cands) <= len(best["code"]):
            return
        for j, c in enumerate(cands):
            if len(code) + len(cands) - j <= len(best["code"]):
                return
            new = code + (c,)
            if len(new) > 2 and feasible(new) is None:
                continue
            rest = [d for d in cands[j + 1:] if all(compatible(x, d) for x in new)]
            extend(new, rest)

    for f in first:
        cands = [c for c in range(f + 1, len(words)) if compatible(f, c)]
        extend((f,), cands)
    res = best["res"]
    seconds = time.monotonic() - start
    return SearchResult(
        len(best["code"]), q, i, res.code if res else None, tuple(words[k] for k in best["code"]),
        space.mode, "codes", nodes_explored=csps, seconds=seconds,
        notes={"fix_forwarding": space.fix_forwarding, "up_to_relabelling": space.up_to_relabelling,
               "first_word_fixed": space.mode in ("block", "per_round")},
    )


def _complete(space: CodeSpace, partial: dict[tuple, tuple]) -> AnyCode:
    """Turn a partial entry assignment into a full code (unused entries -> first symbol)."""
    net = space.net
    zero = space.symbols[0]

    def table(r: int, v: str) -> dict:
        return {
            ins: partial.get((r, v, ins), (zero,) * net.out_degree(v))
            for ins in product(space.symbols, repeat=net.in_degree(v))
        }

    if space.mode == "block":
        fns = dict(space.fixed)
        fns.update({v: table(0, v) for v in space.free})
        return BlockCode(space.q, space.rounds, fns)
    if space.mode == "same":
        fns = dict(space.fixed)
        fns.update({v: table(0, v) for v in space.free})
        return NetworkCode.uniform(space.q, fns, space.rounds)
    rounds = []
    for r in range(space.rounds):
        fns = dict(space.fixed)
        fns.update({v: table(r, v) for v in space.free})
        rounds.append(fns)
    return NetworkCode(space.q, tuple(rounds))


# -- Hamming-type oracles ------------------------------------------------------------


def _hamming(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x != y for x, y in zip(a, b))


def _round_condition_graph(words, n: int, i: int, threshold: int) -> list[int]:
    blocks = [[w[r * n:(r + 1) * n] for r in range(i)] for w in words]
    adj = [0] * len(words)
    for a, b in combinations(range(len(words)), 2):
        if any(_hamming(blocks[a][r], blocks[b][r]) >= threshold for r in range(i)):
            adj[a] |= 1 << b
            adj[b] |= 1 << a
    return adj


def hamming_max_code(
    n: int, t: int, q: int, i: int = 1, threshold: int | None = None, budget: SearchBudget = SearchBudget()
) -> CapacityResult:
    """Largest code in which every pair is at distance >= threshold in some round.

    The default threshold is 2t+1; pass 3t for the four-fold repetition family.
    """
    threshold = 2 * t + 1 if threshold is None else threshold
    total = q ** (n * i)
    if total > budget.max_domain:
        raise BudgetExceeded(f"{total} words exceed max_domain={budget.max_domain}")
    words = list(product(range(q), repeat=n * i))
    adj = _round_condition_graph(words, n, i, threshold)
    clique = max_clique(adj)
    return CapacityResult(len(clique), q, i, tuple(words[k] for k in clique), False, total,
                          notes={"threshold": threshold})


@dataclass
class CoincidenceReport:
    n: int
    t: int
    q: int
    rounds: int
    threshold: int
    target: int
    max_size: int
    max_with_coincidence: int
    one_shot_max: int

    @property
    def confirmed(self) -> bool:
        """No code of size target+1 has two words sharing a round block."""
        return self.max_with_coincidence <= self.target

    @property
    def unrestricted_within_target(self) -> bool:
        # can fail: products of small Hamming channels can beat q^i
        return self.max_size <= self.target


def coincidence_argument_check(
    n: int, t: int, q: int, i: int, threshold: int | None = None, target: int | None = None,
    budget: SearchBudget = SearchBudget(),
) -> CoincidenceReport:
    """No code of size target+1 exists, in particular none with two words
    agreeing on a whole round block.

    Translation by a fixed word preserves every distance, so one of the two
    coinciding words is taken to be zero.
    """
    threshold = 2 * t + 1 if threshold is None else threshold
    target = q**i if target is None else target
    full = hamming_max_code(n, t, q, i, threshold, budget)
    one = hamming_max_code(n, t, q, 1, threshold, budget)

    words = list(product(range(q), repeat=n * i))
    adj = _round_condition_graph(words, n, i, threshold)
    zero = 0  # index of the all-zero word
    best = 1
    for k, w in enumerate(words):
        if k == zero:
            continue
        if not any(all(s == 0 for s in w[r * n:(r + 1) * n]) for r in range(i)):
            continue
        if not adj[zero] >> k & 1:
            # two words that coincide on a block must still differ enough elsewhere
            continue
        common = adj[zero] & adj[k]
        idx = [j for j in range(len(words)) if common >> j & 1]
        sub = [0] * len(idx)
        pos = {j: p for p, j in enumerate(idx)}
        for p, j in enumerate(idx):
            m = adj[j] & common
            while m:
                low = m & -m
                sub[p] |= 1 << pos[low.bit_length() - 1]
                m ^= low
        best = max(best, 2 + len(max_clique(sub)))
    return CoincidenceReport(n, t, q, i, threshold, target, full.size, best, one.size)


@dataclass(frozen=True)
class LowerBound:
    size: int
    q: int
    rounds: int
    a: int
    b: int
    conditional: bool = True

    @property
    def rate(self) -> float:
        return math.log(self.size, self.q) / self.rounds

    @property
    def symbolic(self) -> str:
        return f">= log_{self.q}({self.q}^{self.a * self.rounds}-{self.b})/{self.rounds}"


def general_2level_lower_bound(profile, q: int, i: int, a: int, b: int) -> LowerBound:
    """Code size q^(a i) - b reachable when the fixed-edge adversary is used i
    times, provided a one-shot pair reserving b source vectors exists.

    The premise is not checked, hence the result is tagged conditional.
    """
    if a < 1 or b < 1 or i < 1 or q < 2:
        raise BadParameter("need a >= 1, b >= 1, i >= 1, q >= 2")
    if q ** (a * i) <= b:
        raise BadParameter(f"q^(a i) = {q ** (a * i)} must exceed b = {b}")
    return LowerBound(q ** (a * i) - b, q, i, a, b)
