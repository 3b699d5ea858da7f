"""Information transfer under edge corruption: network codes and fan-out sets.

Words and observations are flat tuples laid out round-major: a word for i
rounds over a source with d out-edges is ``x^1 | x^2 | ... | x^i`` where each
block holds the d source symbols of one round in edge order.

Two kinds of network code are supported:

* :class:`NetworkCode` gives every intermediate node one table per round; the
  node sees only the current round's symbols.
* :class:`BlockCode` lets a node read the whole i-round history of each
  in-edge and write whole histories on its out-edges.  Several multishot
  strategies need this, because an inconsistency seen in one round changes
  what the node emits in every round.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import chain, combinations, product
from math import comb
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence

from .netcore import (
    AdversaryModel,
    AdvnetError,
    CutsNotOrdered,
    EdgeCut,
    Network,
    Scenario,
    precedes,
)

Word = tuple[int, ...]
NodeFn = Callable[[tuple], tuple]


class LengthMismatch(AdvnetError, ValueError):
    pass


class MissingNodeFunction(AdvnetError, ValueError):
    pass


def _callable(table: Any) -> NodeFn:
    if callable(table):
        return table
    return table.__getitem__


def forward(n_out: int = 1, which: int = 0) -> NodeFn:
    """Node function copying input ``which`` onto all ``n_out`` out-edges."""
    return lambda ins: (ins[which],) * n_out


@dataclass(frozen=True, eq=False)
class NetworkCode:
    """Per-round tables: ``tables[r][node]`` maps in-symbols to out-symbols.

    A table is a dict keyed by input tuples or any callable with the same
    behaviour.
    """

    q: int
    tables: tuple[Mapping[str, Any], ...]
    same_each_round: bool = False

    def __post_init__(self):
        object.__setattr__(self, "tables", tuple(dict(t) for t in self.tables))
        if not self.tables:
            raise ValueError("a network code needs at least one round")
        if self.same_each_round and any(t is not self.tables[0] and t != self.tables[0] for t in self.tables):
            raise ValueError("same_each_round set but round tables differ")
        fns = tuple({v: _callable(f) for v, f in t.items()} for t in self.tables)
        object.__setattr__(self, "_fns", fns)

    @classmethod
    def uniform(cls, q: int, tables: Mapping[str, Any], rounds: int = 1) -> "NetworkCode":
        shared = dict(tables)
        return cls(q, (shared,) * rounds, same_each_round=True)

    @property
    def rounds(self) -> int:
        return len(self.tables)

    def functions(self, r: int) -> dict[str, NodeFn]:
        return self._fns[r]  # type: ignore[attr-defined]

    def repeated(self, rounds: int) -> "NetworkCode":
        """Same round-0 tables used for ``rounds`` rounds."""
        return NetworkCode.uniform(self.q, self.tables[0], rounds)

    def materialize(self, net: Network) -> tuple[dict[str, dict[tuple, tuple]], ...]:
        """Explicit lookup tables for every round, for comparisons and printing."""
        out = []
        for r in range(self.rounds):
            fns = self.functions(r)
            out.append(
                {
                    v: {ins: tuple(fns[v](ins)) for ins in product(range(self.q), repeat=net.in_degree(v))}
                    for v in net.intermediates
                    if v in fns
                }
            )
        return tuple(out)


@dataclass(frozen=True, eq=False)
class BlockCode:
    """Node functions over whole i-round edge histories.

    ``functions[node]`` receives a tuple with one i-tuple per in-edge and must
    return one i-tuple per out-edge.
    """

    q: int
    rounds: int
    functions_: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "_fns", {v: _callable(f) for v, f in self.functions_.items()})

    def functions(self, r: int = 0) -> dict[str, NodeFn]:
        return self._fns  # type: ignore[attr-defined]

    @classmethod
    def from_rounds(cls, code: NetworkCode) -> "BlockCode":
        """Express a per-round code as a block code (round-wise application)."""

        def lift(v: str) -> NodeFn:
            def fn(ins: tuple) -> tuple:
                per_round = [code.functions(r)[v](tuple(h[r] for h in ins)) for r in range(code.rounds)]
                return tuple(zip(*per_round))

            return fn

        nodes = code.tables[0].keys()
        return cls(code.q, code.rounds, {v: lift(v) for v in nodes})

    def materialize(self, net: Network) -> dict[str, dict[tuple, tuple]]:
        histories = list(product(range(self.q), repeat=self.rounds))
        fns = self.functions()
        return {
            v: {ins: tuple(fns[v](ins)) for ins in product(histories, repeat=net.in_degree(v))}
            for v in net.intermediates
            if v in fns
        }


AnyCode = NetworkCode | BlockCode


class _Patch(dict):
    """Replacement of selected rounds of an edge history."""


class Evaluator:
    """Compiled evaluation of the part of a network fed by a set of input edges.

    Nodes whose in-edges are all determined by the inputs are evaluated in the
    network's order; input edges always carry their supplied value, even when
    some node upstream of them is evaluable.
    """

    def __init__(self, net: Network, inputs: Sequence[int], outputs: Mapping[str, Sequence[int]]):
        self.net = net
        self.inputs = tuple(inputs)
        self.outputs = {k: tuple(v) for k, v in outputs.items()}
        known = set(self.inputs)
        steps = []
        for v in net.intermediates:
            ins = net.in_edges(v)
            if ins and all(k in known for k in ins):
                outs = net.out_edges(v)
                steps.append((v, ins, outs))
                known.update(outs)
        for label, ks in self.outputs.items():
            missing = [net.edges[k].id for k in ks if k not in known]
            if missing:
                raise CutsNotOrdered(f"{label}: edges {missing} are not determined by the inputs")
        self.steps = tuple(steps)
        self.nodes = tuple(v for v, _, _ in steps)
        self._input_set = frozenset(self.inputs)

    def check_code(self, fns: Mapping[str, NodeFn]) -> None:
        missing = [v for v in self.nodes if v not in fns]
        if missing:
            raise MissingNodeFunction(f"no function for nodes {missing}")

    def run(self, fns: Mapping[str, NodeFn], x: Sequence, override: Mapping[int, Any] | None = None) -> dict[int, Any]:
        vals: dict[int, Any] = {}
        if override:
            for k, v in zip(self.inputs, x):
                vals[k] = _apply(override, k, v)
            for node, ins, outs in self.steps:
                res = fns[node](tuple(vals[k] for k in ins))
                for k, v in zip(outs, res):
                    if k not in self._input_set:
                        vals[k] = _apply(override, k, v)
        else:
            vals.update(zip(self.inputs, x))
            for node, ins, outs in self.steps:
                res = fns[node](tuple(vals[k] for k in ins))
                for k, v in zip(outs, res):
                    if k not in self._input_set:
                        vals[k] = v
        return vals

    def observe(self, vals: Mapping[int, Any]) -> dict[str, tuple]:
        return {label: tuple(vals[k] for k in ks) for label, ks in self.outputs.items()}


def _apply(override: Mapping[int, Any], k: int, v: Any) -> Any:
    if k not in override:
        return v
    rep = override[k]
    if isinstance(rep, _Patch):
        return tuple(rep.get(r, s) for r, s in enumerate(v))
    return rep


def _attack_sets(corruptible: Sequence[int], t: int) -> list[tuple[int, ...]]:
    """Edge sets of size exactly min(t, |corruptible|).

    Identity replacement is allowed, so attacks on fewer edges are covered.
    """
    m = min(t, len(corruptible))
    return list(combinations(sorted(corruptible), m))


def _flatten(blocks: Iterable[tuple]) -> tuple:
    return tuple(chain.from_iterable(blocks))


def _product(sets: Sequence[Iterable[tuple]]) -> set[tuple]:
    return {_flatten(c) for c in product(*sets)}


def split_rounds(x: Sequence[int], width: int, rounds: int) -> list[tuple[int, ...]]:
    if len(x) != width * rounds:
        raise LengthMismatch(f"word length {len(x)} != {width} x {rounds}")
    return [tuple(x[r * width:(r + 1) * width]) for r in range(rounds)]


def _histories(x: Sequence[int], width: int, rounds: int) -> tuple[tuple[int, ...], ...]:
    """Round-major word -> one i-tuple per position."""
    blocks = split_rounds(x, width, rounds)
    return tuple(tuple(b[k] for b in blocks) for k in range(width))


def _round_major(hist: Sequence[Sequence[int]], rounds: int) -> tuple[int, ...]:
    return tuple(h[r] for r in range(rounds) for h in hist)


def fan_out_between(
    ev: Evaluator,
    code: AnyCode,
    x: Sequence[int],
    corruptible: Iterable[int],
    t: int,
    rounds: int,
    scenario: Scenario,
) -> dict[str, frozenset[tuple]]:
    """Fan-out at every output group of ``ev`` for the round-major word ``x``."""
    width = len(ev.inputs)
    sets = _attack_sets(sorted(set(corruptible)), t)
    q = code.q
    if isinstance(code, BlockCode):
        if code.rounds != rounds:
            raise LengthMismatch(f"block code has {code.rounds} rounds, adversary {rounds}")
        return _block_fan_out(ev, code, _histories(x, width, rounds), sets, rounds, scenario)
    if code.rounds != rounds:
        raise LengthMismatch(f"network code has {code.rounds} rounds, adversary {rounds}")

    blocks = split_rounds(x, width, rounds)
    # per_round[r][s][label] = observations in round r when the attack uses set s
    per_round = []
    for r, xr in enumerate(blocks):
        fns = code.functions(r)
        by_set = {}
        for s in sets:
            acc: dict[str, set] = {label: set() for label in ev.outputs}
            for values in product(range(q), repeat=len(s)):
                obs = ev.observe(ev.run(fns, xr, dict(zip(s, values))))
                for label, y in obs.items():
                    acc[label].add(y)
            by_set[s] = acc
        per_round.append(by_set)

    out: dict[str, frozenset] = {}
    for label in ev.outputs:
        if scenario is Scenario.FREE or rounds == 1:
            unions = [set().union(*(pr[s][label] for s in sets)) for pr in per_round]
            out[label] = frozenset(_product(unions))
        else:
            acc = set()
            for s in sets:
                acc |= _product([pr[s][label] for pr in per_round])
            out[label] = frozenset(acc)
    return out


def _block_fan_out(ev, code: BlockCode, hist, sets, rounds, scenario) -> dict[str, frozenset]:
    fns = code.functions()
    q = code.q
    acc: dict[str, set] = {label: set() for label in ev.outputs}

    def record(override):
        vals = ev.run(fns, hist, override)
        for label, ks in ev.outputs.items():
            acc[label].add(_round_major([vals[k] for k in ks], rounds))

    if scenario is Scenario.FIXED or rounds == 1:
        histories = list(product(range(q), repeat=rounds))
        for s in sets:
            for reps in product(histories, repeat=len(s)):
                record(dict(zip(s, reps)))
    else:
        for choice in product(sets, repeat=rounds):
            slots = [(k, r) for r, s in enumerate(choice) for k in s]
            for values in product(range(q), repeat=len(slots)):
                override: dict[int, _Patch] = {}
                for (k, r), v in zip(slots, values):
                    override.setdefault(k, _Patch())[r] = v
                record(override)
    return {label: frozenset(ys) for label, ys in acc.items()}


def terminal_evaluator(net: Network) -> Evaluator:
    return Evaluator(net, net.out_edges(net.source), {T: net.in_edges(T) for T in net.terminals})


def evaluate_deterministic(net: Network, code: AnyCode, x: Sequence, round: int = 0) -> dict[str, Any]:
    """Error-free evaluation of one round: edge id -> value.

    ``x`` holds one symbol per source edge (one history per source edge for a
    :class:`BlockCode`).
    """
    ev = terminal_evaluator(net)
    if len(x) != len(ev.inputs):
        raise LengthMismatch(f"expected {len(ev.inputs)} source symbols, got {len(x)}")
    fns = code.functions(round)
    ev.check_code(fns)
    vals = ev.run(fns, tuple(x))
    return {net.edges[k].id: v for k, v in sorted(vals.items())}


def _corruptible(net: Network, adv: AdversaryModel, within: Iterable[str] | None = None) -> list[int]:
    allowed = adv.vulnerable if within is None else adv.vulnerable & set(within)
    return [net.edge_index[e] for e in net.edge_ids if e in allowed]


def fan_out_single(net: Network, code: AnyCode, x: Sequence[int], adv: AdversaryModel, round: int = 0) -> dict[str, frozenset]:
    """One-round fan-out sets, keyed by terminal."""
    if adv.rounds != 1:
        raise ValueError("fan_out_single needs an adversary with rounds=1")
    ev = terminal_evaluator(net)
    if len(x) != len(ev.inputs):
        raise LengthMismatch(f"expected {len(ev.inputs)} source symbols, got {len(x)}")
    if isinstance(code, NetworkCode):
        code = NetworkCode(code.q, (code.tables[round],), True)
    ev.check_code(code.functions(0))
    return fan_out_between(ev, code, x, _corruptible(net, adv), adv.budget, 1, adv.scenario)


def fan_out_multishot(net: Network, code: AnyCode, x: Sequence[int], adv: AdversaryModel) -> dict[str, frozenset]:
    """Fan-out sets over ``adv.rounds`` rounds under the adversary's scenario."""
    ev = terminal_evaluator(net)
    if len(x) != len(ev.inputs) * adv.rounds:
        raise LengthMismatch(f"expected word length {len(ev.inputs) * adv.rounds}, got {len(x)}")
    ev.check_code(code.functions(0))
    return fan_out_between(ev, code, x, _corruptible(net, adv), adv.budget, adv.rounds, adv.scenario)


class FanOutChannel:
    """Set-valued map from words of ``length`` symbols to observation sets.

    Evaluation is lazy and memoised.  ``domain`` optionally restricts the
    input space to an explicit list of words.
    """

    def __init__(
        self,
        length: int,
        q: int,
        fn: Callable[[Word], Iterable[tuple]],
        label: str = "",
        domain: Sequence[Word] | None = None,
        out_length: int | None = None,
    ):
        self.length = length
        self.q = q
        self._fn = fn
        self.label = label
        self._domain = None if domain is None else tuple(tuple(w) for w in domain)
        self._domain_set = None if domain is None else frozenset(self._domain)
        self.out_length = out_length
        self._cache: dict[Word, frozenset] = {}

    def __call__(self, x: Sequence[int]) -> frozenset:
        x = tuple(x)
        hit = self._cache.get(x)
        if hit is None:
            if x not in self:
                raise LengthMismatch(f"{x} is outside the domain of {self.label or 'channel'}")
            hit = frozenset(self._fn(x))
            self._cache[x] = hit
        return hit

    def __contains__(self, x: object) -> bool:
        if not isinstance(x, tuple) or len(x) != self.length:
            return False
        if self._domain_set is not None:
            return x in self._domain_set
        return all(isinstance(s, int) and 0 <= s < self.q for s in x)

    def words(self) -> Iterator[Word]:
        if self._domain is not None:
            return iter(self._domain)
        return product(range(self.q), repeat=self.length)

    @property
    def domain_size(self) -> int:
        return len(self._domain) if self._domain is not None else self.q**self.length

    def same_domain(self, other: "FanOutChannel") -> bool:
        if self.length != other.length or self.q != other.q:
            return False
        return self._domain_set == other._domain_set

    def __repr__(self) -> str:
        return f"FanOutChannel({self.label or '?'}, length={self.length}, q={self.q})"


def network_channels(net: Network, code: AnyCode, adv: AdversaryModel) -> dict[str, FanOutChannel]:
    """One channel per terminal, sharing a single fan-out computation per word."""
    adv.check_against(net)
    ev = terminal_evaluator(net)
    ev.check_code(code.functions(0))
    corr = _corruptible(net, adv)
    memo: dict[Word, dict[str, frozenset]] = {}

    def joint(x: Word) -> dict[str, frozenset]:
        hit = memo.get(x)
        if hit is None:
            hit = fan_out_between(ev, code, x, corr, adv.budget, adv.rounds, adv.scenario)
            memo[x] = hit
        return hit

    n = len(ev.inputs) * adv.rounds
    return {
        T: FanOutChannel(
            n, code.q, (lambda x, T=T: joint(x)[T]), label=f"S->{T}",
            out_length=net.in_degree(T) * adv.rounds,
        )
        for T in net.terminals
    }


def channel_between_cuts(
    net: Network, code: AnyCode, c1: EdgeCut, c2: EdgeCut, adv: AdversaryModel
) -> FanOutChannel:
    """Transfer from the edges of c1 (free inputs) to those of c2.

    Only edges in vulnerable ∩ c1 may be corrupted.
    """
    if not precedes(net, c1, c2):
        raise CutsNotOrdered("c1 does not precede c2")
    ins = [net.edge_index[e] for e in c1.sorted_ids(net)]
    outs = [net.edge_index[e] for e in c2.sorted_ids(net)]
    ev = Evaluator(net, ins, {"cut": outs})
    ev.check_code(code.functions(0))
    corr = _corruptible(net, adv, within=c1.edges)

    def fn(x: Word) -> frozenset:
        return fan_out_between(ev, code, x, corr, adv.budget, adv.rounds, adv.scenario)["cut"]

    return FanOutChannel(len(ins) * adv.rounds, code.q, fn, label="cut->cut", out_length=len(outs) * adv.rounds)


def hamming_ball(x: Sequence[int], t: int, q: int) -> set[tuple[int, ...]]:
    x = tuple(x)
    out = set()
    for r in range(min(t, len(x)) + 1):
        for pos in combinations(range(len(x)), r):
            for vals in product(range(q), repeat=r):
                y = list(x)
                for p, v in zip(pos, vals):
                    y[p] = v
                out.add(tuple(y))
    return out


def hamming_ball_size(n: int, t: int, q: int) -> int:
    return sum(comb(n, k) * (q - 1) ** k for k in range(min(t, n) + 1))


def hamming_channel(n: int, t: int, q: int) -> FanOutChannel:
    """Substitution of up to t of n symbols."""
    if n < 1 or not 0 <= t <= n:
        raise ValueError(f"need n >= 1 and 0 <= t <= n, got n={n}, t={t}")
    return FanOutChannel(n, q, lambda x: hamming_ball(x, t, q), label=f"hamming({n},{t})", out_length=n)
