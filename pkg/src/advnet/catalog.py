"""Built-in networks and explicit capacity-achieving strategies.

A :class:`Strategy` bundles a network, an adversary, a network code, the outer
code (list of source words) and one decoder per terminal.  Decoders map a
terminal observation (round-major, one symbol per in-edge and round) to the
sent source word, or ``None`` when the observation cannot arise.

The reserved "detected corruption" symbol is ``q - 1`` throughout.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from itertools import combinations, product
from typing import Callable, Iterable, Mapping, Sequence

from .channel import find_collision, symbolic_rate
from .netcore import AdversaryModel, AdvnetError, Instance, Network, Scenario
from .netcore import build_network as _from_triples
from .transfer import AnyCode, BlockCode, NetworkCode, Word, _histories, network_channels, split_rounds
from .search import BadParameter

Decoder = Callable[[tuple], "Word | None"]


class BadReservedSet(AdvnetError, ValueError):
    pass


class ScaleExceeded(AdvnetError):
    pass


# ---------------------------------------------------------------- networks

FAMILY_MIN = {"A": 1, "B": 1, "C": 2, "D": 1, "E": 1}


def family_profile(kind: str, t: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(in-degrees, out-degrees) of the two intermediates of a family member."""
    if kind not in FAMILY_MIN:
        raise BadParameter(f"unknown family {kind!r}")
    if t < FAMILY_MIN[kind]:
        raise BadParameter(f"family {kind} needs parameter >= {FAMILY_MIN[kind]}, got {t}")
    return {
        "A": ((t, 2 * t), (t, t)),
        "B": ((1, t + 1), (1, t)),
        "C": ((t, t + 1), (t, t)),
        "D": ((2 * t, 2 * t), (1, 1)),
        "E": ((t, t + 1), (1, 1)),
    }[kind]


def family_budget(kind: str, t: int) -> int:
    # family B is stated for a single corrupted edge
    return 1 if kind == "B" else t


def two_level_network(a: Sequence[int], b: Sequence[int]) -> Network:
    """Simple 2-level network: source edges e1.. first, then the terminal edges."""
    if len(a) != len(b) or not a or min(a) < 1 or min(b) < 1:
        raise BadParameter(f"bad profile {list(a)}, {list(b)}")
    triples, k = [], 0
    for v, deg in enumerate(a, 1):
        for _ in range(deg):
            k += 1
            triples.append((f"e{k}", "S", f"V{v}"))
    for v, deg in enumerate(b, 1):
        for _ in range(deg):
            k += 1
            triples.append((f"e{k}", f"V{v}", "T"))
    nodes = ["S", *(f"V{v}" for v in range(1, len(a) + 1)), "T"]
    return _from_triples(triples, nodes=nodes)


BUTTERFLY_EDGES = (
    ("e1", "S", "V1"), ("e2", "S", "V1"), ("e3", "S", "V2"), ("e4", "S", "V2"),
    ("e5", "V1", "T1"), ("e6", "V1", "V3"), ("e7", "V2", "V3"), ("e8", "V2", "T2"),
    ("e9", "V3", "V4"), ("e10", "V4", "T1"), ("e11", "V4", "T2"),
)
# Default vulnerable set; the alternative one has e5 in place of e7.
BUTTERFLY_U = frozenset({"e1", "e2", "e3", "e4", "e6", "e7", "e9"})
BUTTERFLY_U_PROSE = frozenset({"e1", "e2", "e3", "e4", "e5", "e6", "e9"})


def butterfly_network() -> Network:
    return _from_triples(
        BUTTERFLY_EDGES, terminals=("T1", "T2"),
        nodes=["S", "V1", "V2", "V3", "V4", "T1", "T2"],
    )


def diamond_network() -> Network:
    return two_level_network((1, 2), (1, 1))


def mirrored_network() -> Network:
    return two_level_network((2, 2), (1, 1))


KINDS = ("diamond", "mirrored", "butterfly", "butterfly-prose", "A", "B", "C", "D", "E")


def build_network(
    kind: str,
    param: int | None = None,
    q: int = 2,
    rounds: int = 1,
    scenario: Scenario | str = Scenario.FIXED,
) -> Instance:
    """Network plus its default adversary.

    Families take their parameter ``t`` (``s`` for B); the source edges are the
    vulnerable set.
    """
    sc = Scenario.parse(scenario)
    if kind == "diamond":
        net, U, t, label = diamond_network(), {"e1", "e2", "e3"}, 1, "diamond"
    elif kind == "mirrored":
        net, U, t, label = mirrored_network(), {"e1", "e2", "e3", "e4"}, 1, "mirrored"
    elif kind in ("butterfly", "butterfly-prose"):
        U = BUTTERFLY_U if kind == "butterfly" else BUTTERFLY_U_PROSE
        net, t, label = butterfly_network(), 1, kind
    elif kind in FAMILY_MIN:
        if param is None:
            raise BadParameter(f"family {kind} needs a parameter")
        a, b = family_profile(kind, param)
        net = two_level_network(a, b)
        U = {net.edges[k].id for k in net.out_edges("S")}
        t, label = family_budget(kind, param), f"{kind}{param}"
    else:
        raise BadParameter(f"unknown network kind {kind!r}")
    if q < 2:
        raise BadParameter("alphabet needs q >= 2")
    adv = AdversaryModel(frozenset(U), t, rounds, sc).check_against(net)
    return Instance(net, adv, q, label)


_BUILTIN = re.compile(r"^(?:family)?([A-Ea-e])[:_-]?(\d+)$")


def parse_builtin(name: str) -> tuple[str, int | None]:
    """'diamond', 'mirrored', 'butterfly', 'butterfly-prose', 'C2', 'familyE:1'."""
    low = name.strip().lower()
    aliases = {"d": "diamond", "diamond": "diamond", "mirrored": "mirrored", "mirrored-diamond": "mirrored",
               "s": "mirrored", "butterfly": "butterfly", "butterfly-prose": "butterfly-prose"}
    if low in aliases:
        return aliases[low], None
    m = _BUILTIN.match(name.strip())
    if m:
        return m.group(1).upper(), int(m.group(2))
    raise BadParameter(f"unknown builtin network {name!r}")


# ---------------------------------------------------------------- strategies

@dataclass(frozen=True, eq=False)
class Strategy:
    name: str
    net: Network
    adv: AdversaryModel
    q: int
    code: AnyCode
    words: tuple[Word, ...]
    decoders: Mapping[str, Decoder]
    claimed_size: int
    claimed_rate: str
    params: dict = field(default_factory=dict)

    @property
    def rounds(self) -> int:
        return self.adv.rounds

    @property
    def size(self) -> int:
        return len(self.words)

    def with_adversary(self, adv: AdversaryModel) -> "Strategy":
        return replace(self, adv=adv.check_against(self.net))


def _check_qi(q: int, i: int) -> None:
    if q < 2 or i < 1:
        raise BadParameter(f"need q >= 2 and i >= 1, got q={q}, i={i}")


def _repeat_word(msg: Sequence[int], width: int) -> Word:
    """Message history a (one symbol per round) placed on every source edge."""
    return tuple(s for s in msg for _ in range(width))


def _per_round_decoder(dec: Callable[[tuple], int | None], deg: int, width: int, rounds: int) -> Decoder:
    """Lift a one-round decoder (in-edge symbols -> message symbol)."""

    def decode(obs: tuple) -> Word | None:
        msg = []
        for block in split_rounds(obs, deg, rounds):
            a = dec(block)
            if a is None:
                return None
            msg.append(a)
        return _repeat_word(msg, width)

    return decode


def _history_decoder(dec: Callable[[tuple], tuple | None], deg: int, width: int, rounds: int) -> Decoder:
    """Lift a decoder acting on in-edge histories."""

    def decode(obs: tuple) -> Word | None:
        a = dec(_histories(obs, deg, rounds))
        return None if a is None else _repeat_word(a, width)

    return decode


def _messages(q: int, rounds: int, exclude_rounds: Iterable[int] = (), exclude_histories: Iterable[tuple] = ()):
    bad_sym = set(exclude_rounds)
    bad_hist = set(exclude_histories)
    return [a for a in product(range(q), repeat=rounds)
            if not bad_sym & set(a) and a not in bad_hist]


def _adv(inst: Instance, rounds: int, scenario: Scenario | str) -> AdversaryModel:
    return inst.adv.with_(rounds=rounds, scenario=Scenario.parse(scenario))


# -- Diamond

def diamond_strategy(q: int, i: int = 1, scenario: Scenario | str = Scenario.FIXED) -> Strategy:
    """V1 forwards; V2 passes its two inputs on when they agree, otherwise ⋆.

    Fixed edges: nodes act on whole histories and only ⋆^i is reserved.
    Free edges: the one-round strategy repeated, ⋆ reserved every round.
    """
    _check_qi(q, i)
    sc = Scenario.parse(scenario)
    inst = build_network("diamond", q=q)
    net = inst.net
    star = q - 1
    if sc is Scenario.FIXED:
        star_h = (star,) * i
        code: AnyCode = BlockCode(q, i, {
            "V1": lambda ins: (ins[0],),
            "V2": lambda ins: (ins[0],) if ins[0] == ins[1] else (star_h,),
        })
        msgs = _messages(q, i, exclude_histories=[star_h])
        allowed = frozenset(msgs)

        def dec(h):
            return h[1] if h[1] != star_h else h[0]

        decoder = _history_decoder(lambda h: _valid(dec(h), allowed), 2, 3, i)
        claimed, rate = q**i - 1, symbolic_rate(q**i - 1, q, i)
    else:
        code = NetworkCode.uniform(q, {
            "V1": lambda ins: (ins[0],),
            "V2": lambda ins: (ins[0],) if ins[0] == ins[1] else (star,),
        }, i)
        msgs = _messages(q, i, exclude_rounds=[star])

        def dec1(y):
            a = y[1] if y[1] != star else y[0]
            return None if a == star else a

        decoder = _per_round_decoder(dec1, 2, 3, i)
        claimed, rate = (q - 1) ** i, symbolic_rate(q - 1, q)
    words = tuple(_repeat_word(a, 3) for a in msgs)
    return Strategy("diamond", net, _adv(inst, i, sc), q, code, words, {"T": decoder}, claimed, rate,
                    {"q": q, "i": i, "scenario": sc.value})


def _valid(a, allowed: frozenset) -> tuple | None:
    return a if a in allowed else None


# -- Mirrored Diamond and family D

def _agree_or_default(threshold: int, default: int):
    """Node output: the value seen more than ``threshold`` times, else ``default``."""

    def fn(ins: tuple) -> tuple:
        for v in set(ins):
            if ins.count(v) > threshold:
                return (v,)
        return (default,)

    return fn


def _pair_decoder(default: int):
    def dec(y):
        u, v = y
        if u == v:
            return u
        if u == default:
            return v
        if v == default:
            return u
        return None

    return dec


def mirrored_strategy(q: int, i: int = 1, scenario: Scenario | str = Scenario.FIXED) -> Strategy:
    """Each branch repeats the symbol twice; a node forwards agreeing inputs, else 0."""
    _check_qi(q, i)
    inst = build_network("mirrored", q=q)
    fn = _agree_or_default(1, 0)
    code = NetworkCode.uniform(q, {"V1": fn, "V2": fn}, i)
    words = tuple(_repeat_word(a, 4) for a in product(range(q), repeat=i))
    decoder = _per_round_decoder(_pair_decoder(0), 2, 4, i)
    sc = Scenario.parse(scenario)
    return Strategy("mirrored", inst.net, _adv(inst, i, sc), q, code, words, {"T": decoder}, q**i,
                    symbolic_rate(q, q), {"q": q, "i": i, "scenario": sc.value})


def family_D_strategy(t: int, q: int, i: int = 1, scenario: Scenario | str = Scenario.FIXED) -> Strategy:
    """4t-fold repetition; a node outputs a value seen more than t times, else 0."""
    _check_qi(q, i)
    inst = build_network("D", t, q=q)
    fn = _agree_or_default(t, 0)
    code = NetworkCode.uniform(q, {"V1": fn, "V2": fn}, i)
    words = tuple(_repeat_word(a, 4 * t) for a in product(range(q), repeat=i))
    decoder = _per_round_decoder(_pair_decoder(0), 2, 4 * t, i)
    sc = Scenario.parse(scenario)
    return Strategy(f"D{t}", inst.net, _adv(inst, i, sc), q, code, words, {"T": decoder}, q**i,
                    symbolic_rate(q, q), {"t": t, "q": q, "i": i, "scenario": sc.value})


# -- family C

def _digits(n: int, q: int, width: int) -> tuple[int, ...]:
    out = []
    for _ in range(width):
        n, r = divmod(n, q)
        out.append(r)
    if n:
        raise ValueError("value does not fit")
    return tuple(reversed(out))


def _undigits(ds: Sequence[int], q: int) -> int:
    n = 0
    for d in ds:
        n = n * q + d
    return n


def family_C_strategy(t: int, q: int, i: int = 1, scenario: Scenario | str = Scenario.FIXED) -> Strategy:
    """(2t+1)-fold repetition.

    V1 forwards its t symbols.  V2 reports its most frequent symbol m together
    with how often it saw m, written in base q on its remaining t-1 edges.  The
    terminal returns m when m appears at least t+1 times overall and otherwise
    the strict majority of V1's symbols.
    """
    _check_qi(q, i)
    if t < 2:
        raise BadParameter("family C needs t >= 2")
    inst = build_network("C", t, q=q)
    cmin = -(-(t + 1) // q)
    if q ** (t - 1) < t + 2 - cmin:
        raise BadParameter(f"counts 1..{t + 1} do not fit in {t - 1} symbols over q={q}")

    def v2(ins: tuple) -> tuple:
        m = min(range(q), key=lambda s: (-ins.count(s), s))
        return (m, *_digits(ins.count(m) - cmin, q, t - 1))

    def dec1(y: tuple):
        x, m, ds = y[:t], y[t], y[t + 1:]
        c = cmin + _undigits(ds, q)
        if x.count(m) + c >= t + 1:
            return m
        for s in set(x):
            if 2 * x.count(s) > t:
                return s
        return None

    code = NetworkCode.uniform(q, {"V1": lambda ins: tuple(ins), "V2": v2}, i)
    words = tuple(_repeat_word(a, 2 * t + 1) for a in product(range(q), repeat=i))
    decoder = _per_round_decoder(dec1, 2 * t, 2 * t + 1, i)
    sc = Scenario.parse(scenario)
    return Strategy(f"C{t}", inst.net, _adv(inst, i, sc), q, code, words, {"T": decoder}, q**i,
                    symbolic_rate(q, q), {"t": t, "q": q, "i": i, "scenario": sc.value})


# -- family E

@dataclass(frozen=True)
class ReservedSet:
    """Reserved vectors of length 2t+1, each a constant vector (c, ..., c).

    Only constant vectors can coincide with a repetition code word, so each
    one removes exactly one message; the reserved symbols are what the nodes
    emit on detected corruption.
    """

    vectors: frozenset[tuple[int, ...]]
    t: int
    q: int

    def __post_init__(self):
        object.__setattr__(self, "vectors", frozenset(tuple(v) for v in self.vectors))
        n = 2 * self.t + 1
        if not self.vectors:
            raise BadReservedSet("reserved set is empty")
        for v in self.vectors:
            if len(v) != n or not all(0 <= s < self.q for s in v):
                raise BadReservedSet(f"{v} is not a vector in A^{n} for q={self.q}")
            if len(set(v)) != 1:
                raise BadReservedSet(f"{v} is not constant and would not remove any code word")
        if len(self.vectors) >= self.q:
            raise BadReservedSet("reserving every symbol leaves no one-round message")

    @classmethod
    def default(cls, t: int, q: int) -> "ReservedSet":
        return cls(frozenset({(q - 1,) * (2 * t + 1)}), t, q)

    @classmethod
    def of_symbols(cls, symbols: Iterable[int], t: int, q: int) -> "ReservedSet":
        return cls(frozenset((s,) * (2 * t + 1) for s in symbols), t, q)

    @property
    def b(self) -> int:
        return len(self.vectors)

    @property
    def symbols(self) -> tuple[int, ...]:
        return tuple(sorted(v[0] for v in self.vectors))

    @property
    def star(self) -> int:
        return self.symbols[-1]

    def full(self, i: int) -> frozenset[tuple]:
        """B^i: each vector repeated for i rounds (round-major)."""
        return frozenset(k * i for k in self.vectors)

    def first(self, i: int) -> frozenset[tuple]:
        """B_1^i: first t coordinates of each vector, every round."""
        return frozenset(k[: self.t] * i for k in self.vectors)

    def second(self, i: int) -> frozenset[tuple]:
        """B_2^i: last t+1 coordinates of each vector, every round."""
        return frozenset(k[self.t:] * i for k in self.vectors)


def _consistent_or(star):
    return lambda ins: (ins[0],) if all(h == ins[0] for h in ins) else (star,)


def family_E_strategy(
    t: int,
    q: int,
    i: int = 1,
    B: ReservedSet | None = None,
    scenario: Scenario | str = Scenario.FIXED,
) -> Strategy:
    """Repetition over the 2t+1 source edges with consistency checks at V1, V2.

    A node whose inputs all agree forwards that value, otherwise it emits the
    reserved value.  The terminal trusts V2 unless V2's value is reserved.
    This is provably correct for t = 1; for larger t, two nodes can both see
    disagreement and :func:`verify_strategy` reports the resulting collision.
    """
    _check_qi(q, i)
    sc = Scenario.parse(scenario)
    B = ReservedSet.default(t, q) if B is None else B
    if B.t != t or B.q != q:
        raise BadReservedSet("reserved set built for other parameters")
    inst = build_network("E", t, q=q)
    n = 2 * t + 1
    if sc is Scenario.FIXED:
        reserved_h = {(c,) * i for c in B.symbols}
        star_h = (B.star,) * i
        fn = _consistent_or(star_h)
        code: AnyCode = BlockCode(q, i, {"V1": fn, "V2": fn})
        msgs = _messages(q, i, exclude_histories=reserved_h)
        allowed = frozenset(msgs)

        def dec(h):
            return h[1] if h[1] not in reserved_h else h[0]

        decoder = _history_decoder(lambda h: _valid(dec(h), allowed), 2, n, i)
        claimed, rate = q**i - B.b, symbolic_rate(q**i - B.b, q, i)
    else:
        reserved = set(B.symbols)
        fn = _consistent_or(B.star)
        code = NetworkCode.uniform(q, {"V1": fn, "V2": fn}, i)
        msgs = _messages(q, i, exclude_rounds=reserved)

        def dec1(y):
            a = y[1] if y[1] not in reserved else y[0]
            return None if a in reserved else a

        decoder = _per_round_decoder(dec1, 2, n, i)
        claimed, rate = (q - B.b) ** i, symbolic_rate(q - B.b, q)
    words = tuple(_repeat_word(a, n) for a in msgs)
    return Strategy(f"E{t}", inst.net, _adv(inst, i, sc), q, code, words, {"T": decoder}, claimed, rate,
                    {"t": t, "q": q, "i": i, "b": B.b, "scenario": sc.value})


# -- Butterfly

def butterfly_strategy(
    q: int,
    i: int = 1,
    scenario: Scenario | str = Scenario.FIXED,
    vulnerable: str = "figure",
) -> Strategy:
    """Repetition on the four source edges with ⋆ as the alarm value.

    V1 and V2 forward agreeing inputs, else ⋆.  V3 forwards its unique non-⋆
    input; two ⋆ inputs or two non-⋆ inputs give ⋆.  V4 forwards.  T1 reads
    e5 unless it carries ⋆, then e10; T2 reads e8 unless ⋆, then e11.
    ``vulnerable='prose'`` uses the alternative vulnerable set listing e5.
    """
    _check_qi(q, i)
    sc = Scenario.parse(scenario)
    kind = {"figure": "butterfly", "prose": "butterfly-prose"}.get(vulnerable)
    if kind is None:
        raise BadParameter("vulnerable must be 'figure' or 'prose'")
    inst = build_network(kind, q=q)
    block = sc is Scenario.FIXED
    star = (q - 1,) * i if block else q - 1

    def eq2(ins):
        return (ins[0],) * 2 if ins[0] == ins[1] else (star,) * 2

    def v3(ins):
        u, v = ins
        if (u == star) != (v == star):
            return (v if u == star else u,)
        return (star,)

    fns = {"V1": eq2, "V2": eq2, "V3": v3, "V4": lambda ins: (ins[0], ins[0])}
    if block:
        code: AnyCode = BlockCode(q, i, fns)
        msgs = _messages(q, i, exclude_histories=[star])
        allowed = frozenset(msgs)

        def trust(h):
            return _valid(h[0] if h[0] != star else h[1], allowed)

        dec = _history_decoder(trust, 2, 4, i)
        claimed, rate = q**i - 1, symbolic_rate(q**i - 1, q, i)
    else:
        code = NetworkCode.uniform(q, fns, i)
        msgs = _messages(q, i, exclude_rounds=[star])

        def trust1(y):
            a = y[0] if y[0] != star else y[1]
            return None if a == star else a

        dec = _per_round_decoder(trust1, 2, 4, i)
        claimed, rate = (q - 1) ** i, symbolic_rate(q - 1, q)
    words = tuple(_repeat_word(a, 4) for a in msgs)
    return Strategy(kind, inst.net, _adv(inst, i, sc), q, code, words, {"T1": dec, "T2": dec}, claimed, rate,
                    {"q": q, "i": i, "scenario": sc.value, "vulnerable": vulnerable})


def catalog_strategy(kind: str, param: int | None, q: int, i: int, scenario: Scenario | str) -> Strategy:
    """Strategy for a builtin network; A and B have none."""
    if kind == "diamond":
        return diamond_strategy(q, i, scenario)
    if kind == "mirrored":
        return mirrored_strategy(q, i, scenario)
    if kind == "butterfly":
        return butterfly_strategy(q, i, scenario)
    if kind == "butterfly-prose":
        return butterfly_strategy(q, i, scenario, vulnerable="prose")
    if kind == "C":
        return family_C_strategy(param, q, i, scenario)
    if kind == "D":
        return family_D_strategy(param, q, i, scenario)
    if kind == "E":
        return family_E_strategy(param, q, i, None, scenario)
    raise BadParameter(f"no constructed strategy for {kind!r}")


# ---------------------------------------------------------------- transforms

def with_node_function(s: Strategy, node: str, fn: Callable) -> Strategy:
    """Copy of ``s`` with one node's function replaced (every round)."""
    if node not in s.net.intermediates:
        raise BadParameter(f"{node!r} is not an intermediate node")
    if isinstance(s.code, BlockCode):
        fns = dict(s.code.functions())
        fns[node] = fn
        code: AnyCode = BlockCode(s.q, s.code.rounds, fns)
    else:
        tables = tuple({**{v: s.code.functions(r)[v] for v in s.code.tables[r]}, node: fn}
                       for r in range(s.code.rounds))
        code = NetworkCode(s.q, tables)
    return replace(s, code=code, name=f"{s.name}[{node} replaced]")


def sabotaged(s: Strategy, node: str = "V2") -> Strategy:
    """``node`` blindly copies its first input to every out-edge."""
    k = s.net.out_degree(node)
    return with_node_function(s, node, lambda ins: (ins[0],) * k)


def relabel(s: Strategy, perm: Sequence[int]) -> Strategy:
    """Apply the symbol permutation ``perm`` to code words, node maps and decoders."""
    perm = tuple(perm)
    if sorted(perm) != list(range(s.q)):
        raise BadParameter("perm must be a permutation of range(q)")
    inv = tuple(perm.index(k) for k in range(s.q))
    block = isinstance(s.code, BlockCode)

    def m(x, p):
        if block and isinstance(x, tuple) and x and isinstance(x[0], tuple):
            return tuple(tuple(p[c] for c in h) for h in x)
        return tuple(p[c] for c in x)

    def conj(f):
        return lambda ins: m(tuple(f(m(tuple(ins), inv))), perm)

    if block:
        code: AnyCode = BlockCode(s.q, s.code.rounds, {v: conj(f) for v, f in s.code.functions().items()})
    else:
        code = NetworkCode(s.q, tuple({v: conj(f) for v, f in s.code.functions(r).items()}
                                      for r in range(s.code.rounds)))

    def lift(dec):
        def d(obs):
            got = dec(tuple(inv[c] for c in obs))
            return None if got is None else tuple(perm[c] for c in got)

        return d

    return replace(
        s,
        code=code,
        words=tuple(tuple(perm[c] for c in w) for w in s.words),
        decoders={T: lift(d) for T, d in s.decoders.items()},
        name=f"{s.name}[relabelled]",
    )


# ---------------------------------------------------------------- verification

@dataclass
class StrategyReport:
    name: str
    q: int
    rounds: int
    size: int
    claimed_size: int
    unambiguous: bool
    decoder_correct: bool
    collision: tuple | None = None
    decoder_failure: tuple | None = None
    observations: int = 0

    @property
    def passed(self) -> bool:
        return self.unambiguous and self.decoder_correct and self.size == self.claimed_size

    @property
    def rate(self) -> float:
        return math.log(self.size, self.q) / self.rounds if self.size else float("-inf")

    @property
    def symbolic(self) -> str:
        return symbolic_rate(self.size, self.q, self.rounds)


def action_count(s: Strategy) -> int:
    """Adversary actions enumerated per code word."""
    U = len(s.adv.vulnerable)
    m = min(s.adv.budget, U)
    sets = math.comb(U, m)
    if s.adv.scenario is Scenario.FIXED or s.rounds == 1:
        return sets * s.q ** (m * s.rounds)
    return (sets * s.q**m) ** s.rounds


def verify_strategy(s: Strategy, max_evaluations: int = 5_000_000) -> StrategyReport:
    """Enumerate every fan-out set, check disjointness and decoding."""
    work = action_count(s) * max(1, len(s.words))
    if work > max_evaluations:
        raise ScaleExceeded(f"{work} network evaluations exceed the limit {max_evaluations}")
    chans = network_channels(s.net, s.code, s.adv)
    collision = find_collision(s.words, chans)
    failure = None
    seen = 0
    for T, ch in chans.items():
        dec = s.decoders[T]
        for w in s.words:
            for y in sorted(ch(w)):
                seen += 1
                got = dec(y)
                if got != w and failure is None:
                    failure = (w, T, y, got)
    return StrategyReport(
        name=s.name, q=s.q, rounds=s.rounds, size=len(s.words), claimed_size=s.claimed_size,
        unambiguous=collision is None, decoder_correct=failure is None,
        collision=collision, decoder_failure=failure, observations=seen,
    )


def structural_signature(s: Strategy) -> tuple:
    """Network, adversary, materialised node maps, code words and decoded observations."""
    from .netcore import describe

    mat = s.code.materialize(s.net)
    chans = network_channels(s.net, s.code, s.adv)
    decoded = tuple(
        (T, tuple((y, s.decoders[T](y)) for w in s.words for y in sorted(ch(w))))
        for T, ch in sorted(chans.items())
    )
    return (repr(describe(s.net, s.adv, s.q)), repr(mat), s.words, s.claimed_size, s.claimed_rate, decoded)
