"""Channel algebra and exact one-shot capacity by maximum clique search."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Iterable, Mapping, Sequence

from .netcore import AdvnetError
from .transfer import FanOutChannel, LengthMismatch, Word, _flatten


class DomainMismatch(AdvnetError, ValueError):
    pass


class EmptyDomain(AdvnetError, ValueError):
    pass


def _as_list(channels: FanOutChannel | Mapping[str, FanOutChannel] | Sequence[FanOutChannel]) -> list[FanOutChannel]:
    if isinstance(channels, FanOutChannel):
        return [channels]
    if isinstance(channels, Mapping):
        return list(channels.values())
    return list(channels)


def find_collision(words: Iterable[Sequence[int]], channels) -> tuple[Word, Word, str, tuple] | None:
    """First pair of code words sharing an observation, or None."""
    chans = _as_list(channels)
    words = [tuple(w) for w in words]
    for ch in chans:
        seen: dict[tuple, Word] = {}
        for w in words:
            if len(w) != ch.length:
                raise LengthMismatch(f"word length {len(w)} != channel input length {ch.length}")
            for y in sorted(ch(w)):
                other = seen.get(y)
                if other is not None and other != w:
                    return other, w, ch.label, y
                seen[y] = w
    return None


def is_unambiguous(words: Iterable[Sequence[int]], channels) -> bool:
    """True iff distinct code words have disjoint fan-outs on every channel."""
    return find_collision(words, channels) is None


def conflict_masks(words: Sequence[Word], channels) -> list[int]:
    """Bitset per word of the other words it collides with on some channel."""
    masks = [0] * len(words)
    for ch in _as_list(channels):
        by_obs: dict[tuple, int] = {}
        for i, w in enumerate(words):
            bit = 1 << i
            for y in ch(w):
                by_obs[y] = by_obs.get(y, 0) | bit
        for group in by_obs.values():
            if group & (group - 1):
                g = group
                while g:
                    low = g & -g
                    masks[low.bit_length() - 1] |= group
                    g ^= low
    for i in range(len(words)):
        masks[i] &= ~(1 << i)
    return masks


def compatibility_graph(words: Sequence[Word], channels) -> list[int]:
    """Adjacency bitsets: i ~ j iff their fan-outs are disjoint on every channel."""
    full = (1 << len(words)) - 1
    return [full & ~m & ~(1 << i) for i, m in enumerate(conflict_masks(words, channels))]


def _popcount(x: int) -> int:
    return bin(x).count("1")


class _Done(Exception):
    pass


class _CliqueSearch:
    """Branch and bound over bitsets with greedy colouring bounds."""

    def __init__(self, adj: Sequence[int]):
        n = len(adj)
        self.n = n
        # Degeneracy order, most constrained core first.
        deg = [_popcount(a) for a in adj]
        alive = (1 << n) - 1
        removal = []
        for _ in range(n):
            v = min((u for u in range(n) if alive >> u & 1), key=lambda u: (deg[u], u))
            removal.append(v)
            alive &= ~(1 << v)
            a = adj[v] & alive
            while a:
                low = a & -a
                deg[low.bit_length() - 1] -= 1
                a ^= low
        order = removal[::-1]
        self.order = order
        pos = {v: k for k, v in enumerate(order)}
        self.adj = [0] * n
        for v in range(n):
            m = 0
            a = adj[v]
            while a:
                low = a & -a
                m |= 1 << pos[low.bit_length() - 1]
                a ^= low
            self.adj[pos[v]] = m
        self.best: list[int] = []

    def _colour(self, P: int) -> tuple[list[int], list[int]]:
        adj = self.adj
        verts, cols = [], []
        c = 0
        while P:
            c += 1
            Q = P
            while Q:
                low = Q & -Q
                v = low.bit_length() - 1
                Q &= ~adj[v] & ~low
                P &= ~low
                verts.append(v)
                cols.append(c)
        return verts, cols

    def clique_number(self, stop_at: int | None = None) -> int:
        """Clique number; ``stop_at`` (a proven upper bound) ends the search early."""
        if self.n == 0:
            return 0
        self.best = []
        self.stop_at = stop_at
        try:
            self._expand([], (1 << self.n) - 1)
        except _Done:
            pass
        return len(self.best)

    def _expand(self, R: list[int], P: int) -> None:
        verts, cols = self._colour(P)
        for k in range(len(verts) - 1, -1, -1):
            if len(R) + cols[k] <= len(self.best):
                return
            v = verts[k]
            R.append(v)
            NP = P & self.adj[v]
            if NP:
                self._expand(R, NP)
            elif len(R) > len(self.best):
                self.best = R.copy()
                if self.stop_at is not None and len(R) >= self.stop_at:
                    raise _Done
            R.pop()
            P &= ~(1 << v)

    def colour_bound(self, P: int) -> int:
        cols = self._colour(P)[1]
        return cols[-1] if cols else 0


def max_clique(adj: Sequence[int], upper_bound: int | None = None) -> list[int]:
    """Lexicographically least maximum clique (sorted vertex indices).

    A first search finds the clique number; a second, natural-order search
    returns the first clique of that size it meets, which is the least one.
    ``upper_bound`` must be a proven bound on the clique number; reaching it
    ends the first search early.
    """
    n = len(adj)
    if n == 0:
        return []
    search = _CliqueSearch(adj)
    omega = search.clique_number(stop_at=upper_bound)
    pos = {v: k for k, v in enumerate(search.order)}

    def to_search(mask: int) -> int:
        m = 0
        while mask:
            low = mask & -mask
            m |= 1 << pos[low.bit_length() - 1]
            mask ^= low
        return m

    def dfs(R: list[int], P: int) -> list[int] | None:
        if len(R) == omega:
            return R
        if len(R) + _popcount(P) < omega:
            return None
        if len(R) + search.colour_bound(to_search(P)) < omega:
            return None
        while P:
            low = P & -P
            v = low.bit_length() - 1
            P ^= low
            # only higher-indexed vertices may follow v
            found = dfs(R + [v], P & adj[v])
            if found is not None:
                return found
        return None

    found = dfs([], (1 << n) - 1)
    assert found is not None and len(found) == omega
    return found


@dataclass(frozen=True)
class CapacityResult:
    """Largest unambiguous code found, with exact integer size."""

    size: int
    q: int
    rounds: int = 1
    witness: tuple[Word, ...] = ()
    restricted: bool = False
    domain_size: int = 0
    notes: dict = field(default_factory=dict, compare=False)

    @property
    def log_q(self) -> float:
        return math.log(self.size, self.q) if self.size > 0 else float("-inf")

    @property
    def rate(self) -> float:
        return self.log_q / self.rounds

    @property
    def symbolic(self) -> str:
        return symbolic_rate(self.size, self.q, self.rounds)

    @property
    def exact(self) -> bool:
        return not self.restricted


def symbolic_rate(size: int, q: int, rounds: int = 1) -> str:
    s = f"log_{q}({size})"
    return s if rounds == 1 else f"{s}/{rounds}"


def one_shot_capacity(
    channels,
    domain: Iterable[Sequence[int]] | None = None,
    rounds: int = 1,
    upper_bound: int | None = None,
) -> CapacityResult:
    """Exact maximum unambiguous code over ``domain`` (default: every input).

    ``rounds`` only scales the reported rate.  A caller-supplied domain marks
    the result as restricted unless it equals the channel's own domain.
    ``upper_bound``, if given, must be proven; reaching it ends the search.
    """
    chans = _as_list(channels)
    if not chans:
        raise ValueError("need at least one channel")
    ref = chans[0]
    for ch in chans[1:]:
        if ch.length != ref.length or ch.q != ref.q:
            raise DomainMismatch("channels disagree on input space")
    restricted = domain is not None
    words = [tuple(w) for w in (ref.words() if domain is None else domain)]
    if not words:
        raise EmptyDomain("empty candidate domain")
    if restricted and len(words) == ref.domain_size and set(words) == set(ref.words()):
        restricted = False
    adj = compatibility_graph(words, chans)
    clique = max_clique(adj, upper_bound)
    return CapacityResult(
        size=len(clique),
        q=ref.q,
        rounds=rounds,
        witness=tuple(words[k] for k in clique),
        restricted=restricted,
        domain_size=len(words),
    )


def power(ch: FanOutChannel, i: int) -> FanOutChannel:
    """i independent uses: eval(x^1|...|x^i) = eval(x^1) x ... x eval(x^i)."""
    if i < 1:
        raise ValueError("power needs i >= 1")
    if i == 1:
        return ch
    n = ch.length

    def fn(x: Word):
        blocks = [x[r * n:(r + 1) * n] for r in range(i)]
        return {_flatten(c) for c in product(*(ch(b) for b in blocks))}

    domain = None
    if ch._domain is not None:
        domain = [_flatten(c) for c in product(ch._domain, repeat=i)]
    out_len = None if ch.out_length is None else ch.out_length * i
    return FanOutChannel(n * i, ch.q, fn, label=f"({ch.label})^{i}", domain=domain, out_length=out_len)


def concatenate(ch1: FanOutChannel, ch2: FanOutChannel) -> FanOutChannel:
    """Feed every output of ch1 into ch2."""
    out_len = ch1.out_length if ch1.out_length is not None else ch1.length
    if out_len != ch2.length or ch1.q != ch2.q:
        raise DomainMismatch(f"{ch1.label} outputs do not fit {ch2.label} inputs")

    def fn(x: Word):
        acc = set()
        for y in ch1(x):
            if y not in ch2:
                raise DomainMismatch(f"{y} produced by {ch1.label} is outside {ch2.label}'s domain")
            acc |= ch2(y)
        return acc

    return FanOutChannel(
        ch1.length, ch1.q, fn, label=f"{ch1.label}>{ch2.label}",
        domain=ch1._domain, out_length=ch2.out_length,
    )


def is_finer(ch1: FanOutChannel, ch2: FanOutChannel) -> bool:
    """ch1(x) is a subset of ch2(x) for every x of the common domain."""
    if not ch1.same_domain(ch2):
        raise DomainMismatch("channels have different domains")
    return all(ch1(x) <= ch2(x) for x in ch1.words())


def deterministic_channel(fn: Callable[[Word], Sequence[int]], length: int, q: int, out_length: int | None = None,
                          domain: Sequence[Word] | None = None, label: str = "det") -> FanOutChannel:
    return FanOutChannel(length, q, lambda x: {tuple(fn(x))}, label=label, domain=domain,
                         out_length=length if out_length is None else out_length)


def identity_channel(n: int, q: int) -> FanOutChannel:
    return deterministic_channel(lambda x: x, n, q, label="id")


def table_channel(table: Mapping[Word, Iterable[Sequence[int]]], q: int, label: str = "table") -> FanOutChannel:
    """Channel given by an explicit dictionary of fan-out sets."""
    domain = [tuple(w) for w in table]
    lengths = {len(w) for w in domain}
    outs = {len(tuple(y)) for ys in table.values() for y in ys}
    if len(lengths) != 1 or len(outs) > 1:
        raise DomainMismatch("table words must share a length")
    frozen = {tuple(w): frozenset(tuple(y) for y in ys) for w, ys in table.items()}
    return FanOutChannel(lengths.pop(), q, frozen.__getitem__, label=label, domain=domain,
                         out_length=outs.pop() if outs else None)


def is_clique(adj: Sequence[int], vertices: Sequence[int]) -> bool:
    return all(adj[a] >> b & 1 for a, b in combinations(vertices, 2))
