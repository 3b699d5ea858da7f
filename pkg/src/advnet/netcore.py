"""Network model, validation, cut machinery and the JSON description format.

A network is a finite directed acyclic multigraph with one source and a
nonempty set of terminals.  Edges are totally ordered; the order must be a
linear extension of path precedence, and it fixes the argument order of every
node function.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Any, Iterable, Mapping

import networkx as nx


class AdvnetError(Exception):
    """Base class for all package errors."""


class NetworkError(AdvnetError, ValueError):
    """Invalid network description."""


class ParseError(NetworkError):
    pass


class CyclicGraph(NetworkError):
    pass


class SourceHasInEdges(NetworkError):
    pass


class TerminalHasOutEdges(NetworkError):
    pass


class UnreachableTerminal(NetworkError):
    pass


class DanglingIntermediate(NetworkError):
    pass


class OrderNotLinearExtension(NetworkError):
    pass


class NotATerminal(NetworkError):
    pass


class BadAdversary(NetworkError):
    pass


class CutsNotOrdered(AdvnetError, ValueError):
    """Raised when an operation needs c1 to precede c2 and it does not."""


class BudgetExceeded(AdvnetError):
    """An exhaustive computation would exceed its configured ceiling."""


@dataclass(frozen=True)
class Alphabet:
    size: int

    def __post_init__(self):
        if self.size < 2:
            raise ValueError(f"alphabet size must be >= 2, got {self.size}")

    @property
    def symbols(self) -> range:
        return range(self.size)


class Scenario(str, enum.Enum):
    FIXED = "fixed"  # same attacked edges in every round
    FREE = "free"  # attacked edges re-chosen each round

    @classmethod
    def parse(cls, value: "Scenario | str") -> "Scenario":
        if isinstance(value, Scenario):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParseError(f"scenario must be 'fixed' or 'free', got {value!r}") from None


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str


@dataclass(frozen=True)
class Network:
    """Validated network.  Build through :func:`validate_network`."""

    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    source: str
    terminals: tuple[str, ...]

    @cached_property
    def edge_index(self) -> dict[str, int]:
        return {e.id: k for k, e in enumerate(self.edges)}

    @cached_property
    def edge_ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.edges)

    def edge(self, edge_id: str) -> Edge:
        return self.edges[self.edge_index[edge_id]]

    @cached_property
    def _in(self) -> dict[str, tuple[int, ...]]:
        acc: dict[str, list[int]] = {v: [] for v in self.nodes}
        for k, e in enumerate(self.edges):
            acc[e.head].append(k)
        return {v: tuple(ks) for v, ks in acc.items()}

    @cached_property
    def _out(self) -> dict[str, tuple[int, ...]]:
        acc: dict[str, list[int]] = {v: [] for v in self.nodes}
        for k, e in enumerate(self.edges):
            acc[e.tail].append(k)
        return {v: tuple(ks) for v, ks in acc.items()}

    def in_edges(self, node: str) -> tuple[int, ...]:
        """Indices of the in-edges of ``node``, in edge order."""
        return self._in[node]

    def out_edges(self, node: str) -> tuple[int, ...]:
        return self._out[node]

    def in_degree(self, node: str) -> int:
        return len(self._in[node])

    def out_degree(self, node: str) -> int:
        return len(self._out[node])

    @cached_property
    def intermediates(self) -> tuple[str, ...]:
        """Intermediate nodes in the order in which they can be evaluated."""
        special = {self.source, *self.terminals}
        # A node is ready once its last in-edge has been written; sorting by
        # that index respects the edge order invariant.
        inner = [v for v in self.nodes if v not in special]
        return tuple(sorted(inner, key=lambda v: (max(self._in[v]), self.nodes.index(v))))

    @cached_property
    def graph(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(self.nodes)
        for e in self.edges:
            g.add_edge(e.tail, e.head, key=e.id)
        return g

    @cached_property
    def _reach(self) -> dict[str, frozenset[str]]:
        return {v: frozenset(nx.descendants(self.graph, v)) | {v} for v in self.nodes}

    def reaches(self, u: str, v: str) -> bool:
        """True iff a directed path (possibly empty) runs from node u to node v."""
        return v in self._reach[u]

    def edge_precedes(self, e1: str, e2: str) -> bool:
        """Reflexive path precedence between edges."""
        if e1 == e2:
            return True
        return self.reaches(self.edge(e1).head, self.edge(e2).tail)

    def edges_between(self, u: str, v: str) -> list[str]:
        return [e.id for e in self.edges if e.tail == u and e.head == v]


@dataclass(frozen=True)
class EdgeCut:
    edges: frozenset[str]
    terminal: str

    def sorted_ids(self, net: Network) -> tuple[str, ...]:
        return tuple(sorted(self.edges, key=net.edge_index.__getitem__))


@dataclass(frozen=True)
class AdversaryModel:
    vulnerable: frozenset[str]
    budget: int
    rounds: int = 1
    scenario: Scenario = Scenario.FIXED

    def __post_init__(self):
        object.__setattr__(self, "vulnerable", frozenset(self.vulnerable))
        object.__setattr__(self, "scenario", Scenario.parse(self.scenario))
        if self.budget < 0:
            raise BadAdversary(f"budget must be >= 0, got {self.budget}")
        if self.budget > len(self.vulnerable):
            raise BadAdversary(
                f"budget {self.budget} exceeds the {len(self.vulnerable)} vulnerable edges"
            )
        if self.rounds < 1:
            raise BadAdversary(f"rounds must be >= 1, got {self.rounds}")

    def check_against(self, net: Network) -> "AdversaryModel":
        unknown = sorted(self.vulnerable - set(net.edge_ids))
        if unknown:
            raise BadAdversary(f"vulnerable edges not in network: {unknown}")
        return self

    def with_(self, **changes: Any) -> "AdversaryModel":
        from dataclasses import replace

        return replace(self, **changes)


def validate_network(raw: Mapping[str, Any]) -> Network:
    """Check a parsed description and return a :class:`Network`.

    Only the graph keys are consulted (``nodes``, ``edges``, ``source``,
    ``terminals``); adversary keys are handled by :func:`parse_description`.
    """
    try:
        nodes = tuple(str(v) for v in raw["nodes"])
        edges = tuple(Edge(str(e["id"]), str(e["from"]), str(e["to"])) for e in raw["edges"])
        source = str(raw["source"])
        terminals = tuple(str(v) for v in raw["terminals"])
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed network description: {exc!r}") from None

    if len(set(nodes)) != len(nodes):
        raise ParseError("duplicate node ids")
    ids = [e.id for e in edges]
    if len(set(ids)) != len(ids):
        raise ParseError("duplicate edge ids")
    known = set(nodes)
    for e in edges:
        for end in (e.tail, e.head):
            if end not in known:
                raise ParseError(f"edge {e.id} references unknown node {end!r}")
        if e.tail == e.head:
            raise CyclicGraph(f"edge {e.id} is a self-loop at {e.tail}")
    if source not in known:
        raise ParseError(f"unknown source {source!r}")
    if not terminals:
        raise ParseError("at least one terminal is required")
    for v in terminals:
        if v not in known:
            raise ParseError(f"unknown terminal {v!r}")
    if source in terminals:
        raise ParseError("the source cannot be a terminal")
    if len(set(terminals)) != len(terminals):
        raise ParseError("duplicate terminals")

    g = nx.MultiDiGraph()
    g.add_nodes_from(nodes)
    for e in edges:
        g.add_edge(e.tail, e.head, key=e.id)
    try:
        cycle = nx.find_cycle(g)
    except nx.NetworkXNoCycle:
        cycle = None
    if cycle:
        raise CyclicGraph(f"cycle through {[c[0] for c in cycle]}")

    for e in edges:
        if e.head == source:
            raise SourceHasInEdges(f"edge {e.id} enters the source {source}")
        if e.tail in terminals:
            raise TerminalHasOutEdges(f"edge {e.id} leaves terminal {e.tail}")

    from_source = nx.descendants(g, source) | {source}
    for v in terminals:
        if v not in from_source:
            raise UnreachableTerminal(f"terminal {v} is not reachable from {source}")
    to_terminal: set[str] = set(terminals)
    for v in terminals:
        to_terminal |= nx.ancestors(g, v)
    for v in nodes:
        if v == source or v in terminals:
            continue
        if v not in from_source or v not in to_terminal:
            raise DanglingIntermediate(f"node {v} lies on no source-terminal path")

    # Consecutive edges e=(u,v), e'=(v,w) generate precedence, so checking
    # them is enough for the transitive closure.
    position = {e.id: k for k, e in enumerate(edges)}
    for e in edges:
        for f in edges:
            if e.head == f.tail and position[e.id] > position[f.id]:
                raise OrderNotLinearExtension(
                    f"edge {e.id} precedes {f.id} but is listed after it"
                )
    return Network(nodes, edges, source, terminals)


def parse_description(raw: Mapping[str, Any]) -> tuple[Network, AdversaryModel, Alphabet]:
    """Parse a full description: network, adversary and alphabet."""
    net = validate_network(raw)
    try:
        alphabet = Alphabet(int(raw.get("alphabet_size", 2)))
        adv = AdversaryModel(
            vulnerable=frozenset(str(e) for e in raw.get("vulnerable", [])),
            budget=int(raw.get("t", 0)),
            rounds=int(raw.get("rounds", 1)),
            scenario=Scenario.parse(raw.get("scenario", "fixed")),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, AdvnetError):
            raise
        raise ParseError(str(exc)) from None
    adv.check_against(net)
    return net, adv, alphabet


def load_description(path: str | Path) -> tuple[Network, AdversaryModel, Alphabet]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    return parse_description(raw)


def describe(net: Network, adv: AdversaryModel | None = None, q: int | None = None) -> dict:
    """Inverse of :func:`parse_description`, ready for ``json.dumps``."""
    out: dict[str, Any] = {
        "nodes": list(net.nodes),
        "edges": [{"id": e.id, "from": e.tail, "to": e.head} for e in net.edges],
        "source": net.source,
        "terminals": list(net.terminals),
    }
    if q is not None:
        out["alphabet_size"] = q
    if adv is not None:
        out["vulnerable"] = [e for e in net.edge_ids if e in adv.vulnerable]
        out["t"] = adv.budget
        out["rounds"] = adv.rounds
        out["scenario"] = adv.scenario.value
    return out


def serialize(net: Network, adv: AdversaryModel | None = None, q: int | None = None) -> str:
    return json.dumps(describe(net, adv, q), indent=2)


def build_network(
    edges: Iterable[tuple[str, str, str]],
    source: str = "S",
    terminals: Iterable[str] = ("T",),
    nodes: Iterable[str] | None = None,
) -> Network:
    """Convenience builder from ``(id, tail, head)`` triples."""
    edges = list(edges)
    if nodes is None:
        seen: dict[str, None] = {source: None}
        for _, a, b in edges:
            seen.setdefault(a)
            seen.setdefault(b)
        nodes = list(seen)
    return validate_network(
        {
            "nodes": list(nodes),
            "edges": [{"id": i, "from": a, "to": b} for i, a, b in edges],
            "source": source,
            "terminals": list(terminals),
        }
    )


def _check_terminal(net: Network, terminal: str) -> None:
    if terminal not in net.terminals:
        raise NotATerminal(f"{terminal!r} is not a terminal")


def separates(net: Network, removed: Iterable[str], terminal: str) -> bool:
    """True iff deleting the edges in ``removed`` disconnects source from terminal."""
    gone = set(removed)
    frontier, seen = [net.source], {net.source}
    while frontier:
        v = frontier.pop()
        if v == terminal:
            return False
        for k in net.out_edges(v):
            e = net.edges[k]
            if e.id not in gone and e.head not in seen:
                seen.add(e.head)
                frontier.append(e.head)
    return True


def enumerate_edge_cuts(net: Network, terminal: str) -> list[EdgeCut]:
    """All minimal edge cuts between the source and ``terminal``.

    A minimal cut is exactly the set of relevant edges leaving some node set X
    with S in X, T outside, every node of X reachable from S inside X and every
    node outside X reaching T outside X.  Enumerating such X over the relevant
    nodes is much cheaper than enumerating edge subsets.
    """
    _check_terminal(net, terminal)
    g = net.graph
    upstream = nx.ancestors(g, terminal) | {terminal}
    downstream = nx.descendants(g, net.source) | {net.source}
    relevant_nodes = upstream & downstream
    relevant_edges = [
        e for e in net.edges if e.tail in relevant_nodes and e.head in relevant_nodes
    ]
    inner = [v for v in net.nodes if v in relevant_nodes and v not in (net.source, terminal)]

    found: set[frozenset[str]] = set()
    for r in range(len(inner) + 1):
        for extra in combinations(inner, r):
            side = {net.source, *extra}
            if not _grown_from(side, net.source, relevant_edges, forward=True):
                continue
            rest = relevant_nodes - side
            if not _grown_from(rest, terminal, relevant_edges, forward=False):
                continue
            cut = frozenset(e.id for e in relevant_edges if e.tail in side and e.head not in side)
            found.add(cut)
    cuts = [EdgeCut(c, terminal) for c in found]
    cuts.sort(key=lambda c: sorted(net.edge_index[e] for e in c.edges))
    return cuts


def _grown_from(part: set[str], root: str, edges: list[Edge], forward: bool) -> bool:
    seen, frontier = {root}, [root]
    while frontier:
        v = frontier.pop()
        for e in edges:
            a, b = (e.tail, e.head) if forward else (e.head, e.tail)
            if a == v and b in part and b not in seen:
                seen.add(b)
                frontier.append(b)
    return seen == part


def precedes(net: Network, c1: EdgeCut, c2: EdgeCut) -> bool:
    """Every edge of c2 is reachable from (or equal to) some edge of c1."""
    return all(any(net.edge_precedes(a, b) for a in c1.edges) for b in c2.edges)


def immediate_predecessors(net: Network, e: str, cut: EdgeCut | Iterable[str]) -> set[str]:
    """Edges e' of the cut with e' <= e and no other cut edge between them."""
    members = set(cut.edges if isinstance(cut, EdgeCut) else cut)
    below = [a for a in members if net.edge_precedes(a, e)]
    return {
        a
        for a in below
        if not any(b != a and net.edge_precedes(a, b) and net.edge_precedes(b, e) for b in below)
    }


def cut_value_edges(cut: EdgeCut, vulnerable: frozenset[str]) -> tuple[int, int]:
    """(clean edges, vulnerable edges) of a cut."""
    hit = len(cut.edges & vulnerable)
    return len(cut.edges) - hit, hit


@dataclass(frozen=True)
class Instance:
    """A network paired with its adversary and alphabet."""

    net: Network
    adv: AdversaryModel
    q: int
    label: str = field(default="")
