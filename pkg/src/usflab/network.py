"""Weighted multigraphs with exact rational conductances, and their minors.

A :class:`Network` is immutable once built.  Edge ids are the positions in
``network.edges`` and never change.  Parallel edges and self-loops are kept
as given; the minor operations delete the self-loops they create.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from .errors import (
    BadParams,
    CycleInContractSet,
    DisconnectedNetwork,
    EmptyExterior,
    FormatError,
    InvalidEdge,
    NonpositiveConductance,
)

__all__ = [
    "Edge",
    "OrientedEdge",
    "Network",
    "WiredNetwork",
    "Minor",
    "build_network",
    "induced_subnetwork",
    "wired_contraction",
    "minor",
    "dumps_network",
    "loads_network",
    "read_network",
    "write_network",
]


class Edge(NamedTuple):
    u: int
    v: int
    conductance: Fraction


class OrientedEdge(NamedTuple):
    """An edge id with an orientation; ``forward`` runs from ``u`` to ``v``."""

    edge_id: int
    forward: bool = True

    def reversed(self) -> "OrientedEdge":
        return OrientedEdge(self.edge_id, not self.forward)

    def tail(self, network: "Network") -> int:
        e = network.edges[self.edge_id]
        return e.u if self.forward else e.v

    def head(self, network: "Network") -> int:
        e = network.edges[self.edge_id]
        return e.v if self.forward else e.u


def _as_conductance(c) -> Fraction:
    if isinstance(c, float):
        if not math.isfinite(c):
            raise NonpositiveConductance(f"conductance {c!r} is not finite")
    try:
        q = Fraction(c)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise NonpositiveConductance(f"bad conductance {c!r}") from exc
    if q <= 0:
        raise NonpositiveConductance(f"conductance must be positive, got {q}")
    return q


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra < rb:
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb
        return True


def _is_connected(n: int, pairs: Iterable[tuple[int, int]]) -> bool:
    uf = _UnionFind(n)
    merges = 0
    for u, v in pairs:
        if uf.union(u, v):
            merges += 1
    return merges == n - 1


class Network:
    """A finite connected multigraph with positive rational conductances."""

    __slots__ = ("vertex_count", "edges", "_out", "_walk")

    def __init__(self, vertex_count: int, edges: Sequence[Edge]):
        self.vertex_count = vertex_count
        self.edges = tuple(edges)
        out: list[list[OrientedEdge]] = [[] for _ in range(vertex_count)]
        for i, e in enumerate(self.edges):
            out[e.u].append(OrientedEdge(i, True))
            if e.u != e.v:
                out[e.v].append(OrientedEdge(i, False))
        self._out = tuple(tuple(x) for x in out)
        self._walk = None

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def __repr__(self) -> str:
        return f"Network(vertex_count={self.vertex_count}, edge_count={self.edge_count})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return self.vertex_count == other.vertex_count and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.vertex_count, self.edges))

    def __getstate__(self):
        return (self.vertex_count, self.edges)

    def __setstate__(self, state):
        Network.__init__(self, *state)

    def conductance(self, edge_id: int) -> Fraction:
        return self.edges[edge_id].conductance

    def is_self_loop(self, edge_id: int) -> bool:
        e = self.edges[edge_id]
        return e.u == e.v

    def out_edges(self, v: int) -> tuple[OrientedEdge, ...]:
        """Oriented edges with tail ``v``; a self-loop appears once."""
        return self._out[v]

    def vertex_conductance(self, v: int) -> Fraction:
        return sum((self.edges[oe.edge_id].conductance for oe in self._out[v]), Fraction(0))

    def pair_conductance(self, u: int, v: int) -> Fraction:
        """Total conductance of the edges joining ``u`` and ``v``."""
        total = Fraction(0)
        for oe in self._out[u]:
            if oe.head(self) == v:
                total += self.edges[oe.edge_id].conductance
        return total

    def neighbors(self, v: int) -> list[int]:
        return sorted({oe.head(self) for oe in self._out[v]})

    def degree(self, v: int) -> int:
        return len(self._out[v])

    def walk_table(self, v: int):
        """Integer cumulative weights for exact conductance-proportional draws.

        Returns ``(cumulative, total, choices)`` where ``choices[i]`` is
        ``(oriented_edge, head)`` and ``cumulative`` is strictly increasing.
        """
        if self._walk is None:
            self._walk = [None] * self.vertex_count
        entry = self._walk[v]
        if entry is None:
            outs = self._out[v]
            cs = [self.edges[oe.edge_id].conductance for oe in outs]
            scale = math.lcm(*(c.denominator for c in cs)) if cs else 1
            cum, acc = [], 0
            for c in cs:
                acc += c.numerator * (scale // c.denominator)
                cum.append(acc)
            entry = (cum, acc, tuple((oe, oe.head(self)) for oe in outs))
            self._walk[v] = entry
        return entry

    def is_spanning_tree(self, edge_ids: Iterable[int]) -> bool:
        ids = list(edge_ids)
        if len(ids) != self.vertex_count - 1 or len(set(ids)) != len(ids):
            return False
        uf = _UnionFind(self.vertex_count)
        for i in ids:
            if not 0 <= i < self.edge_count:
                return False
            e = self.edges[i]
            if not uf.union(e.u, e.v):
                return False
        return True

    def adjacency(self, edge_ids: Iterable[int]) -> list[list[tuple[int, int]]]:
        """Adjacency lists ``(neighbor, edge_id)`` of the subgraph on ``edge_ids``."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.vertex_count)]
        for i in edge_ids:
            e = self.edges[i]
            if e.u == e.v:
                continue
            adj[e.u].append((e.v, i))
            adj[e.v].append((e.u, i))
        return adj


def build_network(vertex_count: int, edge_list: Iterable[Sequence]) -> Network:
    """Validate ``(u, v, conductance)`` triples and build a :class:`Network`.

    >>> build_network(3, [(0, 1, 1), (1, 2, 1), (2, 0, 1)])
    Network(vertex_count=3, edge_count=3)
    """
    if int(vertex_count) != vertex_count or vertex_count < 1:
        raise InvalidEdge(f"vertex_count must be a positive integer, got {vertex_count!r}")
    vertex_count = int(vertex_count)
    edges = []
    for rec in edge_list:
        if len(rec) != 3:
            raise InvalidEdge(f"edge record must be (u, v, conductance), got {rec!r}")
        u, v, c = rec
        if int(u) != u or int(v) != v:
            raise InvalidEdge(f"non-integer endpoint in {rec!r}")
        u, v = int(u), int(v)
        if not (0 <= u < vertex_count and 0 <= v < vertex_count):
            raise InvalidEdge(f"endpoint out of range in {rec!r}")
        edges.append(Edge(u, v, _as_conductance(c)))
    if not _is_connected(vertex_count, ((e.u, e.v) for e in edges)):
        raise DisconnectedNetwork("network is not connected")
    return Network(vertex_count, edges)


@dataclass(frozen=True)
class WiredNetwork:
    """A network whose ``wired_vertex`` stands for a contracted exterior.

    ``vertex_map`` sends vertices of the source network to vertices of
    ``network``; ``edge_map[j]`` is the source id of edge ``j``.
    """

    network: Network
    wired_vertex: int
    interior: frozenset = field(default=None)
    vertex_map: dict | None = field(default=None, compare=False, repr=False)
    edge_map: tuple | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        n = self.network.vertex_count
        if not 0 <= self.wired_vertex < n:
            raise InvalidEdge(f"wired vertex {self.wired_vertex} out of range")
        if self.interior is None:
            object.__setattr__(self, "interior", frozenset(range(n)) - {self.wired_vertex})
        else:
            object.__setattr__(self, "interior", frozenset(self.interior))
        if self.wired_vertex in self.interior or len(self.interior) != n - 1:
            raise InvalidEdge("interior must be every vertex except the wired vertex")
        for e in self.network.edges:
            if e.u == e.v == self.wired_vertex:
                raise InvalidEdge("self-loop at the wired vertex")

    @property
    def interior_sorted(self) -> list[int]:
        return sorted(self.interior)


class Minor(NamedTuple):
    """A derived network plus the maps back to its source.

    ``merge_map`` sends each source vertex (that survives) to its quotient
    vertex; ``edge_map[j]`` is the source id of edge ``j``.
    """

    network: Network
    merge_map: dict
    edge_map: tuple


def _check_vertices(G: Network, vertex_set) -> set[int]:
    vs = set(vertex_set)
    for v in vs:
        if not 0 <= v < G.vertex_count:
            raise InvalidEdge(f"vertex {v} out of range")
    return vs


def induced_subnetwork(G: Network, vertex_set) -> Minor:
    """The subnetwork induced by ``vertex_set``, relabelled in ascending order."""
    vs = _check_vertices(G, vertex_set)
    if not vs:
        raise BadParams("vertex_set must be nonempty")
    order = sorted(vs)
    relabel = {v: i for i, v in enumerate(order)}
    edges, emap = [], []
    for i, e in enumerate(G.edges):
        if e.u in vs and e.v in vs:
            edges.append(Edge(relabel[e.u], relabel[e.v], e.conductance))
            emap.append(i)
    if not _is_connected(len(order), ((e.u, e.v) for e in edges)):
        raise DisconnectedNetwork("induced subnetwork is disconnected")
    return Minor(Network(len(order), edges), relabel, tuple(emap))


def wired_contraction(G: Network, vertex_set) -> WiredNetwork:
    """Wire every vertex outside ``vertex_set`` into one vertex.

    Interior vertices are relabelled ``0..k-1`` in ascending order and the
    wired vertex gets id ``k``.  Edges with both endpoints outside are dropped.
    """
    vs = _check_vertices(G, vertex_set)
    if not vs:
        raise BadParams("vertex_set must be nonempty")
    if len(vs) == G.vertex_count:
        raise EmptyExterior("vertex_set covers the whole network; nothing to wire")
    order = sorted(vs)
    k = len(order)
    relabel = {v: i for i, v in enumerate(order)}
    vmap = {v: relabel.get(v, k) for v in range(G.vertex_count)}
    edges, emap = [], []
    for i, e in enumerate(G.edges):
        a, b = vmap[e.u], vmap[e.v]
        if a == b == k:
            continue
        edges.append(Edge(a, b, e.conductance))
        emap.append(i)
    net = Network(k + 1, edges)
    if not _is_connected(k + 1, ((e.u, e.v) for e in edges)):
        raise DisconnectedNetwork("wired network is disconnected")
    return WiredNetwork(net, k, frozenset(range(k)), vmap, tuple(emap))


def minor(G: Network, delete=(), contract=()) -> Minor:
    """Delete the edges in ``delete`` and contract those in ``contract``.

    Quotient vertices are numbered by the smallest source vertex in each
    class.  Self-loops produced by the contraction are removed; self-loops
    already present in ``G`` are kept.
    """
    H, F = set(delete), set(contract)
    for i in H | F:
        if not 0 <= i < G.edge_count:
            raise InvalidEdge(f"edge id {i} out of range")
    if H & F:
        raise InvalidEdge(f"edges {sorted(H & F)} are both deleted and contracted")
    uf = _UnionFind(G.vertex_count)
    for i in sorted(F):
        e = G.edges[i]
        if not uf.union(e.u, e.v):
            raise CycleInContractSet(f"contract set contains a cycle through edge {i}")
    reps = sorted({uf.find(v) for v in range(G.vertex_count)})
    rep_id = {r: j for j, r in enumerate(reps)}
    merge = {v: rep_id[uf.find(v)] for v in range(G.vertex_count)}
    edges, emap = [], []
    for i, e in enumerate(G.edges):
        if i in H or i in F:
            continue
        a, b = merge[e.u], merge[e.v]
        if a == b and e.u != e.v:
            continue
        edges.append(Edge(a, b, e.conductance))
        emap.append(i)
    if not _is_connected(len(reps), ((e.u, e.v) for e in edges)):
        raise DisconnectedNetwork("minor is disconnected")
    return Minor(Network(len(reps), edges), merge, tuple(emap))


# -- text format -------------------------------------------------------------


def dumps_network(obj: Network | WiredNetwork, header: Sequence[str] = ()) -> str:
    """Serialize to the line-based network format.

    ``header`` lines are written first as ``#`` comments.
    """
    if isinstance(obj, WiredNetwork):
        net, wired = obj.network, obj.wired_vertex
    else:
        net, wired = obj, None
    lines = [f"# {h}" for h in header]
    lines.append(f"network {net.vertex_count} {net.edge_count}")
    for i, e in enumerate(net.edges):
        c = e.conductance
        lines.append(f"e {i} {e.u} {e.v} {c.numerator}/{c.denominator}")
    if wired is not None:
        lines.append(f"wired {wired}")
    return "\n".join(lines) + "\n"


def loads_network(text: str) -> Network | WiredNetwork:
    n = m = None
    recs: dict[int, tuple] = {}
    wired = None
    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "network" and len(parts) == 3:
                if n is not None:
                    raise FormatError(f"line {lineno}: duplicate network line")
                n, m = int(parts[1]), int(parts[2])
            elif parts[0] == "e" and len(parts) == 5:
                i = int(parts[1])
                if i in recs:
                    raise FormatError(f"line {lineno}: duplicate edge id {i}")
                recs[i] = (int(parts[2]), int(parts[3]), Fraction(parts[4]))
            elif parts[0] == "wired" and len(parts) == 2:
                wired = int(parts[1])
            else:
                raise FormatError(f"line {lineno}: cannot parse {line!r}")
        except (ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"line {lineno}: cannot parse {line!r}") from exc
    if n is None:
        raise FormatError("missing 'network <n> <m>' line")
    if sorted(recs) != list(range(m)):
        raise FormatError(f"expected edge ids 0..{m - 1}")
    net = build_network(n, [recs[i] for i in range(m)])
    if wired is None:
        return net
    return WiredNetwork(net, wired)


def read_network(path) -> Network | WiredNetwork:
    with open(path, encoding="utf-8") as fh:
        return loads_network(fh.read())


def write_network(obj: Network | WiredNetwork, path, header: Sequence[str] = ()) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_network(obj, header))
