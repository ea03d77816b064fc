"""Random walks, loop-erasure and Wilson's algorithm on finite networks.

Free and wired truncations of an infinite network are sampled exactly as
uniform spanning trees of the finite networks ``G_n`` and ``G_n*``; nothing
here claims to sample an infinite-volume limit.
"""

from __future__ import annotations

import os
from bisect import bisect_right
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import FormatError, InvalidForest, IsolatedVertex, WalkCapExceeded
from .network import Network, OrientedEdge, WiredNetwork
from .rng import RngHandle, as_rng

__all__ = [
    "WalkPath",
    "SpanningTree",
    "BoundaryForest",
    "walk_step",
    "random_walk",
    "loop_erase",
    "loop_erase_by_times",
    "wilson_ust",
    "wilson_deferred",
    "sample_wusf_truncation",
    "sample_fusf_truncation",
    "sample_batch",
    "dumps_forest",
    "loads_forest",
    "STEP_CAP",
]

STEP_CAP = 10**9


@dataclass(frozen=True)
class WalkPath:
    vertices: tuple
    steps: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.vertices:
            raise ValueError("a walk path has at least one vertex")
        if self.steps and len(self.steps) != len(self.vertices) - 1:
            raise ValueError("need exactly one step per move")

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    def is_consistent(self, network: Network) -> bool:
        if len(self.steps) != len(self.vertices) - 1:
            return False
        return all(
            s.tail(network) == a and s.head(network) == b
            for s, a, b in zip(self.steps, self.vertices, self.vertices[1:])
        )

    def is_simple(self) -> bool:
        return len(set(self.vertices)) == len(self.vertices)


@dataclass(frozen=True)
class SpanningTree:
    network: Network
    edges: frozenset

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(self.edges))

    def validate(self) -> "SpanningTree":
        if not self.network.is_spanning_tree(self.edges):
            raise InvalidForest("edge set is not a spanning tree")
        return self

    def key(self) -> tuple:
        return tuple(sorted(self.edges))


@dataclass(frozen=True)
class BoundaryForest:
    """A spanning tree of a wired network, read as a forest on the interior.

    ``parent[v]`` is the tree edge leaving ``v`` toward the wired vertex,
    oriented with tail ``v``.
    """

    wired: WiredNetwork
    edges: frozenset
    parent: dict = field(compare=False)

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(self.edges))

    @property
    def network(self) -> Network:
        return self.wired.network

    @classmethod
    def from_edges(cls, wired: WiredNetwork, edges: Iterable[int]) -> "BoundaryForest":
        """Orient a spanning tree of ``wired.network`` toward the wired vertex."""
        edges = frozenset(edges)
        net = wired.network
        if not net.is_spanning_tree(edges):
            raise InvalidForest("edge set is not a spanning tree of the wired network")
        adj = net.adjacency(sorted(edges))
        parent = {}
        seen = {wired.wired_vertex}
        queue = deque([wired.wired_vertex])
        while queue:
            x = queue.popleft()
            for y, i in adj[x]:
                if y not in seen:
                    seen.add(y)
                    parent[y] = OrientedEdge(i, net.edges[i].u == y)
                    queue.append(y)
        return cls(wired, edges, parent)

    def validate(self) -> "BoundaryForest":
        net = self.network
        w = self.wired.wired_vertex
        if not net.is_spanning_tree(self.edges):
            raise InvalidForest("edges do not form a spanning tree of the wired network")
        if set(self.parent) != set(self.wired.interior):
            raise InvalidForest("every interior vertex needs exactly one parent edge")
        if {oe.edge_id for oe in self.parent.values()} != set(self.edges):
            raise InvalidForest("parent edges differ from the forest edges")
        for v, oe in self.parent.items():
            if oe.tail(net) != v:
                raise InvalidForest(f"parent edge of {v} does not leave {v}")
        state: dict[int, int] = {w: 2}
        for v in self.parent:
            chain = []
            x = v
            while state.get(x) != 2:
                if state.get(x) == 1:
                    raise InvalidForest(f"parent chain from {v} revisits {x}")
                state[x] = 1
                chain.append(x)
                x = self.parent[x].head(net)
            for x in chain:
                state[x] = 2
        return self

    def parent_vertex(self, v: int) -> int:
        return self.parent[v].head(self.network)

    def children(self) -> dict:
        kids: dict[int, list[int]] = {v: [] for v in range(self.network.vertex_count)}
        for v in sorted(self.parent):
            kids[self.parent_vertex(v)].append(v)
        return kids

    def key(self) -> tuple:
        return tuple(sorted(self.edges))


# -- walks -------------------------------------------------------------------


def walk_step(G: Network, v: int, rng) -> OrientedEdge:
    """One step of the conductance-weighted walk from ``v``.

    The edge is chosen with probability ``c(e)/c(v)`` by an exact integer
    draw against integer-scaled cumulative conductances.
    """
    cum, total, choices = G.walk_table(v)
    if total == 0:
        raise IsolatedVertex(f"vertex {v} has no incident edges")
    return choices[bisect_right(cum, as_rng(rng).randbelow(total))][0]


def random_walk(G: Network, start: int, steps: int, rng) -> WalkPath:
    rng = as_rng(rng)
    verts, moves = [start], []
    v = start
    for _ in range(steps):
        cum, total, choices = G.walk_table(v)
        if total == 0:
            raise IsolatedVertex(f"vertex {v} has no incident edges")
        oe, v = choices[bisect_right(cum, rng.randbelow(total))]
        verts.append(v)
        moves.append(oe)
    return WalkPath(verts, moves)


def loop_erase(path: WalkPath) -> WalkPath:
    """Chronological loop-erasure, erasing each cycle as it closes."""
    verts = [path.vertices[0]]
    steps: list = []
    pos = {verts[0]: 0}
    has_steps = bool(path.steps)
    for t, w in enumerate(path.vertices[1:]):
        k = pos.get(w)
        if k is not None:
            for x in verts[k + 1:]:
                del pos[x]
            del verts[k + 1:]
            del steps[k:]
        else:
            pos[w] = len(verts)
            verts.append(w)
            if has_steps:
                steps.append(path.steps[t])
    return WalkPath(verts, steps)


def loop_erase_by_times(path: WalkPath) -> WalkPath:
    """Loop-erasure through the times ``t_0 = 0``, ``t_i = 1 + last visit to gamma[t_{i-1}]``."""
    gamma = path.vertices
    last = {}
    for t, x in enumerate(gamma):
        last[x] = t
    verts, steps = [gamma[0]], []
    t = 0
    while True:
        s = last[gamma[t]]
        if s == len(gamma) - 1:
            break
        t = s + 1
        verts.append(gamma[t])
        if path.steps:
            steps.append(path.steps[s])
    return WalkPath(verts, steps)


# -- Wilson's algorithm ------------------------------------------------------


def _wilson(G: Network, roots: Iterable[int], order: Iterable[int], rng: RngHandle, cap: int):
    n = G.vertex_count
    tables = [G.walk_table(v) for v in range(n)]
    randbelow = rng.randbelow
    in_tree = bytearray(n)
    for r in roots:
        in_tree[r] = 1
    parent: list = [None] * n
    budget = cap
    for s in order:
        if in_tree[s]:
            continue
        verts = [s]
        steps: list = []
        pos = {s: 0}
        v = s
        while not in_tree[v]:
            budget -= 1
            if budget < 0:
                raise WalkCapExceeded(f"random walks exceeded {cap} steps")
            cum, total, choices = tables[v]
            if total == 0:
                raise IsolatedVertex(f"vertex {v} has no incident edges")
            oe, w = choices[bisect_right(cum, randbelow(total))]
            k = pos.get(w)
            if k is not None:
                for x in verts[k + 1:]:
                    del pos[x]
                del verts[k + 1:]
                del steps[k:]
            else:
                if not in_tree[w]:
                    pos[w] = len(verts)
                verts.append(w)
                steps.append(oe)
            v = w
        for x, oe in zip(verts, steps):
            in_tree[x] = 1
            parent[x] = oe
    return parent


def wilson_ust(
    G: Network,
    root: int = 0,
    vertex_order: Sequence[int] | None = None,
    rng=None,
    cap: int = STEP_CAP,
) -> SpanningTree:
    """Sample the weighted uniform spanning tree of ``G`` by Wilson's algorithm.

    Walks start from ``vertex_order`` (default: ascending ids) and stop on
    hitting the current tree, which initially is ``{root}``.
    """
    rng = as_rng(rng)
    if vertex_order is None:
        vertex_order = [v for v in range(G.vertex_count) if v != root]
    parent = _wilson(G, (root,), vertex_order, rng, cap)
    edges = frozenset(oe.edge_id for oe in parent if oe is not None)
    if len(edges) != G.vertex_count - 1:
        raise ValueError("vertex_order must enumerate every non-root vertex")
    return SpanningTree(G, edges)


def wilson_deferred(G: Network, root: int = 0, deferred=(), rng=None, cap: int = STEP_CAP) -> SpanningTree:
    """Wilson's algorithm that starts walks from ``deferred`` vertices last."""
    W = set(deferred)
    if root in W:
        raise ValueError("the root cannot be deferred")
    order = [v for v in range(G.vertex_count) if v != root and v not in W] + sorted(W)
    return wilson_ust(G, root, order, rng, cap)


def sample_wusf_truncation(
    WG: WiredNetwork, rng=None, vertex_order: Sequence[int] | None = None, cap: int = STEP_CAP
) -> BoundaryForest:
    """Uniform spanning tree of the wired network rooted at the wired vertex."""
    rng = as_rng(rng)
    if vertex_order is None:
        vertex_order = WG.interior_sorted
    parent = _wilson(WG.network, (WG.wired_vertex,), vertex_order, rng, cap)
    pmap = {v: oe for v, oe in enumerate(parent) if oe is not None}
    return BoundaryForest(WG, frozenset(oe.edge_id for oe in pmap.values()), pmap)


def sample_fusf_truncation(G_n: Network, rng=None) -> SpanningTree:
    """Uniform spanning tree of a free truncation, rooted at vertex 0."""
    return wilson_ust(G_n, 0, None, rng)


def _run_one(args):
    fn, target, seed, index = args
    return fn(target, RngHandle(seed).spawn(index))


def sample_batch(fn: Callable, target, count: int, seed: int, workers: int | None = None) -> list:
    """Draw ``count`` samples ``fn(target, rng_i)`` with per-index substreams.

    Results do not depend on ``workers``; ``USFLAB_THREADS`` sets the default.
    """
    if workers is None:
        workers = int(os.environ.get("USFLAB_THREADS", "1") or 1)
    if workers <= 1 or count < 2:
        base = RngHandle(seed)
        return [fn(target, base.spawn(i)) for i in range(count)]
    jobs = [(fn, target, seed, i) for i in range(count)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs, chunksize=max(1, count // (4 * workers))))


# -- forest file format ------------------------------------------------------


def dumps_forest(obj: SpanningTree | BoundaryForest, header: Sequence[str] = (), edge_map=None) -> str:
    """``forest <count>``, one ``f <edge_id>`` line per edge, then parent lines.

    ``edge_map`` translates edge ids (e.g. from a subnetwork) on output.
    """
    em = (lambda i: i) if edge_map is None else (lambda i: edge_map[i])
    lines = [f"# {h}" for h in header]
    lines.append(f"forest {len(obj.edges)}")
    lines.extend(f"f {em(i)}" for i in sorted(obj.edges, key=em))
    if isinstance(obj, BoundaryForest):
        for v in sorted(obj.parent):
            oe = obj.parent[v]
            lines.append(f"p {v} {em(oe.edge_id)} {'+' if oe.forward else '-'}")
    return "\n".join(lines) + "\n"


def loads_forest(text: str):
    """Parse a forest file into ``(edge_ids, parent_or_None)``."""
    count = None
    edges: list[int] = []
    parent: dict = {}
    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "forest" and len(parts) == 2:
                count = int(parts[1])
            elif parts[0] == "f" and len(parts) == 2:
                edges.append(int(parts[1]))
            elif parts[0] == "p" and len(parts) == 4 and parts[3] in "+-":
                parent[int(parts[1])] = OrientedEdge(int(parts[2]), parts[3] == "+")
            else:
                raise FormatError(f"line {lineno}: cannot parse {line!r}")
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"line {lineno}: cannot parse {line!r}") from exc
    if count is None:
        raise FormatError("missing 'forest <count>' line")
    if count != len(edges):
        raise FormatError(f"forest declares {count} edges but lists {len(edges)}")
    return edges, (parent or None)
