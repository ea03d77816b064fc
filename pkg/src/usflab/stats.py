"""Component statistics of sampled forests, goodness-of-fit against exact laws,
and finite mass-transport / reversibility identities."""

from __future__ import annotations

import math
from bisect import bisect_right
from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

import scipy.stats

from .errors import NegativeMass, UnsupportedOutcome
from .network import Network, induced_subnetwork
from .rng import as_rng
from .sampler import BoundaryForest, SpanningTree, sample_wusf_truncation

__all__ = [
    "ComponentPartition",
    "EmpiricalDistribution",
    "components",
    "past_set",
    "future_set",
    "boundary_marks",
    "core_vertices",
    "ends_lower_bound",
    "estimate_frequencies",
    "forest_frequencies",
    "hausdorff_counts",
    "spine_profile",
    "mean_log",
    "deepest_vertex",
    "glued_spine_means",
    "glued_spine_gaps",
    "chi_square_gof",
    "mtp_check",
    "reversibility_check",
    "average_degree",
]


@dataclass(frozen=True)
class ComponentPartition:
    label: dict
    members: tuple

    @property
    def count(self) -> int:
        return len(self.members)

    def component_of(self, v: int) -> int:
        return self.label[v]


def _forest_parts(forest, network=None):
    if isinstance(forest, BoundaryForest):
        w = forest.wired.wired_vertex
        net = forest.network
        edges = [i for i in forest.edges if w not in (net.edges[i].u, net.edges[i].v)]
        return net, forest.wired.interior_sorted, edges
    if isinstance(forest, SpanningTree):
        return forest.network, list(range(forest.network.vertex_count)), list(forest.edges)
    if network is None:
        raise ValueError("a bare edge set needs its network")
    return network, list(range(network.vertex_count)), list(forest)


def components(forest, network: Network | None = None) -> ComponentPartition:
    """Connected components; a boundary forest is read without its wired vertex.

    Components are numbered by their smallest vertex.
    """
    net, vertices, edges = _forest_parts(forest, network)
    adj = net.adjacency(edges)
    label: dict = {}
    members = []
    for s in vertices:
        if s in label:
            continue
        cid = len(members)
        label[s] = cid
        comp = [s]
        stack = [s]
        while stack:
            x = stack.pop()
            for y, _ in adj[x]:
                if y not in label:
                    label[y] = cid
                    comp.append(y)
                    stack.append(y)
        members.append(tuple(sorted(comp)))
    return ComponentPartition(label, tuple(members))


def past_set(f: BoundaryForest, v: int) -> set:
    """``v`` together with every vertex whose parent chain passes through ``v``."""
    kids = f.children()
    out = {v}
    stack = [v]
    while stack:
        x = stack.pop()
        for c in kids[x]:
            out.add(c)
            stack.append(c)
    return out


def future_set(f: BoundaryForest, v: int) -> set:
    """Vertices on the parent chain from ``v`` up to (not including) the wired vertex."""
    w = f.wired.wired_vertex
    out = set()
    while v != w:
        out.add(v)
        v = f.parent_vertex(v)
    return out


def boundary_marks(f: BoundaryForest, mode: str = "attached") -> set:
    """``attached``: vertices whose parent is the wired vertex.
    ``touching``: interior vertices with a network edge to the wired vertex."""
    w = f.wired.wired_vertex
    if mode == "attached":
        return {v for v in f.parent if f.parent_vertex(v) == w}
    if mode == "touching":
        return {v for v in f.wired.interior if w in f.network.neighbors(v)}
    raise ValueError(f"unknown mode {mode!r}")


def _component_tree(network: Network, edges, component):
    comp = set(component)
    adj = {v: [] for v in comp}
    for i in edges:
        e = network.edges[i]
        if e.u in comp and e.v in comp and e.u != e.v:
            adj[e.u].append(e.v)
            adj[e.v].append(e.u)
    return adj


def core_vertices(network: Network, edges, component, marks) -> set:
    """Vertices whose removal leaves at least two marked pieces of the component."""
    adj = _component_tree(network, edges, component)
    if not adj:
        return set()
    marks = set(marks) & set(adj)
    root = min(adj)
    parent = {root: None}
    order = [root]
    for x in order:
        for y in adj[x]:
            if y not in parent:
                parent[y] = x
                order.append(y)
    below = {}
    for x in reversed(order):
        below[x] = (x in marks) + sum(below[y] for y in adj[x] if parent.get(y) == x)
    total = below[root]
    core = set()
    for x in order:
        pieces = [below[y] for y in adj[x] if parent.get(y) == x]
        if parent[x] is not None:
            pieces.append(total - below[x])
        if sum(1 for p in pieces if p > 0) >= 2:
            core.add(x)
    return core


def _ball(network: Network, v: int, r: int) -> dict:
    dist = {v: 0}
    queue = deque([v])
    while queue:
        x = queue.popleft()
        if dist[x] == r:
            continue
        for y in network.neighbors(x):
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def ends_lower_bound(network: Network, edges, component, center: int, radius: int, marks) -> int:
    """Marked pieces of the component left after deleting the ball ``B(center, radius)``."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    ball = _ball(network, center, radius)
    adj = _component_tree(network, edges, component)
    marks = set(marks)
    seen = set(ball)
    count = 0
    for s in sorted(adj):
        if s in seen:
            continue
        seen.add(s)
        stack, hit = [s], s in marks
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    hit = hit or y in marks
                    stack.append(y)
        count += hit
    return count


def estimate_frequencies(G: Network, partition: ComponentPartition, start: int, N: int, rng) -> dict:
    """Fraction of the steps ``X_1..X_N`` of a walk from ``start`` spent in each component."""
    if N < 1:
        raise ValueError("N must be >= 1")
    rng = as_rng(rng)
    randbelow = rng.randbelow
    tables = [G.walk_table(v) for v in range(G.vertex_count)]
    label = [partition.label[v] for v in range(G.vertex_count)]
    counts = [0] * partition.count
    v = start
    for _ in range(N):
        cum, total, choices = tables[v]
        v = choices[bisect_right(cum, randbelow(total))][1]
        counts[label[v]] += 1
    return {cid: Fraction(c, N) for cid, c in enumerate(counts)}


def forest_frequencies(forest, N: int, start: int, rng) -> dict:
    """Component frequencies of a tree or boundary forest.

    For a boundary forest the walk runs on the interior with free boundary
    (the network induced on the interior vertices).
    """
    part = components(forest)
    if isinstance(forest, SpanningTree):
        return estimate_frequencies(forest.network, part, start, N, rng)
    sub = induced_subnetwork(forest.network, forest.wired.interior)
    inv = {new: old for old, new in sub.merge_map.items()}
    relabelled = type(part)({new: part.label[old] for new, old in inv.items()}, part.members)
    return estimate_frequencies(sub.network, relabelled, sub.merge_map[start], N, rng)


def hausdorff_counts(G: Network, component, v: int, max_r: int) -> list:
    """``|B_G(v, r) & component|`` for ``r = 0..max_r``."""
    comp = set(component)
    if v not in comp:
        raise ValueError(f"vertex {v} is not in the component")
    dist = _ball(G, v, max_r)
    counts = [0] * (max_r + 1)
    for x, d in dist.items():
        if x in comp:
            counts[d] += 1
    for r in range(1, max_r + 1):
        counts[r] += counts[r - 1]
    return counts


def spine_profile(f: BoundaryForest, v: int) -> list:
    """Conductances along the parent chain from ``v`` to the wired vertex."""
    net, w = f.network, f.wired.wired_vertex
    out = []
    while v != w:
        oe = f.parent[v]
        out.append(net.conductance(oe.edge_id))
        v = oe.head(net)
    return out


def _log(q: Fraction) -> float:
    return math.log(q.numerator) - math.log(q.denominator)


def mean_log(values: Iterable[Fraction]) -> float:
    vals = list(values)
    if not vals:
        return float("nan")
    return sum(_log(Fraction(x)) for x in vals) / len(vals)


def deepest_vertex(f: BoundaryForest, component) -> int:
    """Vertex of the component with the longest parent chain (smallest id on ties)."""
    depth: dict = {f.wired.wired_vertex: 0}

    def d(v):
        chain = []
        while v not in depth:
            chain.append(v)
            v = f.parent_vertex(v)
        base = depth[v]
        for x in reversed(chain):
            base += 1
            depth[x] = base
        return depth[chain[0]] if chain else depth[v]

    return min(component, key=lambda v: (-d(v), v))


def _chain_length(f: BoundaryForest, v: int) -> int:
    w = f.wired.wired_vertex
    steps = 0
    while v != w:
        v = f.parent_vertex(v)
        steps += 1
    return steps


def glued_spine_means(f: BoundaryForest, k1_edges: frozenset, leaves) -> tuple:
    """Mean log-conductance of the two root-side spines of a wired glued canopy.

    Components hang from the wired vertex through an edge on the first tree's
    side (ids in ``k1_edges``) or the second's.  On each side the largest
    such component (smallest top vertex on ties) is taken.  Its spine is read
    from its leaf with the shortest parent chain, i.e. where its ray to the
    wired vertex leaves the shared leaf level; a component without leaves
    uses its deepest vertex.  A side with no component gives ``None``.
    """
    w = f.wired.wired_vertex
    leaves = set(leaves)
    part = components(f)
    best: dict = {}
    for v, oe in f.parent.items():
        if oe.head(f.network) != w:
            continue
        side = 1 if oe.edge_id in k1_edges else 2
        comp = part.members[part.label[v]]
        rank = (len(comp), -v)
        if side not in best or rank > best[side][0]:
            best[side] = (rank, comp)
    out = []
    for side in (1, 2):
        if side not in best:
            out.append(None)
            continue
        comp = best[side][1]
        on_leaves = [v for v in comp if v in leaves]
        if on_leaves:
            start = min(on_leaves, key=lambda v: (_chain_length(f, v), v))
        else:
            start = deepest_vertex(f, comp)
        out.append(mean_log(spine_profile(f, start)))
    return tuple(out)


def glued_spine_gaps(n: int, k1, k2, samples: int, seed: int = 0) -> list:
    """Side-1 minus side-2 spine means over wired glued-canopy samples.

    Sample ``i`` uses substream ``i`` of ``seed``; samples where a side has
    no component contribute ``None``.
    """
    from .generators import glued_canopy_wired

    WG = glued_canopy_wired(n, k1, k2)
    net, w = WG.network, WG.wired_vertex
    top = Fraction(k1) ** (n - 1)
    k1_edges = frozenset(
        i for i, e in enumerate(net.edges) if w in (e.u, e.v) and e.conductance == top
    )
    first_leaf = 2**n - 1
    leaves = [WG.vertex_map[v] for v in range(first_leaf, 2 * first_leaf + 1)]
    rng = as_rng(seed)
    out = []
    for i in range(samples):
        f = sample_wusf_truncation(WG, rng.spawn(i))
        a, b = glued_spine_means(f, k1_edges, leaves)
        out.append(None if a is None or b is None else b - a)
    return out


# -- goodness of fit ---------------------------------------------------------


@dataclass
class EmpiricalDistribution:
    counts: Counter = field(default_factory=Counter)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @classmethod
    def from_samples(cls, samples: Iterable) -> "EmpiricalDistribution":
        c = Counter()
        for s in samples:
            edges = s.edges if hasattr(s, "edges") else s
            c[tuple(sorted(edges))] += 1
        return cls(c)

    def add(self, edges) -> None:
        self.counts[tuple(sorted(edges))] += 1


def chi_square_gof(emp: EmpiricalDistribution, exact) -> tuple:
    """Pearson chi-square of observed counts against an exact law.

    Cells with expectation below 5 are pooled, smallest expectation first.
    """
    probs = exact.probabilities() if hasattr(exact, "probabilities") else dict(exact)
    outside = [k for k in emp.counts if k not in probs]
    if outside:
        raise UnsupportedOutcome(f"outcome {outside[0]} has probability zero")
    N = emp.total
    cells = [(float(p * N), emp.counts.get(k, 0), k) for k, p in probs.items()]
    cells.sort(key=lambda c: (c[0], c[2]))
    while len(cells) > 1 and cells[0][0] < 5:
        (e1, o1, k1), (e2, o2, k2) = cells[0], cells[1]
        cells = cells[2:] + [(e1 + e2, o1 + o2, min(k1, k2))]
        cells.sort(key=lambda c: (c[0], c[2]))
    stat = sum((o - e) ** 2 / e for e, o, _ in cells if e > 0)
    dof = len(cells) - 1
    p = 1.0 if dof == 0 else float(scipy.stats.chi2.sf(stat, dof))
    return stat, p


# -- identities ----------------------------------------------------------------


def mtp_check(G: Network, transport: Callable, vertices=None) -> tuple:
    """Expected mass sent and received by a uniformly chosen root."""
    vs = list(range(G.vertex_count)) if vertices is None else list(vertices)
    table = {}
    for u in vs:
        for v in vs:
            m = transport(G, u, v)
            if m < 0:
                raise NegativeMass(f"transport({u}, {v}) = {m} < 0")
            table[u, v] = m
    n = len(vs)
    sent = sum((sum((table[r, v] for v in vs), 0) for r in vs), 0)
    received = sum((sum((table[u, r] for u in vs), 0) for r in vs), 0)
    if all(isinstance(x, (int, Fraction)) for x in table.values()):
        return Fraction(sent, 1) / n, Fraction(received, 1) / n
    return sent / n, received / n


def reversibility_check(G: Network) -> Fraction:
    """Largest gap between the laws of ``(rho, X_1)`` and ``(X_1, rho)``.

    ``rho`` is drawn proportionally to ``c(rho)``, i.e. from the walk's
    stationary law.
    """
    n = G.vertex_count
    cv = [G.vertex_conductance(v) for v in range(n)]
    C = sum(cv, Fraction(0))
    step = {}
    for u in range(n):
        for v in G.neighbors(u):
            step[u, v] = cv[u] / C * (G.pair_conductance(u, v) / cv[u])
    pairs = set(step) | {(v, u) for u, v in step}
    return max((abs(step.get((u, v), Fraction(0)) - step.get((v, u), Fraction(0))) for u, v in pairs), default=Fraction(0))


def average_degree(network: Network, edges, vertex_set) -> Fraction:
    vs = set(vertex_set)
    if not vs:
        raise ValueError("vertex_set must be nonempty")
    total = 0
    for i in edges:
        e = network.edges[i]
        if e.u == e.v:
            continue
        total += (e.u in vs) + (e.v in vs)
    return Fraction(total, len(vs))
