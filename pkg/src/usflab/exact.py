"""Exact rational oracles for uniform spanning trees.

Everything here is exact: spanning trees are enumerated by
deletion-contraction and Laplacian systems are solved by fraction-free
(Bareiss) elimination.  The one float routine,
:func:`effective_resistance_numeric`, exists for networks far too large to
treat exactly.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .errors import FormatError, NullConditioningEvent, SelfLoop, TooManyTrees
from .network import Network, OrientedEdge, WiredNetwork, minor
from .sampler import BoundaryForest, SpanningTree
from .update import direction, update_free, update_wired

__all__ = [
    "ExactTreeDistribution",
    "CurrentFlow",
    "TREE_LIMIT",
    "bareiss_determinant",
    "solve_rational",
    "laplacian",
    "tree_weight_total",
    "spanning_tree_count",
    "enumerate_spanning_trees",
    "potentials",
    "effective_resistance",
    "effective_resistance_numeric",
    "unit_current_flow",
    "ust_edge_marginal",
    "edge_marginals",
    "direction_distribution",
    "current_at_tail",
    "exact_conditioned_distribution",
    "conditioned_via_minor",
    "exact_update_pushforward",
]

TREE_LIMIT = 10**6


# -- fraction-free linear algebra --------------------------------------------


def bareiss_determinant(matrix: Sequence[Sequence[int]]) -> int:
    """Determinant of an integer matrix by Bareiss elimination."""
    a = [list(map(int, row)) for row in matrix]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - aik * row_k[j]) // prev
        prev = pivot
    return sign * a[n - 1][n - 1]


def _integer_rows(rows: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    out = []
    for row in rows:
        scale = math.lcm(*(Fraction(x).denominator for x in row)) if row else 1
        out.append([int(Fraction(x) * scale) for x in row])
    return out


def solve_rational(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list[Fraction]:
    """Solve a nonsingular rational system exactly.

    Each augmented row is scaled to integers, reduced to upper-triangular
    form by Bareiss steps, then back-substituted in rationals.
    """
    n = len(A)
    m = _integer_rows([list(A[i]) + [b[i]] for i in range(n)])
    prev = 1
    for k in range(n):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    break
            else:
                raise ZeroDivisionError("singular system")
        pivot = m[k][k]
        for i in range(k + 1, n):
            aik = m[i][k]
            row_i, row_k = m[i], m[k]
            for j in range(k + 1, n + 1):
                row_i[j] = (row_i[j] * pivot - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        s = Fraction(m[i][n])
        for j in range(i + 1, n):
            s -= m[i][j] * x[j]
        x[i] = s / m[i][i]
    return x


def laplacian(G: Network) -> list[list[Fraction]]:
    n = G.vertex_count
    L = [[Fraction(0)] * n for _ in range(n)]
    for e in G.edges:
        if e.u == e.v:
            continue
        c = e.conductance
        L[e.u][e.u] += c
        L[e.v][e.v] += c
        L[e.u][e.v] -= c
        L[e.v][e.u] -= c
    return L


def tree_weight_total(G: Network) -> Fraction:
    """Sum over spanning trees of the product of conductances (matrix-tree theorem)."""
    n = G.vertex_count
    if n == 1:
        return Fraction(1)
    L = laplacian(G)
    reduced = [row[1:] for row in L[1:]]
    scale = math.lcm(*(x.denominator for row in reduced for x in row))
    det = bareiss_determinant([[int(x * scale) for x in row] for row in reduced])
    return Fraction(det, scale ** (n - 1))


def spanning_tree_count(G: Network) -> int:
    n = G.vertex_count
    if n == 1:
        return 1
    M = [[0] * n for _ in range(n)]
    for e in G.edges:
        if e.u != e.v:
            M[e.u][e.u] += 1
            M[e.v][e.v] += 1
            M[e.u][e.v] -= 1
            M[e.v][e.u] -= 1
    return bareiss_determinant([row[1:] for row in M[1:]])


# -- enumeration -------------------------------------------------------------


@dataclass(frozen=True)
class ExactTreeDistribution:
    """Spanning trees with their conductance-product weights."""

    trees: tuple
    total_weight: Fraction

    @classmethod
    def from_weights(cls, weights: dict) -> "ExactTreeDistribution":
        trees = tuple(
            (frozenset(k), Fraction(w)) for k, w in sorted(weights.items(), key=lambda kv: sorted(kv[0])) if w
        )
        return cls(trees, sum((w for _, w in trees), Fraction(0)))

    def __len__(self) -> int:
        return len(self.trees)

    def probabilities(self) -> dict:
        """Map ``tuple(sorted(edges))`` to its exact probability."""
        return {tuple(sorted(t)): w / self.total_weight for t, w in self.trees}

    def probability(self, edges: Iterable[int]) -> Fraction:
        return self.probabilities().get(tuple(sorted(edges)), Fraction(0))

    def same_law(self, other: "ExactTreeDistribution") -> bool:
        return self.probabilities() == other.probabilities()

    def dumps(self) -> str:
        lines = []
        for t, w in self.trees:
            ids = " ".join(str(i) for i in sorted(t))
            lines.append(f"t {w.numerator}/{w.denominator} {ids}".rstrip())
        tw = self.total_weight
        lines.append(f"total {tw.numerator}/{tw.denominator}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ExactTreeDistribution":
        trees, total = [], None
        for raw in text.split("\n"):
            parts = raw.split()
            if not parts or parts[0].startswith("#"):
                continue
            try:
                if parts[0] == "t":
                    trees.append((frozenset(int(x) for x in parts[2:]), Fraction(parts[1])))
                elif parts[0] == "total" and len(parts) == 2:
                    total = Fraction(parts[1])
                else:
                    raise FormatError(f"cannot parse {raw!r}")
            except (ValueError, ZeroDivisionError) as exc:
                if isinstance(exc, FormatError):
                    raise
                raise FormatError(f"cannot parse {raw!r}") from exc
        if total is None:
            raise FormatError("missing total line")
        if sum((w for _, w in trees), Fraction(0)) != total:
            raise FormatError("total does not match the listed weights")
        return cls(tuple(trees), total)


class _UndoUnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n
        self.history = []

    def find(self, x):
        while self.parent[x] != x:
            x = self.parent[x]
        return x

    def union(self, ra, rb):
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.history.append(rb)

    def undo(self):
        rb = self.history.pop()
        ra = self.parent[rb]
        self.size[ra] -= self.size[rb]
        self.parent[rb] = rb


def enumerate_spanning_trees(G: Network, limit: int = TREE_LIMIT) -> ExactTreeDistribution:
    """List every spanning tree of ``G`` with its weight.

    Deletion-contraction over edges in id order: each non-loop edge is either
    contracted into the tree or deleted, the latter only when the remaining
    graph stays connected, so every branch ends in a spanning tree.
    """
    count = spanning_tree_count(G)
    if count > limit:
        raise TooManyTrees(f"{count} spanning trees exceeds the limit {limit}")
    n = G.vertex_count
    ids = [i for i, e in enumerate(G.edges) if e.u != e.v]
    ends = [(G.edges[i].u, G.edges[i].v) for i in ids]
    cond = [G.edges[i].conductance for i in ids]
    uf = _UndoUnionFind(n)
    out: list = []
    chosen: list[int] = []

    def connected_from(start: int) -> bool:
        parent = {}

        def find(x):
            x = uf.find(x)
            while parent.get(x, x) != x:
                x = parent[x]
            return x

        comps = len({uf.find(v) for v in range(n)})
        for j in range(start, len(ids)):
            a, b = find(ends[j][0]), find(ends[j][1])
            if a != b:
                parent[a] = b
                comps -= 1
                if comps == 1:
                    return True
        return comps == 1

    def rec(j: int, weight: Fraction):
        if len(chosen) == n - 1:
            out.append((frozenset(chosen), weight))
            return
        ra, rb = uf.find(ends[j][0]), uf.find(ends[j][1])
        if ra == rb:
            rec(j + 1, weight)
            return
        uf.union(ra, rb)
        chosen.append(ids[j])
        rec(j + 1, weight * cond[j])
        chosen.pop()
        uf.undo()
        if connected_from(j + 1):
            rec(j + 1, weight)

    rec(0, Fraction(1))
    out.sort(key=lambda tw: sorted(tw[0]))
    return ExactTreeDistribution(tuple(out), sum((w for _, w in out), Fraction(0)))


# -- electrical quantities ---------------------------------------------------


def potentials(G: Network, source: int, sink: int) -> list[Fraction]:
    """Potentials for a unit current from ``source`` to ``sink``, with ``sink`` at 0."""
    n = G.vertex_count
    L = laplacian(G)
    keep = [v for v in range(n) if v != sink]
    A = [[L[i][j] for j in keep] for i in keep]
    b = [Fraction(int(i == source)) for i in keep]
    sol = solve_rational(A, b)
    phi = [Fraction(0)] * n
    for v, x in zip(keep, sol):
        phi[v] = x
    return phi


def effective_resistance(G: Network, u: int, v: int) -> Fraction:
    if u == v:
        raise ValueError("effective resistance needs distinct vertices")
    return potentials(G, u, v)[u]


def effective_resistance_numeric(G: Network, u: int, v: int) -> float:
    """Double-precision effective resistance via a sparse grounded Laplacian solve."""
    if u == v:
        raise ValueError("effective resistance needs distinct vertices")
    n = G.vertex_count
    rows, cols, vals = [], [], []
    for e in G.edges:
        if e.u == e.v:
            continue
        c = float(e.conductance)
        rows += [e.u, e.v, e.u, e.v]
        cols += [e.u, e.v, e.v, e.u]
        vals += [c, c, -c, -c]
    L = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    keep = np.array([x for x in range(n) if x != v])
    A = L[keep][:, keep].tocsc()
    b = (keep == u).astype(float)
    phi = scipy.sparse.linalg.spsolve(A, b)
    return float(phi[int(np.searchsorted(keep, u))])


@dataclass(frozen=True)
class CurrentFlow:
    """Unit current flow; ``flow[i]`` is signed along edge ``i``'s stored orientation."""

    source: int
    sink: int
    flow: dict
    potential: tuple

    def along(self, network: Network, oe: OrientedEdge) -> Fraction:
        x = self.flow[oe.edge_id]
        return x if oe.forward else -x

    def net_out(self, network: Network, v: int) -> Fraction:
        total = Fraction(0)
        for i, e in enumerate(network.edges):
            if e.u == e.v:
                continue
            if e.u == v:
                total += self.flow[i]
            if e.v == v:
                total -= self.flow[i]
        return total


def unit_current_flow(G: Network, e: OrientedEdge) -> CurrentFlow:
    if G.is_self_loop(e.edge_id):
        raise SelfLoop(f"edge {e.edge_id} is a self-loop")
    a, b = e.tail(G), e.head(G)
    phi = potentials(G, a, b)
    flow = {i: ed.conductance * (phi[ed.u] - phi[ed.v]) for i, ed in enumerate(G.edges)}
    return CurrentFlow(a, b, flow, tuple(phi))


def ust_edge_marginal(G: Network, e, lenient: bool = False) -> Fraction:
    """``P(e in T) = c(e) * R_eff(e-, e+)``."""
    i = e.edge_id if isinstance(e, OrientedEdge) else int(e)
    if G.is_self_loop(i):
        if lenient:
            return Fraction(0)
        raise SelfLoop(f"edge {i} is a self-loop")
    ed = G.edges[i]
    return ed.conductance * effective_resistance(G, ed.u, ed.v)


def edge_marginals(dist: ExactTreeDistribution) -> dict:
    acc: dict = defaultdict(Fraction)
    for t, w in dist.trees:
        for i in t:
            acc[i] += w
    return {i: x / dist.total_weight for i, x in acc.items()}


def direction_distribution(G: Network, e: OrientedEdge, dist: ExactTreeDistribution | None = None) -> dict:
    """Exact law of the direction edge at ``e``'s tail, by enumeration."""
    if G.is_self_loop(e.edge_id):
        raise SelfLoop(f"edge {e.edge_id} is a self-loop")
    if dist is None:
        dist = enumerate_spanning_trees(G)
    tail = e.tail(G)
    acc = {oe: Fraction(0) for oe in G.out_edges(tail) if not G.is_self_loop(oe.edge_id)}
    for t, w in dist.trees:
        acc[direction(SpanningTree(G, t), e)] += w
    return {oe: x / dist.total_weight for oe, x in acc.items()}


def current_at_tail(G: Network, e: OrientedEdge) -> dict:
    """Unit current from ``e``'s tail to its head, on each edge leaving the tail."""
    flow = unit_current_flow(G, e)
    tail = e.tail(G)
    return {oe: flow.along(G, oe) for oe in G.out_edges(tail) if not G.is_self_loop(oe.edge_id)}


# -- conditioning and updates -------------------------------------------------


def exact_conditioned_distribution(G: Network, require=(), forbid=(), dist=None) -> ExactTreeDistribution:
    F, H = frozenset(require), frozenset(forbid)
    if dist is None:
        dist = enumerate_spanning_trees(G)
    kept = tuple((t, w) for t, w in dist.trees if F <= t and not (H & t))
    if not kept:
        raise NullConditioningEvent("no spanning tree contains F and avoids H")
    return ExactTreeDistribution(kept, sum((w for _, w in kept), Fraction(0)))


def conditioned_via_minor(G: Network, require=(), forbid=()) -> ExactTreeDistribution:
    """``F`` plus the uniform spanning tree of ``(G - H)/F``, mapped back to ``G``'s edge ids."""
    F = frozenset(require)
    m = minor(G, forbid, F)
    sub = enumerate_spanning_trees(m.network)
    base = math.prod((G.conductance(i) for i in F), start=Fraction(1))
    trees = tuple((F | {m.edge_map[j] for j in t}, w * base) for t, w in sub.trees)
    trees = tuple(sorted(trees, key=lambda tw: sorted(tw[0])))
    return ExactTreeDistribution(trees, sub.total_weight * base)


def exact_update_pushforward(target: Network | WiredNetwork, v: int) -> ExactTreeDistribution:
    """Exact law of the tree after one random update at ``v``.

    Sums over every (tree, oriented edge at ``v``) pair, weighting the edge
    by ``c(e)/c(v)``.  A :class:`WiredNetwork` uses the wired update.
    """
    wired = target if isinstance(target, WiredNetwork) else None
    net = wired.network if wired else target
    dist = enumerate_spanning_trees(net)
    cv = net.vertex_conductance(v)
    acc: dict = defaultdict(Fraction)
    for t, w in dist.trees:
        state = BoundaryForest.from_edges(wired, t) if wired else SpanningTree(net, t)
        for oe in net.out_edges(v):
            if wired:
                res = update_wired(state, oe, allow_wired=True).result
            else:
                res = update_free(state, oe).result
            acc[res.edges] += w * net.conductance(oe.edge_id) / cv
    return ExactTreeDistribution.from_weights(acc)
