"""Fixture and example networks: grids, tori, canopy trees, regular-tree balls."""

from __future__ import annotations

import itertools
import warnings
from decimal import Decimal, localcontext
from fractions import Fraction

from .errors import BadParams
from .network import Edge, Network, WiredNetwork, build_network, wired_contraction

__all__ = [
    "grid_box",
    "torus",
    "canopy_network",
    "glued_canopy",
    "glued_canopy_wired",
    "tree_ball",
    "boosted_tree",
    "EXP_DIGITS",
]

MAX_VERTICES = 10**7

# significant digits kept when rounding exp(.) to a rational
EXP_DIGITS = 20


def _box_edges(d: int, L: int):
    index = {x: i for i, x in enumerate(itertools.product(range(L), repeat=d))}
    edges = []
    for x, i in index.items():
        for axis in range(d):
            if x[axis] + 1 < L:
                y = x[:axis] + (x[axis] + 1,) + x[axis + 1:]
                edges.append((i, index[y], 1))
    return index, edges


def grid_box(d: int, L: int, wired: bool = False) -> Network | WiredNetwork:
    """The box ``{0..L-1}^d`` with unit nearest-neighbour edges.

    With ``wired=True`` the box is surrounded by a one-vertex-thick layer that
    is contracted to the wired vertex, so boundary cells keep one edge per
    outward direction.
    """
    if d < 1 or L < 2:
        raise BadParams(f"grid_box needs d >= 1 and L >= 2, got d={d}, L={L}")
    if (L + 2) ** d > MAX_VERTICES:
        raise BadParams("grid too large")
    if not wired:
        _, edges = _box_edges(d, L)
        return build_network(L**d, edges)
    index, edges = _box_edges(d, L + 2)
    padded = build_network((L + 2) ** d, edges)
    inner = [i for x, i in index.items() if all(1 <= c <= L for c in x)]
    return wired_contraction(padded, inner)


def torus(d: int, L: int) -> Network:
    if d < 1 or L < 2:
        raise BadParams(f"torus needs d >= 1 and L >= 2, got d={d}, L={L}")
    if L**d > MAX_VERTICES:
        raise BadParams("torus too large")
    index = {x: i for i, x in enumerate(itertools.product(range(L), repeat=d))}
    edges = []
    for x, i in index.items():
        for axis in range(d):
            y = x[:axis] + ((x[axis] + 1) % L,) + x[axis + 1:]
            edges.append((i, index[y], 1))
    return build_network(L**d, edges)


def _canopy_edges(n: int, k: Fraction, ids):
    """Edges of the height-``n`` binary tree in heap order, relabelled by ``ids``."""
    edges = []
    for child in range(1, 2 ** (n + 1) - 1):
        depth = (child + 1).bit_length() - 1
        h = n - depth
        edges.append(Edge(ids((child - 1) // 2), ids(child), k**h))
    return edges


def _check_canopy(n, k) -> Fraction:
    if int(n) != n or n < 1:
        raise BadParams(f"height must be a positive integer, got {n!r}")
    k = Fraction(k)
    if k <= 0:
        raise BadParams(f"base must be positive, got {k}")
    if k <= 2:
        warnings.warn(f"canopy base {k} <= 2 lies outside the sharpness construction", stacklevel=3)
    if 2 ** (n + 2) > MAX_VERTICES:
        raise BadParams("canopy tree too large")
    return k


def canopy_network(n: int, k) -> Network:
    """Binary tree of height ``n`` in heap order (root 0, leaves last).

    The edge above a vertex at distance ``h`` from the leaves has conductance
    ``k**h``.
    """
    k = _check_canopy(n, k)
    return Network(2 ** (n + 1) - 1, _canopy_edges(n, k, lambda i: i))


def glued_canopy(n: int, k1, k2) -> Network:
    """Two canopy trees of height ``n`` sharing their leaves, paired in order.

    The first tree keeps heap ids ``0..2^(n+1)-2``; the second tree's
    internal vertices follow, its root being ``2^(n+1)-1``.
    """
    k1 = _check_canopy(n, k1)
    k2 = _check_canopy(n, k2)
    size = 2 ** (n + 1) - 1
    first_leaf = 2**n - 1
    edges = _canopy_edges(n, k1, lambda i: i)
    edges += _canopy_edges(n, k2, lambda i: i if i >= first_leaf else size + i)
    return Network(size + first_leaf, edges)


def glued_canopy_wired(n: int, k1, k2) -> WiredNetwork:
    """The glued canopy with both roots wired together into one vertex."""
    G = glued_canopy(n, k1, k2)
    roots = {0, 2 ** (n + 1) - 1}
    return wired_contraction(G, [v for v in range(G.vertex_count) if v not in roots])


def _tree_ball_levels(radius: int, degree: int):
    edges, depth = [], [0]
    frontier = [0]
    for r in range(1, radius + 1):
        nxt = []
        for v in frontier:
            for _ in range(degree if v == 0 else degree - 1):
                w = len(depth)
                depth.append(r)
                edges.append((v, w, 1))
                nxt.append(w)
        frontier = nxt
    return depth, edges


def tree_ball(radius: int, degree: int = 3) -> Network:
    """Ball of the given radius around a vertex of the ``degree``-regular tree."""
    if radius < 1 or degree < 2:
        raise BadParams(f"tree_ball needs radius >= 1 and degree >= 2, got {radius}, {degree}")
    if degree * (degree - 1) ** (radius - 1) > MAX_VERTICES:
        raise BadParams("tree ball too large")
    depth, edges = _tree_ball_levels(radius, degree)
    return build_network(len(depth), edges)


def _exp_rational(x: Decimal) -> Fraction:
    with localcontext() as ctx:
        ctx.prec = EXP_DIGITS
        return Fraction(x.exp())


def boosted_tree(radius: int, seed: int = 0, return_forest: bool = False):
    """Ball of the 3-regular tree with conductances boosted along a WUSF sample.

    A wired-truncation WUSF sample is drawn on the ball of radius
    ``radius + 1`` with its outer sphere wired.  Each forest component gets a
    uniform mark ``u``; a forest edge ``e`` gets conductance
    ``exp((1 + u) * s(e))``, ``s(e)`` being the size of the side of ``e``
    away from the wired vertex.  Other edges keep conductance 1.
    ``exp`` is rounded to ``EXP_DIGITS`` significant digits (relative error
    below 1e-19).
    """
    from .rng import RngHandle
    from .sampler import sample_wusf_truncation

    if radius < 1:
        raise BadParams(f"radius must be >= 1, got {radius}")
    big = tree_ball(radius + 1, 3)
    depth, _ = _tree_ball_levels(radius + 1, 3)
    inside = [v for v, r in enumerate(depth) if r <= radius]
    wired = wired_contraction(big, inside)
    rng = RngHandle(seed)
    forest = sample_wusf_truncation(wired, rng.spawn(0))
    net = wired.network
    w = wired.wired_vertex

    # subtree sizes below each interior vertex
    kids = forest.children()
    size: dict[int, int] = {}

    def subtree(v):
        stack, order = [v], []
        while stack:
            x = stack.pop()
            order.append(x)
            stack.extend(kids[x])
        for x in reversed(order):
            size[x] = 1 + sum(size[c] for c in kids[x])

    for top in kids[w]:
        subtree(top)
    marks_rng = rng.spawn(1)
    mark = {top: marks_rng.random() for top in sorted(kids[w])}
    comp_of: dict[int, int] = {}
    for top in sorted(kids[w]):
        stack = [top]
        while stack:
            x = stack.pop()
            comp_of[x] = top
            stack.extend(kids[x])

    edges, forest_ids = [], []
    for j, e in enumerate(net.edges):
        if w in (e.u, e.v):
            continue
        c = Fraction(1)
        if j in forest.edges:
            child = e.u if forest.parent[e.u].edge_id == j else e.v
            u = Decimal(mark[comp_of[child]])
            c = _exp_rational((1 + u) * size[child])
            forest_ids.append(len(edges))
        edges.append(Edge(e.u, e.v, c))
    result = Network(len(inside), edges)
    if return_forest:
        return result, frozenset(forest_ids)
    return result
