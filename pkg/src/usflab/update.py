"""Cycle-breaking updates of spanning trees and boundary forests.

Inserting an oriented edge ``e`` into a tree closes a cycle; the update
removes the edge of that cycle at ``e``'s tail.  For a tree this is the
first edge of the tree path from tail to head.  For a boundary forest the
removed edge is the same cycle edge when both endpoints share a component,
and otherwise the parent edge of the tail.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .errors import BadParams, SelfLoop, WiredEndpoint
from .network import Network, OrientedEdge, WiredNetwork
from .rng import as_rng
from .sampler import BoundaryForest, SpanningTree, walk_step

__all__ = [
    "UpdateOutcome",
    "NOOP_SELF_LOOP",
    "NOOP_PRESENT",
    "SAME_COMPONENT_CYCLE",
    "CROSS_COMPONENT_PARENT",
    "direction",
    "update_free",
    "update_wired",
    "random_update",
    "update_chain",
    "write_trajectory",
    "UpdateToleranceReport",
    "update_ratio_bound_check",
]

NOOP_SELF_LOOP = "noop_self_loop"
NOOP_PRESENT = "noop_present"
SAME_COMPONENT_CYCLE = "same_component_cycle"
CROSS_COMPONENT_PARENT = "cross_component_parent"


@dataclass(frozen=True)
class UpdateOutcome:
    result: SpanningTree | BoundaryForest
    inserted: OrientedEdge | None
    removed: int | None
    case_tag: str

    @property
    def is_noop(self) -> bool:
        return self.inserted is None


def _first_edge_on_path(network: Network, edges, a: int, b: int) -> OrientedEdge:
    """First edge, oriented away from ``a``, of the path from ``a`` to ``b`` in ``edges``."""
    adj = network.adjacency(edges)
    first: dict[int, OrientedEdge | None] = {a: None}
    queue = deque([a])
    while queue:
        x = queue.popleft()
        for y, i in adj[x]:
            if y in first:
                continue
            first[y] = first[x] if first[x] is not None else OrientedEdge(i, network.edges[i].u == a)
            if y == b:
                return first[y]
            queue.append(y)
    raise ValueError(f"vertices {a} and {b} are not joined by the given edges")


def direction(t: SpanningTree, e: OrientedEdge) -> OrientedEdge:
    """First edge of the tree path from ``e``'s tail to its head."""
    net = t.network
    if net.is_self_loop(e.edge_id):
        raise SelfLoop(f"edge {e.edge_id} is a self-loop")
    return _first_edge_on_path(net, t.edges, e.tail(net), e.head(net))


def update_free(t: SpanningTree, e: OrientedEdge, validate: bool = False) -> UpdateOutcome:
    net = t.network
    if net.is_self_loop(e.edge_id):
        return UpdateOutcome(t, None, None, NOOP_SELF_LOOP)
    if e.edge_id in t.edges:
        return UpdateOutcome(t, None, None, NOOP_PRESENT)
    d = direction(t, e)
    result = SpanningTree(net, (t.edges - {d.edge_id}) | {e.edge_id})
    if validate:
        result.validate()
    return UpdateOutcome(result, e, d.edge_id, SAME_COMPONENT_CYCLE)


def _top(f: BoundaryForest, v: int) -> int:
    """The vertex of ``v``'s component whose parent is the wired vertex."""
    net, w = f.network, f.wired.wired_vertex
    while True:
        up = f.parent[v].head(net)
        if up == w:
            return v
        v = up


def update_wired(
    f: BoundaryForest, e: OrientedEdge, validate: bool = False, allow_wired: bool = False
) -> UpdateOutcome:
    """Wired cycle-breaking update of a boundary forest.

    Edges touching the wired vertex raise :class:`WiredEndpoint` unless
    ``allow_wired`` is set, in which case an edge from ``v`` into the wired
    vertex removes ``v``'s parent edge (the wired vertex lies in no
    component).  Only the parent pointers along the re-rooted path change.
    """
    net, w = f.network, f.wired.wired_vertex
    if net.is_self_loop(e.edge_id):
        return UpdateOutcome(f, None, None, NOOP_SELF_LOOP)
    if e.edge_id in f.edges:
        return UpdateOutcome(f, None, None, NOOP_PRESENT)
    tail, head = e.tail(net), e.head(net)
    if tail == w or (head == w and not allow_wired):
        raise WiredEndpoint(f"edge {e.edge_id} touches the wired vertex")

    if head != w and _top(f, tail) == _top(f, head):
        case = SAME_COMPONENT_CYCLE
        d = _first_edge_on_path(net, f.edges, tail, head)
    else:
        case = CROSS_COMPONENT_PARENT
        d = f.parent[tail]

    parent = dict(f.parent)
    if d.edge_id == f.parent[tail].edge_id:
        parent[tail] = e
    else:
        # d runs from tail down to a child c; the path head -> c flips
        c = d.head(net)
        x = head
        carried = e.reversed()
        while True:
            old = f.parent[x]
            parent[x] = carried
            if x == c:
                break
            carried = old.reversed()
            x = old.head(net)
    result = BoundaryForest(f.wired, (f.edges - {d.edge_id}) | {e.edge_id}, parent)
    if validate:
        result.validate()
    return UpdateOutcome(result, e, d.edge_id, case)


def random_update(state, v: int, rng, validate: bool = False) -> UpdateOutcome:
    """Update at an edge drawn from those leaving ``v``, proportionally to conductance."""
    rng = as_rng(rng)
    if isinstance(state, BoundaryForest):
        if v == state.wired.wired_vertex:
            raise WiredEndpoint("updates are drawn at interior vertices only")
        return update_wired(state, walk_step(state.network, v, rng), validate, allow_wired=True)
    return update_free(state, walk_step(state.network, v, rng), validate)


def update_chain(initial, steps: int, vertex_schedule="uniform", rng=None, validate: bool = False) -> list:
    """Run ``steps`` random updates; the schedule is a vertex, ``"round-robin"`` or ``"uniform"``."""
    if steps < 0:
        raise BadParams("steps must be >= 0")
    rng = as_rng(rng)
    if isinstance(initial, BoundaryForest):
        vertices = initial.wired.interior_sorted
    else:
        vertices = list(range(initial.network.vertex_count))
    if isinstance(vertex_schedule, str):
        if vertex_schedule not in ("uniform", "round-robin"):
            raise BadParams(f"unknown schedule {vertex_schedule!r}")
    elif vertex_schedule not in vertices:
        raise BadParams(f"vertex {vertex_schedule} is not an admissible update vertex")
    state = initial
    out = []
    for i in range(steps):
        if vertex_schedule == "uniform":
            v = rng.choice(vertices)
        elif vertex_schedule == "round-robin":
            v = vertices[i % len(vertices)]
        else:
            v = vertex_schedule
        outcome = random_update(state, v, rng, validate)
        out.append(outcome)
        state = outcome.result
    return out


def _component_count(state) -> int:
    if isinstance(state, BoundaryForest):
        w = state.wired.wired_vertex
        return sum(1 for oe in state.parent.values() if oe.head(state.network) == w)
    return 1


def _fmt_oriented(oe: OrientedEdge | None) -> str:
    if oe is None:
        return ""
    return f"{oe.edge_id}{'+' if oe.forward else '-'}"


def write_trajectory(outcomes: Sequence[UpdateOutcome], fh, header: Sequence[str] = ()) -> None:
    """CSV trajectory log; ``component_count`` counts forest components."""
    for h in header:
        fh.write(f"# {h}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["step", "case_tag", "inserted_edge", "removed_edge", "component_count"])
    for i, o in enumerate(outcomes, 1):
        writer.writerow(
            [i, o.case_tag, _fmt_oriented(o.inserted), "" if o.removed is None else o.removed, _component_count(o.result)]
        )


@dataclass(frozen=True)
class UpdateToleranceReport:
    probability: Fraction
    bound: Fraction
    holds: bool
    empirical_probability: float | None = None
    empirical_bound: float | None = None
    samples: int = 0


def update_ratio_bound_check(
    target: Network | WiredNetwork,
    e: OrientedEdge,
    event: Callable[[frozenset], bool],
    samples: int = 0,
    rng=None,
) -> UpdateToleranceReport:
    """Check ``P(T in A) >= c(e)/c(e-) * P(U(T, e) in A)`` exactly, plus a sampled estimate.

    ``event`` receives the edge set of a tree.  On a wired network the law is
    the wired uniform spanning tree and updates use :func:`update_wired`.
    """
    from .exact import enumerate_spanning_trees
    from .sampler import sample_wusf_truncation, wilson_ust

    wired = target if isinstance(target, WiredNetwork) else None
    net = wired.network if wired else target
    tail = e.tail(net)
    ratio = net.conductance(e.edge_id) / net.vertex_conductance(tail)

    def updated(edges):
        if wired:
            f = BoundaryForest.from_edges(wired, edges)
            return update_wired(f, e, allow_wired=True).result.edges
        return update_free(SpanningTree(net, edges), e).result.edges

    dist = enumerate_spanning_trees(net)
    lhs = sum((wt for t, wt in dist.trees if event(t)), Fraction(0)) / dist.total_weight
    rhs = ratio * sum((wt for t, wt in dist.trees if event(updated(t))), Fraction(0)) / dist.total_weight
    emp_lhs = emp_rhs = None
    if samples > 0:
        rng = as_rng(rng)
        hit = hit_u = 0
        for i in range(samples):
            sub = rng.spawn(i)
            edges = sample_wusf_truncation(wired, sub).edges if wired else wilson_ust(net, 0, None, sub).edges
            hit += bool(event(edges))
            hit_u += bool(event(updated(edges)))
        emp_lhs = hit / samples
        emp_rhs = float(ratio) * hit_u / samples
    return UpdateToleranceReport(lhs, rhs, lhs >= rhs, emp_lhs, emp_rhs, samples)
