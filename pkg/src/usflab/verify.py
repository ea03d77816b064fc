"""Verification suites run by ``usflab verify``.

Every exact check compares rationals for equality; sampled checks use fixed
seeds and a chi-square threshold of 1e-3.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from fractions import Fraction

from .errors import CycleInContractSet, DisconnectedNetwork, NullConditioningEvent
from .exact import (
    conditioned_via_minor,
    current_at_tail,
    direction_distribution,
    edge_marginals,
    enumerate_spanning_trees,
    exact_conditioned_distribution,
    exact_update_pushforward,
    tree_weight_total,
    ust_edge_marginal,
)
from .network import Network, OrientedEdge, WiredNetwork
from .rng import RngHandle
from .sampler import sample_wusf_truncation, wilson_ust
from .stats import EmpiricalDistribution, chi_square_gof, mtp_check, reversibility_check
from .update import update_ratio_bound_check

P_THRESHOLD = 1e-3


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def _net(target) -> Network:
    return target.network if isinstance(target, WiredNetwork) else target


def _oriented(net: Network):
    for i, e in enumerate(net.edges):
        if e.u != e.v:
            yield OrientedEdge(i, True)
            yield OrientedEdge(i, False)


def suite_oracle(fixtures: dict, samples: int = 20000, seed: int = 0) -> list:
    out = []
    rng = RngHandle(seed)
    for idx, (name, target) in enumerate(sorted(fixtures.items())):
        net = _net(target)
        dist = enumerate_spanning_trees(net)
        total = tree_weight_total(net)
        out.append(Check(f"{name}: matrix-tree total", total == dist.total_weight, f"{total} vs {dist.total_weight}"))
        marg = edge_marginals(dist)
        bad = [i for i in range(net.edge_count) if ust_edge_marginal(net, i, lenient=True) != marg.get(i, 0)]
        out.append(Check(f"{name}: Kirchhoff marginals", not bad, f"mismatched edges {bad}" if bad else ""))
        bad = [oe for oe in _oriented(net) if direction_distribution(net, oe, dist) != current_at_tail(net, oe)]
        out.append(Check(f"{name}: direction = unit current", not bad, f"mismatched {bad[:3]}" if bad else ""))
        if samples > 0:
            sub = rng.spawn(idx)
            emp = EmpiricalDistribution.from_samples(wilson_ust(net, 0, None, sub.spawn(i)) for i in range(samples))
            stat, p = chi_square_gof(emp, dist)
            out.append(Check(f"{name}: Wilson chi-square", p > P_THRESHOLD, f"stat={stat:.3f} p={p:.4g} N={samples}"))
    return out


def suite_update(fixtures: dict) -> list:
    out = []
    for name, target in sorted(fixtures.items()):
        net = _net(target)
        dist = enumerate_spanning_trees(net)
        if isinstance(target, WiredNetwork):
            vertices = target.interior_sorted
        else:
            vertices = range(net.vertex_count)
        bad = [v for v in vertices if not exact_update_pushforward(target, v).same_law(dist)]
        out.append(Check(f"{name}: update stationarity", not bad, f"failing vertices {bad}" if bad else ""))
        failures = 0
        for oe in _oriented(net):
            if isinstance(target, WiredNetwork) and oe.tail(net) == target.wired_vertex:
                continue
            events = [lambda t: True, lambda t: False]
            events += [(lambda i: (lambda t: i in t))(i) for i in range(net.edge_count)]
            for ev in events:
                if not update_ratio_bound_check(target, oe, ev).holds:
                    failures += 1
        out.append(Check(f"{name}: update tolerance", failures == 0, f"{failures} violations"))
    return out


def suite_markov(fixtures: dict) -> list:
    out = []
    for name, target in sorted(fixtures.items()):
        net = _net(target)
        dist = enumerate_spanning_trees(net)
        m = net.edge_count
        checked = mismatched = 0
        for size in range(3):
            for chosen in itertools.combinations(range(m), size):
                for split in range(size + 1):
                    for F in itertools.combinations(chosen, split):
                        H = tuple(i for i in chosen if i not in F)
                        try:
                            cond = exact_conditioned_distribution(net, F, H, dist)
                        except NullConditioningEvent:
                            continue
                        try:
                            via = conditioned_via_minor(net, F, H)
                        except (CycleInContractSet, DisconnectedNetwork):
                            mismatched += 1
                            continue
                        checked += 1
                        mismatched += not cond.same_law(via)
        out.append(Check(f"{name}: spatial Markov", mismatched == 0, f"{checked} events, {mismatched} mismatches"))
    return out


def _adjacent(G, u, v):
    return int(u != v and G.pair_conductance(u, v) > 0)


def _diagonal(G, u, v):
    return int(u == v)


def suite_mtp(fixtures: dict, seed: int = 0) -> list:
    out = []
    rng = RngHandle(seed)
    for idx, (name, target) in enumerate(sorted(fixtures.items())):
        net = _net(target)
        for label, fn in (("adjacency", _adjacent), ("diagonal", _diagonal)):
            s, r = mtp_check(net, fn)
            out.append(Check(f"{name}: mass transport ({label})", s == r, f"sent={s} received={r}"))
        if isinstance(target, WiredNetwork):
            f = sample_wusf_truncation(target, rng.spawn(idx))
            parent_of = {v: f.parent_vertex(v) for v in f.parent}
            s, r = mtp_check(net, lambda G, u, v: int(parent_of.get(u) == v))
            out.append(Check(f"{name}: mass transport (parent)", s == r, f"sent={s} received={r}"))
        gap = reversibility_check(net)
        out.append(Check(f"{name}: reversibility", gap == Fraction(0), f"max gap {gap}"))
    return out


SUITES = ("oracle", "update", "markov", "mtp")


def run_suite(suite: str, fixtures: dict, samples: int = 20000, seed: int = 0) -> list:
    names = SUITES if suite == "all" else (suite,)
    out = []
    for name in names:
        if name == "oracle":
            out += suite_oracle(fixtures, samples, seed)
        elif name == "update":
            out += suite_update(fixtures)
        elif name == "markov":
            out += suite_markov(fixtures)
        elif name == "mtp":
            out += suite_mtp(fixtures, seed)
        else:
            raise ValueError(f"unknown suite {name!r}")
    return out
