import io
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from usflab import (
    BoundaryForest,
    OrientedEdge,
    RngHandle,
    SelfLoop,
    SpanningTree,
    WiredEndpoint,
    WiredNetwork,
    build_network,
    sample_wusf_truncation,
    wilson_ust,
)
from usflab.errors import BadParams
from usflab.exact import enumerate_spanning_trees
from usflab.generators import grid_box
from usflab.stats import EmpiricalDistribution, chi_square_gof
from usflab.update import (
    CROSS_COMPONENT_PARENT,
    NOOP_PRESENT,
    NOOP_SELF_LOOP,
    SAME_COMPONENT_CYCLE,
    direction,
    random_update,
    update_chain,
    update_free,
    update_ratio_bound_check,
    update_wired,
    write_trajectory,
)
from strategies import networks


def test_direction_path(triangle):
    t = SpanningTree(triangle, {0, 1})
    # edge 2 stored as 2->0, so its reversal runs from a=0 to c=2
    assert direction(t, OrientedEdge(2, False)) == OrientedEdge(0, True)


def test_direction_own_edge(triangle):
    assert direction(SpanningTree(triangle, {0, 1}), OrientedEdge(0, True)) == OrientedEdge(0, True)


def test_direction_star():
    G = build_network(3, [(0, 1, 1), (0, 2, 1), (1, 2, 1)])
    assert direction(SpanningTree(G, {0, 1}), OrientedEdge(2, True)) == OrientedEdge(0, False)


def test_direction_self_loop():
    G = build_network(2, [(0, 0, 1), (0, 1, 1)])
    with pytest.raises(SelfLoop):
        direction(SpanningTree(G, {1}), OrientedEdge(0))


def test_update_triangle(triangle):
    out = update_free(SpanningTree(triangle, {0, 1}), OrientedEdge(2, True), validate=True)
    assert out.removed == 1 and out.result.edges == {0, 2}
    assert out.case_tag == SAME_COMPONENT_CYCLE


def test_update_present(triangle):
    t = SpanningTree(triangle, {0, 1})
    out = update_free(t, OrientedEdge(1, False))
    assert out.is_noop and out.case_tag == NOOP_PRESENT and out.result is t


def test_update_four_cycle():
    G = build_network(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])
    out = update_free(SpanningTree(G, {0, 1, 2}), OrientedEdge(3, True))
    assert out.removed == 2 and out.result.edges == {0, 1, 3}


def test_update_self_loop():
    G = build_network(2, [(0, 0, 1), (0, 1, 1)])
    assert update_free(SpanningTree(G, {1}), OrientedEdge(0)).case_tag == NOOP_SELF_LOOP


@pytest.fixture
def two_paths():
    # wired vertex 4; paths 4-0-1 and 4-2-3, plus edge 1-3 joining the tips
    net = build_network(5, [(4, 0, 1), (0, 1, 1), (4, 2, 1), (2, 3, 1), (1, 3, 1)])
    WG = WiredNetwork(net, 4)
    return WG, BoundaryForest.from_edges(WG, {0, 1, 2, 3})


def test_wired_cross_component(two_paths):
    WG, f = two_paths
    out = update_wired(f, OrientedEdge(4, True), validate=True)
    assert out.case_tag == CROSS_COMPONENT_PARENT and out.removed == 1
    assert out.result.edges == {0, 2, 3, 4}
    assert out.result.parent_vertex(1) == 3


def test_wired_same_component():
    net = build_network(4, [(3, 0, 1), (0, 1, 1), (0, 2, 1), (1, 2, 1)])
    WG = WiredNetwork(net, 3)
    f = BoundaryForest.from_edges(WG, {0, 1, 2})
    out = update_wired(f, OrientedEdge(3, True), validate=True)
    assert out.case_tag == SAME_COMPONENT_CYCLE and out.removed == 1
    assert out.result.parent_vertex(1) == 2


def test_wired_flips_chain():
    # wired 4; chain 4-0-1-2 and edge 0-2: inserting 0->2 removes 0->1 and re-roots 1
    net = build_network(5, [(4, 0, 1), (0, 1, 1), (1, 2, 1), (0, 2, 1), (4, 3, 1), (3, 2, 1)])
    WG = WiredNetwork(net, 4)
    f = BoundaryForest.from_edges(WG, {0, 1, 2, 4})
    out = update_wired(f, OrientedEdge(3, True), validate=True)
    assert out.removed == 1
    assert out.result.parent_vertex(2) == 0 and out.result.parent_vertex(1) == 2


def test_wired_present_and_endpoints(two_paths):
    WG, f = two_paths
    assert update_wired(f, OrientedEdge(1, True)).case_tag == NOOP_PRESENT
    with pytest.raises(WiredEndpoint):
        random_update(f, 4, RngHandle(0))


def test_wired_into_boundary(two_paths):
    WG, f = two_paths
    net = build_network(5, list((e.u, e.v, 1) for e in WG.network.edges) + [(3, 4, 1)])
    WG2 = WiredNetwork(net, 4)
    f2 = BoundaryForest.from_edges(WG2, f.edges)
    with pytest.raises(WiredEndpoint):
        update_wired(f2, OrientedEdge(5, True))
    with pytest.raises(WiredEndpoint):
        update_wired(f2, OrientedEdge(5, False), allow_wired=True)
    out = update_wired(f2, OrientedEdge(5, True), validate=True, allow_wired=True)
    assert out.removed == 3 and out.result.parent_vertex(3) == 4


def test_random_update_path(path4):
    t = SpanningTree(path4, {0, 1, 2})
    assert all(random_update(t, v, RngHandle(v)).is_noop for v in range(4))


def test_chain_empty(triangle):
    assert update_chain(SpanningTree(triangle, {0, 1}), 0) == []


def test_chain_bad_schedule(triangle):
    t = SpanningTree(triangle, {0, 1})
    with pytest.raises(BadParams):
        update_chain(t, 3, "sideways")
    with pytest.raises(BadParams):
        update_chain(t, 3, 7)
    with pytest.raises(BadParams):
        update_chain(t, -1)


def test_chain_occupation_triangle(triangle):
    """Occupation of the uniform-schedule chain, read every 10th step."""
    outs = update_chain(SpanningTree(triangle, {0, 1}), 100000, "uniform", RngHandle(12))
    emp = EmpiricalDistribution.from_samples(o.result for o in outs[9::10])
    _, p = chi_square_gof(emp, enumerate_spanning_trees(triangle))
    assert p > 1e-3


def test_chain_schedules(fixtures):
    G = fixtures["unit_k4"]
    t = wilson_ust(G, 0, None, RngHandle(1))
    assert len(update_chain(t, 8, "round-robin", RngHandle(2), validate=True)) == 8
    assert len(update_chain(t, 8, 2, RngHandle(2), validate=True)) == 8


def test_trajectory_csv(fixtures):
    WG = fixtures["wired_grid_2x2"]
    f = sample_wusf_truncation(WG, RngHandle(3))
    outs = update_chain(f, 20, "uniform", RngHandle(4), validate=True)
    buf = io.StringIO()
    write_trajectory(outs, buf, ["seed: 4"])
    lines = buf.getvalue().splitlines()
    assert lines[0] == "# seed: 4"
    assert lines[1] == "step,case_tag,inserted_edge,removed_edge,component_count"
    assert len(lines) == 22


def test_ratio_bound_trivial_events(wtriangle):
    for i in range(3):
        for fwd in (True, False):
            oe = OrientedEdge(i, fwd)
            r = update_ratio_bound_check(wtriangle, oe, lambda t: True)
            assert r.probability == 1 and r.bound == wtriangle.conductance(i) / wtriangle.vertex_conductance(oe.tail(wtriangle))
            assert r.holds
            r = update_ratio_bound_check(wtriangle, oe, lambda t: False)
            assert r.probability == 0 and r.bound == 0 and r.holds


def test_ratio_bound_contains_edge(wtriangle):
    for i in range(3):
        for fwd in (True, False):
            r = update_ratio_bound_check(wtriangle, OrientedEdge(i, fwd), lambda t: 1 in t, samples=2000, rng=RngHandle(1))
            assert r.holds
            assert r.probability == F(8, 11)
            assert r.empirical_probability == pytest.approx(8 / 11, abs=0.05)


def test_ratio_bound_wired(fixtures):
    WG = fixtures["wired_grid_2x2"]
    net = WG.network
    for i in range(net.edge_count):
        for fwd in (True, False):
            oe = OrientedEdge(i, fwd)
            if oe.tail(net) == WG.wired_vertex:
                continue
            assert update_ratio_bound_check(WG, oe, lambda t: 0 in t).holds


@given(networks(loops=True), st.integers(0, 2**32))
def test_free_update_stays_tree(G, seed):
    rng = RngHandle(seed)
    t = wilson_ust(G, 0, None, rng)
    for oe in (o for v in range(G.vertex_count) for o in G.out_edges(v)):
        out = update_free(t, oe, validate=True)
        if not out.is_noop:
            assert oe.edge_id in out.result.edges and out.removed in t.edges
            assert direction(out.result, oe) == oe


@given(st.integers(2, 4), st.integers(0, 2**32))
def test_wired_update_stays_forest(L, seed):
    WG = grid_box(2, L, wired=True)
    f = sample_wusf_truncation(WG, RngHandle(seed))
    for v in WG.interior_sorted:
        for oe in WG.network.out_edges(v):
            update_wired(f, oe, validate=True, allow_wired=True)
