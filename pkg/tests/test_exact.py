from fractions import Fraction as F

import pytest
from hypothesis import given

from usflab import NullConditioningEvent, OrientedEdge, SelfLoop, TooManyTrees, build_network, minor
from usflab.exact import (
    ExactTreeDistribution,
    bareiss_determinant,
    conditioned_via_minor,
    current_at_tail,
    direction_distribution,
    edge_marginals,
    effective_resistance,
    effective_resistance_numeric,
    enumerate_spanning_trees,
    exact_conditioned_distribution,
    exact_update_pushforward,
    solve_rational,
    spanning_tree_count,
    tree_weight_total,
    unit_current_flow,
    ust_edge_marginal,
)
from strategies import networks


def test_bareiss():
    assert bareiss_determinant([[2, 1], [1, 3]]) == 5
    assert bareiss_determinant([[0, 1], [1, 0]]) == -1
    assert bareiss_determinant([[1, 2], [2, 4]]) == 0
    assert bareiss_determinant([]) == 1


def test_solve_rational():
    x = solve_rational([[F(2), F(1)], [F(1), F(3)]], [F(1), F(2)])
    assert x == [F(1, 5), F(3, 5)]


def test_enumerate_unit_triangle(triangle):
    d = enumerate_spanning_trees(triangle)
    assert len(d) == 3 and d.total_weight == 3
    assert all(w == 1 for _, w in d.trees)


def test_enumerate_weighted_triangle(wtriangle):
    d = enumerate_spanning_trees(wtriangle)
    assert d.total_weight == 11
    assert d.probabilities() == {(0, 1): F(2, 11), (1, 2): F(6, 11), (0, 2): F(3, 11)}


def test_enumerate_parallel():
    d = enumerate_spanning_trees(build_network(2, [(0, 1, 1), (0, 1, 2)]))
    assert sorted(w for _, w in d.trees) == [1, 2]


def test_matrix_tree(wtriangle, fixtures):
    assert tree_weight_total(wtriangle) == 11
    assert tree_weight_total(fixtures["unit_k4"]) == 16
    assert spanning_tree_count(fixtures["unit_k4"]) == 16
    assert tree_weight_total(build_network(2, [(0, 1, 5)])) == 5


def test_too_many_trees(fixtures):
    with pytest.raises(TooManyTrees):
        enumerate_spanning_trees(fixtures["unit_k4"], limit=10)


def test_effective_resistance(wtriangle):
    assert effective_resistance(build_network(2, [(0, 1, 2)]), 0, 1) == F(1, 2)
    assert effective_resistance(wtriangle, 1, 2) == F(4, 11)
    cycle = build_network(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])
    assert effective_resistance(cycle, 0, 1) == F(3, 4)
    assert effective_resistance_numeric(wtriangle, 1, 2) == pytest.approx(4 / 11)


def test_current_single_edge():
    flow = unit_current_flow(build_network(2, [(0, 1, 3)]), OrientedEdge(0))
    assert flow.flow == {0: 1}


def test_current_triangle(triangle):
    flow = unit_current_flow(triangle, OrientedEdge(0))
    assert flow.flow[0] == F(2, 3)
    # edge 1 is 1->2 and edge 2 is 2->0; the detour carries 1/3 from 0 to 2 to 1
    assert flow.flow[1] == F(-1, 3) and flow.flow[2] == F(-1, 3)
    assert flow.net_out(triangle, 0) == 1 and flow.net_out(triangle, 1) == -1
    assert flow.net_out(triangle, 2) == 0


def test_current_parallel():
    G = build_network(2, [(0, 1, 1), (0, 1, 2)])
    flow = unit_current_flow(G, OrientedEdge(1))
    assert flow.flow == {0: F(1, 3), 1: F(2, 3)}


def test_current_self_loop():
    G = build_network(2, [(0, 0, 1), (0, 1, 1)])
    with pytest.raises(SelfLoop):
        unit_current_flow(G, OrientedEdge(0))


def test_marginals(wtriangle, path4):
    assert ust_edge_marginal(wtriangle, 1) == F(8, 11)
    assert edge_marginals(enumerate_spanning_trees(wtriangle))[1] == F(8, 11)
    assert ust_edge_marginal(path4, 1) == 1
    assert ust_edge_marginal(build_network(2, [(0, 1, 1), (0, 1, 1)]), 0) == F(1, 2)


def test_marginal_self_loop():
    G = build_network(2, [(0, 0, 1), (0, 1, 1)])
    with pytest.raises(SelfLoop):
        ust_edge_marginal(G, 0)
    assert ust_edge_marginal(G, 0, lenient=True) == 0


def test_direction_equals_current(fixtures):
    for name, obj in fixtures.items():
        G = getattr(obj, "network", obj)
        for i in range(G.edge_count):
            if G.is_self_loop(i):
                continue
            for fwd in (True, False):
                oe = OrientedEdge(i, fwd)
                assert direction_distribution(G, oe) == current_at_tail(G, oe), (name, oe)


def test_conditioned(triangle):
    d = exact_conditioned_distribution(triangle, require={0})
    assert d.probabilities() == {(0, 1): F(1, 2), (0, 2): F(1, 2)}
    with pytest.raises(NullConditioningEvent):
        exact_conditioned_distribution(triangle, forbid={0, 1})
    point = exact_conditioned_distribution(triangle, require={0, 1})
    assert point.probabilities() == {(0, 1): 1}


def test_markov_weighted(wtriangle):
    for F_, H in [((), ()), ((1,), ()), ((), (1,)), ((0,), (2,))]:
        assert exact_conditioned_distribution(wtriangle, F_, H).same_law(conditioned_via_minor(wtriangle, F_, H))


def test_pushforward(triangle, wtriangle, path4):
    for v in range(3):
        assert exact_update_pushforward(triangle, v).same_law(enumerate_spanning_trees(triangle))
    push = exact_update_pushforward(wtriangle, 0)
    assert push.probabilities() == {(0, 1): F(2, 11), (1, 2): F(6, 11), (0, 2): F(3, 11)}
    assert exact_update_pushforward(path4, 1).probabilities() == {(0, 1, 2): 1}


def test_wired_pushforward(fixtures):
    WG = fixtures["wired_grid_2x2"]
    dist = enumerate_spanning_trees(WG.network)
    for v in WG.interior_sorted:
        assert exact_update_pushforward(WG, v).same_law(dist)


def test_distribution_text_round_trip(wtriangle):
    d = enumerate_spanning_trees(wtriangle)
    assert ExactTreeDistribution.loads(d.dumps()).same_law(d)


@given(networks())
def test_enumeration_matches_matrix_tree(G):
    d = enumerate_spanning_trees(G)
    assert d.total_weight == tree_weight_total(G)
    assert all(G.is_spanning_tree(t) for t, _ in d.trees)
    assert len({t for t, _ in d.trees}) == len(d)


@given(networks(max_vertices=4, max_extra=3))
def test_kirchhoff_property(G):
    marg = edge_marginals(enumerate_spanning_trees(G))
    for i in range(G.edge_count):
        assert ust_edge_marginal(G, i) == marg.get(i, 0)


@given(networks(max_vertices=4, max_extra=3))
def test_stationarity_property(G):
    dist = enumerate_spanning_trees(G)
    for v in range(G.vertex_count):
        assert exact_update_pushforward(G, v).same_law(dist)


@given(networks(max_vertices=4, max_extra=3))
def test_markov_property(G):
    dist = enumerate_spanning_trees(G)
    for i in range(G.edge_count):
        for req, forb in (((i,), ()), ((), (i,))):
            try:
                cond = exact_conditioned_distribution(G, req, forb, dist)
            except NullConditioningEvent:
                continue
            assert cond.same_law(conditioned_via_minor(G, req, forb))
