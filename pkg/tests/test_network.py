from fractions import Fraction

import pytest
from hypothesis import given

from usflab import (
    CycleInContractSet,
    DisconnectedNetwork,
    EmptyExterior,
    FormatError,
    InvalidEdge,
    NonpositiveConductance,
    OrientedEdge,
    WiredNetwork,
    build_network,
    dumps_network,
    induced_subnetwork,
    loads_network,
    minor,
    read_network,
    wired_contraction,
    write_network,
)
from strategies import networks


def edge_set(net):
    return sorted((min(e.u, e.v), max(e.u, e.v), e.conductance) for e in net.edges)


def test_build_triangle(triangle):
    assert triangle.vertex_count == 3 and triangle.edge_count == 3
    assert all(e.conductance == 1 for e in triangle.edges)


def test_parallel_edges_allowed():
    G = build_network(2, [(0, 1, 1), (0, 1, 2)])
    assert G.pair_conductance(0, 1) == 3
    assert G.vertex_conductance(0) == 3


def test_disconnected_rejected():
    with pytest.raises(DisconnectedNetwork):
        build_network(4, [(0, 1, 1), (2, 3, 1)])


@pytest.mark.parametrize("c", [0, -1, "-1/2"])
def test_nonpositive_conductance(c):
    with pytest.raises(NonpositiveConductance):
        build_network(2, [(0, 1, c)])


def test_bad_vertex():
    with pytest.raises(InvalidEdge):
        build_network(2, [(0, 2, 1)])


def test_fraction_conductances_kept_exact():
    G = build_network(2, [(0, 1, "1/3"), (1, 0, 0.5)])
    assert G.conductance(0) == Fraction(1, 3)
    assert G.conductance(1) == Fraction(1, 2)


def test_oriented_edge_endpoints(wtriangle):
    oe = OrientedEdge(1, True)
    assert (oe.tail(wtriangle), oe.head(wtriangle)) == (1, 2)
    r = oe.reversed()
    assert (r.tail(wtriangle), r.head(wtriangle)) == (2, 1)


def test_self_loop_listed_once():
    G = build_network(2, [(0, 0, 1), (0, 1, 1)])
    assert len(G.out_edges(0)) == 2
    assert G.vertex_conductance(0) == 2


def test_induced_path(path4):
    m = induced_subnetwork(path4, {1, 2})
    assert m.network.vertex_count == 2
    assert edge_set(m.network) == [(0, 1, 1)]
    assert m.merge_map == {1: 0, 2: 1}
    assert m.edge_map == (1,)


def test_induced_identity(triangle):
    assert induced_subnetwork(triangle, {0, 1, 2}).network == triangle


def test_induced_disconnected(path4):
    with pytest.raises(DisconnectedNetwork):
        induced_subnetwork(path4, {0, 2})


def test_wired_path():
    G = build_network(5, [(i, i + 1, 1) for i in range(4)])
    WG = wired_contraction(G, {1, 2, 3})
    # interior 1,2,3 -> 0,1,2 and the wired vertex is 3
    assert WG.wired_vertex == 3
    assert edge_set(WG.network) == [(0, 1, 1), (0, 3, 1), (1, 2, 1), (2, 3, 1)]
    assert WG.vertex_map == {1: 0, 2: 1, 3: 2, 0: 3, 4: 3}


def test_wired_triangle_drops_exterior_edge(triangle):
    WG = wired_contraction(triangle, {0})
    assert WG.network.vertex_count == 2
    assert edge_set(WG.network) == [(0, 1, 1), (0, 1, 1)]


def test_wired_k4(fixtures):
    WG = wired_contraction(fixtures["unit_k4"], {0, 1})
    net = WG.network
    assert net.pair_conductance(0, 1) == 1
    assert net.pair_conductance(0, 2) == 2 and net.pair_conductance(1, 2) == 2
    assert net.edge_count == 5


def test_wired_needs_exterior(triangle):
    with pytest.raises(EmptyExterior):
        wired_contraction(triangle, {0, 1, 2})


def test_minor_delete(triangle):
    m = minor(triangle, delete={0})
    assert edge_set(m.network) == [(0, 2, 1), (1, 2, 1)]


def test_minor_contract(triangle):
    m = minor(triangle, contract={0})
    assert m.network.vertex_count == 2
    assert edge_set(m.network) == [(0, 1, 1), (0, 1, 1)]
    assert m.merge_map == {0: 0, 1: 0, 2: 1}


def test_minor_cycle(triangle):
    with pytest.raises(CycleInContractSet):
        minor(triangle, contract={0, 1, 2})


def test_minor_keeps_original_loops():
    G = build_network(2, [(0, 0, 1), (0, 1, 1), (0, 1, 2)])
    m = minor(G, contract={1})
    assert edge_set(m.network) == [(0, 0, 1)]


def test_minor_disconnects(path4):
    with pytest.raises(DisconnectedNetwork):
        minor(path4, delete={1})


def test_text_round_trip(tmp_path, fixtures):
    for name, obj in fixtures.items():
        p = tmp_path / f"{name}.net"
        write_network(obj, p, ["hello"])
        back = read_network(p)
        assert back == obj if not isinstance(obj, WiredNetwork) else back.network == obj.network
        assert p.read_text().startswith("# hello\n")


def test_text_errors():
    with pytest.raises(FormatError):
        loads_network("e 0 0 1 1/1\n")
    with pytest.raises(FormatError):
        loads_network("network 2 1\ne 0 0 1 x\n")
    with pytest.raises(FormatError):
        loads_network("network 2 2\ne 0 0 1 1\n")


def test_pickle_round_trip(wtriangle):
    import pickle

    G = pickle.loads(pickle.dumps(wtriangle))
    assert G == wtriangle and G.walk_table(0)[1] == wtriangle.walk_table(0)[1]


@given(networks(loops=True))
def test_dumps_loads_property(G):
    assert loads_network(dumps_network(G)) == G


@given(networks())
def test_handshake(G):
    assert sum(G.vertex_conductance(v) for v in range(G.vertex_count)) == 2 * sum(e.conductance for e in G.edges)
